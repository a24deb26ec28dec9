"""Compare the numba-jitted kernels against the pure-numpy fallback.

The backend is fixed at import time by ``BN2PSCM_BACKEND``, so each
measurement runs in a child process with the variable set.  Run from the
repository root:

    python3 benchmarks/bench_backends.py [--repeats 3]

Each workload is warmed up once (compilation, caches) and then timed
best-of-``repeats``.
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _random_systems(count, rng):
    import numpy as np

    systems = []
    while len(systems) < count:
        m = int(rng.integers(1, 5))
        n = int(rng.integers(max(2, m), 7))
        a = rng.integers(0, 2, size=(m, n))
        u0 = rng.random(n)
        u0 /= u0.sum()
        systems.append((a, list(a @ u0) + [1.0]))
    return systems


def workload_lp_batch():
    """500 mixed-shape equality LPs solved through the extended system."""
    import numpy as np

    from bn2pscm.linsys import assemble_extended, solve_via_lp

    systems = _random_systems(500, np.random.default_rng(7))

    def run():
        solved = 0
        for a, b in systems:
            _, lp = solve_via_lp(assemble_extended(a, b))
            solved += lp.optimal
        return solved

    return run


def workload_search_grid():
    """Full dedup enumeration (m=2, n=3) over a 11x11 target grid."""
    from bn2pscm.search import SearchConfig, search_solutions

    def run():
        emitted = 0
        for i in range(11):
            for j in range(11):
                cfg = SearchConfig(m=2, n=3)
                emitted += sum(1 for _ in search_solutions([i / 10, j / 10], cfg))
        return emitted

    return run


def workload_transform():
    """Transform 20 random three-node binary networks end to end."""
    import numpy as np

    from bn2pscm.bn import BnModel, Cpt, Variable
    from bn2pscm.transform import transform_bn

    rng = np.random.default_rng(11)
    models = []
    for _ in range(20):
        names = ["a", "b", "c"]
        variables = tuple(Variable(n, ("0", "1")) for n in names)
        parents = {"a": (), "b": ("a",), "c": ("a", "b")}
        cpts = {}
        for n in names:
            rows = rng.random((2 ** len(parents[n]), 2))
            rows /= rows.sum(axis=1, keepdims=True)
            cpts[n] = Cpt.build(n, parents[n],
                                tuple(("0", "1") for _ in parents[n]), rows)
        models.append(BnModel(variables=variables, parents=parents, cpts=cpts))

    def run():
        total = 0
        for bn in models:
            _, report = transform_bn(bn)
            total += len(report.variables)
        return total

    return run


WORKLOADS = {
    "lp_batch": workload_lp_batch,
    "search_grid": workload_search_grid,
    "transform": workload_transform,
}


def child_main(repeats):
    from bn2pscm import _backend, _kernels

    _kernels.warm_up()
    results = {}
    for name, factory in WORKLOADS.items():
        run = factory()
        work = run()  # warm pass, also records the unit count
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            run()
            best = min(best, time.perf_counter() - t0)
        results[name] = {"best_s": best, "work": work}
    print(json.dumps({"backend": _backend.BACKEND, "results": results}))


def parent_main(repeats):
    rows = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, BN2PSCM_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__),
             "--child", "--repeats", str(repeats)],
            env=env, capture_output=True, text=True,
        )
        if proc.returncode != 0:
            print(f"{backend}: failed\n{proc.stderr}", file=sys.stderr)
            continue
        payload = json.loads(proc.stdout.strip().splitlines()[-1])
        rows[backend] = payload["results"]

    print(f"{'workload':<14}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for name in WORKLOADS:
        np_t = rows.get("numpy", {}).get(name, {}).get("best_s")
        nb_t = rows.get("numba", {}).get(name, {}).get("best_s")
        if np_t is None or nb_t is None:
            print(f"{name:<14}{'-':>12}{'-':>12}{'-':>10}")
            continue
        print(f"{name:<14}{np_t:>11.3f}s{nb_t:>11.3f}s{np_t / nb_t:>9.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3,
                        help="timed repetitions per workload (best-of)")
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.child:
        child_main(args.repeats)
    else:
        parent_main(args.repeats)


if __name__ == "__main__":
    main()
