"""Enumeration of Boolean selection matrices with dedup and permutations.

Candidate matrices are built row by row; each row is the indicator
vector of a subset of column indices, subsets drawn in the recursive
powerset order (doubling construction: subsets without a new item
precede subsets containing it) with the empty set removed and sizes
capped by the ``limit`` heuristic. Completed matrices are solved as
extended LP systems; feasible ones are emitted in a deterministic order.
Matrices that are column permutations of an already-emitted one share a
sorted-columns key and are skipped while dedup is on.
"""

import queue
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError, ShapeError
from .linsys import (
    FEAS_TOL,
    LinearSystem,
    SolveOutcome,
    assemble_extended,
    classify_and_solve,
    is_probability_vector,
)
from .lp import LpProblem, LpResult, solve_lp

#: Item cap for powerset enumeration (2^20 subsets).
POWERSET_CAP = 20


@dataclass(frozen=True)
class SearchConfig:
    """Search-space shape: m target rows over n columns.

    ``limit`` caps the subset size per row (defaults to n);
    ``max_solutions`` caps emissions (None = unbounded); ``dedup``
    toggles the sorted-column cache.
    """

    m: int
    n: int
    limit: int | None = None
    max_solutions: int | None = None
    dedup: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if self.m < 0:
            raise DomainError(f"m must be >= 0, got {self.m}")
        limit = self.n if self.limit is None else self.limit
        if not 1 <= limit <= self.n:
            raise DomainError(f"limit must be in [1, {self.n}], got {limit}")
        object.__setattr__(self, "limit", limit)
        if self.max_solutions is not None and self.max_solutions < 1:
            raise DomainError("max_solutions must be >= 1")


@dataclass(frozen=True, eq=False)
class SearchResult:
    """One feasible matrix with both solution routes attached."""

    matrix: np.ndarray
    key: tuple
    outcome: SolveOutcome
    lp_result: LpResult
    system: LinearSystem
    duplicate_of: tuple | None = None


@dataclass
class SearchStats:
    """Mutable counters a caller may pass in to observe the run."""

    leaves: int = 0
    lp_solved: int = 0
    dedup_skips: int = 0
    pruned: int = 0
    emitted: int = 0
    exhausted: bool = False


def powerset(items) -> list[list]:
    """All subsets in the recursive doubling order.

    Subsets not containing an item precede, in order, the same subsets
    with the item appended: [] , [a], [b], [a,b], [c], [a,c], ...
    """
    items = list(items)
    if len(items) > POWERSET_CAP:
        raise CapacityError(
            f"powerset of {len(items)} items exceeds the 2^{POWERSET_CAP} cap"
        )
    subsets: list[list] = [[]]
    for item in items:
        subsets += [s + [item] for s in subsets]
    return subsets


def sorted_columns_key(a) -> tuple:
    """Canonical key: columns sorted lexicographically, first row most significant.

    Two matrices related by a column permutation share a key.
    """
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise ShapeError(f"matrix must be 2-D, got ndim={arr.ndim}")
    cols = [tuple(int(x) for x in arr[:, j]) for j in range(arr.shape[1])]
    return tuple(sorted(cols))


def canonical_matrix(a) -> np.ndarray:
    """The matrix with its columns in sorted (key) order."""
    return np.array(sorted_columns_key(a), dtype=np.int64).T.reshape(
        np.asarray(a).shape
    )


def apply_column_permutation(a, perm) -> np.ndarray:
    """A with columns reordered: result[:, j] = a[:, perm[j]].

    If u solves the system for A, then u[perm] solves it for the
    permuted matrix. Row permutations have no such property: they
    permute b instead.
    """
    arr = np.asarray(a)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(arr.shape[1])):
        raise DomainError(
            f"{perm} is not a permutation of 0..{arr.shape[1] - 1}"
        )
    return arr[:, perm]


def _normalize_targets(b, cfg: SearchConfig) -> np.ndarray:
    """Accept bare targets, targets+normalization, or the fully extended b."""
    vec = np.asarray(b, dtype=np.float64).reshape(-1)
    m = cfg.m
    if vec.size == m:
        targets = vec
    elif vec.size == m + 1:
        if abs(vec[-1] - 1.0) > FEAS_TOL:
            raise DomainError(
                f"normalization entry must be 1, got {vec[-1]}"
            )
        targets = vec[:-1]
    elif vec.size == m + 1 + cfg.n:
        if np.abs(vec[m:] - 1.0).max() > FEAS_TOL:
            raise DomainError("trailing entries of extended b must all be 1")
        targets = vec[:m]
    else:
        raise ShapeError(
            f"b has {vec.size} entries; expected {m}, {m + 1}, or "
            f"{m + 1 + cfg.n}"
        )
    if targets.size and (targets.min() < 0.0 or targets.max() > 1.0):
        raise DomainError("targets must lie in [0, 1]")
    return targets.copy()


class _Cache:
    """Seen-key set with an atomic check-and-insert."""

    def __init__(self):
        self._keys: set = set()
        self._lock = threading.Lock()

    def __contains__(self, key) -> bool:
        with self._lock:
            return key in self._keys

    def add_if_new(self, key) -> bool:
        """Insert and return True when the key was not present."""
        with self._lock:
            if key in self._keys:
                return False
            self._keys.add(key)
            return True


def _partial_feasible(rows: list[list[int]], targets: np.ndarray, n: int) -> bool:
    """Can the filled rows plus normalization still admit a distribution u?

    Sound pruning test: constraints only accumulate as rows are filled,
    so an infeasible prefix can never complete.
    """
    a = np.zeros((len(rows) + 1, n))
    for i, subset in enumerate(rows):
        a[i, subset] = 1.0
    a[-1, :] = 1.0
    rhs = np.concatenate([targets[: len(rows)], [1.0]])
    lp = solve_lp(LpProblem(a_eq=a, b_eq=rhs, c=np.zeros(n)))
    return lp.optimal


def search_solutions(
    b,
    cfg: SearchConfig,
    *,
    objective=None,
    lp_solver=solve_lp,
    algebra_solver=classify_and_solve,
    conflict_groups=None,
    jobs: int = 1,
    prune: bool = True,
    stats: SearchStats | None = None,
    tol: float = FEAS_TOL,
):
    """Yield feasible SearchResults in deterministic enumeration order.

    ``b`` may be the bare targets, targets plus the trailing 1, or the
    fully extended right-hand side. ``conflict_groups`` lists groups of
    row indices whose subsets must stay pairwise disjoint (used for
    stacked rows of multi-valued children). With ``jobs > 1`` the first
    row partitions the work across threads: the same solution set is
    found but emission order is no longer the single-threaded one.

    An exhausted enumeration with no feasible matrix is an empty stream,
    not an error; pass ``stats`` to observe the exhausted flag.
    """
    targets = _normalize_targets(b, cfg)
    if stats is None:
        stats = SearchStats()
    m, n = cfg.m, cfg.n

    group_of: dict[int, int] = {}
    if conflict_groups:
        for g, rows in enumerate(conflict_groups):
            for r in rows:
                if not 0 <= r < m:
                    raise DomainError(f"conflict row {r} out of range")
                group_of[r] = g

    base = [s for s in powerset(range(n)) if s and len(s) <= cfg.limit]
    row_options: list[list[list[int]]] = []
    for i in range(m):
        opts = list(base)
        if targets[i] == 0.0:
            # A zero row is only consistent with a zero target; offer it
            # first, where the removed empty subset would have been.
            opts = [[]] + opts
        row_options.append(opts)

    b_norm = np.concatenate([targets, [1.0]])
    cache = _Cache()
    seen_success = _Cache()
    capacity = cfg.max_solutions if cfg.max_solutions is not None else -1

    def leaf(chosen: list[list[int]]):
        """Solve one completed matrix; return the result to emit or None."""
        stats.leaves += 1
        a = np.zeros((m, n), dtype=np.int64)
        for i, subset in enumerate(chosen):
            a[i, subset] = 1
        key = sorted_columns_key(a)
        if cfg.dedup and key in cache:
            stats.dedup_skips += 1
            return None
        system = assemble_extended(a, b_norm)
        lp = lp_solver(LpProblem(
            a_eq=system.a_ext, b_eq=system.b_ext, c=objective,
        ))
        stats.lp_solved += 1
        if not lp.optimal or not is_probability_vector(lp.x[:n], tol):
            return None
        if cfg.dedup:
            if not cache.add_if_new(key):
                stats.dedup_skips += 1
                return None
            duplicate_of = None
        else:
            duplicate_of = None if seen_success.add_if_new(key) else key
        a.flags.writeable = False
        outcome = algebra_solver(system)
        return SearchResult(
            matrix=a,
            key=key,
            outcome=outcome,
            lp_result=lp,
            system=system,
            duplicate_of=duplicate_of,
        )

    def conflicts(chosen: list[list[int]], level: int, subset: list[int]) -> bool:
        g = group_of.get(level)
        if g is None:
            return False
        taken = set()
        for r, s in enumerate(chosen):
            if group_of.get(r) == g:
                taken.update(s)
        return any(col in taken for col in subset)

    if jobs <= 1 or m == 0:
        emitted = 0

        def walk(level: int, chosen: list[list[int]]):
            nonlocal emitted
            if capacity >= 0 and emitted >= capacity:
                return
            if level == m:
                result = leaf(chosen)
                if result is not None:
                    emitted += 1
                    stats.emitted += 1
                    yield result
                return
            for subset in row_options[level]:
                if capacity >= 0 and emitted >= capacity:
                    return
                if conflicts(chosen, level, subset):
                    continue
                if prune and level < m - 1:
                    if not _partial_feasible(chosen + [subset], targets, n):
                        stats.pruned += 1
                        continue
                yield from walk(level + 1, chosen + [subset])

        yield from walk(0, [])
        stats.exhausted = capacity < 0 or emitted < capacity
        return

    # Multi-worker mode: partition on the first row's subset choice.
    out: queue.Queue = queue.Queue()
    state = {"emitted": 0, "stop": False}
    state_lock = threading.Lock()

    def over_capacity() -> bool:
        with state_lock:
            return state["stop"]

    def try_claim() -> bool:
        with state_lock:
            if state["stop"]:
                return False
            state["emitted"] += 1
            stats.emitted += 1
            if capacity >= 0 and state["emitted"] >= capacity:
                state["stop"] = True
            return True

    def walk_worker(level: int, chosen: list[list[int]]):
        if over_capacity() and level > 0:
            return
        if level == m:
            result = leaf(chosen)
            if result is not None:
                if try_claim():
                    out.put(result)
            return
        for subset in row_options[level]:
            if over_capacity():
                return
            if conflicts(chosen, level, subset):
                continue
            if prune and level < m - 1:
                if not _partial_feasible(chosen + [subset], targets, n):
                    stats.pruned += 1
                    continue
            walk_worker(level + 1, chosen + [subset])

    def worker(first_choices: list[list[int]]):
        try:
            for subset in first_choices:
                if over_capacity():
                    return
                if prune and m > 1:
                    if not _partial_feasible([subset], targets, n):
                        stats.pruned += 1
                        continue
                walk_worker(1, [subset])
        finally:
            out.put(None)

    nworkers = max(1, jobs)
    shards = [row_options[0][w::nworkers] for w in range(nworkers)]
    shards = [s for s in shards if s]
    with ThreadPoolExecutor(max_workers=len(shards)) as pool:
        for shard in shards:
            pool.submit(worker, shard)
        done = 0
        while done < len(shards):
            item = out.get()
            if item is None:
                done += 1
            else:
                yield item
    with state_lock:
        stats.exhausted = not state["stop"]
