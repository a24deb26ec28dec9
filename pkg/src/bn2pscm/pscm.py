"""Structural causal models with exogenous noise (PSCMs).

An endogenous variable's uncertainty lives entirely in one exogenous
parent: the endogenous CPT is deterministic (one-hot rows) and the
exogenous parent carries an unconditional distribution. Conditionals of
the original network are recovered two algebraically identical ways —
summing the exogenous distribution over inverse images of the structural
function, or marginalizing the deterministic CPT against it — and the
two paths are kept as separate code routes so they can cross-check each
other.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .bn import (
    BnModel,
    Cpt,
    TOL,
    ValidationReport,
    Variable,
    parent_configs,
)
from .errors import (
    ConfigurationError,
    DomainError,
    NotDeterministicError,
    PartitionError,
    ShapeError,
)


@dataclass(frozen=True, eq=False)
class PscmModel:
    """Endogenous variables with deterministic CPTs plus exogenous noise.

    ``exo_attach`` maps each endogenous name to its exogenous parent; the
    exogenous parent appears among that variable's det-CPT parents.
    """

    endogenous: tuple[Variable, ...]
    exogenous: tuple[Variable, ...]
    exo_dists: dict[str, np.ndarray]
    det_cpts: dict[str, Cpt]
    exo_attach: dict[str, str]

    def __post_init__(self):
        object.__setattr__(self, "endogenous", tuple(self.endogenous))
        object.__setattr__(self, "exogenous", tuple(self.exogenous))
        dists = {}
        for name, d in self.exo_dists.items():
            arr = np.array(d, dtype=np.float64).reshape(-1)
            arr.flags.writeable = False
            dists[name] = arr
        object.__setattr__(self, "exo_dists", dists)
        object.__setattr__(self, "exo_attach", dict(self.exo_attach))
        object.__setattr__(
            self, "_by_name",
            {v.name: v for v in self.endogenous + self.exogenous},
        )

    def variable(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise DomainError(f"unknown variable {name!r}") from None

    def domain(self, name: str) -> tuple[str, ...]:
        return self.variable(name).domain

    def underline_parents(self, v: str) -> tuple[str, ...]:
        """Parents of v with its exogenous parent removed."""
        exo = self.exo_attach.get(v)
        return tuple(p for p in self.det_cpts[v].parents if p != exo)


@dataclass(frozen=True, eq=False)
class StructuralFunction:
    """Deterministic mapping (endogenous-parent config, exo value) → child value.

    ``values[i, j]`` is the child-domain index assigned to the i-th
    endogenous-parent config (row-major) and j-th exogenous value.
    ``exo_index`` remembers where the exogenous parent sat in the
    original CPT's parent order so the inverse conversion is exact.
    """

    child: str
    child_domain: tuple[str, ...]
    parent_names: tuple[str, ...]
    parent_domains: tuple[tuple[str, ...], ...]
    exo_name: str
    exo_domain: tuple[str, ...]
    exo_index: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(
            self, "_config_index",
            {c: i for i, c in enumerate(parent_configs(self.parent_domains))},
        )

    def __call__(self, config, u: str) -> str:
        i = self._config_index[tuple(config)]
        j = self.exo_domain.index(u)
        return self.child_domain[self.values[i, j]]

    @property
    def configs(self) -> tuple[tuple[str, ...], ...]:
        return parent_configs(self.parent_domains)

    def is_surjective(self) -> bool:
        """True iff every child value is hit by at least one input pair."""
        return len(np.unique(self.values)) == len(self.child_domain)


def _one_hot_index(row: np.ndarray, where: str, tol: float = TOL) -> int:
    """Index of the single 1 in a one-hot row; raises otherwise."""
    near_one = np.abs(row - 1.0) <= tol
    near_zero = np.abs(row) <= tol
    if near_one.sum() != 1 or not np.all(near_one | near_zero):
        raise NotDeterministicError(f"{where}: row {row.tolist()} is not one-hot")
    return int(np.argmax(near_one))


def function_from_det_cpt(
    cpt: Cpt,
    domains,
    exo_parent: str | None = None,
    child_domain=None,
) -> StructuralFunction:
    """Convert a deterministic CPT into its structural function.

    ``domains`` maps names to ordered domains and must cover the child
    and every parent. The exogenous parent defaults to the last parent.
    """
    domains = dict(domains)
    if child_domain is None:
        child_domain = domains[cpt.child]
    child_domain = tuple(child_domain)
    if not cpt.parents:
        raise ShapeError(f"cpt {cpt.child}: no parents, none can be exogenous")
    if exo_parent is None:
        exo_parent = cpt.parents[-1]
    if exo_parent not in cpt.parents:
        raise ShapeError(
            f"cpt {cpt.child}: {exo_parent!r} is not one of its parents"
        )
    exo_index = cpt.parents.index(exo_parent)
    exo_domain = tuple(domains[exo_parent])
    names = tuple(p for p in cpt.parents if p != exo_parent)
    pdomains = tuple(tuple(domains[p]) for p in names)

    n_cfg = int(np.prod([len(d) for d in pdomains])) if pdomains else 1
    values = np.empty((n_cfg, len(exo_domain)), dtype=np.int64)
    for i, cfg in enumerate(parent_configs(pdomains)):
        for j, u in enumerate(exo_domain):
            full = list(cfg)
            full.insert(exo_index, u)
            row = cpt.row_for(tuple(full))
            values[i, j] = _one_hot_index(row, f"cpt {cpt.child} {tuple(full)}")
    return StructuralFunction(
        child=cpt.child,
        child_domain=child_domain,
        parent_names=names,
        parent_domains=pdomains,
        exo_name=exo_parent,
        exo_domain=exo_domain,
        exo_index=exo_index,
        values=values,
    )


def det_cpt_from_function(f: StructuralFunction) -> Cpt:
    """Inverse conversion; reproduces the original deterministic CPT."""
    full_parents = list(f.parent_names)
    full_parents.insert(f.exo_index, f.exo_name)
    full_domains = list(f.parent_domains)
    full_domains.insert(f.exo_index, f.exo_domain)
    rows = []
    for full in parent_configs(full_domains):
        u = full[f.exo_index]
        cfg = tuple(v for k, v in enumerate(full) if k != f.exo_index)
        row = np.zeros(len(f.child_domain))
        row[f.child_domain.index(f(cfg, u))] = 1.0
        rows.append(row)
    return Cpt.build(f.child, full_parents, full_domains, np.array(rows))


def inverse_image(f: StructuralFunction, config, x: str) -> tuple[str, ...]:
    """Exogenous values u with f(config, u) = x, in exo-domain order."""
    i = f._config_index[tuple(config)]
    k = f.child_domain.index(x)
    return tuple(
        u for j, u in enumerate(f.exo_domain) if f.values[i, j] == k
    )


def _structural_function(pscm: PscmModel, v: str) -> StructuralFunction:
    if v not in pscm.det_cpts:
        raise ConfigurationError(f"no deterministic CPT for {v!r}")
    exo = pscm.exo_attach.get(v)
    if exo is None:
        raise ConfigurationError(f"no exogenous parent attached to {v!r}")
    domains = {name: var.domain for name, var in pscm._by_name.items()}
    return function_from_det_cpt(pscm.det_cpts[v], domains, exo_parent=exo)


def _exo_dist(pscm: PscmModel, v: str) -> tuple[str, np.ndarray]:
    exo = pscm.exo_attach.get(v)
    if exo is None or exo not in pscm.exo_dists:
        raise ConfigurationError(f"missing exogenous distribution for {v!r}")
    dist = pscm.exo_dists[exo]
    if dist.size != pscm.variable(exo).arity:
        raise ConfigurationError(
            f"distribution for {exo!r} has {dist.size} entries, "
            f"domain has {pscm.variable(exo).arity}"
        )
    return exo, dist


def recover_via_inverse(pscm: PscmModel, v: str) -> Cpt:
    """Recovered conditional: sum the exo distribution over inverse images."""
    f = _structural_function(pscm, v)
    _, dist = _exo_dist(pscm, v)
    child_domain = f.child_domain
    rows = np.zeros((len(f.configs), len(child_domain)))
    for i, cfg in enumerate(f.configs):
        for k, x in enumerate(child_domain):
            for u in inverse_image(f, cfg, x):
                rows[i, k] += dist[f.exo_domain.index(u)]
    return Cpt.build(v, f.parent_names, f.parent_domains, rows)


def recover_via_marginalization(pscm: PscmModel, v: str) -> Cpt:
    """Recovered conditional: marginalize the det CPT against the exo dist.

    Distinct route from :func:`recover_via_inverse` — it reads the
    deterministic rows directly and never builds inverse images.
    """
    if v not in pscm.det_cpts:
        raise ConfigurationError(f"no deterministic CPT for {v!r}")
    exo, dist = _exo_dist(pscm, v)
    cpt = pscm.det_cpts[v]
    if exo not in cpt.parents:
        raise ConfigurationError(
            f"exogenous parent {exo!r} missing from det CPT of {v!r}"
        )
    exo_domain = pscm.domain(exo)
    exo_index = cpt.parents.index(exo)
    names = tuple(p for p in cpt.parents if p != exo)
    pdomains = tuple(pscm.domain(p) for p in names)
    configs = parent_configs(pdomains)
    arity = pscm.variable(v).arity
    rows = np.zeros((len(configs), arity))
    for i, cfg in enumerate(configs):
        for j, u in enumerate(exo_domain):
            full = list(cfg)
            full.insert(exo_index, u)
            rows[i] += dist[j] * cpt.row_for(tuple(full))
    return Cpt.build(v, names, pdomains, rows)


class Partition:
    """Blocks of value labels intended to partition a domain.

    Construction only records the blocks; :meth:`validate` (called by
    :func:`probability_assignment`) decides whether they actually
    partition the domain, so invalid cluster systems can be built and
    then rejected with a distinguishing error.
    """

    def __init__(self, domain, blocks):
        self.domain = tuple(domain)
        self.blocks = tuple(frozenset(b) for b in blocks)
        known = set(self.domain)
        for b in self.blocks:
            for val in b:
                if val not in known:
                    raise DomainError(f"block value {val!r} not in domain")

    @property
    def canonical_blocks(self) -> tuple[tuple[str, ...], ...]:
        """Values sorted by domain order within blocks; blocks sorted."""
        order = {v: i for i, v in enumerate(self.domain)}
        inner = [tuple(sorted(b, key=order.__getitem__)) for b in self.blocks]
        return tuple(sorted(inner, key=lambda t: [order[v] for v in t]))

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return (self.domain == other.domain
                and self.canonical_blocks == other.canonical_blocks)

    def __hash__(self):
        return hash((self.domain, self.canonical_blocks))

    def __repr__(self):
        blocks = ", ".join("{" + ", ".join(b) + "}" for b in self.canonical_blocks)
        return f"Partition({blocks})"

    def validate(self):
        """Raise PartitionError unless blocks are disjoint and exhaustive."""
        counts = {v: 0 for v in self.domain}
        for b in self.blocks:
            for val in b:
                counts[val] += 1
        overlapping = any(c > 1 for c in counts.values())
        non_exhaustive = any(c == 0 for c in counts.values())
        if overlapping or non_exhaustive:
            problems = []
            if overlapping:
                dup = sorted(v for v, c in counts.items() if c > 1)
                problems.append(f"overlapping values {dup}")
            if non_exhaustive:
                miss = sorted(v for v, c in counts.items() if c == 0)
                problems.append(f"uncovered values {miss}")
            raise PartitionError(
                "not a partition: " + "; ".join(problems),
                overlapping=overlapping,
                non_exhaustive=non_exhaustive,
            )


def probability_assignment(exo_dist, partition: Partition) -> np.ndarray:
    """Block sums of the distribution, one output per block.

    The blocks must partition the distribution's domain; overlapping or
    non-exhaustive systems raise PartitionError naming the failure.
    """
    dist = np.asarray(exo_dist, dtype=np.float64).reshape(-1)
    if dist.size != len(partition.domain):
        raise ShapeError(
            f"distribution has {dist.size} entries, domain has "
            f"{len(partition.domain)}"
        )
    partition.validate()
    index = {v: i for i, v in enumerate(partition.domain)}
    return np.array(
        [sum(dist[index[v]] for v in block) for block in partition.blocks]
    )


@dataclass(frozen=True)
class EntryDiff:
    variable: str
    config: tuple[str, ...]
    value: str
    expected: float
    recovered: float

    @property
    def diff(self) -> float:
        return abs(self.expected - self.recovered)


@dataclass
class EquivalenceReport:
    max_deviation: float
    diffs: list[EntryDiff] = field(default_factory=list)
    tol: float = TOL

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def _check_aligned(bn: BnModel, pscm: PscmModel):
    bn_names = {v.name for v in bn.variables}
    endo_names = {v.name for v in pscm.endogenous}
    if bn_names != endo_names:
        raise ShapeError(
            f"variable sets differ: bn {sorted(bn_names)} vs "
            f"endogenous {sorted(endo_names)}"
        )
    for v in pscm.endogenous:
        if bn.variable(v.name).domain != v.domain:
            raise ShapeError(f"domain of {v.name!r} differs")
        if v.name not in pscm.det_cpts:
            raise ShapeError(f"no deterministic CPT for {v.name!r}")
        underline = pscm.underline_parents(v.name)
        if tuple(bn.parents.get(v.name, ())) != underline:
            raise ShapeError(
                f"parents of {v.name!r} differ: bn "
                f"{bn.parents.get(v.name, ())} vs underline {underline}"
            )


def equivalence_check(bn: BnModel, pscm: PscmModel, tol: float = TOL) -> EquivalenceReport:
    """Compare every recovered conditional against the BN CPT."""
    _check_aligned(bn, pscm)
    max_dev = 0.0
    diffs: list[EntryDiff] = []
    for v in pscm.endogenous:
        recovered = recover_via_marginalization(pscm, v.name)
        expected = bn.cpts[v.name]
        delta = np.abs(recovered.rows - expected.rows)
        max_dev = max(max_dev, float(delta.max()))
        for i, j in zip(*np.nonzero(delta > tol)):
            diffs.append(EntryDiff(
                variable=v.name,
                config=tuple(expected.parent_configs[i]),
                value=v.domain[j],
                expected=float(expected.rows[i, j]),
                recovered=float(recovered.rows[i, j]),
            ))
    return EquivalenceReport(max_deviation=max_dev, diffs=diffs, tol=tol)


def validate_pscm(model: PscmModel, tol: float = TOL) -> ValidationReport:
    """Structural and numeric checks; surjectivity failures are warnings."""
    report = ValidationReport()
    endo = {v.name for v in model.endogenous}
    exo = {v.name for v in model.exogenous}
    if endo & exo:
        report.add("name-clash", "model",
                   f"names used both ways: {sorted(endo & exo)}")

    attached = list(model.exo_attach.values())
    for v in endo:
        if v not in model.exo_attach:
            report.add("missing-exo", v, "no exogenous parent attached")
    for v, w in model.exo_attach.items():
        if v not in endo:
            report.add("unknown-node", v, "attachment for unknown endogenous")
        if w not in exo:
            report.add("unknown-exo", v, f"attached exogenous {w!r} unknown")
    dup = {w for w in attached if attached.count(w) > 1}
    if dup:
        report.add("exo-reused", "model",
                   f"exogenous with more than one outgoing arc: {sorted(dup)}")

    for w in model.exogenous:
        dist = model.exo_dists.get(w.name)
        if dist is None:
            report.add("missing-dist", w.name, "no distribution")
            continue
        if dist.size != w.arity:
            report.add("dist-length", w.name,
                       f"{dist.size} entries for arity {w.arity}")
            continue
        if dist.min() < -tol:
            report.add("dist-range", w.name, f"negative entry {dist.min()}")
        if abs(dist.sum() - 1.0) > tol:
            report.add("dist-not-normalized", w.name,
                       f"sums to {dist.sum():.6g}")

    for v in model.endogenous:
        cpt = model.det_cpts.get(v.name)
        if cpt is None:
            report.add("missing-cpt", v.name, "no deterministic CPT")
            continue
        where = f"det_cpt {v.name}"
        att = model.exo_attach.get(v.name)
        if att is not None and att not in cpt.parents:
            report.add("exo-not-parent", where,
                       f"attached exogenous {att!r} not among parents")
        for p in cpt.parents:
            if p in exo and p != att:
                report.add("exo-reused", where,
                           f"exogenous {p!r} belongs to another variable")
            elif p not in exo and p not in endo:
                report.add("unknown-parent", where, f"unknown parent {p!r}")
        if cpt.rows.shape[1] != v.arity:
            report.add("arity-mismatch", where,
                       f"{cpt.rows.shape[1]} columns for arity {v.arity}")
            continue
        for i, row in enumerate(cpt.rows):
            try:
                _one_hot_index(row, where, tol)
            except NotDeterministicError:
                report.add("row-not-one-hot", where,
                           f"row {i} {row.tolist()} is not one-hot")
                break

    # Acyclicity over the endogenous graph.
    try:
        _as_bn_unchecked(model).topo_order()
    except Exception:
        report.add("cycle", "model", "graph contains a cycle")

    if report.ok:
        for v in model.endogenous:
            try:
                f = _structural_function(model, v.name)
            except Exception:
                continue
            if not f.is_surjective():
                report.add("not-surjective", v.name,
                           "some child value is never produced",
                           severity="warning")
    return report


def _as_bn_unchecked(pscm: PscmModel) -> BnModel:
    variables = tuple(pscm.endogenous) + tuple(pscm.exogenous)
    parents: dict[str, tuple[str, ...]] = {}
    cpts: dict[str, Cpt] = {}
    for w in pscm.exogenous:
        parents[w.name] = ()
        dist = pscm.exo_dists.get(w.name)
        if dist is not None and dist.size == w.arity:
            cpts[w.name] = Cpt.build(w.name, (), (), dist.reshape(1, -1))
    for v in pscm.endogenous:
        cpt = pscm.det_cpts.get(v.name)
        if cpt is not None:
            parents[v.name] = cpt.parents
            cpts[v.name] = cpt
        else:
            parents[v.name] = ()
    return BnModel(variables=variables, parents=parents, cpts=cpts)


def as_bn(pscm: PscmModel) -> BnModel:
    """Embed the PSCM as a plain BN (exogenous variables become roots)."""
    model = _as_bn_unchecked(pscm)
    return model


def pscm_to_dict(model: PscmModel) -> dict:
    edges = []
    for v in model.endogenous:
        cpt = model.det_cpts.get(v.name)
        for p in (cpt.parents if cpt else ()):
            edges.append([p, v.name])
    return {
        "variables": [
            {"name": v.name, "domain": list(v.domain)}
            for v in model.endogenous
        ],
        "exogenous": [
            {
                "name": w.name,
                "domain": list(w.domain),
                "dist": [float(p) for p in model.exo_dists[w.name]],
                "attached_to": next(
                    (v for v, u in model.exo_attach.items() if u == w.name),
                    None,
                ),
            }
            for w in model.exogenous
        ],
        "edges": edges,
        "det_cpts": {
            name: {
                "parents": list(cpt.parents),
                "rows": [
                    {"config": list(cfg), "probs": [float(p) for p in row]}
                    for cfg, row in zip(cpt.parent_configs, cpt.rows)
                ],
            }
            for name, cpt in model.det_cpts.items()
        },
    }


def pscm_from_dict(data: dict) -> PscmModel:
    if not isinstance(data, dict):
        raise ShapeError("expected a JSON object at the top level")
    for key in ("variables", "exogenous", "det_cpts"):
        if key not in data:
            raise ShapeError(f"missing {key!r}")
    try:
        endogenous = tuple(
            Variable(v["name"], tuple(v["domain"])) for v in data["variables"]
        )
        exogenous = tuple(
            Variable(w["name"], tuple(w["domain"])) for w in data["exogenous"]
        )
        exo_dists = {w["name"]: w["dist"] for w in data["exogenous"]}
        exo_attach: dict[str, str] = {}
        for w in data["exogenous"]:
            target = w.get("attached_to")
            if target is None:
                continue
            if target in exo_attach:
                raise ShapeError(
                    f"two exogenous variables attached to {target!r}"
                )
            exo_attach[target] = w["name"]
    except (KeyError, TypeError):
        raise ShapeError(
            "variables need name/domain; exogenous need "
            "name/domain/dist/attached_to"
        ) from None

    by_name = {v.name: v for v in endogenous + exogenous}
    det_cpts: dict[str, Cpt] = {}
    for child, spec in data["det_cpts"].items():
        if child not in by_name:
            raise ShapeError(f"det_cpt for unknown variable {child!r}")
        try:
            declared = tuple(spec["parents"])
            raw_rows = spec["rows"]
        except (KeyError, TypeError):
            raise ShapeError(
                f"det_cpt {child}: needs 'parents' and 'rows'"
            ) from None
        for p in declared:
            if p not in by_name:
                raise ShapeError(f"det_cpt {child}: unknown parent {p!r}")
        domains = [by_name[p].domain for p in declared]
        expected = parent_configs(domains)
        got = {}
        for entry in raw_rows:
            try:
                got[tuple(entry["config"])] = entry["probs"]
            except (KeyError, TypeError):
                raise ShapeError(
                    f"det_cpt {child}: each row needs 'config' and 'probs'"
                ) from None
        if set(got) != set(expected):
            raise ShapeError(
                f"det_cpt {child}: configs do not cover the parent domains"
            )
        rows = [got[cfg] for cfg in expected]
        det_cpts[child] = Cpt.build(child, declared, domains, rows)
    return PscmModel(
        endogenous=endogenous,
        exogenous=exogenous,
        exo_dists=exo_dists,
        det_cpts=det_cpts,
        exo_attach=exo_attach,
    )


def load_pscm(path) -> PscmModel:
    with open(path, "r", encoding="utf-8") as fh:
        return pscm_from_dict(json.load(fh))


def save_pscm(model: PscmModel, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(pscm_to_dict(model), fh, indent=2)
        fh.write("\n")
