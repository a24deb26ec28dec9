"""Discrete Bayesian networks: representation, validation, exact queries.

Everything here is brute force at desk scale: the joint table is
materialized (capacity-capped) and conditionals are normalized sums over
it. Variable domains are ordered lists of value labels; that order is
the canonical index order used everywhere downstream, but queries always
address values by label, so declaration order never changes an answer.
"""

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CapacityError,
    DomainError,
    NullEvidenceError,
    ShapeError,
    ValidationError,
)

#: Absolute tolerance for probability equality checks.
TOL = 1e-9
#: Default cap on materialized joint-table size.
DEFAULT_JOINT_CAP = 2**20


@dataclass(frozen=True)
class Variable:
    """A named discrete variable with an ordered domain of value labels."""

    name: str
    domain: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        if not self.name:
            raise DomainError("variable name must be non-empty")
        if len(self.domain) < 1:
            raise DomainError(f"variable {self.name}: domain must be non-empty")
        if len(set(self.domain)) != len(self.domain):
            raise DomainError(f"variable {self.name}: domain labels not unique")

    @property
    def arity(self) -> int:
        return len(self.domain)

    def index_of(self, label: str) -> int:
        try:
            return self.domain.index(label)
        except ValueError:
            raise DomainError(
                f"value {label!r} not in domain of {self.name}"
            ) from None


def parent_configs(domains) -> tuple[tuple[str, ...], ...]:
    """Row-major cartesian product of the given ordered domains."""
    return tuple(itertools.product(*domains))


@dataclass(frozen=True, eq=False)
class Cpt:
    """Conditional probability table for one child variable.

    ``rows[i]`` is the probability vector over the child domain for
    ``parent_configs[i]``; config order is row-major over the parent
    domains in declaration order.
    """

    child: str
    parents: tuple[str, ...]
    parent_configs: tuple[tuple[str, ...], ...]
    rows: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(
            self, "parent_configs",
            tuple(tuple(c) for c in self.parent_configs),
        )
        rows = np.array(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            raise ShapeError(f"cpt {self.child}: rows must be 2-D")
        if rows.shape[0] != len(self.parent_configs):
            raise ShapeError(
                f"cpt {self.child}: {rows.shape[0]} rows for "
                f"{len(self.parent_configs)} parent configs"
            )
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(
            self, "_config_index",
            {c: i for i, c in enumerate(self.parent_configs)},
        )

    @classmethod
    def build(cls, child: str, parents, parent_domains, rows) -> "Cpt":
        """Construct with configs generated row-major from parent domains."""
        return cls(
            child=child,
            parents=tuple(parents),
            parent_configs=parent_configs(parent_domains),
            rows=rows,
        )

    def row_for(self, config) -> np.ndarray:
        key = tuple(config)
        try:
            return self.rows[self._config_index[key]]
        except KeyError:
            raise DomainError(
                f"cpt {self.child}: unknown parent config {key!r}"
            ) from None

    def is_deterministic(self, tol: float = TOL) -> bool:
        """True iff every row is one-hot within tol."""
        near_zero = np.abs(self.rows) <= tol
        near_one = np.abs(self.rows - 1.0) <= tol
        return bool(
            np.all(near_zero | near_one)
            and np.all(np.abs(self.rows.sum(axis=1) - 1.0) <= tol)
        )


@dataclass(frozen=True)
class BnModel:
    """A Bayesian network: variables, parent structure, and CPTs."""

    variables: tuple[Variable, ...]
    parents: dict[str, tuple[str, ...]]
    cpts: dict[str, Cpt]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(
            self, "parents",
            {k: tuple(v) for k, v in self.parents.items()},
        )
        object.__setattr__(
            self, "_by_name", {v.name: v for v in self.variables}
        )

    def variable(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise DomainError(f"unknown variable {name!r}") from None

    def domain(self, name: str) -> tuple[str, ...]:
        return self.variable(name).domain

    def topo_order(self) -> list[str]:
        """Kahn topological order; raises on a cycle."""
        names = [v.name for v in self.variables]
        indeg = {n: 0 for n in names}
        children = {n: [] for n in names}
        for child, ps in self.parents.items():
            for p in ps:
                if p in indeg and child in indeg:
                    indeg[child] += 1
                    children[p].append(child)
        ready = [n for n in names if indeg[n] == 0]
        order = []
        while ready:
            n = ready.pop(0)
            order.append(n)
            for ch in children[n]:
                indeg[ch] -= 1
                if indeg[ch] == 0:
                    ready.append(ch)
        if len(order) != len(names):
            raise ValidationError("parent graph contains a cycle")
        return order


@dataclass(frozen=True, eq=False)
class Distribution:
    """Joint distribution over an ordered variable list.

    ``table`` is flat, row-major over the variable domains in ``over``
    order.
    """

    over: tuple[Variable, ...]
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "over", tuple(self.over))
        table = np.asarray(self.table, dtype=np.float64).reshape(-1)
        expected = int(np.prod([v.arity for v in self.over]))
        if table.size != expected:
            raise ShapeError(
                f"table has {table.size} entries, expected {expected}"
            )
        if table.min() < -TOL:
            raise DomainError(f"negative probability {table.min()}")
        if abs(table.sum() - 1.0) > TOL:
            raise DomainError(f"table sums to {table.sum()}, not 1")
        table = table.copy()
        table.flags.writeable = False
        object.__setattr__(self, "table", table)

    def _shape(self) -> tuple[int, ...]:
        return tuple(v.arity for v in self.over)

    def prob(self, assignment) -> float:
        """Probability of one full joint assignment {name: label}."""
        if set(assignment) != {v.name for v in self.over}:
            raise DomainError("assignment must cover exactly the variables")
        idx = tuple(v.index_of(assignment[v.name]) for v in self.over)
        return float(self.table.reshape(self._shape())[idx])

    def marginal(self, names) -> "Distribution":
        """Marginal over the given variables, in the given order."""
        names = list(names)
        pos = {v.name: i for i, v in enumerate(self.over)}
        for n in names:
            if n not in pos:
                raise DomainError(f"unknown variable {n!r}")
        keep = [pos[n] for n in names]
        drop = tuple(i for i in range(len(self.over)) if i not in keep)
        nd = self.table.reshape(self._shape()).sum(axis=drop) if drop else \
            self.table.reshape(self._shape())
        # sum() removed the dropped axes; reorder the kept ones as requested
        current = [i for i in range(len(self.over)) if i not in drop]
        perm = [current.index(i) for i in keep]
        nd = nd.transpose(perm)
        return Distribution(
            over=tuple(self.over[i] for i in keep), table=nd.reshape(-1)
        )


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    where: str
    message: str
    severity: str = "error"


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(i.severity == "error" for i in self.issues)

    def add(self, code: str, where: str, message: str, severity: str = "error"):
        self.issues.append(ValidationIssue(code, where, message, severity))

    def summary(self) -> str:
        if self.ok and not self.issues:
            return "valid"
        lines = [f"{i.severity}: [{i.code}] {i.where}: {i.message}"
                 for i in self.issues]
        return "\n".join(lines)


def validate_bn(model: BnModel, tol: float = TOL) -> ValidationReport:
    """Check structure and CPTs; the report lists every violation found."""
    report = ValidationReport()
    names = [v.name for v in model.variables]
    if len(set(names)) != len(names):
        report.add("duplicate-variable", "model", "variable names not unique")
    known = set(names)

    for child, ps in model.parents.items():
        if child not in known:
            report.add("unknown-node", child, "parent list for unknown variable")
            continue
        for p in ps:
            if p not in known:
                report.add("unknown-parent", child, f"unknown parent {p!r}")
        if child in ps:
            report.add("cycle", child, "self-loop")

    try:
        model.topo_order()
    except ValidationError:
        report.add("cycle", "model", "parent graph contains a cycle")

    for name in names:
        if name not in model.cpts:
            report.add("missing-cpt", name, "no CPT for variable")
    for child, cpt in model.cpts.items():
        if child not in known:
            report.add("unknown-node", child, "CPT for unknown variable")
            continue
        where = f"cpt {child}"
        declared = model.parents.get(child, ())
        if tuple(cpt.parents) != tuple(declared):
            report.add("parent-mismatch", where,
                       f"CPT parents {cpt.parents} != declared {declared}")
            continue
        if any(p not in known for p in cpt.parents):
            continue  # already reported above
        domains = [model.domain(p) for p in cpt.parents]
        expected = parent_configs(domains)
        if cpt.parent_configs != expected:
            report.add("config-order", where,
                       "parent configs not row-major over parent domains")
            continue
        arity = model.variable(child).arity
        if cpt.rows.shape[1] != arity:
            report.add("arity-mismatch", where,
                       f"{cpt.rows.shape[1]} columns for arity {arity}")
            continue
        if cpt.rows.min() < -tol or cpt.rows.max() > 1.0 + tol:
            report.add("entry-range", where, "entries outside [0, 1]")
        bad = np.abs(cpt.rows.sum(axis=1) - 1.0) > tol
        for i in np.flatnonzero(bad):
            report.add("row-not-normalized", where,
                       f"row {i} {tuple(cpt.parent_configs[i])} sums to "
                       f"{cpt.rows[i].sum():.6g}")
    return report


def _require_valid(model: BnModel):
    report = validate_bn(model)
    if not report.ok:
        raise ValidationError(f"model invalid:\n{report.summary()}")


def joint(model: BnModel, max_entries: int = DEFAULT_JOINT_CAP) -> Distribution:
    """Materialize the joint distribution as a product of CPT factors."""
    _require_valid(model)
    sizes = [v.arity for v in model.variables]
    total = int(np.prod(sizes)) if sizes else 1
    if total > max_entries:
        raise CapacityError(
            f"joint table needs {total} entries, cap is {max_entries}"
        )
    pos = {v.name: i for i, v in enumerate(model.variables)}
    full = np.ones(sizes if sizes else (1,))
    for v in model.variables:
        cpt = model.cpts[v.name]
        axes = [pos[p] for p in cpt.parents] + [pos[v.name]]
        factor_shape = [sizes[a] for a in axes]
        nd = cpt.rows.reshape(factor_shape)
        order = np.argsort(axes)
        nd = nd.transpose(order)
        shape = [1] * len(sizes)
        for a in sorted(axes):
            shape[a] = sizes[a]
        full = full * nd.reshape(shape)
    return Distribution(over=model.variables, table=full.reshape(-1))


def conditional_query(
    model: BnModel,
    target: str,
    evidence,
    max_entries: int = DEFAULT_JOINT_CAP,
) -> np.ndarray:
    """P(target | evidence) as a vector over the target's domain.

    Brute force: normalized sum of joint entries consistent with the
    evidence.
    """
    evidence = dict(evidence)
    tvar = model.variable(target)
    if target in evidence:
        raise DomainError(f"target {target!r} cannot also be evidence")
    dist = joint(model, max_entries=max_entries)
    sizes = [v.arity for v in model.variables]
    pos = {v.name: i for i, v in enumerate(model.variables)}
    index: list = [slice(None)] * len(sizes)
    for name, label in evidence.items():
        index[pos[name]] = model.variable(name).index_of(label)
    sub = dist.table.reshape(sizes)[tuple(index)]
    kept = [v.name for v in model.variables if v.name not in evidence]
    taxis = kept.index(target)
    other = tuple(i for i in range(len(kept)) if i != taxis)
    vec = sub.sum(axis=other) if other else sub
    total = float(vec.sum())
    if total == 0.0:
        raise NullEvidenceError(f"evidence {evidence!r} has zero probability")
    return vec / total


def bn_to_dict(model: BnModel) -> dict:
    """JSON-ready dict in the documented interchange format."""
    edges = []
    for v in model.variables:
        for p in model.parents.get(v.name, ()):
            edges.append([p, v.name])
    return {
        "variables": [
            {"name": v.name, "domain": list(v.domain)} for v in model.variables
        ],
        "edges": edges,
        "cpts": {
            name: {
                "parents": list(cpt.parents),
                "rows": [
                    {"config": list(cfg), "probs": [float(p) for p in row]}
                    for cfg, row in zip(cpt.parent_configs, cpt.rows)
                ],
            }
            for name, cpt in model.cpts.items()
        },
    }


def bn_from_dict(data: dict) -> BnModel:
    """Parse the interchange format; malformed structure raises ShapeError."""
    if not isinstance(data, dict):
        raise ShapeError("expected a JSON object at the top level")
    try:
        raw_vars = data["variables"]
    except (KeyError, TypeError):
        raise ShapeError("missing 'variables' list") from None
    try:
        variables = tuple(
            Variable(name=v["name"], domain=tuple(v["domain"]))
            for v in raw_vars
        )
    except (KeyError, TypeError):
        raise ShapeError("each variable needs 'name' and 'domain'") from None
    by_name = {v.name: v for v in variables}
    raw_cpts = data.get("cpts", {})
    if not isinstance(raw_cpts, dict):
        raise ShapeError("'cpts' must be an object keyed by child name")

    parents: dict[str, tuple[str, ...]] = {v.name: () for v in variables}
    cpts: dict[str, Cpt] = {}
    for child, spec in raw_cpts.items():
        try:
            declared = tuple(spec["parents"])
            raw_rows = spec["rows"]
        except (KeyError, TypeError):
            raise ShapeError(f"cpt {child}: needs 'parents' and 'rows'") from None
        parents[child] = declared
        for p in declared:
            if p not in by_name:
                raise ShapeError(f"cpt {child}: unknown parent {p!r}")
        if child not in by_name:
            raise ShapeError(f"cpt for unknown variable {child!r}")
        domains = [by_name[p].domain for p in declared]
        expected = parent_configs(domains)
        got = {}
        for entry in raw_rows:
            try:
                cfg = tuple(entry["config"])
                probs = entry["probs"]
            except (KeyError, TypeError):
                raise ShapeError(
                    f"cpt {child}: each row needs 'config' and 'probs'"
                ) from None
            if cfg in got:
                raise ShapeError(f"cpt {child}: duplicate config {cfg!r}")
            got[cfg] = probs
        if set(got) != set(expected):
            raise ShapeError(
                f"cpt {child}: configs do not cover the parent domains"
            )
        rows = [got[cfg] for cfg in expected]
        cpts[child] = Cpt.build(child, declared, domains, rows)

    edges = data.get("edges")
    if edges is not None:
        derived = {(p, c) for c, ps in parents.items() for p in ps}
        listed = set()
        for e in edges:
            if not isinstance(e, (list, tuple)) or len(e) != 2:
                raise ShapeError(f"edge {e!r} must be a [parent, child] pair")
            listed.add((e[0], e[1]))
        if listed != derived:
            raise ShapeError("edges inconsistent with CPT parent lists")
    return BnModel(variables=variables, parents=parents, cpts=cpts)


def load_bn(path) -> BnModel:
    with open(path, "r", encoding="utf-8") as fh:
        return bn_from_dict(json.load(fh))


def save_bn(model: BnModel, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(bn_to_dict(model), fh, indent=2)
        fh.write("\n")
