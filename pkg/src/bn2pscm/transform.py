"""Orchestrate the full BN → PSCM transformation and verify round trips.

Per endogenous variable: read target conditional probabilities off its
CPT (one row per parent config and non-reference child value, the
reference value being the last domain value, implied by normalization),
search for a Boolean selection matrix and exogenous distribution hitting
those targets, and rebuild a deterministic CPT with the exogenous parent
appended. The whole-model transform then verifies that every recovered
conditional matches the original within tolerance.
"""

from dataclasses import dataclass, field

import numpy as np

from .bn import BnModel, Cpt, TOL, Variable, parent_configs, validate_bn
from .errors import (
    ConsistencyError,
    DomainError,
    ShapeError,
    TransformError,
    UnsupportedArityError,
    ValidationError,
)
from .linsys import build_b, u_as_distribution
from .pscm import (
    EquivalenceReport,
    PscmModel,
    equivalence_check,
    as_bn,
    recover_via_marginalization,
)
from .bn import conditional_query, joint
from .errors import NullEvidenceError
from .search import SearchConfig, SearchResult, SearchStats, search_solutions

#: Auto-sizing cap on the exogenous domain.
AUTO_SIZE_CAP = 12


@dataclass(frozen=True)
class TransformPlan:
    """Per-run settings: exogenous sizing, search shape, selection policy.

    ``exo_size`` fixes n for every variable (overridable per variable);
    None means auto-sizing, which starts at one more than the number of
    target rows and increments to ``auto_cap`` (deterministic CPTs start
    at 1). ``selection`` is "first" (first feasible emission) or "all"
    (keep alternatives up to ``max_solutions``). ``method`` picks which
    solver route supplies the distribution: "lp", "algebra", or "both"
    (LP solution, cross-checked against the algebraic one where that is
    unique).
    """

    exo_size: int | None = None
    exo_size_overrides: dict[str, int] = field(default_factory=dict)
    auto_cap: int = AUTO_SIZE_CAP
    limit: int | None = None
    selection: str = "first"
    max_solutions: int = 64
    method: str = "lp"
    tol: float = TOL
    jobs: int = 1

    def __post_init__(self):
        if self.exo_size is not None and self.exo_size < 1:
            raise DomainError("exo_size must be >= 1")
        if self.selection not in ("first", "all"):
            raise DomainError(f"selection must be first|all, got {self.selection!r}")
        if self.method not in ("lp", "algebra", "both"):
            raise DomainError(f"method must be lp|algebra|both, got {self.method!r}")
        if self.max_solutions < 1:
            raise DomainError("max_solutions must be >= 1")


@dataclass(frozen=True, eq=False)
class TargetSpec:
    """Target vector read off one CPT, with row labeling for reconstruction."""

    child: str
    child_domain: tuple[str, ...]
    parents: tuple[str, ...]
    parent_domains: tuple[tuple[str, ...], ...]
    reference_value: str
    b: np.ndarray
    labels: tuple[tuple[tuple[str, ...], str], ...]
    conflict_groups: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        """Number of target rows (b has one more: the normalization 1)."""
        return len(self.labels)


def targets_from_cpt(cpt: Cpt, domains, allow_multivalued: bool = False) -> TargetSpec:
    """Read the target probabilities and their (config, value) labels.

    The reference child value (last in the domain) gets no rows — its
    probability is implied by normalization. Children with more than two
    values need ``allow_multivalued``: their rows are stacked per
    non-reference value, child-value-major, and ``conflict_groups`` ties
    together the rows of one parent config (their column subsets must
    stay disjoint during the search).
    """
    domains = dict(domains)
    child_domain = tuple(domains[cpt.child])
    arity = len(child_domain)
    if arity > 2 and not allow_multivalued:
        raise UnsupportedArityError(
            f"variable {cpt.child!r} has {arity} values; stacked-row "
            "handling must be enabled for non-binary children"
        )
    pdomains = tuple(tuple(domains[p]) for p in cpt.parents)
    configs = parent_configs(pdomains)
    targets: list[float] = []
    labels: list[tuple[tuple[str, ...], str]] = []
    for k, value in enumerate(child_domain[:-1]):
        for i, cfg in enumerate(configs):
            targets.append(float(cpt.rows[i, k]))
            labels.append((tuple(cfg), value))
    ncfg = len(configs)
    if arity > 2:
        groups = tuple(
            tuple(k * ncfg + i for k in range(arity - 1)) for i in range(ncfg)
        )
    else:
        groups = ()
    return TargetSpec(
        child=cpt.child,
        child_domain=child_domain,
        parents=tuple(cpt.parents),
        parent_domains=pdomains,
        reference_value=child_domain[-1],
        b=build_b(targets),
        labels=tuple(labels),
        conflict_groups=groups,
    )


def det_cpt_from_matrix(a, spec: TargetSpec, exo: Variable) -> Cpt:
    """Build the deterministic CPT encoded by a solved selection matrix.

    Column j of row (config, value) equal to 1 assigns exogenous value j
    to that child value under that config; unassigned columns take the
    reference value. A column claimed by two child values in one config
    is contradictory.
    """
    arr = np.asarray(a)
    if arr.shape != (spec.m, exo.arity):
        raise ShapeError(
            f"matrix shape {arr.shape} does not match {spec.m} target rows "
            f"and {exo.arity} exogenous values"
        )
    configs = parent_configs(spec.parent_domains)
    cfg_index = {c: i for i, c in enumerate(configs)}
    # assigned[i][j] = child value for config i, exo value j
    assigned: list[list[str | None]] = [
        [None] * exo.arity for _ in range(len(configs))
    ]
    for row, (cfg, value) in enumerate(spec.labels):
        i = cfg_index[tuple(cfg)]
        for j in range(exo.arity):
            if arr[row, j]:
                if assigned[i][j] is not None and assigned[i][j] != value:
                    raise ConsistencyError(
                        f"config {cfg}: exogenous value {exo.domain[j]!r} "
                        f"assigned to both {assigned[i][j]!r} and {value!r}"
                    )
                assigned[i][j] = value

    full_parents = spec.parents + (exo.name,)
    full_domains = spec.parent_domains + (exo.domain,)
    rows = []
    for full in parent_configs(full_domains):
        cfg, u = full[:-1], full[-1]
        i = cfg_index[cfg]
        j = exo.domain.index(u)
        value = assigned[i][j] or spec.reference_value
        row = np.zeros(len(spec.child_domain))
        row[spec.child_domain.index(value)] = 1.0
        rows.append(row)
    return Cpt.build(spec.child, full_parents, full_domains, np.array(rows))


@dataclass(frozen=True, eq=False)
class PscmCandidate:
    """One feasible (distribution, deterministic CPT) pair for a variable."""

    variable: str
    exo: Variable
    exo_dist: np.ndarray
    det_cpt: Cpt
    matrix: np.ndarray
    method: str
    classification: str
    emission_index: int


@dataclass
class VariableReport:
    variable: str
    exo_name: str
    n: int
    matrix: list[list[int]]
    method: str
    classification: str
    exo_dist: list[float]
    alternatives: int


@dataclass
class TransformReport:
    variables: list[VariableReport] = field(default_factory=list)
    round_trip_max_deviation: float = 0.0
    tol: float = TOL

    @property
    def alternatives(self) -> int:
        return sum(v.alternatives for v in self.variables)


def _exo_name(taken, v: str) -> str:
    name = f"U_{v}"
    k = 2
    while name in taken:
        name = f"U_{v}_{k}"
        k += 1
    return name


def _candidate_sizes(plan: TransformPlan, v: str, spec: TargetSpec,
                     deterministic: bool) -> list[int]:
    explicit = plan.exo_size_overrides.get(v, plan.exo_size)
    if explicit is not None:
        return [explicit]
    if deterministic:
        return list(range(1, plan.auto_cap + 1))
    start = spec.m + 1
    return list(range(start, plan.auto_cap + 1))


def _pick_x(result: SearchResult, method: str, v: str) -> tuple[np.ndarray, str]:
    """Choose the solution vector according to the method selector."""
    if method == "algebra":
        out = result.outcome
        if out.x is None or not out.feasible:
            raise TransformError(
                f"algebraic route offers no feasible solution for {v!r} "
                f"(classification {out.classification})",
                variable=v,
            )
        return out.x, out.method
    if method == "both":
        out = result.outcome
        if (
            out.classification == "square-invertible"
            and out.x is not None
            and np.abs(out.x - result.lp_result.x).max() > 1e-8
        ):
            raise ConsistencyError(
                f"LP and direct-inverse solutions disagree for {v!r}"
            )
    return result.lp_result.x, "lp"


def transform_variable(bn: BnModel, v: str, plan: TransformPlan) -> list[PscmCandidate]:
    """Feasible (exo distribution, deterministic CPT) pairs for one variable.

    Ordered by search emission order; auto-sizing tries growing
    exogenous domains until something is feasible. Every returned pair
    is re-verified against the BN rows before being handed back.
    """
    report = validate_bn(bn)
    if not report.ok:
        raise ValidationError(f"model invalid:\n{report.summary()}")
    cpt = bn.cpts[v]
    domains = {var.name: var.domain for var in bn.variables}
    spec = targets_from_cpt(cpt, domains, allow_multivalued=True)
    sizes = _candidate_sizes(plan, v, spec, cpt.is_deterministic())
    if not sizes:
        raise TransformError(
            f"no exogenous size to try for {v!r} within cap {plan.auto_cap}",
            variable=v,
        )
    exo_name = _exo_name(set(domains), v)
    want = 1 if plan.selection == "first" else plan.max_solutions

    for n in sizes:
        exo = Variable(exo_name, tuple(f"u{i}" for i in range(1, n + 1)))
        cfg = SearchConfig(
            m=spec.m,
            n=n,
            limit=min(plan.limit, n) if plan.limit is not None else n,
            max_solutions=want,
            dedup=True,
        )
        results = list(search_solutions(
            spec.b,
            cfg,
            conflict_groups=spec.conflict_groups or None,
            jobs=plan.jobs,
        ))
        if not results:
            continue
        candidates = []
        for idx, result in enumerate(results):
            x, method = _pick_x(result, plan.method, v)
            dist = u_as_distribution(x[:n], plan.tol)
            det = det_cpt_from_matrix(result.matrix, spec, exo)
            _verify_candidate(bn, v, exo, dist, det, plan.tol)
            candidates.append(PscmCandidate(
                variable=v,
                exo=exo,
                exo_dist=dist,
                det_cpt=det,
                matrix=result.matrix,
                method=method,
                classification=result.outcome.classification,
                emission_index=idx,
            ))
        return candidates
    raise TransformError(
        f"no feasible exogenous distribution for {v!r} with n up to "
        f"{sizes[-1]}",
        variable=v,
    )


def _verify_candidate(bn: BnModel, v: str, exo: Variable, dist: np.ndarray,
                      det: Cpt, tol: float):
    """Recheck that the candidate reproduces the BN rows for v."""
    parents = tuple(p for p in det.parents if p != exo.name)
    frag = PscmModel(
        endogenous=tuple(bn.variable(p) for p in parents) + (bn.variable(v),),
        exogenous=(exo,),
        exo_dists={exo.name: dist},
        det_cpts={v: det},
        exo_attach={v: exo.name},
    )
    recovered = recover_via_marginalization(frag, v)
    dev = float(np.abs(recovered.rows - bn.cpts[v].rows).max())
    if dev > tol:
        raise TransformError(
            f"candidate for {v!r} misses its targets by {dev:.3g}",
            variable=v,
        )


def transform_bn(bn: BnModel, plan: TransformPlan | None = None) -> tuple[PscmModel, TransformReport]:
    """Transform every variable and verify whole-model equivalence."""
    plan = plan or TransformPlan()
    report = validate_bn(bn)
    if not report.ok:
        raise ValidationError(f"model invalid:\n{report.summary()}")

    exogenous: list[Variable] = []
    exo_dists: dict[str, np.ndarray] = {}
    det_cpts: dict[str, Cpt] = {}
    exo_attach: dict[str, str] = {}
    var_reports: list[VariableReport] = []
    for v in bn.variables:
        candidates = transform_variable(bn, v.name, plan)
        chosen = candidates[0]
        exogenous.append(chosen.exo)
        exo_dists[chosen.exo.name] = chosen.exo_dist
        det_cpts[v.name] = chosen.det_cpt
        exo_attach[v.name] = chosen.exo.name
        var_reports.append(VariableReport(
            variable=v.name,
            exo_name=chosen.exo.name,
            n=chosen.exo.arity,
            matrix=[[int(x) for x in row] for row in chosen.matrix],
            method=chosen.method,
            classification=chosen.classification,
            exo_dist=[float(p) for p in chosen.exo_dist],
            alternatives=len(candidates),
        ))

    pscm = PscmModel(
        endogenous=bn.variables,
        exogenous=tuple(exogenous),
        exo_dists=exo_dists,
        det_cpts=det_cpts,
        exo_attach=exo_attach,
    )
    equivalence = equivalence_check(bn, pscm, plan.tol)
    if not equivalence.passed:
        raise TransformError(
            f"round-trip deviation {equivalence.max_deviation:.3g} exceeds "
            f"{plan.tol}"
        )
    return pscm, TransformReport(
        variables=var_reports,
        round_trip_max_deviation=equivalence.max_deviation,
        tol=plan.tol,
    )


@dataclass
class RoundtripReport:
    """Equivalence of CPT rows plus posterior-query agreement."""

    equivalence: EquivalenceReport
    posterior_max_deviation: float
    posterior_checks: int
    tol: float = TOL

    @property
    def passed(self) -> bool:
        return (self.equivalence.passed
                and self.posterior_max_deviation <= self.tol)


def roundtrip_verify(bn: BnModel, pscm: PscmModel, tol: float = TOL) -> RoundtripReport:
    """Equivalence check plus posterior comparison on the embedded BN.

    Posteriors: for every single-variable evidence setting with positive
    probability on both sides, conditionals of every other variable must
    agree within tol. The PSCM is queried through its plain-BN embedding
    with exogenous variables marginalized out.
    """
    equivalence = equivalence_check(bn, pscm, tol)
    embedded = as_bn(pscm)
    names = [v.name for v in bn.variables]
    bn_joint = joint(bn)

    max_dev = 0.0
    checks = 0
    for e in names:
        evar = bn.variable(e)
        marginal = bn_joint.marginal([e]).table
        for value, p in zip(evar.domain, marginal):
            if p <= 0.0:
                continue
            for t in names:
                if t == e:
                    continue
                want = conditional_query(bn, t, {e: value})
                try:
                    got = conditional_query(embedded, t, {e: value})
                    dev = float(np.abs(want - got).max())
                except NullEvidenceError:
                    dev = 1.0
                max_dev = max(max_dev, dev)
                checks += 1
    return RoundtripReport(
        equivalence=equivalence,
        posterior_max_deviation=max_dev,
        posterior_checks=checks,
        tol=tol,
    )
