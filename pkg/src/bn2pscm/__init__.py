"""bn2pscm: Bayesian networks → probabilistic structural causal models.

Turns each conditional probability table into a deterministic table
plus one exogenous parent whose distribution is found by enumerating
Boolean selection matrices and solving the resulting linear systems
(direct/left/right inverse where the shape allows, two-phase simplex
otherwise), then verifies the round trip.
"""

from ._backend import BACKEND, HAVE_NUMBA, USE_NUMBA
from .bn import (
    BnModel,
    Cpt,
    Distribution,
    TOL,
    ValidationIssue,
    ValidationReport,
    Variable,
    bn_from_dict,
    bn_to_dict,
    conditional_query,
    joint,
    load_bn,
    parent_configs,
    save_bn,
    validate_bn,
)
from .errors import (
    Bn2PscmError,
    CapacityError,
    ConfigurationError,
    ConsistencyError,
    DomainError,
    NotDeterministicError,
    NullEvidenceError,
    PartitionError,
    ShapeError,
    TransformError,
    UnsupportedArityError,
    ValidationError,
)
from .linsys import (
    FEAS_TOL,
    LinearSystem,
    RANK_TOL,
    SolveOutcome,
    assemble_extended,
    build_b,
    classify,
    classify_and_solve,
    is_probability_vector,
    left_inverse,
    rank,
    right_inverse,
    solve_via_lp,
    u_as_distribution,
)
from .lp import LpProblem, LpResult, PHASE1_TOL, solve_lp
from .pscm import (
    EntryDiff,
    EquivalenceReport,
    Partition,
    PscmModel,
    StructuralFunction,
    as_bn,
    det_cpt_from_function,
    equivalence_check,
    function_from_det_cpt,
    inverse_image,
    load_pscm,
    probability_assignment,
    pscm_from_dict,
    pscm_to_dict,
    recover_via_inverse,
    recover_via_marginalization,
    save_pscm,
    validate_pscm,
)
from .search import (
    SearchConfig,
    SearchResult,
    SearchStats,
    apply_column_permutation,
    canonical_matrix,
    powerset,
    search_solutions,
    sorted_columns_key,
)
from .transform import (
    PscmCandidate,
    RoundtripReport,
    TargetSpec,
    TransformPlan,
    TransformReport,
    VariableReport,
    det_cpt_from_matrix,
    roundtrip_verify,
    targets_from_cpt,
    transform_bn,
    transform_variable,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
