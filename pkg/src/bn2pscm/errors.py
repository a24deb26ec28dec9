"""Exception types shared across the package."""


class Bn2PscmError(Exception):
    """Base class for every package-specific error."""


class CapacityError(Bn2PscmError):
    """A requested computation exceeds its configured size cap."""


class ShapeError(Bn2PscmError):
    """Structural mismatch: wrong dimensions, missing variables, unequal domains."""


class DomainError(Bn2PscmError, ValueError):
    """An input value lies outside its permitted range."""


class ValidationError(Bn2PscmError):
    """An operation that requires a well-formed model received an invalid one."""


class NullEvidenceError(Bn2PscmError):
    """Conditioning on evidence whose marginal probability is zero."""


class NotDeterministicError(Bn2PscmError):
    """A CPT row is not one-hot where a deterministic CPT is required."""


class ConfigurationError(Bn2PscmError):
    """A model component needed by the operation is missing or inconsistent."""


class PartitionError(Bn2PscmError):
    """Blocks fail to partition the domain.

    ``overlapping`` and ``non_exhaustive`` record which property failed
    (both may be set).
    """

    def __init__(self, message: str, *, overlapping: bool = False,
                 non_exhaustive: bool = False):
        super().__init__(message)
        self.overlapping = overlapping
        self.non_exhaustive = non_exhaustive


class ConsistencyError(Bn2PscmError):
    """Conflicting deterministic assignments for the same exogenous value."""


class UnsupportedArityError(Bn2PscmError):
    """Child variable is not binary and stacked-row handling was not requested."""


class TransformError(Bn2PscmError):
    """No feasible exogenous distribution was found for a variable.

    ``variable`` names the endogenous variable that failed.
    """

    def __init__(self, message: str, *, variable: str | None = None):
        super().__init__(message)
        self.variable = variable
