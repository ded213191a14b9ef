"""Exception hierarchy shared across the package."""


class KPathError(Exception):
    """Base class for all package errors."""


class InputError(KPathError, ValueError):
    """A caller-supplied value violates a documented precondition."""


class NotApplicableError(KPathError):
    """The operation is well-defined but does not apply to this input
    (size cap exceeded, region too small, nothing to separate)."""


class OracleFaultError(KPathError):
    """A decision oracle gave answers that are mutually inconsistent."""


class ProtocolError(KPathError):
    """A pluggable component (separation provider, solver) broke its contract."""


class BudgetExceededError(KPathError):
    """A search exceeded its node-expansion budget; no answer is implied."""


class SuiteFailure(KPathError):
    """The randomized verification suite found a disagreement."""
