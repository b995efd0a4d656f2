"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so keep the split:
usage problems, bad data, blown enumeration budgets, and solver
conditions that must never be reported as ordinary values.
"""


class RendezkitError(Exception):
    """Base class for all package errors."""


class ArgumentError(RendezkitError, ValueError):
    """Caller passed structurally invalid arguments (usage, exit code 2)."""


class DataValidationError(RendezkitError, ValueError):
    """Input data violates a documented invariant (exit code 3)."""


class KernelDomainError(DataValidationError):
    """Kernel evaluated outside its admissible domain."""


class BudgetExceededError(RendezkitError):
    """Exact enumeration was requested beyond the configured budget (exit code 4)."""


class UnresolvedInfinityError(RendezkitError):
    """Cap-and-verify could not certify a value in the presence of infinite
    kernel entries.  Raised instead of returning a possibly wrong number."""


class PropertyViolationError(RendezkitError):
    """A mathematically guaranteed relation failed; indicates a solver bug."""


class SolverStalledError(RendezkitError):
    """Iteration limit hit inside an optimization routine."""
