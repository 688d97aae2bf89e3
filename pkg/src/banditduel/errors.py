"""Exception hierarchy shared across the package."""


class DomainError(ValueError):
    """Invalid parameters or infeasible requests (CLI exit code 1)."""


class DegeneratePriorError(DomainError):
    """The operation needs a prior with strictly positive variance."""


class ImpossibleEvidenceError(DomainError):
    """Conditioning on an outcome that has probability zero under the prior."""


class NodeBudgetExceeded(DomainError):
    """Exact enumeration would expand more nodes than the configured budget."""


class LPError(RuntimeError):
    """The simplex reported an infeasible or unbounded program."""
