"""Exception types shared across the package.

Every error that the command line turns into exit code 1 derives from
:class:`DomainError`.
"""


class DomainError(Exception):
    """Input that is well formed but mathematically unusable."""

    kind = "domain_error"

    def to_json(self) -> dict:
        return {"error": self.kind, "message": str(self)}


class DimensionMismatch(DomainError, ValueError):
    kind = "dimension_mismatch"


class UnboundedNorm(DomainError, ValueError):
    kind = "unbounded_norm"


class NotStrictlyConvex(DomainError, ValueError):
    kind = "not_strictly_convex"


class ModeMismatch(DomainError, ValueError):
    kind = "mode_mismatch"


class RetryBudgetExhausted(DomainError, RuntimeError):
    kind = "retry_budget_exhausted"


class ConvergenceFailure(DomainError, RuntimeError):
    kind = "convergence_failure"


class PreconditionFailed(DomainError, ValueError):
    kind = "precondition_failed"


class AuditViolation(DomainError):
    """The span condition fails; ``report`` carries the witness."""

    kind = "audit_violation"

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report

    def to_json(self) -> dict:
        out = super().to_json()
        if self.report is not None:
            out["witness"] = self.report.to_json()
        return out


class InfeasiblePartition(DomainError):
    kind = "infeasible_partition"

    def __init__(self, message, blocking=()):
        super().__init__(message)
        self.blocking = tuple(blocking)

    def to_json(self) -> dict:
        out = super().to_json()
        out["blocking_subset"] = list(self.blocking)
        return out
