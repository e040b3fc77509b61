"""
Domain errors
"""
from typing import Any, Dict, Optional


class McpSelError(Exception):
    """Base error carrying a machine-readable reason"""

    reason: str = "error"
    status_code: int = 400

    def __init__(self, message: str, reason: Optional[str] = None, **context: Any):
        super().__init__(message)
        if reason is not None:
            self.reason = reason
        self.context = context

    def to_dict(self) -> Dict[str, Any]:
        payload = {"status": "error", "reason": self.reason, "detail": str(self)}
        if self.context:
            payload["context"] = self.context
        return payload


class DimensionMismatchError(McpSelError):
    reason = "dimension_mismatch"


class NotHermitianError(McpSelError):
    reason = "not_hermitian"


class HypothesisError(McpSelError):
    """An input violates a hypothesis of the requested construction"""

    reason = "hypothesis_violation"
    status_code = 422


class BudgetExceededError(McpSelError):
    reason = "budget_exceeded"
    status_code = 422


class SelectionFailedError(McpSelError):
    """The achieved bound is worse than the promised one"""

    reason = "selection_failed"
    status_code = 500


class CertificateDriftError(McpSelError):
    reason = "certificate_drift"

    def __init__(self, field: str, stored: Any, recomputed: Any):
        super().__init__(
            f"Field '{field}' drifted: stored {stored}, recomputed {recomputed}",
            field=field,
        )
        self.field = field


class ConfigError(McpSelError):
    reason = "invalid_config"
