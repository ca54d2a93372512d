"""Exception types shared across the engine."""

from __future__ import annotations


class GenflowError(Exception):
    """Base class for every engine-raised error."""


class NetworkError(GenflowError):
    """Target site unreachable or the URL is unusable."""


class SizeExceeded(GenflowError):
    """Fetched payload is larger than the fetch policy allows."""


class NotHtml(GenflowError):
    """Fetched document is not an HTML payload."""


class EmptyPalette(GenflowError):
    """No color literals found anywhere in the site's CSS."""


class ParseExhausted(GenflowError):
    """Structured output stayed invalid through the whole repair budget.

    Carries the number of attempts made and the last violation list.
    """

    def __init__(self, attempts: int, violations: list) -> None:
        self.attempts = attempts
        self.violations = list(violations or [])
        super().__init__(
            f"structured output invalid after {attempts} attempt(s): "
            + "; ".join(f"{v.field_path}:{v.rule}" for v in self.violations)
        )


class EnhancementFailed(GenflowError):
    """Enhancer backend failed while normalizing an asset."""


class InvalidAsset(GenflowError):
    """Asset descriptor violates its own invariants."""


class InvalidRequest(GenflowError):
    """Caller-supplied arguments violate an operation precondition."""


class InvalidTarget(GenflowError):
    """Recovery calibration target or budget out of range."""


class UnknownRun(GenflowError):
    """Telemetry operation addressed a run id that does not exist."""


class EvaluatorFault(GenflowError):
    """Evaluator backend raised instead of returning a verdict."""


class TransportError(GenflowError):
    """Remote endpoint unreachable at the transport level."""


class RemoteTimeout(GenflowError):
    """Remote call exceeded its deadline."""


class RemoteRejected(GenflowError):
    """Remote endpoint answered with a non-success status."""

    def __init__(self, status_code: int, body: str = "") -> None:
        self.status_code = status_code
        self.body = body
        super().__init__(f"remote endpoint rejected the call with status {status_code}")


class ConfigError(GenflowError):
    """Config file missing, unparseable, or inconsistent."""


class AbortedRun(GenflowError):
    """Run cancelled by an operator mid-flight."""
