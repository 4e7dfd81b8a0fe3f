"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: DataError -> 2,
ExternalServiceError -> 3, anything argparse-shaped -> 1.
"""
from __future__ import annotations


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class DataError(PipelineError):
    """Malformed or contract-violating input data."""


class UsageError(PipelineError):
    """Bad command-line usage or configuration."""


class ExternalServiceError(PipelineError):
    """A translation engine or encoder sidecar failed or is unreachable."""


class FixtureMissError(ExternalServiceError):
    """An offline fixture engine/backend was asked for an unprimed key."""

    def __init__(self, kind: str, key: str):
        self.kind = kind
        self.key = key
        super().__init__(f"{kind} fixture miss: {key}")


class EngineError(ExternalServiceError):
    """Live translation engine failure, with retry metadata."""

    def __init__(self, msg: str, retriable: bool = False, retry_after: float | None = None):
        self.retriable = retriable
        self.retry_after = retry_after
        super().__init__(msg)


class CacheIntegrityError(DataError):
    """Two different translations recorded for the same cache key."""


class ProtocolError(ExternalServiceError):
    """Encoder response violated the wire contract; never repaired silently."""


class NoSignalError(PipelineError):
    """Every language was excluded for a context; carries per-language reasons."""

    def __init__(self, instance_id: str, context_index: int, reasons: dict[str, str]):
        self.instance_id = instance_id
        self.context_index = context_index
        self.reasons = dict(reasons)
        detail = "; ".join(f"{lang}: {why}" for lang, why in sorted(reasons.items()))
        super().__init__(
            f"no signal for instance {instance_id!r} context {context_index} ({detail})"
        )


class UndefinedCorrelationError(PipelineError):
    """Correlation undefined for the given series (zero variance or norm)."""
