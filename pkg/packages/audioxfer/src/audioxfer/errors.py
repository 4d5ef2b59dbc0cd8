"""Exception hierarchy shared by every audioxfer module.

All errors derive from :class:`AudioXferError` so callers (and the CLI) can
separate library failures from programming errors.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from audioxfer.training.types import RunRecord


class AudioXferError(Exception):
    """Base class for all audioxfer errors."""

    pass


class ConfigurationError(AudioXferError):
    """A configuration value is invalid or inconsistent."""

    pass


class ConfigValidationError(ConfigurationError):
    """Config validation error with detailed error information."""

    def __init__(self, message: str, errors: list[dict[str, str]]) -> None:
        super().__init__(message)
        self.errors = errors


class DomainError(AudioXferError):
    """An argument lies outside the operation's domain."""

    pass


class AudioDecodeError(AudioXferError):
    """An audio file could not be decoded."""

    def __init__(self, path: Any, reason: str) -> None:
        super().__init__(f"Cannot decode audio file {path}: {reason}")
        self.path = path


class EmptyInputError(AudioXferError):
    """Audio input holds no samples."""

    pass


class TooShortError(AudioXferError):
    """Waveform is shorter than one analysis window."""

    pass


class IngestionError(AudioXferError):
    """Dataset metadata is missing or unreadable."""

    pass


class IntegrityError(AudioXferError):
    """Stored data disagrees with what a manifest or plan expects."""

    pass


class FeatureExtractionError(AudioXferError):
    """One or more clips failed feature extraction."""

    def __init__(self, failures: dict[str, str]) -> None:
        lines = ", ".join(f"{clip}: {reason}" for clip, reason in sorted(failures.items()))
        super().__init__(f"Feature extraction failed for {len(failures)} clip(s): {lines}")
        self.failures = failures


class InitializationError(AudioXferError):
    """A model could not be initialized (e.g. missing weight archive)."""

    pass


class DivergedRunError(AudioXferError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, record: RunRecord | None = None) -> None:
        super().__init__(f"Training diverged at epoch {epoch}: non-finite loss")
        self.epoch = epoch
        self.record = record


class InsufficientSamplesError(AudioXferError):
    """Too few data points for the requested statistic."""

    pass


class DegenerateInputError(AudioXferError):
    """Input has no variance to analyze."""

    pass


class NumericalError(AudioXferError):
    """A computation produced non-finite values."""

    def __init__(self, message: str, step: int | None = None) -> None:
        super().__init__(message)
        self.step = step


class InsufficientMembersError(AudioXferError):
    """Fewer than two healthy ensemble members remain."""

    pass


class MissingArtifactError(AudioXferError):
    """A prerequisite artifact (feature store, run, archive) does not exist."""

    pass


class RegistryLockedError(AudioXferError):
    """Another process holds the output directory lock."""

    pass
