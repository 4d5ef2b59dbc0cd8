"""Core DSP data types."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from audioxfer.errors import ConfigurationError, DomainError, EmptyInputError

N_MELS = 128
CANONICAL_WINDOWS_MS: tuple[tuple[float, float], ...] = ((25.0, 10.0), (50.0, 25.0), (100.0, 50.0))


def next_power_of_two(n: int) -> int:
    """Smallest power of two >= n."""
    return 1 << max(0, math.ceil(math.log2(max(n, 1))))


def ms_to_samples(ms: float, sample_rate: int) -> int:
    """Convert a duration in milliseconds to a whole number of samples."""
    return int(round(ms * sample_rate / 1000.0))


@dataclass
class Waveform:
    """Mono audio samples with their sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float32)
        if self.samples.ndim != 1:
            raise DomainError(f"Waveform must be 1-D, got shape {self.samples.shape}")
        if self.samples.size == 0:
            raise EmptyInputError("Waveform has no samples")
        if not np.all(np.isfinite(self.samples)):
            raise DomainError("Waveform contains non-finite samples")
        if self.sample_rate <= 0:
            raise DomainError(f"Sample rate must be positive, got {self.sample_rate}")

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        """Duration in seconds."""
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class WindowSpec:
    """One STFT analysis resolution.

    Attributes:
        window_ms: Window length in milliseconds
        hop_ms: Hop length in milliseconds
        n_mels: Number of mel bins
        fft_size: FFT size in samples (power of two)
    """

    window_ms: float
    hop_ms: float
    n_mels: int = N_MELS
    fft_size: int = 2048

    def __post_init__(self) -> None:
        if self.hop_ms <= 0 or self.window_ms <= 0:
            raise ConfigurationError("window_ms and hop_ms must be positive")
        if self.hop_ms >= self.window_ms:
            raise ConfigurationError(
                f"hop_ms ({self.hop_ms}) must be smaller than window_ms ({self.window_ms})"
            )
        if self.fft_size <= 0 or self.fft_size & (self.fft_size - 1):
            raise ConfigurationError(f"fft_size must be a power of two, got {self.fft_size}")
        if self.n_mels <= 0:
            raise ConfigurationError(f"n_mels must be positive, got {self.n_mels}")

    @classmethod
    def for_rate(
        cls, window_ms: float, hop_ms: float, sample_rate: int, n_mels: int = N_MELS
    ) -> WindowSpec:
        """Build a spec whose FFT size is the smallest power of two covering the window."""
        fft_size = next_power_of_two(ms_to_samples(window_ms, sample_rate))
        return cls(window_ms=window_ms, hop_ms=hop_ms, n_mels=n_mels, fft_size=fft_size)

    def window_length(self, sample_rate: int) -> int:
        return ms_to_samples(self.window_ms, sample_rate)

    def hop_length(self, sample_rate: int) -> int:
        return max(1, ms_to_samples(self.hop_ms, sample_rate))


def canonical_window_specs(sample_rate: int) -> tuple[WindowSpec, WindowSpec, WindowSpec]:
    """The three resolutions {25,10}, {50,25}, {100,50} ms at a sample rate."""
    a, b, c = (WindowSpec.for_rate(w, h, sample_rate) for w, h in CANONICAL_WINDOWS_MS)
    return (a, b, c)


@dataclass
class FilterbankMatrix:
    """Mel filterbank mapping linear-frequency power bins to mel bins.

    Attributes:
        weights: (n_mels, fft_size // 2 + 1) nonnegative matrix
        center_hz: Center frequency of every filter
        mel_scale: "slaney" or "htk"
    """

    weights: np.ndarray
    center_hz: np.ndarray
    mel_scale: str = "slaney"

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.weights.shape[0]), int(self.weights.shape[1]))


@dataclass
class MelTensor:
    """Three-channel log-mel feature tensor of shape (3, n_mels, W)."""

    values: np.ndarray
    channel_specs: tuple[WindowSpec, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 3 or self.values.shape[0] != 3:
            raise DomainError(f"MelTensor must have shape (3, mels, W), got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("MelTensor contains non-finite values")

    @property
    def shape(self) -> tuple[int, int, int]:
        c, m, w = self.values.shape
        return (int(c), int(m), int(w))

    @property
    def width(self) -> int:
        return int(self.values.shape[2])
