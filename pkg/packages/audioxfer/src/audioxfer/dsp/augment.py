"""Time-stretch and pitch-shift augmentation on raw audio."""

import logging
from dataclasses import dataclass

import librosa
import numpy as np
from pydantic import Field, field_validator

from audioxfer.base import BaseSchema
from audioxfer.dsp.types import Waveform
from audioxfer.errors import DomainError

logger = logging.getLogger(__name__)

STRETCH_RANGE = (0.5, 2.0)
SEMITONE_RANGE = (-12.0, 12.0)
POLICY_SEMITONE_RANGE = (-4.0, 4.0)


def time_stretch(w: Waveform, rate: float) -> Waveform:
    """Phase-vocoder stretch; output length is about ``len / rate``.

    Raises:
        DomainError: rate <= 0 or outside [0.5, 2.0]
    """
    if rate <= 0:
        raise DomainError(f"Stretch rate must be positive, got {rate}")
    lo, hi = STRETCH_RANGE
    if not lo <= rate <= hi:
        raise DomainError(f"Stretch rate {rate} outside [{lo}, {hi}]")
    if rate == 1.0:
        return Waveform(samples=w.samples.copy(), sample_rate=w.sample_rate)
    out = librosa.effects.time_stretch(w.samples, rate=rate)
    return Waveform(samples=np.nan_to_num(out), sample_rate=w.sample_rate)


def pitch_shift(w: Waveform, semitones: float) -> Waveform:
    """Shift pitch by ``semitones`` keeping length and sample rate.

    Raises:
        DomainError: semitones outside [-12, 12]
    """
    lo, hi = SEMITONE_RANGE
    if not lo <= semitones <= hi:
        raise DomainError(f"Pitch shift {semitones} semitones outside [{lo}, {hi}]")
    if semitones == 0:
        return Waveform(samples=w.samples.copy(), sample_rate=w.sample_rate)
    out = librosa.effects.pitch_shift(w.samples, sr=w.sample_rate, n_steps=semitones)
    return Waveform(samples=np.nan_to_num(out), sample_rate=w.sample_rate)


@dataclass(frozen=True)
class AugmentationVariant:
    """One augmented copy of a clip: ``kind`` is "stretch" or "pitch"."""

    index: int
    kind: str
    amount: float

    @property
    def suffix(self) -> str:
        return f"aug-{self.index}"

    def apply(self, w: Waveform) -> Waveform:
        if self.kind == "stretch":
            return time_stretch(w, self.amount)
        return pitch_shift(w, self.amount)


class AugmentationPolicy(BaseSchema):
    """Which augmented copies each training clip yields.

    The default yields four copies: stretch {0.81, 1.23}, pitch {-2, +2}.
    """

    enabled: bool = False
    stretch_rates: list[float] = Field(default_factory=lambda: [0.81, 1.23])
    pitch_semitones: list[float] = Field(default_factory=lambda: [-2.0, 2.0])

    @field_validator("stretch_rates")
    @classmethod
    def _check_rates(cls, v: list[float]) -> list[float]:
        lo, hi = STRETCH_RANGE
        for rate in v:
            if not lo <= rate <= hi:
                raise ValueError(f"stretch rate {rate} outside [{lo}, {hi}]")
        return v

    @field_validator("pitch_semitones")
    @classmethod
    def _check_semitones(cls, v: list[float]) -> list[float]:
        lo, hi = POLICY_SEMITONE_RANGE
        for s in v:
            if not lo <= s <= hi:
                raise ValueError(f"pitch shift {s} outside [{lo}, {hi}]")
        return v

    def variants(self) -> list[AugmentationVariant]:
        """Ordered variants; empty when the policy is disabled."""
        if not self.enabled:
            return []
        out = [AugmentationVariant(i, "stretch", r) for i, r in enumerate(self.stretch_rates)]
        offset = len(out)
        out += [
            AugmentationVariant(offset + i, "pitch", s) for i, s in enumerate(self.pitch_semitones)
        ]
        return out

    @property
    def cardinality(self) -> int:
        return len(self.variants())
