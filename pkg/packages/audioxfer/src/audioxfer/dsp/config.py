"""Feature extraction settings."""

import hashlib
import json
from enum import Enum
from typing import Any

from pydantic import Field, field_validator

from audioxfer.base import BaseSchema
from audioxfer.dsp.mel import MEL_SCALES, multires_melspec, normalize_tensor, replicated_melspec
from audioxfer.dsp.types import CANONICAL_WINDOWS_MS, N_MELS, MelTensor, Waveform, WindowSpec


class ChannelMode(str, Enum):
    """How the three input channels are built."""

    MULTIRES = "multires"
    REPLICATED = "replicated"


class WindowSetting(BaseSchema):
    window_ms: float
    hop_ms: float


class DspConfig(BaseSchema):
    """Log-mel settings shared by every clip of a feature store."""

    channel_mode: ChannelMode = ChannelMode.MULTIRES
    mel_scale: str = "slaney"
    n_mels: int = Field(default=N_MELS, gt=0)
    windows: list[WindowSetting] = Field(
        default_factory=lambda: [WindowSetting(window_ms=w, hop_ms=h) for w, h in CANONICAL_WINDOWS_MS]
    )
    normalize: bool = True

    @field_validator("mel_scale")
    @classmethod
    def _check_scale(cls, v: str) -> str:
        if v not in MEL_SCALES:
            raise ValueError(f"mel_scale must be one of {MEL_SCALES}")
        return v

    @field_validator("windows")
    @classmethod
    def _check_windows(cls, v: list[WindowSetting]) -> list[WindowSetting]:
        if len(v) != 3:
            raise ValueError("exactly three windows are required")
        for win in v:
            if win.hop_ms >= win.window_ms:
                raise ValueError(f"hop {win.hop_ms} ms must be below window {win.window_ms} ms")
        return v

    def window_specs(self, sample_rate: int) -> tuple[WindowSpec, WindowSpec, WindowSpec]:
        a, b, c = (
            WindowSpec.for_rate(win.window_ms, win.hop_ms, sample_rate, n_mels=self.n_mels)
            for win in self.windows
        )
        return (a, b, c)

    def extract(self, w: Waveform, target_width: int) -> MelTensor:
        """Raw (unnormalized) feature tensor for one waveform."""
        specs = self.window_specs(w.sample_rate)
        if self.channel_mode == ChannelMode.REPLICATED:
            return replicated_melspec(w, specs[0], target_width, mel_scale=self.mel_scale)
        return multires_melspec(w, specs, target_width, mel_scale=self.mel_scale)

    def prepare(self, t: MelTensor) -> MelTensor:
        """Apply the configured normalization to a stored tensor."""
        return normalize_tensor(t) if self.normalize else t

    def config_hash(self, extra: dict[str, Any] | None = None) -> str:
        """sha256 over the canonical JSON of this config plus ``extra``."""
        payload = {"dsp": self.model_dump(mode="json"), **(extra or {})}
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()
