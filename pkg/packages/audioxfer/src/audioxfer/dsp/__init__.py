"""Audio feature extraction.

Turns raw audio into three-channel log-mel tensors:

    from audioxfer.dsp import load_audio, canonical_window_specs, multires_melspec

    w = load_audio("dog.wav", target_sr=44100)
    t = multires_melspec(w, canonical_window_specs(44100), target_width=250)
"""

from audioxfer.dsp.augment import (
    AugmentationPolicy,
    AugmentationVariant,
    pitch_shift,
    time_stretch,
)
from audioxfer.dsp.config import ChannelMode, DspConfig, WindowSetting
from audioxfer.dsp.io import fix_length, load_audio, probe_audio
from audioxfer.dsp.mel import (
    LOG_EPS,
    log_mel_channel,
    mel_filterbank,
    multires_melspec,
    normalize_tensor,
    power_spectrogram,
    replicated_melspec,
)
from audioxfer.dsp.types import (
    FilterbankMatrix,
    MelTensor,
    Waveform,
    WindowSpec,
    canonical_window_specs,
)

__all__ = [
    "AugmentationPolicy",
    "AugmentationVariant",
    "ChannelMode",
    "DspConfig",
    "FilterbankMatrix",
    "LOG_EPS",
    "MelTensor",
    "Waveform",
    "WindowSetting",
    "WindowSpec",
    "canonical_window_specs",
    "fix_length",
    "load_audio",
    "log_mel_channel",
    "mel_filterbank",
    "multires_melspec",
    "normalize_tensor",
    "pitch_shift",
    "power_spectrogram",
    "probe_audio",
    "replicated_melspec",
    "time_stretch",
]
