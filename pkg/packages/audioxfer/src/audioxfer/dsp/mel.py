"""Log-mel feature extraction.

Three STFT resolutions are stacked into one (3, n_mels, W) tensor, each
channel resized along time to a common width. Normalization is a separate
step (:func:`normalize_tensor`) so cached features can record it.
"""

import logging
from collections.abc import Sequence

import librosa
import numpy as np
import torch
import torch.nn.functional as F

from audioxfer.dsp.types import FilterbankMatrix, MelTensor, Waveform, WindowSpec
from audioxfer.errors import ConfigurationError, DomainError, TooShortError

logger = logging.getLogger(__name__)

LOG_EPS = 1e-10
STD_FLOOR = 1e-8
MEL_SCALES = ("slaney", "htk")


def mel_filterbank(
    spec: WindowSpec, sample_rate: int, mel_scale: str = "slaney"
) -> FilterbankMatrix:
    """Triangular mel filters spanning 0 Hz to Nyquist.

    Args:
        spec: Window spec supplying ``fft_size`` and ``n_mels``
        sample_rate: Sample rate in Hz
        mel_scale: "slaney" (default) or "htk"

    Returns:
        FilterbankMatrix of shape (n_mels, fft_size // 2 + 1)

    Raises:
        ConfigurationError: More filters than FFT bins, or unknown scale
    """
    if sample_rate <= 0:
        raise DomainError(f"Sample rate must be positive, got {sample_rate}")
    if mel_scale not in MEL_SCALES:
        raise ConfigurationError(f"Unknown mel scale '{mel_scale}', expected one of {MEL_SCALES}")
    n_bins = spec.fft_size // 2 + 1
    if spec.n_mels > n_bins:
        raise ConfigurationError(
            f"n_mels ({spec.n_mels}) exceeds the number of FFT bins ({n_bins}) "
            f"for fft_size {spec.fft_size}"
        )

    htk = mel_scale == "htk"
    weights = librosa.filters.mel(
        sr=sample_rate,
        n_fft=spec.fft_size,
        n_mels=spec.n_mels,
        fmin=0.0,
        fmax=sample_rate / 2.0,
        htk=htk,
    )
    # Band edges are n_mels + 2 points; filters peak at the inner ones.
    center_hz = librosa.mel_frequencies(
        n_mels=spec.n_mels + 2, fmin=0.0, fmax=sample_rate / 2.0, htk=htk
    )[1:-1]

    empty = int(np.sum(weights.max(axis=1) <= 0))
    if empty:
        logger.warning(
            f"{empty} of {spec.n_mels} mel filters are empty at fft_size={spec.fft_size}"
        )
    return FilterbankMatrix(weights=weights.astype(np.float64), center_hz=center_hz, mel_scale=mel_scale)


def power_spectrogram(w: Waveform, spec: WindowSpec) -> np.ndarray:
    """Magnitude-squared STFT with a Hann window, centered reflect-padded frames."""
    win_length = spec.window_length(w.sample_rate)
    if len(w) < win_length:
        raise TooShortError(
            f"Waveform of {len(w)} samples is shorter than one {spec.window_ms} ms window "
            f"({win_length} samples)"
        )
    stft = librosa.stft(
        w.samples.astype(np.float64),
        n_fft=spec.fft_size,
        hop_length=spec.hop_length(w.sample_rate),
        win_length=win_length,
        window="hann",
        center=True,
        pad_mode="reflect",
    )
    return np.abs(stft) ** 2


def log_mel_channel(w: Waveform, spec: WindowSpec, mel_scale: str = "slaney") -> np.ndarray:
    """Single log-mel channel of shape (n_mels, T) with T = ceil(len / hop).

    Raises:
        TooShortError: Waveform shorter than one analysis window
    """
    power = power_spectrogram(w, spec)
    fb = mel_filterbank(spec, w.sample_rate, mel_scale=mel_scale)
    mel = fb.weights @ power
    return np.log(mel + LOG_EPS)


def resize_time(channel: np.ndarray, target_width: int) -> np.ndarray:
    """Bilinear resize along the time axis only."""
    n_mels, width = channel.shape
    if width == target_width:
        return channel
    t = torch.from_numpy(np.ascontiguousarray(channel, dtype=np.float32))[None, None]
    resized = F.interpolate(t, size=(n_mels, target_width), mode="bilinear", align_corners=False)
    return resized[0, 0].numpy()


def multires_melspec(
    w: Waveform,
    specs: Sequence[WindowSpec],
    target_width: int,
    mel_scale: str = "slaney",
) -> MelTensor:
    """Stack one log-mel channel per window spec, each resized to ``target_width``.

    Normalization is not applied here.
    """
    if len(specs) != 3:
        raise ConfigurationError(f"Expected exactly 3 window specs, got {len(specs)}")
    if target_width <= 0:
        raise ConfigurationError(f"target_width must be positive, got {target_width}")

    channels = [
        resize_time(log_mel_channel(w, spec, mel_scale=mel_scale), target_width) for spec in specs
    ]
    return MelTensor(values=np.stack(channels).astype(np.float32), channel_specs=tuple(specs))


def replicated_melspec(
    w: Waveform, spec: WindowSpec, target_width: int, mel_scale: str = "slaney"
) -> MelTensor:
    """One log-mel channel repeated three times."""
    channel = resize_time(log_mel_channel(w, spec, mel_scale=mel_scale), target_width)
    return MelTensor(
        values=np.stack([channel, channel, channel]).astype(np.float32),
        channel_specs=(spec, spec, spec),
    )


def normalize_tensor(t: MelTensor) -> MelTensor:
    """Per-channel z-score. Channels with std below 1e-8 become zeros."""
    values = t.values.astype(np.float64)
    mean = values.mean(axis=(1, 2), keepdims=True)
    std = values.std(axis=(1, 2), keepdims=True)
    flat = (std < STD_FLOOR).reshape(-1)
    safe_std = np.where(std < STD_FLOOR, 1.0, std)
    out = (values - mean) / safe_std
    out[flat] = 0.0
    return MelTensor(values=out.astype(np.float32), channel_specs=t.channel_specs)
