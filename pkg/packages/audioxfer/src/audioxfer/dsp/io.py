"""Audio decoding and resampling."""

import logging
from pathlib import Path

import librosa
import numpy as np
import soundfile as sf

from audioxfer.dsp.types import Waveform
from audioxfer.errors import AudioDecodeError, EmptyInputError

logger = logging.getLogger(__name__)

SUPPORTED_SUFFIXES = frozenset({".wav", ".aif", ".aiff", ".ogg", ".flac"})


def load_audio(path: str | Path, target_sr: int) -> Waveform:
    """Decode an audio file into a mono waveform at ``target_sr``.

    Multichannel sources are averaged to mono. Samples are peak-normalized
    only when their absolute maximum exceeds 1.

    Args:
        path: Audio file (WAV, AIFF or OGG)
        target_sr: Output sample rate in Hz

    Returns:
        Mono Waveform at exactly ``target_sr``

    Raises:
        AudioDecodeError: File is missing, unreadable or not audio
        EmptyInputError: File decodes to zero samples
    """
    path = Path(path)
    try:
        data, source_sr = sf.read(str(path), dtype="float32", always_2d=True)
    except (sf.LibsndfileError, RuntimeError, OSError) as e:
        raise AudioDecodeError(path, str(e)) from e

    if data.shape[0] == 0:
        raise EmptyInputError(f"Audio file {path} contains no samples")

    samples = data.mean(axis=1) if data.shape[1] > 1 else data[:, 0]

    if source_sr != target_sr:
        logger.debug(f"Resampling {path.name} from {source_sr} Hz to {target_sr} Hz")
        samples = librosa.resample(samples, orig_sr=source_sr, target_sr=target_sr)

    peak = float(np.max(np.abs(samples)))
    if peak > 1.0:
        samples = samples / peak

    return Waveform(samples=samples.astype(np.float32), sample_rate=target_sr)


def fix_length(w: Waveform, n_samples: int) -> Waveform:
    """Right-pad with zeros or trim to exactly ``n_samples``."""
    samples = librosa.util.fix_length(w.samples, size=n_samples)
    return Waveform(samples=samples, sample_rate=w.sample_rate)


def probe_audio(path: str | Path) -> tuple[float, int]:
    """Return (duration seconds, sample rate) without decoding samples."""
    path = Path(path)
    try:
        info = sf.info(str(path))
    except (sf.LibsndfileError, RuntimeError, OSError) as e:
        raise AudioDecodeError(path, str(e)) from e
    return float(info.duration), int(info.samplerate)
