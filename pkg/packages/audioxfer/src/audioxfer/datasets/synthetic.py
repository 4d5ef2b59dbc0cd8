"""Seeded synthetic tone corpus for CPU-scale runs.

Two classes: "steady" (a pure sine held for the whole clip) and "pulsed"
(a harmonic tone gated on and off). Clips are laid out like ESC-50 so the
regular manifest builder reads them.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd
import soundfile as sf

from audioxfer.datasets.models import DATASET_INFO, DatasetKind

logger = logging.getLogger(__name__)

TONE_CLASSES = ("steady", "pulsed")
TONE_FOLDS = 5


def steady_tone(freq: float, n_samples: int, sample_rate: int, amplitude: float = 0.5) -> np.ndarray:
    t = np.arange(n_samples) / sample_rate
    return (amplitude * np.sin(2 * np.pi * freq * t)).astype(np.float32)


def pulsed_tone(
    freq: float,
    n_samples: int,
    sample_rate: int,
    pulses: int = 4,
    amplitude: float = 0.5,
) -> np.ndarray:
    """Three-harmonic tone switched on for the first half of each of ``pulses`` periods."""
    t = np.arange(n_samples) / sample_rate
    tone = sum(np.sin(2 * np.pi * freq * k * t) / k for k in (1, 2, 3))
    period = n_samples / pulses
    gate = ((np.arange(n_samples) % period) < period / 2).astype(np.float64)
    return (amplitude * tone * gate / 1.84).astype(np.float32)


def tone_burst(
    freq: float,
    n_samples: int,
    sample_rate: int,
    start: float,
    stop: float,
    amplitude: float = 0.5,
) -> np.ndarray:
    """Silence except a sine between fractions ``start`` and ``stop`` of the clip."""
    out = np.zeros(n_samples, dtype=np.float32)
    lo, hi = int(start * n_samples), int(stop * n_samples)
    out[lo:hi] = steady_tone(freq, hi - lo, sample_rate, amplitude)
    return out


def write_tone_dataset(
    root: str | Path,
    n_clips: int = 100,
    seed: int = 0,
    duration_s: float | None = None,
    sample_rate: int | None = None,
) -> Path:
    """Write a balanced two-class tone corpus.

    Layout: ``<root>/audio/*.wav`` and ``<root>/meta/tones.csv`` with
    columns filename, fold, target, category.

    Args:
        root: Output directory
        n_clips: Total clips (rounded down to an even number)
        seed: Generator seed
        duration_s: Clip length (default: the tones corpus nominal length)
        sample_rate: Sample rate (default: the tones corpus rate)

    Returns:
        The corpus root
    """
    info = DATASET_INFO[DatasetKind.TONES]
    duration_s = duration_s or info.duration_s
    sample_rate = sample_rate or info.sample_rate
    n_samples = int(round(duration_s * sample_rate))

    root = Path(root)
    (root / "audio").mkdir(parents=True, exist_ok=True)
    (root / "meta").mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n_clips - n_clips % 2):
        target = i % 2
        category = TONE_CLASSES[target]
        freq = float(rng.uniform(300.0, 3000.0))
        if category == "steady":
            samples = steady_tone(freq, n_samples, sample_rate)
        else:
            samples = pulsed_tone(freq, n_samples, sample_rate, pulses=int(rng.integers(3, 6)))
        samples = samples + rng.normal(0.0, 0.01, n_samples).astype(np.float32)

        filename = f"tone-{i:04d}-{category}.wav"
        sf.write(root / "audio" / filename, samples, sample_rate, subtype="FLOAT")
        rows.append(
            {
                "filename": filename,
                "fold": (i // 2) % TONE_FOLDS + 1,
                "target": target,
                "category": category,
            }
        )

    pd.DataFrame(rows).to_csv(root / "meta" / "tones.csv", index=False)
    logger.info(f"Wrote {len(rows)} tone clips to {root}")
    return root
