"""Tests for time-stretch and pitch-shift augmentation."""

import numpy as np
import pytest
from pydantic import ValidationError

from audioxfer.dsp import AugmentationPolicy, Waveform, pitch_shift, time_stretch
from audioxfer.errors import DomainError

SR = 22050


def sine(freq: float, seconds: float = 1.0) -> Waveform:
    t = np.arange(int(seconds * SR)) / SR
    return Waveform(samples=0.5 * np.sin(2 * np.pi * freq * t), sample_rate=SR)


def dominant_hz(w: Waveform) -> float:
    """Frequency of the largest bin of the Hann-windowed spectrum."""
    x = w.samples * np.hanning(len(w))
    return float(np.argmax(np.abs(np.fft.rfft(x)))) * w.sample_rate / len(w)


class TestTimeStretch:
    """Phase-vocoder time stretching."""

    def test_unit_rate_keeps_length(self):
        w = sine(440.0)
        out = time_stretch(w, 1.0)
        assert len(out) == len(w)
        assert out.samples is not w.samples

    def test_double_rate_halves_length(self):
        w = sine(440.0, seconds=4.0)
        out = time_stretch(w, 2.0)
        assert out.duration == pytest.approx(2.0, rel=0.02)
        assert out.sample_rate == SR

    def test_pitch_preserved(self):
        out = time_stretch(sine(440.0), 0.8)
        assert dominant_hz(out) == pytest.approx(440.0, rel=0.02)

    @pytest.mark.parametrize("rate", [0.0, -1.0])
    def test_non_positive_rate(self, rate):
        with pytest.raises(DomainError, match="positive"):
            time_stretch(sine(440.0), rate)

    def test_rate_outside_range(self):
        with pytest.raises(DomainError):
            time_stretch(sine(440.0), 3.0)


class TestPitchShift:
    """Resampling-based pitch shifting."""

    def test_zero_shift_identity(self):
        w = sine(440.0)
        out = pitch_shift(w, 0)
        assert dominant_hz(out) == pytest.approx(dominant_hz(w))

    def test_octave_up(self):
        out = pitch_shift(sine(440.0), 12)
        assert len(out) == int(SR)
        assert dominant_hz(out) == pytest.approx(880.0, rel=0.02)

    def test_octave_down(self):
        out = pitch_shift(sine(440.0), -12)
        assert dominant_hz(out) == pytest.approx(220.0, rel=0.02)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            pitch_shift(sine(440.0), 13)


class TestAugmentationPolicy:
    """Which augmented copies a clip yields."""

    def test_disabled_by_default(self):
        policy = AugmentationPolicy()
        assert policy.variants() == []
        assert policy.cardinality == 0

    def test_four_variants(self):
        variants = AugmentationPolicy(enabled=True).variants()
        assert [(v.kind, v.amount) for v in variants] == [
            ("stretch", 0.81),
            ("stretch", 1.23),
            ("pitch", -2.0),
            ("pitch", 2.0),
        ]
        assert [v.suffix for v in variants] == ["aug-0", "aug-1", "aug-2", "aug-3"]

    def test_variant_applies_its_transform(self):
        w = sine(440.0)
        stretch, _, _, up = AugmentationPolicy(enabled=True).variants()
        assert len(stretch.apply(w)) > len(w)
        assert dominant_hz(up.apply(w)) > 440.0

    def test_policy_range_is_narrower(self):
        with pytest.raises(ValidationError):
            AugmentationPolicy(enabled=True, pitch_semitones=[6.0])
        with pytest.raises(ValidationError):
            AugmentationPolicy(enabled=True, stretch_rates=[2.5])
