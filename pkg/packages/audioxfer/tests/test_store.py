"""Tests for the binary feature cache."""

import json

import numpy as np
import pytest

from audioxfer.datasets import (
    ClipEntry,
    DatasetManifest,
    FeatureStore,
    build_manifest,
    cache_features,
    write_tone_dataset,
)
from audioxfer.datasets.store import MANIFEST_FILE, STORE_FILE, sha256_file
from audioxfer.dsp import AugmentationPolicy, DspConfig
from audioxfer.errors import FeatureExtractionError, IntegrityError, MissingArtifactError


@pytest.fixture
def small_corpus(tmp_path):
    """Ten tone clips, one pair per fold."""
    root = write_tone_dataset(tmp_path / "corpus", n_clips=10, seed=3)
    return build_manifest("tones", root)


class TestCacheFeatures:
    """Materializing records."""

    def test_one_record_per_clip(self, tone_store):
        assert len(tone_store) == 100
        assert tone_store.shape == (3, 128, 32)
        assert not any(r.is_augmented for r in tone_store.records.values())

    def test_augmented_counts(self, augmented_store):
        """Base plus policy cardinality times clip count."""
        augmented = [r for r in augmented_store.records.values() if r.is_augmented]
        assert len(augmented_store) == 10 + 4 * 10
        assert len(augmented) == 40
        assert {r.variant for r in augmented} == {"aug-0", "aug-1", "aug-2", "aug-3"}

    def test_records_keep_shape(self, augmented_store):
        for key in list(augmented_store.records)[:10]:
            assert augmented_store.read(key).shape == (3, 128, 32)

    def test_stored_unnormalized(self, tone_store):
        key = next(iter(tone_store.records))
        raw = tone_store.read(key)
        assert raw.dtype == np.float32
        assert abs(float(tone_store.read_tensor(key).values.mean())) < 1e-3

    def test_second_run_rewrites_nothing(self, small_corpus, tmp_path):
        out = tmp_path / "store"
        first = cache_features(small_corpus, DspConfig(), AugmentationPolicy(), out)
        stamps = {k: first.path_for(k).stat().st_mtime_ns for k in first.records}

        second = cache_features(small_corpus, DspConfig(), AugmentationPolicy(), out)

        assert second.config_hash == first.config_hash
        assert {k: second.path_for(k).stat().st_mtime_ns for k in second.records} == stamps

    def test_config_change_rebuilds(self, small_corpus, tmp_path):
        out = tmp_path / "store"
        first = cache_features(small_corpus, DspConfig(), AugmentationPolicy(), out)
        second = cache_features(small_corpus, DspConfig(n_mels=64), AugmentationPolicy(), out)
        assert second.config_hash != first.config_hash
        assert second.shape == (3, 64, 32)

    def test_failed_clip_reported(self, small_corpus, tmp_path):
        ghost = ClipEntry("ghost", tmp_path / "ghost.wav", 0, "pulsed", 1)
        manifest = DatasetManifest(
            small_corpus.dataset_kind, [*small_corpus.entries, ghost], small_corpus.class_names
        )
        out = tmp_path / "store"
        with pytest.raises(FeatureExtractionError, match="ghost") as exc:
            cache_features(manifest, DspConfig(), AugmentationPolicy(), out)
        assert list(exc.value.failures) == ["ghost"]
        assert not (out / STORE_FILE).exists()

    def test_index_describes_layout(self, tone_store):
        meta = json.loads((tone_store.root / STORE_FILE).read_text())
        assert meta["dtype"] == "<f4"
        assert meta["shape"] == [3, 128, 32]
        assert [s["window_ms"] for s in meta["channel_specs"]] == [25.0, 50.0, 100.0]
        assert meta["normalization"] == "per-channel-zscore"


class TestFeatureStore:
    """Reading and verifying an existing store."""

    def test_open_missing(self, tmp_path):
        with pytest.raises(MissingArtifactError, match="prep"):
            FeatureStore.open(tmp_path)

    def test_reopen(self, tone_store):
        again = FeatureStore.open(tone_store.root)
        key = next(iter(tone_store.records))
        assert np.array_equal(again.read(key), tone_store.read(key))
        assert again.class_names == tone_store.class_names

    def test_manifest_round_trip(self, tone_store, tone_manifest):
        restored = tone_store.manifest()
        assert restored.clip_ids == tone_manifest.clip_ids
        assert restored.folds() == tone_manifest.folds()
        assert [e.label for e in restored.entries] == [e.label for e in tone_manifest.entries]
        assert all(e.source_sr == 22050 for e in restored.entries)
        assert all(e.duration == pytest.approx(0.5) for e in restored.entries)

    def test_manifest_missing(self, small_corpus, tmp_path):
        store = cache_features(small_corpus, DspConfig(), AugmentationPolicy(), tmp_path / "s")
        (store.root / MANIFEST_FILE).unlink()
        with pytest.raises(MissingArtifactError):
            store.manifest()

    def test_checksums(self, tone_store):
        key = next(iter(tone_store.records))
        assert sha256_file(tone_store.path_for(key)) == tone_store.records[key].sha256
        tone_store.verify()

    def test_verify_detects_tampering(self, small_corpus, tmp_path):
        store = cache_features(small_corpus, DspConfig(), AugmentationPolicy(), tmp_path / "s")
        key = next(iter(store.records))
        path = store.path_for(key)
        data = bytearray(path.read_bytes())
        data[0] ^= 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(IntegrityError, match="checksum"):
            store.verify()

    def test_keys_for(self, augmented_store):
        clip = augmented_store.manifest().clip_ids[0]
        keys = augmented_store.keys_for(clip, include_augmented=True)
        assert keys[0] == clip
        assert keys[1:] == [f"{clip}.aug-{k}" for k in range(4)]
        with pytest.raises(IntegrityError):
            augmented_store.keys_for("ghost")
