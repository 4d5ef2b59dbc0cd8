"""Binary feature cache.

Layout::

    <root>/store.json                     index, written last and atomically
    <root>/manifest.csv                   clips, labels and folds the store was built from
    <root>/records/<clip_id>.bin          base record
    <root>/records/<clip_id>.aug-<k>.bin  augmented record

Records are raw little-endian float32, row-major, shape (3, n_mels, W).
Features are stored unnormalized; the store's DspConfig normalizes on read.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from audioxfer.datasets.models import ClipEntry, DatasetKind, DatasetManifest, dataset_info
from audioxfer.dsp.augment import AugmentationPolicy, AugmentationVariant
from audioxfer.dsp.config import DspConfig
from audioxfer.dsp.io import fix_length, load_audio
from audioxfer.dsp.types import MelTensor
from audioxfer.errors import (
    AudioXferError,
    FeatureExtractionError,
    IntegrityError,
    MissingArtifactError,
)

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
STORE_FILE = "store.json"
MANIFEST_FILE = "manifest.csv"
RECORDS_DIR = "records"
DTYPE = "<f4"


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)


@dataclass(frozen=True)
class RecordInfo:
    """Index entry for one cached tensor."""

    key: str
    file: str
    shape: tuple[int, ...]
    nbytes: int
    sha256: str
    clip_id: str
    label: int
    parent: str | None = None
    variant: str | None = None

    @property
    def is_augmented(self) -> bool:
        return self.parent is not None

    def to_dict(self) -> dict[str, Any]:
        return {
            "file": self.file,
            "shape": list(self.shape),
            "nbytes": self.nbytes,
            "sha256": self.sha256,
            "clip_id": self.clip_id,
            "label": self.label,
            "parent": self.parent,
            "variant": self.variant,
        }

    @classmethod
    def from_dict(cls, key: str, d: dict[str, Any]) -> RecordInfo:
        return cls(
            key=key,
            file=d["file"],
            shape=tuple(d["shape"]),
            nbytes=int(d["nbytes"]),
            sha256=d["sha256"],
            clip_id=d["clip_id"],
            label=int(d["label"]),
            parent=d.get("parent"),
            variant=d.get("variant"),
        )


def record_key(clip_id: str, variant: AugmentationVariant | None = None) -> str:
    return clip_id if variant is None else f"{clip_id}.{variant.suffix}"


class FeatureStore:
    """Read access to a materialized feature cache.

    Example:
        store = FeatureStore.open("features/esc50")
        x = store.read("1-100032-A-0")  # (3, 128, 250) float32
    """

    def __init__(self, root: Path, meta: dict[str, Any]) -> None:
        self.root = Path(root)
        self.meta = meta
        self.records: dict[str, RecordInfo] = {
            key: RecordInfo.from_dict(key, d) for key, d in meta["records"].items()
        }
        self.dsp = DspConfig.model_validate(meta["dsp"])

    @classmethod
    def open(cls, root: str | Path) -> FeatureStore:
        """Open an existing store.

        Raises:
            MissingArtifactError: No store.json under root
            IntegrityError: Unsupported format version
        """
        root = Path(root)
        index = root / STORE_FILE
        if not index.exists():
            raise MissingArtifactError(
                f"No feature store at {root} (missing {STORE_FILE}); run `audioxfer prep` first"
            )
        with open(index) as f:
            meta = json.load(f)
        version = meta.get("format_version")
        if version != FORMAT_VERSION:
            raise IntegrityError(
                f"Feature store {root} has format version {version}, expected {FORMAT_VERSION}"
            )
        return cls(root, meta)

    @property
    def dataset_kind(self) -> DatasetKind:
        return DatasetKind(self.meta["dataset_kind"])

    @property
    def class_names(self) -> list[str]:
        return list(self.meta["class_names"])

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @property
    def shape(self) -> tuple[int, int, int]:
        c, m, w = self.meta["shape"]
        return (int(c), int(m), int(w))

    @property
    def config_hash(self) -> str:
        return str(self.meta["config_hash"])

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, key: str) -> bool:
        return key in self.records

    def manifest(self) -> DatasetManifest:
        """The manifest the store was built from, for fold planning without the corpus.

        Raises:
            MissingArtifactError: No manifest.csv under root
        """
        path = self.root / MANIFEST_FILE
        if not path.exists():
            raise MissingArtifactError(
                f"Feature store {self.root} has no {MANIFEST_FILE}; re-run `audioxfer prep`"
            )
        df = pd.read_csv(path, dtype={"clip_id": str})
        entries = [
            ClipEntry(
                clip_id=row.clip_id,
                path=Path(row.path),
                label=int(row.label),
                class_name=str(row.class_name),
                fold=None if pd.isna(row.fold) else int(row.fold),
                duration=None if pd.isna(row.duration) else float(row.duration),
                source_sr=None if pd.isna(row.source_sr) else int(row.source_sr),
            )
            for row in df.itertuples(index=False)
        ]
        return DatasetManifest(self.dataset_kind, entries, self.class_names)

    def path_for(self, key: str) -> Path:
        return self.root / self.records[key].file

    def keys_for(self, clip_id: str, include_augmented: bool = False) -> list[str]:
        """Record keys for a clip, base record first.

        Raises:
            IntegrityError: Clip has no base record
        """
        if clip_id not in self.records:
            raise IntegrityError(f"Feature store {self.root} has no record for clip '{clip_id}'")
        keys = [clip_id]
        if include_augmented:
            keys += sorted(
                k for k, r in self.records.items() if r.parent == clip_id and r.is_augmented
            )
        return keys

    def label(self, key: str) -> int:
        return self.records[key].label

    def read(self, key: str) -> np.ndarray:
        """Raw float32 tensor for a record, bit-identical to what was written."""
        if key not in self.records:
            raise IntegrityError(f"Feature store {self.root} has no record '{key}'")
        info = self.records[key]
        data = np.fromfile(self.root / info.file, dtype=DTYPE)
        if data.size * 4 != info.nbytes:
            raise IntegrityError(
                f"Record '{key}' holds {data.size * 4} bytes, index says {info.nbytes}"
            )
        return data.reshape(info.shape)

    def read_tensor(self, key: str) -> MelTensor:
        """Record as a MelTensor with the store's normalization applied."""
        return self.dsp.prepare(MelTensor(values=self.read(key)))

    def verify(self) -> None:
        """Recompute every record checksum.

        Raises:
            IntegrityError: A record is missing or its bytes changed
        """
        bad = []
        for key, info in self.records.items():
            path = self.root / info.file
            if not path.exists():
                bad.append(f"{key}: missing")
            elif sha256_file(path) != info.sha256:
                bad.append(f"{key}: checksum mismatch")
        if bad:
            raise IntegrityError(
                f"Feature store {self.root} failed verification for {len(bad)} record(s): "
                + ", ".join(bad[:10])
            )


def _store_hash(
    manifest: DatasetManifest, dsp: DspConfig, policy: AugmentationPolicy
) -> str:
    info = manifest.info
    ids_digest = sha256_bytes("\n".join(sorted(manifest.clip_ids)).encode())
    return dsp.config_hash(
        {
            "dataset_kind": DatasetKind(manifest.dataset_kind).value,
            "sample_rate": info.sample_rate,
            "n_samples": info.n_samples,
            "width": info.width,
            "augmentation": policy.model_dump(mode="json"),
            "clips": ids_digest,
        }
    )


def _extract_clip(
    job: tuple[str, str, int, str, dict[str, Any], dict[str, Any], str]
) -> tuple[str, list[dict[str, Any]] | None, str | None]:
    """Extract and write all records of one clip. Runs in worker processes."""
    clip_id, audio_path, label, kind, dsp_dump, policy_dump, out_dir = job
    try:
        info = dataset_info(kind)
        dsp = DspConfig.model_validate(dsp_dump)
        policy = AugmentationPolicy.model_validate(policy_dump)
        w = fix_length(load_audio(audio_path, info.sample_rate), info.n_samples)

        written = []
        variants: list[AugmentationVariant | None] = [None, *policy.variants()]
        for variant in variants:
            source = w if variant is None else fix_length(variant.apply(w), info.n_samples)
            tensor = dsp.extract(source, info.width)
            data = tensor.values.astype(DTYPE).tobytes(order="C")
            key = record_key(clip_id, variant)
            rel = f"{RECORDS_DIR}/{key}.bin"
            _atomic_write(Path(out_dir) / rel, data)
            written.append(
                {
                    "key": key,
                    "file": rel,
                    "shape": list(tensor.shape),
                    "nbytes": len(data),
                    "sha256": sha256_bytes(data),
                    "clip_id": clip_id,
                    "label": label,
                    "parent": None if variant is None else clip_id,
                    "variant": None if variant is None else variant.suffix,
                }
            )
        return clip_id, written, None
    except (AudioXferError, OSError, ValueError) as e:
        return clip_id, None, f"{type(e).__name__}: {e}"


def cache_features(
    manifest: DatasetManifest,
    dsp: DspConfig,
    policy: AugmentationPolicy,
    out_dir: str | Path,
    workers: int = 0,
) -> FeatureStore:
    """Materialize one record per clip plus augmented records.

    Re-running with an identical config verifies checksums and rewrites
    nothing. The index is written only after every clip succeeds.

    Args:
        manifest: Clips to extract
        dsp: Feature settings
        policy: Augmentation policy (disabled policy yields base records only)
        out_dir: Store root
        workers: Worker processes (0 = extract in this process)

    Returns:
        The opened FeatureStore

    Raises:
        FeatureExtractionError: One or more clips failed
    """
    out = Path(out_dir)
    config_hash = _store_hash(manifest, dsp, policy)

    if (out / STORE_FILE).exists():
        existing = FeatureStore.open(out)
        if existing.config_hash == config_hash:
            existing.verify()
            logger.info(f"Feature store {out} is up to date ({len(existing)} records verified)")
            return existing
        logger.warning(f"Feature store {out} was built with a different config; rebuilding")
        (out / STORE_FILE).unlink()

    (out / RECORDS_DIR).mkdir(parents=True, exist_ok=True)
    kind = DatasetKind(manifest.dataset_kind).value
    dsp_dump = dsp.model_dump(mode="json")
    policy_dump = policy.model_dump(mode="json")
    jobs = [
        (e.clip_id, str(e.path), e.label, kind, dsp_dump, policy_dump, str(out))
        for e in manifest.entries
    ]

    if workers > 0:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_extract_clip, jobs, chunksize=8))
    else:
        results = [_extract_clip(job) for job in jobs]

    records: dict[str, dict[str, Any]] = {}
    failures: dict[str, str] = {}
    for clip_id, written, error in results:
        if error is not None or written is None:
            failures[clip_id] = error or "unknown error"
            continue
        for rec in written:
            records[rec.pop("key")] = rec

    if failures:
        raise FeatureExtractionError(failures)

    info = manifest.info
    sr = info.sample_rate
    meta = {
        "format_version": FORMAT_VERSION,
        "config_hash": config_hash,
        "dataset_kind": kind,
        "class_names": manifest.class_names,
        "dtype": DTYPE,
        "order": "C",
        "shape": [3, dsp.n_mels, info.width],
        "sample_rate": sr,
        "mel_scale": dsp.mel_scale,
        "channel_mode": dsp.channel_mode,
        "channel_specs": [
            {"window_ms": s.window_ms, "hop_ms": s.hop_ms, "n_mels": s.n_mels, "fft_size": s.fft_size}
            for s in dsp.window_specs(sr)
        ],
        "normalization": "per-channel-zscore" if dsp.normalize else "none",
        "dsp": dsp_dump,
        "augmentation": {
            **policy_dump,
            "variants": [
                {"suffix": v.suffix, "kind": v.kind, "amount": v.amount} for v in policy.variants()
            ],
        },
        "records": records,
    }
    manifest.to_dataframe().to_csv(out / MANIFEST_FILE, index=False)
    _atomic_write(out / STORE_FILE, json.dumps(meta, indent=2).encode())
    logger.info(f"Cached {len(records)} records for {len(manifest)} clips in {out}")
    return FeatureStore(out, meta)
