"""Build clip manifests from each corpus's published layout."""

import logging
from collections import Counter
from collections.abc import Callable
from pathlib import Path

import pandas as pd

from audioxfer.datasets.models import (
    ClipEntry,
    DatasetKind,
    DatasetManifest,
    dataset_info,
)
from audioxfer.dsp.io import probe_audio
from audioxfer.errors import IngestionError, IntegrityError

logger = logging.getLogger(__name__)

GTZAN_AUDIO_DIRS = ("genres", "genres_original", "")
GTZAN_SUFFIXES = (".wav", ".au", ".aif", ".aiff", ".ogg")
GTZAN_PER_CLASS = 100


def _read_csv(path: Path, required: set[str]) -> pd.DataFrame:
    if not path.exists():
        raise IngestionError(f"Metadata file not found: {path}")
    try:
        df = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise IngestionError(f"Cannot parse metadata file {path}: {e}") from e
    missing = required - set(df.columns)
    if missing:
        raise IngestionError(f"Metadata file {path} lacks columns: {sorted(missing)}")
    return df


def _class_index(names: list[str]) -> dict[str, int]:
    return {name: i for i, name in enumerate(sorted(set(names)))}


def _rows_to_entries(
    df: pd.DataFrame, file_col: str, audio_path: Callable[[pd.Series], Path]
) -> tuple[list[ClipEntry], list[str]]:
    classes = _class_index(df["class_name"].astype(str).tolist())
    entries = []
    for _, row in df.iterrows():
        filename = str(row[file_col])
        entries.append(
            ClipEntry(
                clip_id=Path(filename).stem,
                path=audio_path(row),
                label=classes[str(row["class_name"])],
                class_name=str(row["class_name"]),
                fold=int(row["fold"]),
            )
        )
    return entries, sorted(classes)


def _esc50(root: Path) -> tuple[list[ClipEntry], list[str]]:
    df = _read_csv(root / "meta" / "esc50.csv", {"filename", "fold", "category"})
    df = df.rename(columns={"category": "class_name"})
    return _rows_to_entries(df, "filename", lambda row: root / "audio" / str(row["filename"]))


def _urbansound8k(root: Path) -> tuple[list[ClipEntry], list[str]]:
    df = _read_csv(
        root / "metadata" / "UrbanSound8K.csv", {"slice_file_name", "fold", "class"}
    )
    df = df.rename(columns={"class": "class_name"})
    return _rows_to_entries(
        df,
        "slice_file_name",
        lambda row: root / "audio" / f"fold{int(row['fold'])}" / str(row["slice_file_name"]),
    )


def _tones(root: Path) -> tuple[list[ClipEntry], list[str]]:
    df = _read_csv(root / "meta" / "tones.csv", {"filename", "fold", "category"})
    df = df.rename(columns={"category": "class_name"})
    return _rows_to_entries(df, "filename", lambda row: root / "audio" / str(row["filename"]))


def _gtzan(root: Path) -> tuple[list[ClipEntry], list[str]]:
    if not root.is_dir():
        raise IngestionError(f"GTZAN root is not a directory: {root}")
    for sub in GTZAN_AUDIO_DIRS:
        base = root / sub if sub else root
        if not base.is_dir():
            continue
        genre_dirs = sorted(d for d in base.iterdir() if d.is_dir() and not d.name.startswith("."))
        files = {
            d.name: sorted(f for f in d.iterdir() if f.suffix.lower() in GTZAN_SUFFIXES)
            for d in genre_dirs
        }
        files = {genre: paths for genre, paths in files.items() if paths}
        if files:
            break
    else:
        raise IngestionError(f"No genre directories with audio found under {root}")

    classes = _class_index(list(files))
    entries = [
        ClipEntry(clip_id=path.stem, path=path, label=classes[genre], class_name=genre, fold=None)
        for genre in sorted(files)
        for path in files[genre]
    ]
    return entries, sorted(classes)


_BUILDERS = {
    DatasetKind.ESC50: _esc50,
    DatasetKind.URBANSOUND8K: _urbansound8k,
    DatasetKind.GTZAN: _gtzan,
    DatasetKind.TONES: _tones,
}


def check_integrity(manifest: DatasetManifest) -> list[str]:
    """List every discrepancy between a manifest and the corpus's published totals."""
    info = manifest.info
    problems: list[str] = []
    n = len(manifest)

    if info.expected_entries is not None and n != info.expected_entries:
        problems.append(f"expected {info.expected_entries} entries, found {n}")
    if info.expected_classes is not None and manifest.num_classes != info.expected_classes:
        problems.append(
            f"expected {info.expected_classes} classes, found {manifest.num_classes}"
        )

    ids = Counter(manifest.clip_ids)
    dupes = sorted(cid for cid, c in ids.items() if c > 1)
    if dupes:
        problems.append(f"duplicate clip ids: {dupes[:5]}")

    if info.is_folded:
        folds = manifest.folds()
        if folds != list(range(1, info.n_folds + 1)):
            problems.append(f"expected folds 1-{info.n_folds}, found {folds}")
        if manifest.dataset_kind == DatasetKind.ESC50 and info.expected_entries:
            per_fold = Counter(e.fold for e in manifest.entries)
            size = info.expected_entries // info.n_folds
            uneven = {f: c for f, c in per_fold.items() if c != size}
            if uneven:
                problems.append(f"expected {size} entries per fold, found {uneven}")
    else:
        per_class = Counter(e.class_name for e in manifest.entries)
        uneven = {k: v for k, v in per_class.items() if v != GTZAN_PER_CLASS}
        if uneven:
            problems.append(f"expected {GTZAN_PER_CLASS} entries per class, found {uneven}")
    return problems


def build_manifest(
    dataset_kind: DatasetKind | str,
    root_dir: str | Path,
    strict: bool = True,
    probe: bool = True,
) -> DatasetManifest:
    """Enumerate a corpus from its standard layout.

    Args:
        dataset_kind: Which corpus
        root_dir: Corpus root
        strict: Enforce the published entry/class/fold totals
        probe: Read each file's header for duration and source sample rate

    Returns:
        DatasetManifest with class indices assigned by sorted class name

    Raises:
        IngestionError: Metadata missing or unreadable, or no entries
        IntegrityError: Counts disagree with the published totals
        AudioDecodeError: A file header cannot be read while probing
    """
    kind = DatasetKind(dataset_kind)
    root = Path(root_dir)
    entries, class_names = _BUILDERS[kind](root)
    if not entries:
        raise IngestionError(f"No clips found for {kind.value} under {root}")

    manifest = DatasetManifest(dataset_kind=kind, entries=entries, class_names=class_names)
    if strict:
        problems = check_integrity(manifest)
        if problems:
            raise IntegrityError(f"{kind.value} manifest at {root}: " + "; ".join(problems))

    if probe:
        probed = []
        for e in entries:
            duration, sr = probe_audio(e.path)
            probed.append(
                ClipEntry(e.clip_id, e.path, e.label, e.class_name, e.fold, duration, sr)
            )
        manifest = DatasetManifest(dataset_kind=kind, entries=probed, class_names=class_names)

    logger.info(
        f"Built {kind.value} manifest: {len(manifest)} clips, "
        f"{manifest.num_classes} classes, folds={manifest.folds() or 'none'}"
    )
    return manifest
