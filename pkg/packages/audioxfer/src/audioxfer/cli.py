"""Command-line entry point.

Commands::

    audioxfer prep              build the feature store for the configured corpus
    audioxfer train             one run on one fold
    audioxfer cross-validate    one run per fold
    audioxfer ensemble          M seeded members on one fold, softmax-averaged
    audioxfer analyze KIND      svcca | fusion | freeze | cutoff | ig
    audioxfer report            accuracy tables and transfer curves
    audioxfer import-weights    torchvision ImageNet weights -> weight archive
    audioxfer make-tones        write the synthetic tone corpus
    audioxfer pretrain-tiny     tiny backbone archive from the tone corpus

Exit status: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import pandas as pd

from audioxfer import __version__
from audioxfer.config import ExperimentConfig, parse_and_validate, write_resolved
from audioxfer.datasets import (
    FeatureStore,
    FoldPlan,
    build_manifest,
    cache_features,
    iter_folds,
    split_folds,
    write_tone_dataset,
)
from audioxfer.errors import (
    AudioXferError,
    ConfigurationError,
    ConfigValidationError,
    RegistryLockedError,
)
from audioxfer.models import (
    Architecture,
    InitMode,
    ModelHandle,
    WeightArchive,
    build_backbone,
    import_torchvision_archive,
    load_checkpoint,
)
from audioxfer.training import (
    RunRecord,
    RunRegistry,
    cross_validate,
    pretrain_tiny_archive,
    train_model,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
LOCK_FILE = ".lock"
ANALYSIS_KINDS = ("svcca", "fusion", "freeze", "cutoff", "ig")

# flag dest -> dotted config key
OVERRIDES = {
    "dataset": "dataset.kind",
    "root": "dataset.root",
    "store": "dataset.store",
    "fold": "dataset.fold",
    "split_seed": "dataset.split_seed",
    "architecture": "model.architecture",
    "depth": "model.depth",
    "init_mode": "model.init_mode",
    "archive": "model.archive",
    "regime": "train.regime",
    "epochs": "train.epochs",
    "lr": "train.base_lr",
    "weight_decay": "train.weight_decay",
    "weight_decay_mode": "train.weight_decay_mode",
    "batch_size": "train.batch_size",
    "augment": "augmentation.enabled",
    "members": "ensemble.members",
    "run": "analysis.run",
    "compare_run": "analysis.compare_run",
    "clip": "analysis.ig_clip",
    "steps": "analysis.ig_steps",
    "target": "analysis.ig_target",
    "output_dir": "output_dir",
    "seed": "root_seed",
    "device": "device",
    "workers": "workers",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-c", "--config", type=Path, help="TOML, JSON or YAML experiment config")
    p.add_argument("-o", "--output-dir", dest="output_dir", help="Artifact directory")
    p.add_argument("--dataset", help="esc50 | urbansound8k | gtzan | tones")
    p.add_argument("--root", help="Corpus directory (default $AUDIOXFER_DATA_ROOT/<corpus>)")
    p.add_argument("--store", help="Feature store directory")
    p.add_argument("--fold", type=int, help="Validation fold for single runs")
    p.add_argument("--split-seed", dest="split_seed", type=int, help="Seed of the GTZAN split")
    p.add_argument("--architecture", help="densenet | resnet | inception | tiny")
    p.add_argument("--depth", type=int)
    p.add_argument("--init-mode", dest="init_mode", help="pretrained | random")
    p.add_argument("--archive", help="Weight archive directory for pretrained init")
    p.add_argument("--regime", help="pretrained (70 epochs) | scratch (450 epochs)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--weight-decay", dest="weight_decay", type=float)
    p.add_argument("--weight-decay-mode", dest="weight_decay_mode", help="l2 | decoupled")
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--augment", action="store_true", default=None, help="Add stretch/pitch records")
    p.add_argument("--members", type=int, help="Ensemble size")
    p.add_argument("--seed", type=int, help="Root seed")
    p.add_argument("--device", help="cpu | cuda[:n] | mps")
    p.add_argument("--workers", type=int, help="Feature extraction processes")
    verbosity = p.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="audioxfer", description="Audio transfer-learning experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("prep", "Build the feature store"),
        ("train", "Train on one fold"),
        ("cross-validate", "Train on every fold"),
        ("ensemble", "Train and evaluate a seeded ensemble"),
        ("report", "Write accuracy tables and transfer curves"),
    ):
        _add_common(sub.add_parser(name, help=help_text))

    analyze = sub.add_parser("analyze", help="Transfer-learning probes and attribution")
    analyze.add_argument("kind", choices=ANALYSIS_KINDS)
    analyze.add_argument("--run", help="Run id to analyze (svcca, ig)")
    analyze.add_argument("--compare-run", dest="compare_run", help="Second run for svcca (e.g. random init)")
    analyze.add_argument("--clip", help="Clip id for ig (default: first validation clip)")
    analyze.add_argument("--steps", type=int, help="Integration steps for ig")
    analyze.add_argument("--target", type=int, help="Class index for ig (default: predicted)")
    _add_common(analyze)

    weights = sub.add_parser("import-weights", help="Convert torchvision ImageNet weights")
    weights.add_argument("architecture", choices=[a.value for a in Architecture if a != Architecture.TINY])
    weights.add_argument("out", type=Path)
    weights.add_argument("--depth", type=int)
    weights.add_argument("-v", "--verbose", action="store_true")
    weights.add_argument("-q", "--quiet", action="store_true")

    tones = sub.add_parser("make-tones", help="Write the synthetic tone corpus")
    tones.add_argument("out", type=Path)
    tones.add_argument("--n-clips", dest="n_clips", type=int, default=100)
    tones.add_argument("--seed", type=int, default=0)
    tones.add_argument("-v", "--verbose", action="store_true")
    tones.add_argument("-q", "--quiet", action="store_true")

    tiny = sub.add_parser("pretrain-tiny", help="Pretrain the tiny backbone on a tone feature store")
    tiny.add_argument("out", type=Path, help="Archive directory")
    _add_common(tiny)
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        stream=sys.stderr,
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def overrides_from_args(args: argparse.Namespace) -> dict[str, Any]:
    return {key: getattr(args, dest) for dest, key in OVERRIDES.items() if getattr(args, dest, None) is not None}


@contextmanager
def output_lock(out_dir: Path) -> Iterator[Path]:
    """Exclusive lock file guarding one output directory.

    Raises:
        RegistryLockedError: Another invocation holds the lock
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / LOCK_FILE
    try:
        fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError as e:
        raise RegistryLockedError(
            f"Output directory {out_dir} is locked by another run ({path}); remove it if stale"
        ) from e
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield path
    finally:
        path.unlink(missing_ok=True)


def _archive(cfg: ExperimentConfig) -> WeightArchive | None:
    return WeightArchive.load(cfg.model.archive) if cfg.model.archive else None


def _plan(cfg: ExperimentConfig, store: FeatureStore) -> FoldPlan:
    manifest = store.manifest()
    if manifest.info.is_folded:
        return split_folds(manifest, fold_index=cfg.dataset.fold or manifest.folds()[0])
    return split_folds(manifest, seed=cfg.dataset.split_seed)


def _record_plan(record: RunRecord, store: FeatureStore) -> FoldPlan:
    manifest = store.manifest()
    if record.fold_index is not None:
        return split_folds(manifest, fold_index=record.fold_index)
    return split_folds(manifest, seed=record.split_seed)


def _initial_model(record: RunRecord, store: FeatureStore, cfg: ExperimentConfig) -> ModelHandle:
    """Rebuild a run's weights at epoch 0 from its seed (and the archive when pretrained)."""
    _, n_mels, width = store.shape
    return build_backbone(
        record.architecture,
        record.init_mode,
        store.num_classes,
        depth=record.depth,
        archive=_archive(cfg) if InitMode(record.init_mode) == InitMode.PRETRAINED else None,
        seed=record.seed,
        input_size=(n_mels, width),
    )


def cmd_prep(cfg: ExperimentConfig) -> int:
    manifest = build_manifest(cfg.dataset.kind, cfg.dataset_root())
    store = cache_features(manifest, cfg.dsp, cfg.augmentation, cfg.store_path(), workers=cfg.workers)
    write_resolved(cfg, store.root)
    print(store.root)
    return EXIT_OK


def cmd_train(cfg: ExperimentConfig) -> int:
    store = FeatureStore.open(cfg.store_path())
    plan = _plan(cfg, store)
    _, n_mels, width = store.shape
    m = build_backbone(
        cfg.model.architecture,
        cfg.model.init_mode,
        store.num_classes,
        depth=cfg.model.depth,
        archive=_archive(cfg),
        seed=cfg.train.seed,
        input_size=(n_mels, width),
    ).to(cfg.device)
    registry = RunRegistry(cfg.output_path)
    record = train_model(m, store, plan, cfg.train, registry, experiment="train", config=cfg.resolved())
    print(registry.run_dir(record.run_id))
    return EXIT_OK


def cmd_cross_validate(cfg: ExperimentConfig) -> int:
    store = FeatureStore.open(cfg.store_path())
    plans = list(iter_folds(store.manifest(), seed=cfg.dataset.split_seed))
    archive = _archive(cfg)
    _, n_mels, width = store.shape

    def build(plan: FoldPlan) -> ModelHandle:
        return build_backbone(
            cfg.model.architecture, cfg.model.init_mode, store.num_classes,
            depth=cfg.model.depth, archive=archive, seed=cfg.train.seed, input_size=(n_mels, width),
        ).to(cfg.device)

    result = cross_validate(
        cfg.model.architecture,
        cfg.model.init_mode,
        store,
        plans,
        cfg.train,
        RunRegistry(cfg.output_path),
        experiment="cv",
        config=cfg.resolved(),
        model_factory=build,
    )
    name = (
        f"{store.dataset_kind.value}-{Architecture(cfg.model.architecture).value}-"
        f"{InitMode(cfg.model.init_mode).value}"
    )
    out = cfg.output_path / "cv" / name
    out.mkdir(parents=True, exist_ok=True)
    result.to_dataframe().to_csv(out / "folds.csv", index=False)
    write_resolved(cfg, out)
    print(out)
    return EXIT_OK if result.complete else EXIT_FAILURE


def cmd_ensemble(cfg: ExperimentConfig) -> int:
    from audioxfer.ensemble import evaluate_ensemble, run_ensemble
    from audioxfer.reporting import ENSEMBLES_DIR

    store = FeatureStore.open(cfg.store_path())
    plan = _plan(cfg, store)
    run = run_ensemble(
        cfg.ensemble,
        cfg.model.architecture,
        cfg.model.init_mode,
        store,
        plan,
        cfg.train,
        RunRegistry(cfg.output_path),
        depth=cfg.model.depth,
        archive=_archive(cfg),
        config=cfg.resolved(),
    )
    result = evaluate_ensemble(run, store)
    name = (
        f"{store.dataset_kind.value}-{Architecture(cfg.model.architecture).value}-"
        f"{InitMode(cfg.model.init_mode).value}-{plan.label}-r{cfg.ensemble.root_seed}"
    )
    out = result.save(cfg.output_path / ENSEMBLES_DIR / name)
    write_resolved(cfg, out)
    print(out)
    return EXIT_OK


def _analyze_svcca(cfg: ExperimentConfig, store: FeatureStore, out: Path) -> Path:
    from audioxfer.analysis import weights_change_curve
    from audioxfer.reporting import SVCCA_DIR

    if not cfg.analysis.run:
        raise ConfigurationError("analyze svcca needs a run id (--run)")
    registry = RunRegistry(cfg.output_path)
    curves = []
    for run_id in filter(None, (cfg.analysis.run, cfg.analysis.compare_run)):
        record = registry.load(run_id)
        ids = _record_plan(record, store).val_ids
        curves.append(
            weights_change_curve(
                _initial_model(record, store, cfg),
                load_checkpoint(record),
                store,
                ids,
                variance_keep=cfg.analysis.variance_keep,
                probe_points=cfg.analysis.probe_points,
                label=f"{record.architecture} {record.init_mode}",
            )
        )

    target = out / SVCCA_DIR
    target.mkdir(parents=True, exist_ok=True)
    path = target / f"{cfg.analysis.run}.json"
    path.write_text(json.dumps({"curves": [c.to_dict() for c in curves]}, indent=2))
    pd.concat([c.to_dataframe() for c in curves]).to_csv(target / f"{cfg.analysis.run}.csv", index=False)
    try:
        from audioxfer.visualization import plot_weights_change, save_figure

        save_figure(plot_weights_change(curves), target / f"{cfg.analysis.run}.png")
    except ImportError:
        logger.warning("matplotlib not installed; skipping SVCCA plot")
    write_resolved(cfg, target)
    return path


def _analyze_ablation(cfg: ExperimentConfig, store: FeatureStore, kind: str, out: Path) -> Path:
    from audioxfer.analysis import run_ablation_suite, save_ablation_curve

    archive = _archive(cfg)
    if archive is None:
        raise ConfigurationError(f"analyze {kind} needs a pretrained weight archive (model.archive)")
    curve = run_ablation_suite(
        kind,
        cfg.model.architecture,
        store,
        _plan(cfg, store),
        cfg.train,
        archive,
        RunRegistry(cfg.output_path),
        cut_points=cfg.analysis.cut_points,
        depth=cfg.model.depth,
        config=cfg.resolved(),
    )
    target = out / "ablation"
    csv_path, _ = save_ablation_curve(curve, target)
    write_resolved(cfg, target)
    if curve.partial:
        logger.warning(f"{kind} curve is partial: some points diverged")
    return csv_path


def _analyze_ig(cfg: ExperimentConfig, store: FeatureStore, out: Path) -> Path:
    from audioxfer.analysis import attribution_energy_iou, integrated_gradients, render_attribution

    if not cfg.analysis.run:
        raise ConfigurationError("analyze ig needs a run id (--run)")
    record = RunRegistry(cfg.output_path).load(cfg.analysis.run)
    clip = cfg.analysis.ig_clip or _record_plan(record, store).val_ids[0]
    x = store.read_tensor(clip)
    a = integrated_gradients(
        load_checkpoint(record), x, steps=cfg.analysis.ig_steps, target=cfg.analysis.ig_target
    )
    target = out / "ig"
    png = render_attribution(x, a, target / f"{record.run_id}-{clip}.png", gamma=cfg.analysis.gamma)
    payload = {
        "run_id": record.run_id,
        "clip_id": clip,
        "label": store.label(clip),
        **a.to_dict(),
        "relative_residual": a.relative_residual,
        "energy_iou": attribution_energy_iou(x, a, cfg.analysis.iou_quantile),
    }
    (target / f"{record.run_id}-{clip}.json").write_text(json.dumps(payload, indent=2))
    write_resolved(cfg, target)
    return png


def cmd_analyze(cfg: ExperimentConfig, kind: str) -> int:
    from audioxfer.reporting import ANALYSIS_DIR

    store = FeatureStore.open(cfg.store_path())
    out = cfg.output_path / ANALYSIS_DIR
    if kind == "svcca":
        path = _analyze_svcca(cfg, store, out)
    elif kind == "ig":
        path = _analyze_ig(cfg, store, out)
    else:
        path = _analyze_ablation(cfg, store, kind, out)
    print(path)
    return EXIT_OK


def cmd_report(cfg: ExperimentConfig) -> int:
    from audioxfer.reporting import write_report

    written = write_report(cfg.output_path)
    write_resolved(cfg, next(iter(written.values())).parent)
    for path in written.values():
        print(path)
    return EXIT_OK


def cmd_pretrain_tiny(cfg: ExperimentConfig, out: Path) -> int:
    store = FeatureStore.open(cfg.store_path())
    archive = pretrain_tiny_archive(store, _plan(cfg, store), cfg.train, out_dir=out)
    logger.info(f"Tiny archive with {len(archive)} tensors written to {out}")
    print(out)
    return EXIT_OK


def dispatch(command: str, cfg: ExperimentConfig, args: argparse.Namespace | None = None) -> int:
    """Run one command against a validated config. Returns the exit status."""
    if command == "report":
        return cmd_report(cfg)
    with output_lock(cfg.output_path):
        if command == "prep":
            return cmd_prep(cfg)
        if command == "train":
            return cmd_train(cfg)
        if command == "cross-validate":
            return cmd_cross_validate(cfg)
        if command == "ensemble":
            return cmd_ensemble(cfg)
        if command == "analyze":
            assert args is not None
            return cmd_analyze(cfg, args.kind)
        if command == "pretrain-tiny":
            assert args is not None
            return cmd_pretrain_tiny(cfg, args.out)
    raise ConfigurationError(f"Unknown command '{command}'")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        if args.command == "import-weights":
            import_torchvision_archive(args.architecture, args.depth, args.out)
            print(args.out)
            return EXIT_OK
        if args.command == "make-tones":
            print(write_tone_dataset(args.out, n_clips=args.n_clips, seed=args.seed))
            return EXIT_OK
        cfg = parse_and_validate(args.config, overrides_from_args(args))
        return dispatch(args.command, cfg, args)
    except ConfigValidationError as e:
        logger.error(str(e))
        for err in e.errors:
            logger.error(f"  {err['path']}: {err['message']}")
        return EXIT_CONFIG
    except ConfigurationError as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except AudioXferError as e:
        logger.error(str(e))
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
