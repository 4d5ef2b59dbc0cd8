"""Backbone construction and weight surgery.

    archive = WeightArchive.load("weights/densenet201")
    m = build_backbone("densenet", "pretrained", num_classes=50, archive=archive, seed=3)
    m = set_trainable(m, "block2")
    short = truncate_after(m, "block3", num_classes=50)
"""

from __future__ import annotations

import copy
import logging
import secrets
from collections import OrderedDict
from pathlib import Path
from typing import TYPE_CHECKING, Any

import torch
from torch import nn

from audioxfer.errors import ConfigurationError, DomainError, InitializationError
from audioxfer.models.archive import (
    PROVENANCE_CHECKPOINT,
    PROVENANCE_IMAGENET,
    WeightArchive,
)
from audioxfer.models.backbones import (
    build_segments,
    feature_channels,
    torchvision_model,
)
from audioxfer.models.handle import ClassifierHead, ModelHandle, SegmentedNet
from audioxfer.models.types import (
    CONV_SEGMENTS,
    CUTOFF_POINTS,
    DEFAULT_DEPTH,
    HEAD_DROPOUT,
    MIN_INPUT_SIZE,
    Architecture,
    InitMode,
    Topology,
    segment_index,
)

if TYPE_CHECKING:
    from audioxfer.training.types import RunRecord

logger = logging.getLogger(__name__)

ArchiveSource = WeightArchive | str | Path


def resolve_seed(seed: int | None) -> int:
    """Use ``seed`` or draw a fresh one."""
    return int(seed) if seed is not None else secrets.randbits(31)


def _as_archive(archive: ArchiveSource | None) -> WeightArchive | None:
    if archive is None or isinstance(archive, WeightArchive):
        return archive
    return WeightArchive.load(archive)


def _check_input_size(arch: Architecture, input_size: tuple[int, int]) -> None:
    minimum = MIN_INPUT_SIZE[arch]
    if min(input_size) < minimum:
        raise ConfigurationError(
            f"Input {input_size[0]}x{input_size[1]} is below the {arch.value} minimum of "
            f"{minimum}x{minimum}; inputs are not padded"
        )


def _fresh_head(in_features: int, topology: Topology, seed: int) -> ClassifierHead:
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        return ClassifierHead(
            in_features,
            topology.num_classes,
            dropout=HEAD_DROPOUT[Architecture(topology.architecture)],
        )


def _random_net(topology: Topology, seed: int) -> SegmentedNet:
    """Network with standard random init everywhere, drawn from ``seed``."""
    arch = Architecture(topology.architecture)
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        segments, counts = build_segments(arch, topology.depth)
    keep = segment_index(topology.last_kept) + 1
    segments = OrderedDict(list(segments.items())[:keep])
    in_features = feature_channels(segments, topology.input_size)
    # Head seed is offset so body and head draws never coincide.
    head = _fresh_head(in_features, topology, seed + 1)
    return SegmentedNet(segments, head, counts)


def _load_segments(net: SegmentedNet, archive: WeightArchive, segments: tuple[str, ...]) -> None:
    for seg in segments:
        state = archive.segment_state(seg)
        if not state:
            raise InitializationError(
                f"Weight archive ({archive.provenance}) has no tensors for segment '{seg}'"
            )
        try:
            net.segment(seg).load_state_dict(state, strict=True)
        except RuntimeError as e:
            raise InitializationError(
                f"Weight archive ({archive.provenance}) does not fit segment '{seg}': {e}"
            ) from e


def _check_archive_arch(archive: WeightArchive, topology: Topology) -> None:
    arch = Architecture(topology.architecture).value
    if archive.architecture is not None and archive.architecture != arch:
        raise InitializationError(
            f"Weight archive is for {archive.architecture}, model is {arch}"
        )
    if archive.depth is not None and archive.depth != topology.depth:
        raise InitializationError(
            f"Weight archive is for depth {archive.depth}, model has depth {topology.depth}"
        )


def make_topology(
    architecture: Architecture | str,
    num_classes: int,
    depth: int | None = None,
    input_size: tuple[int, int] = (128, 250),
    last_kept: str = "block4",
) -> Topology:
    arch = Architecture(architecture)
    if num_classes < 1:
        raise ConfigurationError(f"num_classes must be positive, got {num_classes}")
    _check_input_size(arch, input_size)
    return Topology(
        architecture=arch,
        depth=depth or DEFAULT_DEPTH[arch],
        num_classes=num_classes,
        last_kept=last_kept,
        input_size=input_size,
    )


def fuse_weights(
    pretrained: ArchiveSource,
    cut: str,
    num_classes: int,
    architecture: Architecture | str | None = None,
    depth: int | None = None,
    input_size: tuple[int, int] = (128, 250),
    seed: int | None = None,
) -> ModelHandle:
    """Archive weights for segments up to and including ``cut``, random weights after.

    The whole model is trainable. ``cut="block4"`` is the full pretrained
    initialization.

    Raises:
        DomainError: ``cut`` is not one of stem..block4
        InitializationError: Archive missing or does not fit
    """
    if cut not in CONV_SEGMENTS:
        raise DomainError(f"Unknown fusion cut '{cut}'; expected one of {CONV_SEGMENTS}")
    archive = _as_archive(pretrained)
    if archive is None:
        raise InitializationError("Pretrained initialization requires a weight archive")

    arch_name = architecture or archive.architecture
    if arch_name is None:
        raise InitializationError("Architecture not given and not recorded in the archive")
    topology = make_topology(arch_name, num_classes, depth or archive.depth, input_size)
    _check_archive_arch(archive, topology)

    seed = resolve_seed(seed)
    net = _random_net(topology, seed)
    through = CONV_SEGMENTS[: segment_index(cut) + 1]
    _load_segments(net, archive, through)
    logger.debug(f"Fused {topology.name}: archive through {cut}, random after (seed={seed})")
    return ModelHandle(
        net=net,
        topology=topology,
        init_mode=InitMode.PRETRAINED,
        seed=seed,
        pretrained_through=cut,
        provenance=archive.provenance,
    )


def build_backbone(
    architecture: Architecture | str,
    init_mode: InitMode | str,
    num_classes: int,
    depth: int | None = None,
    archive: ArchiveSource | None = None,
    seed: int | None = None,
    input_size: tuple[int, int] = (128, 250),
) -> ModelHandle:
    """Build a backbone with a freshly initialized classifier.

    Args:
        architecture: Backbone family
        init_mode: PRETRAINED loads stem..block4 from ``archive``; RANDOM uses standard init
        num_classes: Classifier outputs
        depth: Family depth (default per family)
        archive: Weight archive or its directory (PRETRAINED only)
        seed: Seed for every random draw (None = fresh)
        input_size: (n_mels, width) of the inputs

    Raises:
        InitializationError: PRETRAINED without an archive
        ConfigurationError: Input smaller than the family's minimum
    """
    arch = Architecture(architecture)
    mode = InitMode(init_mode)
    if mode == InitMode.PRETRAINED:
        if archive is None:
            raise InitializationError(
                f"Pretrained {arch.value} requested but no weight archive was given; "
                "import one with `import_torchvision_archive`"
            )
        return fuse_weights(archive, "block4", num_classes, arch, depth, input_size, seed)

    topology = make_topology(arch, num_classes, depth, input_size)
    seed = resolve_seed(seed)
    return ModelHandle(
        net=_random_net(topology, seed), topology=topology, init_mode=mode, seed=seed
    )


def set_trainable(m: ModelHandle, frozen_through: str | None) -> ModelHandle:
    """Exclude segments up to ``frozen_through`` from optimization.

    ``None`` or ``"none"`` makes every parameter trainable. Frozen segments
    also stay in eval mode. Idempotent.

    Raises:
        DomainError: Unknown segment, or the classifier (nothing would train)
    """
    if frozen_through in (None, "none"):
        frozen: tuple[str, ...] = ()
    elif frozen_through in m.net.segment_names and frozen_through != "classifier":
        frozen = m.net.segment_names[: m.net.segment_names.index(frozen_through) + 1]
    else:
        valid = [s for s in m.net.segment_names if s != "classifier"]
        raise DomainError(f"Cannot freeze through '{frozen_through}'; expected none or one of {valid}")

    for name in m.net.segment_names:
        trainable = name not in frozen
        for p in m.net.segment(name).parameters():
            p.requires_grad_(trainable)
    m.net.frozen = frozen
    m.net.train(m.net.training)
    return m


def truncate_after(
    m: ModelHandle, last_kept: str, num_classes: int | None = None, seed: int | None = None
) -> ModelHandle:
    """Drop segments after ``last_kept`` and attach a fresh pooled classifier.

    Raises:
        DomainError: ``last_kept`` is not one of block2, block3 or block4
    """
    if last_kept not in CUTOFF_POINTS or last_kept not in m.net.segment_names:
        raise DomainError(
            f"Cannot truncate after '{last_kept}'; expected one of "
            f"{[s for s in CUTOFF_POINTS if s in m.net.segment_names]}"
        )
    num_classes = num_classes or m.num_classes
    seed = resolve_seed(seed if seed is not None else m.seed)

    segments = m.net.conv_segments()
    keep = OrderedDict(
        (n, copy.deepcopy(mod))
        for n, mod in segments.items()
        if segment_index(n) <= segment_index(last_kept)
    )
    topology = Topology(
        architecture=m.topology.architecture,
        depth=m.topology.depth,
        num_classes=num_classes,
        last_kept=last_kept,
        input_size=m.topology.input_size,
    )
    head = _fresh_head(feature_channels(keep, topology.input_size), topology, seed + 1)
    net = SegmentedNet(keep, head, m.net.layer_counts)
    out = ModelHandle(
        net=net,
        topology=topology,
        init_mode=m.init_mode,
        seed=seed,
        pretrained_through=m.pretrained_through,
        provenance=m.provenance,
    )
    frozen = [s for s in m.net.frozen if s in keep]
    return set_trainable(out, frozen[-1] if frozen else None)


def export_archive(
    m: ModelHandle,
    provenance: str = PROVENANCE_CHECKPOINT,
    include_classifier: bool = False,
    metadata: dict[str, Any] | None = None,
) -> WeightArchive:
    """Snapshot a model's weights. The classifier is left out unless asked for."""
    segments = [s for s in m.net.segment_names if include_classifier or s != "classifier"]
    meta = {
        "architecture": m.architecture.value,
        "depth": m.topology.depth,
        "topology": m.topology.to_dict(),
        "init_mode": InitMode(m.init_mode).value,
        "seed": m.seed,
        "include_classifier": include_classifier,
        **(metadata or {}),
    }
    return WeightArchive.from_state(dict(m.named_state(segments)), provenance, meta)


def import_torchvision_archive(
    architecture: Architecture | str, depth: int | None, out_dir: str | Path
) -> WeightArchive:
    """Convert torchvision ImageNet weights into an archive without the 1000-way head.

    Downloads through torchvision's own weight cache on first use.
    """
    arch = Architecture(architecture)
    if arch == Architecture.TINY:
        raise ConfigurationError("The tiny backbone has no ImageNet weights; use pretrain_tiny_archive")
    depth = depth or DEFAULT_DEPTH[arch]
    net = torchvision_model(arch, depth, pretrained=True)
    segments, _ = build_segments(arch, depth, source=net)

    state: dict[str, torch.Tensor] = {}
    for seg_name, module in segments.items():
        for key, tensor in module.state_dict().items():
            state[f"{seg_name}.{key}"] = tensor
    archive = WeightArchive.from_state(
        state,
        PROVENANCE_IMAGENET,
        {"architecture": arch.value, "depth": depth, "source": type(net).__name__},
    )
    archive.save(out_dir)
    logger.info(f"Imported {len(archive)} ImageNet tensors for {arch.value}{depth} into {out_dir}")
    return archive


def load_checkpoint(source: RunRecord | str | Path) -> ModelHandle:
    """Rebuild the exact network a run saved, weights included.

    Args:
        source: A RunRecord, or a checkpoint archive directory

    Raises:
        MissingArtifactError: Checkpoint directory absent
        InitializationError: Checkpoint lacks topology or weights do not fit
    """
    path = Path(source) if isinstance(source, (str, Path)) else Path(source.checkpoint)
    archive = WeightArchive.load(path)
    if "topology" not in archive.metadata:
        raise InitializationError(f"Checkpoint {path} does not record its topology")

    topology = Topology.from_dict(archive.metadata["topology"])
    seed = int(archive.metadata.get("seed", 0))
    net = _random_net(topology, seed)
    state = {k: v for k, v in archive.tensors.items()}
    try:
        net.load_state_dict(state, strict=True)
    except RuntimeError as e:
        raise InitializationError(f"Checkpoint {path} does not fit its topology: {e}") from e

    frozen = archive.metadata.get("frozen_through")
    handle = ModelHandle(
        net=net,
        topology=topology,
        init_mode=InitMode(archive.metadata.get("init_mode", InitMode.RANDOM.value)),
        seed=seed,
        pretrained_through=archive.metadata.get("pretrained_through"),
        provenance=archive.provenance,
    )
    return set_trainable(handle, frozen)


def parameters_differ(a: nn.Module, b: nn.Module) -> bool:
    """True if any same-named tensor differs between two modules."""
    sa, sb = a.state_dict(), b.state_dict()
    return any(not torch.equal(sa[k], sb[k]) for k in sa if k in sb)
