"""Backbones with named segments and weight surgery.

Every network is split into six segments, stem, block1..block4 and
classifier, so pretrained weights can be fused, frozen or cut off block by
block.
"""

from audioxfer.models.archive import (
    PROVENANCE_CHECKPOINT,
    PROVENANCE_IMAGENET,
    PROVENANCE_TONES,
    WeightArchive,
)
from audioxfer.models.handle import ClassifierHead, ModelHandle, SegmentedNet, list_blocks
from audioxfer.models.types import (
    CONV_SEGMENTS,
    CUTOFF_POINTS,
    DEFAULT_DEPTH,
    SEGMENTS,
    SUPPORTED_DEPTHS,
    Architecture,
    BlockSpec,
    InitMode,
    Topology,
)
from audioxfer.models.zoo import (
    build_backbone,
    export_archive,
    fuse_weights,
    import_torchvision_archive,
    load_checkpoint,
    make_topology,
    parameters_differ,
    resolve_seed,
    set_trainable,
    truncate_after,
)

__all__ = [
    "Architecture",
    "BlockSpec",
    "CONV_SEGMENTS",
    "CUTOFF_POINTS",
    "ClassifierHead",
    "DEFAULT_DEPTH",
    "InitMode",
    "ModelHandle",
    "PROVENANCE_CHECKPOINT",
    "PROVENANCE_IMAGENET",
    "PROVENANCE_TONES",
    "SEGMENTS",
    "SUPPORTED_DEPTHS",
    "SegmentedNet",
    "Topology",
    "WeightArchive",
    "build_backbone",
    "export_archive",
    "fuse_weights",
    "import_torchvision_archive",
    "list_blocks",
    "load_checkpoint",
    "make_topology",
    "parameters_differ",
    "resolve_seed",
    "set_trainable",
    "truncate_after",
]
