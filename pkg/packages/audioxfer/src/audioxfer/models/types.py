"""Model zoo types: architectures, init modes, segment layout."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class Architecture(str, Enum):
    """Backbone families. TINY is the CPU-scale reference network."""

    DENSENET = "densenet"
    RESNET = "resnet"
    INCEPTION = "inception"
    TINY = "tiny"


class InitMode(str, Enum):
    PRETRAINED = "pretrained"
    RANDOM = "random"


SEGMENTS: tuple[str, ...] = ("stem", "block1", "block2", "block3", "block4", "classifier")
CONV_SEGMENTS: tuple[str, ...] = SEGMENTS[:-1]
CUTOFF_POINTS: tuple[str, ...] = ("block2", "block3", "block4")

SUPPORTED_DEPTHS: dict[Architecture, tuple[int, ...]] = {
    Architecture.DENSENET: (121, 161, 169, 201),
    Architecture.RESNET: (18, 34, 50, 101, 152),
    Architecture.INCEPTION: (3,),
    Architecture.TINY: (4,),
}

DEFAULT_DEPTH: dict[Architecture, int] = {
    Architecture.DENSENET: 201,
    Architecture.RESNET: 50,
    Architecture.INCEPTION: 3,
    Architecture.TINY: 4,
}

# Smallest spatial side each family's grid reductions accept.
MIN_INPUT_SIZE: dict[Architecture, int] = {
    Architecture.DENSENET: 32,
    Architecture.RESNET: 32,
    Architecture.INCEPTION: 75,
    Architecture.TINY: 16,
}

HEAD_DROPOUT: dict[Architecture, float] = {
    Architecture.DENSENET: 0.0,
    Architecture.RESNET: 0.0,
    Architecture.INCEPTION: 0.5,
    Architecture.TINY: 0.0,
}


def segment_index(name: str) -> int:
    return SEGMENTS.index(name)


@dataclass(frozen=True)
class Topology:
    """Everything needed to rebuild a network's structure.

    Attributes:
        architecture: Backbone family
        depth: Family depth (e.g. 201 for DenseNet-201)
        num_classes: Classifier output size
        last_kept: Last convolutional segment before the head
        input_size: (n_mels, width) the network was built for
    """

    architecture: Architecture
    depth: int
    num_classes: int
    last_kept: str = "block4"
    input_size: tuple[int, int] = (128, 250)

    @property
    def name(self) -> str:
        arch = Architecture(self.architecture)
        if arch == Architecture.INCEPTION:
            return "inception_v3"
        if arch == Architecture.TINY:
            return "tiny"
        return f"{arch.value}{self.depth}"

    @property
    def segments(self) -> tuple[str, ...]:
        kept = CONV_SEGMENTS[: segment_index(self.last_kept) + 1]
        return (*kept, "classifier")

    def to_dict(self) -> dict[str, Any]:
        return {
            "architecture": Architecture(self.architecture).value,
            "depth": self.depth,
            "num_classes": self.num_classes,
            "last_kept": self.last_kept,
            "input_size": list(self.input_size),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Topology":
        return cls(
            architecture=Architecture(d["architecture"]),
            depth=int(d["depth"]),
            num_classes=int(d["num_classes"]),
            last_kept=d.get("last_kept", "block4"),
            input_size=(int(d["input_size"][0]), int(d["input_size"][1])),
        )


@dataclass
class BlockSpec:
    """Ordered segment partition of a network's parameters.

    Attributes:
        segments: Segment names in forward order
        param_groups: Parameter names per segment
        layer_counts: Composite layers per segment (dense layers, bottlenecks, ...)
    """

    segments: tuple[str, ...]
    param_groups: dict[str, tuple[str, ...]] = field(default_factory=dict)
    layer_counts: dict[str, int] = field(default_factory=dict)

    def block_layer_counts(self) -> list[int]:
        """Layer counts of block1..block4 that are present."""
        return [self.layer_counts[s] for s in self.segments if s.startswith("block")]

    def through(self, name: str) -> tuple[str, ...]:
        """Segments up to and including ``name``."""
        return self.segments[: self.segments.index(name) + 1]
