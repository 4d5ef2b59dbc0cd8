"""Segmented networks and the handle the rest of the package works with."""

from __future__ import annotations

import hashlib
import logging
from collections import OrderedDict
from collections.abc import Iterable, Iterator
from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn

from audioxfer.models.types import (
    CONV_SEGMENTS,
    Architecture,
    BlockSpec,
    InitMode,
    Topology,
)

logger = logging.getLogger(__name__)


class ClassifierHead(nn.Module):
    """Global average pooling followed by a linear layer."""

    def __init__(self, in_features: int, num_classes: int, dropout: float = 0.0) -> None:
        super().__init__()
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.dropout = nn.Dropout(dropout) if dropout > 0 else nn.Identity()
        self.fc = nn.Linear(in_features, num_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.fc(self.dropout(torch.flatten(self.pool(x), 1)))


class SegmentedNet(nn.Module):
    """A backbone as named segments run in order, ending in ``classifier``.

    Segments up to ``frozen_through`` stay in eval mode while the rest
    trains, so frozen batch-norm statistics do not drift.
    """

    def __init__(
        self,
        segments: OrderedDict[str, nn.Module],
        head: ClassifierHead,
        layer_counts: dict[str, int],
    ) -> None:
        super().__init__()
        self.segment_names: tuple[str, ...] = (*segments.keys(), "classifier")
        for name, module in segments.items():
            self.add_module(name, module)
        self.add_module("classifier", head)
        self.layer_counts = {k: v for k, v in layer_counts.items() if k in self.segment_names}
        self.layer_counts["classifier"] = 1
        self.frozen: tuple[str, ...] = ()

    def segment(self, name: str) -> nn.Module:
        return self.get_submodule(name)

    def conv_segments(self) -> OrderedDict[str, nn.Module]:
        return OrderedDict((n, self.segment(n)) for n in self.segment_names if n != "classifier")

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        for name in self.segment_names:
            x = self.segment(name)(x)
        return x

    def train(self, mode: bool = True) -> SegmentedNet:
        super().train(mode)
        for name in self.frozen:
            self.segment(name).eval()
        return self


@dataclass
class ModelHandle:
    """A network plus what it was built from.

    Attributes:
        net: The segmented network
        topology: Structure needed to rebuild it
        init_mode: How the convolutional segments were initialized
        seed: Seed that drew every random weight (head, and body when random)
        pretrained_through: Last segment loaded from an archive (None = none)
        provenance: Provenance of the archive weights, if any
    """

    net: SegmentedNet
    topology: Topology
    init_mode: InitMode
    seed: int
    pretrained_through: str | None = None
    provenance: str | None = None

    @property
    def architecture(self) -> Architecture:
        return Architecture(self.topology.architecture)

    @property
    def num_classes(self) -> int:
        return self.topology.num_classes

    @property
    def frozen_through(self) -> str | None:
        return self.net.frozen[-1] if self.net.frozen else None

    @property
    def block_spec(self) -> BlockSpec:
        return list_blocks(self)

    @property
    def device(self) -> torch.device:
        return next(self.net.parameters()).device

    def to(self, device: str | torch.device) -> ModelHandle:
        self.net.to(device)
        return self

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Logits for a batch (N, 3, n_mels, W)."""
        return self.net(x.to(self.device))

    def loss(self, x: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
        """Mean cross-entropy of a batch."""
        return F.cross_entropy(self.forward(x), y.to(self.device))

    def input_gradient(self, x: torch.Tensor, target: int) -> torch.Tensor:
        """d logit[target] / d x for every example in the batch, network in eval mode."""
        was_training = self.net.training
        self.net.eval()
        try:
            x = x.detach().to(self.device).requires_grad_(True)
            logits = self.net(x)
            (grad,) = torch.autograd.grad(logits[:, target].sum(), x)
        finally:
            self.net.train(was_training)
        return grad

    def named_state(self, segments: Iterable[str] | None = None) -> Iterator[tuple[str, torch.Tensor]]:
        """(name, tensor) for parameters and buffers of the given segments, sorted by name."""
        wanted = tuple(segments) if segments is not None else self.net.segment_names
        state = self.net.state_dict()
        for name in sorted(state):
            if name.split(".", 1)[0] in wanted:
                yield name, state[name]

    def checksum(self, segments: Iterable[str] | None = None) -> str:
        """sha256 over names and bytes of the segments' parameters and buffers."""
        h = hashlib.sha256()
        for name, tensor in self.named_state(segments):
            h.update(name.encode())
            h.update(tensor.detach().cpu().contiguous().numpy().tobytes())
        return h.hexdigest()

    def parameter_count(self, trainable_only: bool = False) -> int:
        return sum(
            p.numel() for p in self.net.parameters() if p.requires_grad or not trainable_only
        )

    def trainable_parameters(self) -> list[nn.Parameter]:
        return [p for p in self.net.parameters() if p.requires_grad]


def list_blocks(m: ModelHandle) -> BlockSpec:
    """Six-segment partition (fewer after truncation) of a model's parameters."""
    groups: dict[str, list[str]] = {name: [] for name in m.net.segment_names}
    for pname, _ in m.net.named_parameters():
        groups[pname.split(".", 1)[0]].append(pname)
    return BlockSpec(
        segments=m.net.segment_names,
        param_groups={k: tuple(v) for k, v in groups.items()},
        layer_counts=dict(m.net.layer_counts),
    )


def conv_segments_of(m: ModelHandle) -> tuple[str, ...]:
    return tuple(s for s in m.net.segment_names if s in CONV_SEGMENTS)
