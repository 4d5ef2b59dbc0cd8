"""Segment layouts for each backbone family.

Every builder returns the convolutional segments stem..block4 as an
ordered mapping plus the composite-layer count of each segment. Module
names inside segments keep torchvision's names so ImageNet weights map
onto them by key.
"""

from __future__ import annotations

from collections import OrderedDict

import torch
from torch import nn
from torchvision import models as tvm

from audioxfer.errors import ConfigurationError
from audioxfer.models.types import SUPPORTED_DEPTHS, Architecture

TINY_CHANNELS = (16, 32, 64, 128)
TINY_STEM_CHANNELS = 8


def _check_depth(arch: Architecture, depth: int) -> None:
    if depth not in SUPPORTED_DEPTHS[arch]:
        raise ConfigurationError(
            f"Unsupported depth {depth} for {arch.value}; choose from {SUPPORTED_DEPTHS[arch]}"
        )


def torchvision_model(arch: Architecture, depth: int, pretrained: bool = False) -> nn.Module:
    """Instantiate the torchvision network, with ImageNet weights when ``pretrained``."""
    _check_depth(arch, depth)
    weights = "DEFAULT" if pretrained else None
    if arch == Architecture.DENSENET:
        return getattr(tvm, f"densenet{depth}")(weights=weights)
    if arch == Architecture.RESNET:
        return getattr(tvm, f"resnet{depth}")(weights=weights)
    if arch == Architecture.INCEPTION:
        if pretrained:
            # ImageNet weights force aux_logits; the aux branch is never segmented.
            return tvm.inception_v3(weights=weights)
        return tvm.inception_v3(
            weights=None, aux_logits=False, transform_input=False, init_weights=True
        )
    raise ConfigurationError(f"{arch.value} has no torchvision counterpart")


def densenet_segments(net: nn.Module) -> tuple[OrderedDict[str, nn.Module], dict[str, int]]:
    """Dense blocks 1-4; each transition belongs to the block before it."""
    f = net.features
    segments: OrderedDict[str, nn.Module] = OrderedDict(
        stem=nn.Sequential(
            OrderedDict(conv0=f.conv0, norm0=f.norm0, relu0=f.relu0, pool0=f.pool0)
        )
    )
    counts = {"stem": 1}
    for k in (1, 2, 3):
        block = getattr(f, f"denseblock{k}")
        segments[f"block{k}"] = nn.Sequential(
            OrderedDict(
                [(f"denseblock{k}", block), (f"transition{k}", getattr(f, f"transition{k}"))]
            )
        )
        counts[f"block{k}"] = len(block)
    segments["block4"] = nn.Sequential(
        OrderedDict(denseblock4=f.denseblock4, norm5=f.norm5, relu5=nn.ReLU())
    )
    counts["block4"] = len(f.denseblock4)
    return segments, counts


def resnet_segments(net: nn.Module) -> tuple[OrderedDict[str, nn.Module], dict[str, int]]:
    """Residual stages 1-4."""
    segments: OrderedDict[str, nn.Module] = OrderedDict(
        stem=nn.Sequential(
            OrderedDict(conv1=net.conv1, bn1=net.bn1, relu=net.relu, maxpool=net.maxpool)
        )
    )
    counts = {"stem": 1}
    for k in (1, 2, 3, 4):
        layer = getattr(net, f"layer{k}")
        segments[f"block{k}"] = nn.Sequential(OrderedDict([(f"layer{k}", layer)]))
        counts[f"block{k}"] = len(layer)
    return segments, counts


INCEPTION_STEM = (
    "Conv2d_1a_3x3",
    "Conv2d_2a_3x3",
    "Conv2d_2b_3x3",
    "maxpool1",
    "Conv2d_3b_1x1",
    "Conv2d_4a_3x3",
    "maxpool2",
)
INCEPTION_BLOCKS = (
    ("Mixed_5b", "Mixed_5c", "Mixed_5d"),
    ("Mixed_6a", "Mixed_6b", "Mixed_6c"),
    ("Mixed_6d", "Mixed_6e"),
    ("Mixed_7a", "Mixed_7b", "Mixed_7c"),
)


def inception_segments(net: nn.Module) -> tuple[OrderedDict[str, nn.Module], dict[str, int]]:
    """Inception modules grouped at the grid reductions."""
    segments: OrderedDict[str, nn.Module] = OrderedDict(
        stem=nn.Sequential(OrderedDict((name, getattr(net, name)) for name in INCEPTION_STEM))
    )
    counts = {"stem": 1}
    for k, names in enumerate(INCEPTION_BLOCKS, start=1):
        segments[f"block{k}"] = nn.Sequential(
            OrderedDict((name, getattr(net, name)) for name in names)
        )
        counts[f"block{k}"] = len(names)
    return segments, counts


def _conv_bn_relu(c_in: int, c_out: int, stride: int = 1) -> list[nn.Module]:
    return [
        nn.Conv2d(c_in, c_out, kernel_size=3, stride=stride, padding=1, bias=False),
        nn.BatchNorm2d(c_out),
        nn.ReLU(),
    ]


def tiny_segments() -> tuple[OrderedDict[str, nn.Module], dict[str, int]]:
    """Four blocks of two conv layers (16/32/64/128 channels); blocks 1-3 end in a 2x pool."""
    segments: OrderedDict[str, nn.Module] = OrderedDict(
        stem=nn.Sequential(*_conv_bn_relu(3, TINY_STEM_CHANNELS, stride=2))
    )
    counts = {"stem": 1}
    c_in = TINY_STEM_CHANNELS
    for k, c_out in enumerate(TINY_CHANNELS, start=1):
        layers = _conv_bn_relu(c_in, c_out) + _conv_bn_relu(c_out, c_out)
        if k < 4:
            layers.append(nn.MaxPool2d(2))
        segments[f"block{k}"] = nn.Sequential(*layers)
        counts[f"block{k}"] = 2
        c_in = c_out
    return segments, counts


def build_segments(
    arch: Architecture, depth: int, source: nn.Module | None = None
) -> tuple[OrderedDict[str, nn.Module], dict[str, int]]:
    """Segments for a family, split out of ``source`` or a freshly initialized network."""
    arch = Architecture(arch)
    if arch == Architecture.TINY:
        _check_depth(arch, depth)
        return tiny_segments()
    net = source if source is not None else torchvision_model(arch, depth)
    if arch == Architecture.DENSENET:
        return densenet_segments(net)
    if arch == Architecture.RESNET:
        return resnet_segments(net)
    return inception_segments(net)


@torch.no_grad()
def feature_channels(segments: OrderedDict[str, nn.Module], input_size: tuple[int, int]) -> int:
    """Channel count of the last segment's output, from a dummy forward pass in eval mode."""
    x = torch.zeros(1, 3, *input_size)
    for seg in segments.values():
        was_training = seg.training
        seg.eval()
        x = seg(x)
        seg.train(was_training)
    return int(x.shape[1])
