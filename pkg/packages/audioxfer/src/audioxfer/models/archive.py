"""Named-tensor weight archives.

On disk an archive is a directory::

    index.json   format version, provenance, metadata, and per tensor
                 {shape, dtype, offset, nbytes}
    tensors.bin  all tensors back to back, little-endian, row-major

Archives are immutable once loaded.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any, Mapping

import numpy as np
import torch

from audioxfer.errors import InitializationError, MissingArtifactError
from audioxfer.models.types import CONV_SEGMENTS

logger = logging.getLogger(__name__)

ARCHIVE_FORMAT_VERSION = 1
INDEX_FILE = "index.json"
DATA_FILE = "tensors.bin"

PROVENANCE_IMAGENET = "imagenet-torchvision"
PROVENANCE_TONES = "synthetic-tone-pretraining"
PROVENANCE_CHECKPOINT = "run-checkpoint"


@dataclass(frozen=True)
class WeightArchive:
    """Immutable mapping of parameter/buffer names to tensors.

    Keys are ``<segment>.<module path>``, e.g. ``block1.denseblock1.denselayer1.conv1.weight``.

    Attributes:
        tensors: Read-only name to CPU tensor mapping
        provenance: Where the weights came from
        metadata: Free-form JSON metadata (architecture, depth, topology, ...)
    """

    tensors: Mapping[str, torch.Tensor]
    provenance: str
    metadata: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def from_state(
        cls,
        state: Mapping[str, torch.Tensor],
        provenance: str,
        metadata: dict[str, Any] | None = None,
    ) -> WeightArchive:
        frozen = {k: v.detach().cpu().clone() for k, v in state.items()}
        return cls(
            tensors=MappingProxyType(frozen),
            provenance=provenance,
            metadata=MappingProxyType(dict(metadata or {})),
        )

    def __len__(self) -> int:
        return len(self.tensors)

    @property
    def architecture(self) -> str | None:
        return self.metadata.get("architecture")

    @property
    def depth(self) -> int | None:
        depth = self.metadata.get("depth")
        return None if depth is None else int(depth)

    def segments(self) -> list[str]:
        """Segments that have at least one tensor, in forward order."""
        present = {k.split(".", 1)[0] for k in self.tensors}
        return [s for s in (*CONV_SEGMENTS, "classifier") if s in present]

    def segment_keys(self, segment: str) -> list[str]:
        prefix = f"{segment}."
        return sorted(k for k in self.tensors if k.startswith(prefix))

    def segment_state(self, segment: str) -> dict[str, torch.Tensor]:
        """Tensors of one segment with the segment prefix stripped."""
        n = len(segment) + 1
        return {k[n:]: self.tensors[k] for k in self.segment_keys(segment)}

    def save(self, out_dir: str | Path) -> Path:
        """Write index.json and tensors.bin; the index is written last."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        entries: dict[str, dict[str, Any]] = {}
        offset = 0
        with open(out / DATA_FILE, "wb") as f:
            for name in sorted(self.tensors):
                arr = self.tensors[name].numpy()
                arr = np.ascontiguousarray(arr, dtype=arr.dtype.newbyteorder("<"))
                data = arr.tobytes(order="C")
                f.write(data)
                entries[name] = {
                    "shape": list(arr.shape),
                    "dtype": arr.dtype.str,
                    "offset": offset,
                    "nbytes": len(data),
                }
                offset += len(data)

        index = {
            "format_version": ARCHIVE_FORMAT_VERSION,
            "provenance": self.provenance,
            "metadata": dict(self.metadata),
            "tensors": entries,
        }
        tmp = out / (INDEX_FILE + ".tmp")
        tmp.write_text(json.dumps(index, indent=2))
        os.replace(tmp, out / INDEX_FILE)
        logger.debug(f"Saved {len(entries)} tensors ({offset} bytes) to {out}")
        return out

    @classmethod
    def load(cls, path: str | Path) -> WeightArchive:
        """Read an archive directory.

        Raises:
            MissingArtifactError: No index.json at ``path``
            InitializationError: Unsupported version or truncated data
        """
        root = Path(path)
        index_path = root / INDEX_FILE
        if not index_path.exists():
            raise MissingArtifactError(f"No weight archive at {root} (missing {INDEX_FILE})")
        index = json.loads(index_path.read_text())
        if index.get("format_version") != ARCHIVE_FORMAT_VERSION:
            raise InitializationError(
                f"Weight archive {root} has format version {index.get('format_version')}"
            )
        blob = (root / DATA_FILE).read_bytes()
        tensors: dict[str, torch.Tensor] = {}
        for name, e in index["tensors"].items():
            end = e["offset"] + e["nbytes"]
            if end > len(blob):
                raise InitializationError(f"Weight archive {root} is truncated at tensor '{name}'")
            dtype = np.dtype(e["dtype"])
            arr = np.frombuffer(blob, dtype=dtype, count=e["nbytes"] // dtype.itemsize, offset=e["offset"])
            arr = arr.reshape(e["shape"]).astype(dtype.newbyteorder("="))
            tensors[name] = torch.from_numpy(arr.copy())
        return cls(
            tensors=MappingProxyType(tensors),
            provenance=index["provenance"],
            metadata=MappingProxyType(index.get("metadata", {})),
        )
