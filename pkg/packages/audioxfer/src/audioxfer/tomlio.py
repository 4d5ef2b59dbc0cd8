"""TOML read/write helpers."""

import sys
from pathlib import Path
from typing import Any

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


def strip_none(value: Any) -> Any:
    """Drop None values recursively (TOML has no null)."""
    if isinstance(value, dict):
        return {k: strip_none(v) for k, v in value.items() if v is not None}
    if isinstance(value, (list, tuple)):
        return [strip_none(v) for v in value if v is not None]
    return value


def read_toml(path: str | Path) -> dict[str, Any]:
    with open(path, "rb") as f:
        return tomllib.load(f)


def loads_toml(text: str) -> dict[str, Any]:
    return tomllib.loads(text)


def write_toml(path: str | Path, data: dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        tomli_w.dump(strip_none(data), f)
    return path


TOMLDecodeError = tomllib.TOMLDecodeError
