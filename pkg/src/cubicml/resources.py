"""Shipped space and simulator files, addressable by short name."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

SPACE_SUFFIX = ".space"
PARAMS_SUFFIX = ".params"


def _data_dir(kind: str) -> Path:
    return Path(str(resources.files("cubicml") / "data" / kind))


def builtin_spaces() -> list[str]:
    return sorted(p.stem for p in _data_dir("spaces").glob(f"*{SPACE_SUFFIX}"))


def builtin_params() -> list[str]:
    return sorted(p.stem for p in _data_dir("sims").glob(f"*{PARAMS_SUFFIX}"))


def _resolve(name_or_path: str | Path, kind: str, suffix: str) -> Path:
    path = Path(name_or_path)
    if path.exists():
        return path
    shipped = _data_dir(kind) / f"{name_or_path}{suffix}"
    if shipped.exists():
        return shipped
    raise FileNotFoundError(f"no such file or built-in {kind[:-1]}: {name_or_path}")


def space_path(name_or_path: str | Path) -> Path:
    return _resolve(name_or_path, "spaces", SPACE_SUFFIX)


def params_path(name_or_path: str | Path) -> Path:
    return _resolve(name_or_path, "sims", PARAMS_SUFFIX)
