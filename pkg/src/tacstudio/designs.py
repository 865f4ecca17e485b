"""Access to the shipped example sensor designs."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def shipped_design_dir() -> Path:
    return Path(str(resources.files("tacstudio").joinpath("data/designs")))


def shipped_design_path(name: str) -> Path:
    p = shipped_design_dir() / f"{name}.json"
    if not p.exists():
        available = sorted(f.stem for f in shipped_design_dir().glob("*.json"))
        raise FileNotFoundError(f"no shipped design {name!r}; available: {available}")
    return p


def list_shipped_designs() -> list[str]:
    return sorted(f.stem for f in shipped_design_dir().glob("*.json"))
