"""Component library: named material / light / camera presets.

The shipped library lives under ``tacstudio/data/library`` as one JSON
file per component plus two-column angular-profile text files.  Designs
reference presets by name.  Values are physically plausible uncalibrated
defaults; each preset carries a ``notes`` field saying so.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .optics import (
    AngularProfile,
    AreaLight,
    CameraModel,
    Diffuse,
    LightSource,
    OpticalMaterial,
    PointLight,
    RoughConductor,
    RoughDielectric,
)


class LibraryError(KeyError):
    """Missing or malformed library preset."""


_COLOR_MASKS = {
    "R": np.array([1.0, 0.0, 0.0]),
    "G": np.array([0.0, 1.0, 0.0]),
    "B": np.array([0.0, 0.0, 1.0]),
    "W": np.array([1.0, 1.0, 1.0]),
}


def material_from_dict(d: dict) -> OpticalMaterial:
    kind = d.get("kind")
    if kind == "rough_dielectric":
        return RoughDielectric(eta=d["eta"], roughness=d.get("roughness", 0.05))
    if kind == "rough_conductor":
        return RoughConductor(
            reflectance_rgb=tuple(d.get("reflectance_rgb", (0.9, 0.9, 0.9))),
            eta_rgb=tuple(d.get("eta_rgb", (1.5, 1.5, 1.5))),
            specularity=d.get("specularity", 0.5),
        )
    if kind == "diffuse":
        return Diffuse(albedo_rgb=tuple(d.get("albedo_rgb", (0.5, 0.5, 0.5))))
    raise LibraryError(f"unknown material kind {kind!r}")


@dataclass(frozen=True)
class LightPreset:
    """Light template; position/orientation/color come from the design."""

    name: str
    kind: str                        # "point" | "area"
    intensity_rgb: tuple = (1.0, 1.0, 1.0)   # W/sr for point
    radiance_rgb: tuple = (1.0, 1.0, 1.0)    # for area
    size_mm: tuple = (3.5, 2.8)              # area emitter dimensions
    profile: AngularProfile | None = None
    notes: str = ""

    def instantiate(self, position, orientation, color: str = "W",
                    group_id: str = "default", scale: float = 1.0) -> LightSource:
        if color not in _COLOR_MASKS:
            raise ValueError(f"light color must be one of R/G/B/W, got {color!r}")
        mask = _COLOR_MASKS[color]
        position = np.asarray(position, float)
        orientation = np.asarray(orientation, float)
        orientation = orientation / np.linalg.norm(orientation)
        if self.kind == "point":
            return PointLight(position, orientation,
                              scale * mask * np.asarray(self.intensity_rgb),
                              self.profile, group_id=group_id, color=color)
        if self.kind == "area":
            # rectangle centered on position, normal along orientation
            t = np.cross(orientation, [0.0, 0.0, 1.0])
            if np.linalg.norm(t) < 1e-9:
                t = np.cross(orientation, [1.0, 0.0, 0.0])
            t = t / np.linalg.norm(t)
            b = np.cross(orientation, t)
            return AreaLight(position, 0.5 * self.size_mm[0] * t,
                             0.5 * self.size_mm[1] * b,
                             scale * mask * np.asarray(self.radiance_rgb),
                             group_id=group_id, color=color)
        raise LibraryError(f"unknown light kind {self.kind!r}")


@dataclass(frozen=True)
class CameraPreset:
    name: str
    fov_degrees: float
    width: int
    height: int
    notes: str = ""

    def instantiate(self, position, look_at, up=(0.0, 1.0, 0.0),
                    exposure_ev: float = 0.0, width: int | None = None,
                    height: int | None = None) -> CameraModel:
        return CameraModel(np.asarray(position, float), np.asarray(look_at, float),
                           np.asarray(up, float), self.fov_degrees,
                           width or self.width, height or self.height, exposure_ev)


class ComponentLibrary:
    """Read-only collection of named presets, safe for concurrent readers."""

    def __init__(self, materials: dict, lights: dict, cameras: dict,
                 profiles: dict):
        self.materials = materials
        self.lights = lights
        self.cameras = cameras
        self.profiles = profiles

    def material(self, name: str) -> OpticalMaterial:
        return self._get(self.materials, name, "material")

    def light(self, name: str) -> LightPreset:
        return self._get(self.lights, name, "light")

    def camera(self, name: str) -> CameraPreset:
        return self._get(self.cameras, name, "camera")

    @staticmethod
    def _get(table: dict, name: str, kind: str):
        if name not in table:
            raise LibraryError(
                f"unknown {kind} preset {name!r}; available: {sorted(table)}")
        return table[name]

    def summary(self) -> dict:
        return {
            "materials": sorted(self.materials),
            "lights": sorted(self.lights),
            "cameras": sorted(self.cameras),
            "profiles": sorted(self.profiles),
        }


def library_load(path=None) -> ComponentLibrary:
    """Load a library directory (defaults to the shipped one).

    Layout: ``materials/*.json``, ``lights/*.json``, ``cameras/*.json``,
    ``profiles/*.txt``.
    """
    if path is None:
        path = resources.files("tacstudio").joinpath("data/library")
    root = Path(str(path))
    if not root.is_dir():
        raise LibraryError(f"library directory not found: {root}")

    profiles: dict[str, AngularProfile] = {}
    for f in sorted((root / "profiles").glob("*.txt")):
        profiles[f.stem] = AngularProfile.load(f)

    materials: dict[str, OpticalMaterial] = {}
    for f in sorted((root / "materials").glob("*.json")):
        d = _read_json(f)
        materials[d.get("name", f.stem)] = material_from_dict(d)

    lights: dict[str, LightPreset] = {}
    for f in sorted((root / "lights").glob("*.json")):
        d = _read_json(f)
        prof = None
        if d.get("profile"):
            if d["profile"] not in profiles:
                raise LibraryError(f"{f.name}: unknown profile {d['profile']!r}")
            prof = profiles[d["profile"]]
        lights[d.get("name", f.stem)] = LightPreset(
            name=d.get("name", f.stem),
            kind=d["kind"],
            intensity_rgb=tuple(d.get("intensity_rgb", (1.0, 1.0, 1.0))),
            radiance_rgb=tuple(d.get("radiance_rgb", (1.0, 1.0, 1.0))),
            size_mm=tuple(d.get("size_mm", (3.5, 2.8))),
            profile=prof,
            notes=d.get("notes", ""),
        )

    cameras: dict[str, CameraPreset] = {}
    for f in sorted((root / "cameras").glob("*.json")):
        d = _read_json(f)
        cameras[d.get("name", f.stem)] = CameraPreset(
            name=d.get("name", f.stem),
            fov_degrees=d["fov_degrees"],
            width=d["width"], height=d["height"],
            notes=d.get("notes", ""),
        )

    return ComponentLibrary(materials, lights, cameras, profiles)


def _read_json(path: Path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (json.JSONDecodeError, OSError) as exc:
        raise LibraryError(f"failed to load preset {path}: {exc}") from exc
