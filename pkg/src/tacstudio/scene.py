"""Sensor scene assembly and spherical indentation.

A sensor design is the five-part modularization: soft elastomer, support
structure, opaque coating (the sensing surface), lights, and a camera.
Parts carry triangle meshes with one optical material each; an optional
cage + blend per part drives shape edits.  Indentation is a geometric
imprint of a rigid sphere with a cosine falloff band, not a mechanics
simulation.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .library import ComponentLibrary, LibraryError, material_from_dict
from .mesh import CageBlend, DeformationCage, TriangleMesh, build_cage, deform, load_obj
from .optics import CameraModel, LightSource, OpticalMaterial

ROLES = ("sensing_surface", "elastomer", "support", "mirror", "blocking", "interface")

#: falloff band width at the contact rim, mm
BAND_WIDTH = 0.5
#: default press depth when an indentation spec leaves it out, mm
DEFAULT_DEPTH = 0.5
DEFAULT_RADIUS = 1.5


class AssemblyError(ValueError):
    """Design file fails validation."""


class ContactError(ValueError):
    """Indenter sphere does not touch the sensing surface."""


@dataclass(frozen=True)
class SensorPart:
    name: str
    role: str
    mesh: TriangleMesh              # current (possibly cage-deformed) mesh
    material: OpticalMaterial
    base_mesh: TriangleMesh | None = None
    cage: DeformationCage | None = None
    blend: CageBlend | None = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise AssemblyError(f"part {self.name!r}: unknown role {self.role!r}")


@dataclass(frozen=True)
class SensorDesign:
    parts: tuple[SensorPart, ...]
    lights: tuple[LightSource, ...]
    camera: CameraModel
    name: str = "design"
    indentation_presets: dict = field(default_factory=dict)

    def __post_init__(self):
        sensing = [p for p in self.parts if p.role == "sensing_surface"]
        if len(sensing) != 1:
            raise AssemblyError(
                f"design needs exactly one sensing surface, found {len(sensing)}")
        if len(self.lights) < 1:
            raise AssemblyError("design needs at least one light")

    @property
    def sensing_surface(self) -> SensorPart:
        return next(p for p in self.parts if p.role == "sensing_surface")

    def light_groups(self) -> dict[str, list[LightSource]]:
        groups: dict[str, list[LightSource]] = {}
        for l in self.lights:
            groups.setdefault(l.group_id, []).append(l)
        return groups

    def replace_part(self, name: str, part: SensorPart) -> "SensorDesign":
        parts = tuple(part if p.name == name else p for p in self.parts)
        return replace(self, parts=parts)

    def part(self, name: str) -> SensorPart:
        for p in self.parts:
            if p.name == name:
                return p
        raise KeyError(f"no part named {name!r}")

    def validation_report(self) -> dict:
        return {
            "name": self.name,
            "parts": [{"name": p.name, "role": p.role,
                       "material": p.material.kind,
                       "faces": p.mesh.num_faces,
                       "caged": p.cage is not None} for p in self.parts],
            "light_groups": {g: [l.kind + "/" + l.color for l in ls]
                             for g, ls in self.light_groups().items()},
            "camera": {"fov_degrees": self.camera.fov_degrees,
                       "width": self.camera.width,
                       "height": self.camera.height},
            "roles": sorted({p.role for p in self.parts}),
        }


@dataclass(frozen=True)
class IndentationSpec:
    sphere_center: np.ndarray       # on/above the sensing surface, mm
    radius: float = DEFAULT_RADIUS
    depth: float = DEFAULT_DEPTH

    def __post_init__(self):
        object.__setattr__(self, "sphere_center",
                           np.asarray(self.sphere_center, float))
        if not self.radius > 0:
            raise ValueError("radius must be > 0")
        if not 0.0 <= self.depth < self.radius:
            raise ValueError("depth must satisfy 0 <= depth < radius")

    @property
    def contact_radius(self) -> float:
        """Radius of the contact disc on a flat surface."""
        return math.sqrt(self.radius ** 2 - (self.radius - self.depth) ** 2)


# ---------------------------------------------------------------------------
# Assembly

def assemble(design_file, library: ComponentLibrary,
             workspace_root=None) -> SensorDesign:
    """Materialize a design document into a renderable SensorDesign.

    Mesh paths are resolved relative to the design file and must stay
    inside ``workspace_root`` (defaults to the design file's directory).
    """
    design_file = Path(design_file)
    try:
        with open(design_file) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise AssemblyError(f"cannot read design file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise AssemblyError(f"design file is not valid JSON: {exc}") from exc
    root = Path(workspace_root) if workspace_root else design_file.parent
    return assemble_dict(doc, library, design_file.parent, root,
                         name=design_file.stem)


def assemble_dict(doc: dict, library: ComponentLibrary, base_dir: Path,
                  workspace_root: Path, name: str = "design") -> SensorDesign:
    parts = []
    for pd in doc.get("parts", []):
        mesh_path = _resolve_path(pd["mesh"], base_dir, workspace_root)
        if not mesh_path.exists():
            raise AssemblyError(f"part {pd.get('name')!r}: missing mesh {pd['mesh']}")
        mesh = load_obj(mesh_path)
        mesh.validate()
        mat = pd.get("material")
        if isinstance(mat, str):
            try:
                material = library.material(mat)
            except LibraryError as exc:
                raise AssemblyError(str(exc)) from exc
        elif isinstance(mat, dict):
            material = material_from_dict(mat)
        else:
            raise AssemblyError(f"part {pd.get('name')!r}: needs exactly one material")

        cage = blend = None
        base_mesh = None
        if pd.get("cage"):
            base_mesh = mesh
            cage = build_cage(mesh)
            cd = pd["cage"]
            c_min = cage.vertices + np.asarray(cd.get("c_min_offset", np.zeros((27, 3))), float)
            c_max = cage.vertices + np.asarray(cd.get("c_max_offset", np.zeros((27, 3))), float)
            alpha = np.asarray(cd.get("alpha", np.zeros((27, 3))), float)
            blend = CageBlend(c_min, c_max, alpha)
            mesh = deform(base_mesh, cage, blend)
        parts.append(SensorPart(pd["name"], pd["role"], mesh, material,
                                base_mesh=base_mesh, cage=cage, blend=blend))

    lights = []
    for ld in doc.get("lights", []):
        preset_ref = ld.get("preset")
        if isinstance(preset_ref, str):
            try:
                preset = library.light(preset_ref)
            except LibraryError as exc:
                raise AssemblyError(str(exc)) from exc
        else:
            raise AssemblyError(f"light {ld.get('name')!r}: needs a preset name")
        lights.append(preset.instantiate(
            ld["position"], ld.get("orientation", (0.0, 0.0, 1.0)),
            color=ld.get("color", "W"), group_id=ld.get("group", "default"),
            scale=ld.get("scale", 1.0)))

    cam_doc = doc.get("camera")
    if cam_doc is None:
        raise AssemblyError("design is missing its camera module")
    if isinstance(cam_doc, list):
        if len(cam_doc) != 1:
            raise AssemblyError(f"multiple cameras: found {len(cam_doc)}, need exactly 1")
        cam_doc = cam_doc[0]
    if "preset" in cam_doc:
        try:
            preset = library.camera(cam_doc["preset"])
        except LibraryError as exc:
            raise AssemblyError(str(exc)) from exc
        camera = preset.instantiate(cam_doc["position"], cam_doc["look_at"],
                                    up=cam_doc.get("up", (0.0, 1.0, 0.0)),
                                    exposure_ev=cam_doc.get("exposure_ev", 0.0),
                                    width=cam_doc.get("width"),
                                    height=cam_doc.get("height"))
    else:
        camera = CameraModel(cam_doc["position"], cam_doc["look_at"],
                             np.asarray(cam_doc.get("up", (0.0, 1.0, 0.0)), float),
                             cam_doc.get("fov_degrees", 60.0),
                             cam_doc.get("width", 320), cam_doc.get("height", 240),
                             cam_doc.get("exposure_ev", 0.0))

    indents = {}
    for key, d in doc.get("indentations", {}).items():
        indents[key] = IndentationSpec(np.asarray(d["center"], float),
                                       d.get("radius", DEFAULT_RADIUS),
                                       d.get("depth", DEFAULT_DEPTH))

    return SensorDesign(tuple(parts), tuple(lights), camera, name=name,
                        indentation_presets=indents)


def _resolve_path(rel: str, base_dir: Path, workspace_root: Path) -> Path:
    p = (base_dir / rel).resolve()
    root = workspace_root.resolve()
    if root not in p.parents and p != root:
        raise AssemblyError(f"path escape: {rel!r} resolves outside the workspace")
    return p


# ---------------------------------------------------------------------------
# Indentation

def _ray_mesh_hits(mesh: TriangleMesh, origin: np.ndarray, direction: np.ndarray):
    """All ray/triangle hit distances (Moller-Trumbore, vectorized)."""
    v0 = mesh.vertices[mesh.faces[:, 0]]
    e1 = mesh.vertices[mesh.faces[:, 1]] - v0
    e2 = mesh.vertices[mesh.faces[:, 2]] - v0
    p = np.cross(direction, e2)
    det = np.einsum("ij,ij->i", e1, p)
    ok = np.abs(det) > 1e-12
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    s = origin - v0
    u = np.einsum("ij,ij->i", s, p) * inv
    q = np.cross(s, e1)
    v = np.einsum("j,ij->i", direction, q) * inv
    t = np.einsum("ij,ij->i", e2, q) * inv
    hit = ok & (u >= -1e-9) & (v >= -1e-9) & (u + v <= 1 + 1e-9)
    return t[hit], np.nonzero(hit)[0]


def _surface_contact_frame(mesh: TriangleMesh, point: np.ndarray):
    """(surface point, outward unit normal) nearest to ``point``.

    Outward orientation follows the mesh winding (vertex normals).
    """
    d2 = np.einsum("ij,ij->i", mesh.vertices - point, mesh.vertices - point)
    vi = int(np.argmin(d2))
    n_out = mesh.vertex_normals()[vi]
    # refine by casting through the surface along the normal axis
    origin = point + 10.0 * n_out
    ts, _ = _ray_mesh_hits(mesh, origin, -n_out)
    if len(ts):
        ts = ts[ts > 0]
    if len(ts):
        p0 = origin - n_out * ts.min()
    else:
        p0 = mesh.vertices[vi]
    return p0, n_out


def indent(design: SensorDesign, spec: IndentationSpec) -> SensorDesign:
    """Press a rigid sphere into the sensing surface.

    The sphere is placed so its deepest point sits ``depth`` below the
    undeformed surface at the contact point.  Vertices inside the sphere
    are projected radially onto it; an inner annulus of radial width
    min(0.5 mm, depth) blends with a cosine falloff so the imprint meets
    the undeformed surface smoothly.  Everything else is untouched.
    """
    part = design.sensing_surface
    mesh = part.mesh
    p0, n_out = _surface_contact_frame(mesh, spec.sphere_center)
    if np.linalg.norm(p0 - spec.sphere_center) > 10.0 * spec.radius:
        raise ContactError("indenter sphere does not project onto the sensing surface")
    center = p0 + n_out * (spec.radius - spec.depth)

    v = mesh.vertices
    delta = v - center
    dist = np.linalg.norm(delta, axis=1)
    inside = dist < spec.radius
    if spec.depth > 0.0 and not inside.any():
        raise ContactError("indenter sphere misses every sensing-surface vertex")

    band = min(BAND_WIDTH, spec.depth) if spec.depth > 0 else 0.0
    new_v = v.copy()
    if inside.any():
        d = dist[inside]
        target = center + spec.radius * delta[inside] / d[:, None]
        if band > 0.0:
            gap = spec.radius - d  # radial depth inside the sphere
            w = np.where(gap >= band, 1.0,
                         0.5 * (1.0 - np.cos(math.pi * gap / band)))
        else:
            w = np.ones_like(d)
        new_v[inside] = v[inside] + w[:, None] * (target - v[inside])

    new_part = replace(part, mesh=mesh.with_vertices(new_v))
    return design.replace_part(part.name, new_part)


def indenter_grid(design: SensorDesign, n: int = 9,
                  radius: float = DEFAULT_RADIUS,
                  depth: float = DEFAULT_DEPTH) -> list[IndentationSpec]:
    """Near-square grid of indenter locations covering the sensing surface.

    Locations span the surface's parametric AABB (two largest extents),
    inset 10% from each border, and are projected onto the surface.
    """
    if n < 1:
        raise ValueError("need at least one indenter location")
    mesh = design.sensing_surface.mesh
    lo, hi = mesh.aabb()
    ext = hi - lo
    axes = np.argsort(ext)[::-1]
    a0, a1, a_n = int(axes[0]), int(axes[1]), int(axes[2])

    cols = max(1, int(math.ceil(math.sqrt(n))))
    rows = int(math.ceil(n / cols))

    def fractions(k):
        if k == 1:
            return [0.5]
        return list(np.linspace(0.1, 0.9, k))

    normal_axis = np.zeros(3)
    normal_axis[a_n] = 1.0
    specs = []
    for fv in fractions(rows):
        for fu in fractions(cols):
            if len(specs) >= n:
                break
            c = lo.copy()
            c[a0] = lo[a0] + fu * ext[a0]
            c[a1] = lo[a1] + fv * ext[a1]
            c[a_n] = hi[a_n] + 1.0
            # project down onto the surface along the minor axis
            ts, _ = _ray_mesh_hits(mesh, c, -normal_axis)
            if len(ts):
                c = c - normal_axis * ts[ts > 0].min()
            specs.append(IndentationSpec(c, radius, depth))
    return specs
