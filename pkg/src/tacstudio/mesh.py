"""Triangle meshes, OBJ I/O, and cage-driven deformation.

All coordinates are in millimeters. A mesh can be wrapped in a 27-vertex
cuboidal cage (3x3x3 lattice over its bounding box); the cage drives the
mesh through per-cell trilinear interpolation of bind-time local
coordinates, so editing 81 numbers reshapes an arbitrarily dense surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class MeshError(ValueError):
    """Raised for invalid mesh files or malformed mesh data."""


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray  # (nv, 3) float64, mm
    faces: np.ndarray     # (nf, 3) int32

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        f = np.ascontiguousarray(np.asarray(self.faces, dtype=np.int32))
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError(f"vertices must be (n, 3), got {v.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise MeshError(f"faces must be (n, 3), got {f.shape}")
        if len(v) == 0:
            raise MeshError("empty mesh: no vertices")
        if len(f) and (f.min() < 0 or f.max() >= len(v)):
            raise MeshError("face index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    def face_normals(self) -> np.ndarray:
        """Unit normals per face (right-hand winding)."""
        a, b, c = (self.vertices[self.faces[:, i]] for i in range(3))
        n = np.cross(b - a, c - a)
        norm = np.linalg.norm(n, axis=1, keepdims=True)
        return n / np.maximum(norm, 1e-300)

    def face_areas(self) -> np.ndarray:
        a, b, c = (self.vertices[self.faces[:, i]] for i in range(3))
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def vertex_normals(self) -> np.ndarray:
        """Area-weighted per-vertex unit normals."""
        a, b, c = (self.vertices[self.faces[:, i]] for i in range(3))
        fn = np.cross(b - a, c - a)  # area-weighted
        vn = np.zeros_like(self.vertices)
        for i in range(3):
            np.add.at(vn, self.faces[:, i], fn)
        norm = np.linalg.norm(vn, axis=1, keepdims=True)
        return vn / np.maximum(norm, 1e-300)

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def with_vertices(self, vertices: np.ndarray) -> "TriangleMesh":
        return TriangleMesh(vertices, self.faces)

    def validate(self, min_area: float = 1e-12) -> None:
        """Check face indices and reject degenerate (zero-area) faces."""
        if self.num_faces and self.face_areas().min() <= min_area:
            bad = int(np.argmin(self.face_areas()))
            raise MeshError(f"degenerate face {bad} (area <= {min_area} mm^2)")


def load_obj(path) -> TriangleMesh:
    """Parse an ASCII OBJ file (v/f records; polygons fan-triangulated)."""
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tok = line.split()
            try:
                if tok[0] == "v":
                    vertices.append([float(tok[1]), float(tok[2]), float(tok[3])])
                elif tok[0] == "f":
                    # indices may carry /vt/vn suffixes; 1-based, negatives
                    # count from the end
                    idx = []
                    for t in tok[1:]:
                        i = int(t.split("/")[0])
                        idx.append(i - 1 if i > 0 else len(vertices) + i)
                    for k in range(1, len(idx) - 1):
                        faces.append([idx[0], idx[k], idx[k + 1]])
            except (IndexError, ValueError) as exc:
                raise MeshError(f"{path}: parse error at line {lineno}: {line!r}") from exc
    if not vertices:
        raise MeshError(f"{path}: empty mesh (no vertices)")
    return TriangleMesh(np.array(vertices), np.array(faces, dtype=np.int32).reshape(-1, 3))


def save_obj(mesh: TriangleMesh, path) -> None:
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


# ---------------------------------------------------------------------------
# Cage deformation

#: lattice nodes per axis; 3x3x3 = 27 control points total
CAGE_RES = 3
CAGE_VERTS = CAGE_RES ** 3


def _lattice_index(i: int, j: int, k: int) -> int:
    """Flat index of lattice node (i, j, k), axes ordered x, y, z."""
    return (i * CAGE_RES + j) * CAGE_RES + k


@dataclass(frozen=True)
class DeformationCage:
    """3x3x3 control lattice bound to a mesh.

    ``vertices`` holds the 27 bind-time lattice points (Cartesian product of
    {min, mid, max} per axis of the mesh AABB).  ``cells`` and ``local``
    freeze, per mesh vertex, the 2x2x2 cell it fell in and its (u, v, w)
    coordinates inside that cell.
    """

    vertices: np.ndarray   # (27, 3)
    cells: np.ndarray      # (nv, 3) int8 cell index per axis, in {0, 1}
    local: np.ndarray      # (nv, 3) float64 in [0, 1]

    def __post_init__(self):
        if self.vertices.shape != (CAGE_VERTS, 3):
            raise ValueError(f"cage must have {CAGE_VERTS} vertices")

    def current_vertices(self, blend: "CageBlend | None") -> np.ndarray:
        if blend is None:
            return self.vertices
        a = np.clip(blend.alpha, 0.0, 1.0)
        return (1.0 - a) * blend.c_min + a * blend.c_max


@dataclass(frozen=True)
class CageBlend:
    """Shape state as a blend between two user-set cage extremes.

    current = (1 - alpha) * c_min + alpha * c_max, all (27, 3); alpha entries
    are clamped to [0, 1] at use.
    """

    c_min: np.ndarray
    c_max: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        for name in ("c_min", "c_max", "alpha"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (CAGE_VERTS, 3):
                raise ValueError(f"{name} must be ({CAGE_VERTS}, 3)")
            object.__setattr__(self, name, arr)

    @classmethod
    def identity(cls, cage: DeformationCage) -> "CageBlend":
        return cls(cage.vertices.copy(), cage.vertices.copy(),
                   np.zeros((CAGE_VERTS, 3)))


def build_cage(mesh: TriangleMesh, pad: float = 1e-6) -> DeformationCage:
    """Bounding-box cage with mid-plane nodes; binds every mesh vertex.

    Degenerate AABB axes are padded by ``pad`` mm so planar sheets can be
    caged.
    """
    lo, hi = mesh.aabb()
    ext = hi - lo
    degenerate = ext < pad
    lo = np.where(degenerate, lo - pad, lo)
    hi = np.where(degenerate, hi + pad, hi)

    levels = [np.array([lo[a], 0.5 * (lo[a] + hi[a]), hi[a]]) for a in range(3)]
    verts = np.zeros((CAGE_VERTS, 3))
    for i in range(CAGE_RES):
        for j in range(CAGE_RES):
            for k in range(CAGE_RES):
                verts[_lattice_index(i, j, k)] = (levels[0][i], levels[1][j], levels[2][k])

    # normalized position in the whole box, then split into cell + local
    t = (mesh.vertices - lo) / (hi - lo)
    t = np.clip(t, 0.0, 1.0)
    s = t * 2.0  # in [0, 2]; integer part = cell, fraction = local coord
    cells = np.minimum(s.astype(np.int8), 1)
    local = s - cells
    return DeformationCage(verts, cells, local)


def deform(mesh: TriangleMesh, cage: DeformationCage, blend: CageBlend | None) -> TriangleMesh:
    """Re-evaluate mesh vertices against the blended cage.

    Per-cell trilinear interpolation of the frozen (u, v, w) coordinates
    against the 8 corners of each vertex's cell; topology is unchanged.
    """
    if len(cage.cells) != mesh.num_vertices:
        raise ValueError("cage is not bound to this mesh")
    cur = cage.current_vertices(blend)

    u = cage.local
    out = np.zeros_like(mesh.vertices)
    for di in (0, 1):
        wi = u[:, 0] if di else 1.0 - u[:, 0]
        for dj in (0, 1):
            wj = u[:, 1] if dj else 1.0 - u[:, 1]
            for dk in (0, 1):
                wk = u[:, 2] if dk else 1.0 - u[:, 2]
                idx = ((cage.cells[:, 0] + di) * CAGE_RES
                       + (cage.cells[:, 1] + dj)) * CAGE_RES + (cage.cells[:, 2] + dk)
                out += (wi * wj * wk)[:, None] * cur[idx]
    return mesh.with_vertices(out)
