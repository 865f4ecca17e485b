"""Deterministic ideal-path camera probe.

Each camera ray is traced with ideal refraction at dielectric boundaries and
ideal reflection at mirrors until it reaches the sensing surface or is lost.
No sampling is involved, so results are exactly reproducible.
"""

from dataclasses import dataclass

import numpy as np

from .compile import compile_scene
from .image import NormalMap
from .kernels import probe_rays


@dataclass(frozen=True)
class RayProbeResult:
    """Per-ray outcome of an ideal-path probe.

    Arrays have one row per ray in row-major pixel order.  ``hit`` marks
    rays that reached the sensing surface; for those, ``position``,
    ``face``, ``cos_incidence`` and ``normal`` describe the arrival.
    ``faces_total`` is the sensing surface's face count.
    """

    width: int
    height: int
    hit: np.ndarray
    position: np.ndarray
    face: np.ndarray
    cos_incidence: np.ndarray
    normal: np.ndarray
    faces_total: int

    @property
    def rays_total(self):
        return self.hit.shape[0]

    @property
    def faces_covered(self):
        """Number of distinct sensing-surface faces reached by any ray."""
        hit_faces = self.face[self.hit.astype(bool)]
        return int(np.unique(hit_faces).size)


def _camera_rays(scene, corners=False):
    """Ray origins/directions; pixel centers, or the (w+1)x(h+1) corner
    lattice when ``corners`` is set."""
    w, h = scene.width, scene.height
    if corners:
        xs = np.arange(w + 1, dtype=float)
        ys = np.arange(h + 1, dtype=float)
    else:
        xs = np.arange(w, dtype=float) + 0.5
        ys = np.arange(h, dtype=float) + 0.5
    sx = (xs / w * 2.0 - 1.0) * scene.tan_x
    sy = (1.0 - ys / h * 2.0) * scene.tan_y
    gx, gy = np.meshgrid(sx, sy)
    dirs = (scene.cam_fwd[None, None, :]
            + gx[..., None] * scene.cam_right[None, None, :]
            + gy[..., None] * scene.cam_up[None, None, :])
    dirs = dirs.reshape(-1, 3)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    origins = np.broadcast_to(scene.cam_pos, dirs.shape).copy()
    return origins, dirs


def ray_probe(design, width=None, height=None, corners=False, max_depth=16):
    """Trace one ideal ray per pixel (or per pixel corner) toward the
    sensing surface and report where each lands."""
    scene = compile_scene(design, width=width, height=height)
    origins, dirs = _camera_rays(scene, corners=corners)
    hit, pos, face, cosi, nrm = probe_rays(
        origins, dirs, scene.verts, scene.vnormals, scene.tris,
        scene.tri_part, scene.face_id, scene.mat_kind, scene.mat_eta,
        scene.is_sensing, scene.is_mirror,
        scene.node_lo, scene.node_hi, scene.node_left, scene.node_start,
        scene.node_count, max_depth)
    out_w = scene.width + 1 if corners else scene.width
    out_h = scene.height + 1 if corners else scene.height
    return RayProbeResult(width=out_w, height=out_h, hit=hit, position=pos,
                          face=face, cos_incidence=cosi, normal=nrm,
                          faces_total=scene.sensing_faces_total)


def render_normals(design, width=None, height=None, max_depth=16):
    """Per-pixel sensing-surface normal map via the ideal-path probe."""
    probe = ray_probe(design, width=width, height=height, max_depth=max_depth)
    normals = probe.normal.reshape(probe.height, probe.width, 3)
    valid = probe.hit.reshape(probe.height, probe.width).astype(bool)
    return NormalMap(normals=normals, valid=valid)
