"""Flatten a SensorDesign into numba-friendly arrays plus a BVH."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..optics import AreaLight, Diffuse, PointLight, RoughConductor, RoughDielectric
from ..scene import SensorDesign

MAT_DIFFUSE = 0
MAT_CONDUCTOR = 1
MAT_DIELECTRIC = 2

LIGHT_POINT = 0
LIGHT_AREA = 1

_LEAF_SIZE = 4


@dataclass
class CompiledScene:
    verts: np.ndarray          # (nv, 3) f64
    vnormals: np.ndarray       # (nv, 3) f64
    tris: np.ndarray           # (nf, 3) i32, BVH order
    tri_part: np.ndarray       # (nf,) i32
    face_id: np.ndarray        # (nf,) i32, original per-part face index
    # per part
    mat_kind: np.ndarray       # i32
    mat_rgb: np.ndarray        # (np, 3) albedo / reflectance
    mat_alpha: np.ndarray      # GGX alpha
    mat_eta: np.ndarray
    is_sensing: np.ndarray     # u8
    is_mirror: np.ndarray      # u8 (mirror role AND specularity >= 0.5)
    # lights
    light_kind: np.ndarray
    light_pos: np.ndarray      # (nl, 3) position / rect center
    light_dir: np.ndarray      # orientation / rect normal
    light_rgb: np.ndarray
    light_eu: np.ndarray
    light_ev: np.ndarray
    light_area: np.ndarray
    prof_ang: np.ndarray       # radians, concatenated
    prof_mul: np.ndarray
    prof_off: np.ndarray       # (nl + 1,) i32
    # camera
    cam_pos: np.ndarray
    cam_right: np.ndarray
    cam_up: np.ndarray
    cam_fwd: np.ndarray
    tan_x: float
    tan_y: float
    width: int
    height: int
    # bvh
    node_lo: np.ndarray
    node_hi: np.ndarray
    node_left: np.ndarray      # child index, or -1 for leaf
    node_start: np.ndarray
    node_count: np.ndarray
    # misc
    scene_diag: float
    sensing_faces_total: int


def build_bvh(verts: np.ndarray, tris: np.ndarray):
    """Median-split BVH; returns (order, lo, hi, left, start, count)."""
    nf = len(tris)
    centroids = verts[tris].mean(axis=1)
    tmin = verts[tris].min(axis=1)
    tmax = verts[tris].max(axis=1)

    order = np.arange(nf)
    node_lo, node_hi, node_left, node_start, node_count = [], [], [], [], []

    # (start, count) ranges into `order`; children patched after the stack pop
    stack = [(0, nf, -1, False)]
    while stack:
        start, count, parent, is_right = stack.pop()
        idx = order[start:start + count]
        lo = tmin[idx].min(axis=0)
        hi = tmax[idx].max(axis=0)
        me = len(node_lo)
        node_lo.append(lo)
        node_hi.append(hi)
        if parent >= 0 and not is_right:
            node_left[parent] = me
        if count <= _LEAF_SIZE:
            node_left.append(-1)
            node_start.append(start)
            node_count.append(count)
            continue
        axis = int(np.argmax(hi - lo))
        half = count // 2
        part = np.argpartition(centroids[idx, axis], half)
        order[start:start + count] = idx[part]
        node_left.append(-2)  # patched when the left child is created
        node_start.append(0)
        node_count.append(0)
        # push right first so the left child is created immediately after,
        # making right sibling index = left + subtree size; store explicitly
        stack.append((start + half, count - half, me, True))
        stack.append((start, half, me, False))

    # right child index: recover by walking; simpler to rebuild via ranges
    return (order, np.array(node_lo), np.array(node_hi),
            np.array(node_left, dtype=np.int32),
            np.array(node_start, dtype=np.int32),
            np.array(node_count, dtype=np.int32))


def _bvh_right_children(node_left, node_start, node_count):
    """Right child = index after the left subtree in creation order."""
    n = len(node_left)
    right = np.full(n, -1, dtype=np.int32)
    # creation order is depth-first (left before right), so the right child
    # of node i is the next node at the same depth; compute via subtree size
    size = np.ones(n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        if node_left[i] >= 0:
            l = node_left[i]
            size[i] = 1 + size[l] + size[l + size[l]]
    for i in range(n):
        if node_left[i] >= 0:
            l = node_left[i]
            right[i] = l + size[l]
    return right


def compile_scene(design: SensorDesign, width: int | None = None,
                  height: int | None = None) -> CompiledScene:
    verts_list, vnorm_list, tris_list, part_list, fid_list = [], [], [], [], []
    mat_kind, mat_rgb, mat_alpha, mat_eta = [], [], [], []
    is_sensing, is_mirror = [], []
    voffset = 0
    for pi, part in enumerate(design.parts):
        m = part.mesh
        verts_list.append(m.vertices)
        vnorm_list.append(m.vertex_normals())
        tris_list.append(m.faces.astype(np.int64) + voffset)
        part_list.append(np.full(m.num_faces, pi, dtype=np.int32))
        fid_list.append(np.arange(m.num_faces, dtype=np.int32))
        voffset += m.num_vertices

        mat = part.material
        if isinstance(mat, Diffuse):
            mat_kind.append(MAT_DIFFUSE)
            mat_rgb.append(mat.albedo_rgb)
            mat_alpha.append(1.0)
            mat_eta.append(1.0)
            mirror = False
        elif isinstance(mat, RoughConductor):
            mat_kind.append(MAT_CONDUCTOR)
            mat_rgb.append(mat.reflectance_rgb)
            mat_alpha.append(mat.alpha)
            mat_eta.append(1.0)
            mirror = mat.specularity >= 0.5
        elif isinstance(mat, RoughDielectric):
            mat_kind.append(MAT_DIELECTRIC)
            mat_rgb.append((1.0, 1.0, 1.0))
            mat_alpha.append(max(mat.roughness, 0.01))
            mat_eta.append(mat.eta)
            mirror = False
        else:
            raise TypeError(f"cannot compile material {mat!r}")
        is_sensing.append(part.role == "sensing_surface")
        is_mirror.append(mirror and part.role == "mirror")

    verts = np.ascontiguousarray(np.vstack(verts_list))
    vnormals = np.ascontiguousarray(np.vstack(vnorm_list))
    tris = np.vstack(tris_list).astype(np.int32)
    tri_part = np.concatenate(part_list)
    face_id = np.concatenate(fid_list)

    order, lo, hi, left, start, count = build_bvh(verts, tris)
    right = _bvh_right_children(left, start, count)
    # store right child implicitly: node_left holds left, and we re-encode
    # children as (left, right) via two arrays; kernels use node_left/right
    tris = np.ascontiguousarray(tris[order])
    tri_part = np.ascontiguousarray(tri_part[order])
    face_id = np.ascontiguousarray(face_id[order])

    # lights
    nl = len(design.lights)
    light_kind = np.zeros(nl, dtype=np.int32)
    light_pos = np.zeros((nl, 3))
    light_dir = np.zeros((nl, 3))
    light_rgb = np.zeros((nl, 3))
    light_eu = np.zeros((nl, 3))
    light_ev = np.zeros((nl, 3))
    light_area = np.zeros(nl)
    prof_ang: list[np.ndarray] = []
    prof_mul: list[np.ndarray] = []
    prof_off = np.zeros(nl + 1, dtype=np.int32)
    for li, lt in enumerate(design.lights):
        if isinstance(lt, PointLight):
            light_kind[li] = LIGHT_POINT
            light_pos[li] = lt.position
            light_dir[li] = lt.orientation
            light_rgb[li] = lt.intensity_rgb
            if lt.ies_profile is not None:
                prof_ang.append(np.radians(lt.ies_profile.angles_deg))
                prof_mul.append(np.asarray(lt.ies_profile.multipliers, float))
        elif isinstance(lt, AreaLight):
            light_kind[li] = LIGHT_AREA
            light_pos[li] = lt.center
            light_dir[li] = lt.normal
            light_rgb[li] = lt.radiance_rgb
            light_eu[li] = lt.edge_u
            light_ev[li] = lt.edge_v
            light_area[li] = 4.0 * lt.area  # edges are half-extents
    # profile offsets: prof_off[i]..prof_off[i+1] indexes light i's table
    k = 0
    for li, lt in enumerate(design.lights):
        if isinstance(lt, PointLight) and lt.ies_profile is not None:
            k += len(lt.ies_profile.angles_deg)
        prof_off[li + 1] = k
    prof_ang_arr = np.concatenate(prof_ang) if prof_ang else np.zeros(0)
    prof_mul_arr = np.concatenate(prof_mul) if prof_mul else np.zeros(0)

    cam = design.camera
    w = width or cam.width
    h = height or cam.height
    r, u, f = cam.frame()
    tan_x = math.tan(math.radians(cam.fov_degrees) / 2.0)
    tan_y = tan_x * h / w

    slo, shi = verts.min(axis=0), verts.max(axis=0)
    diag = float(np.linalg.norm(shi - slo))

    # pack right-child indices into node_start for inner nodes (unused there)
    node_left = left.copy()
    node_start2 = start.copy()
    inner = left >= 0
    node_start2[inner] = right[inner]

    return CompiledScene(
        verts=verts, vnormals=vnormals, tris=tris, tri_part=tri_part,
        face_id=face_id,
        mat_kind=np.array(mat_kind, dtype=np.int32),
        mat_rgb=np.array(mat_rgb, dtype=np.float64),
        mat_alpha=np.array(mat_alpha, dtype=np.float64),
        mat_eta=np.array(mat_eta, dtype=np.float64),
        is_sensing=np.array(is_sensing, dtype=np.uint8),
        is_mirror=np.array(is_mirror, dtype=np.uint8),
        light_kind=light_kind, light_pos=light_pos, light_dir=light_dir,
        light_rgb=light_rgb, light_eu=light_eu, light_ev=light_ev,
        light_area=light_area,
        prof_ang=prof_ang_arr, prof_mul=prof_mul_arr, prof_off=prof_off,
        cam_pos=cam.position.astype(float), cam_right=r, cam_up=u, cam_fwd=f,
        tan_x=tan_x, tan_y=tan_y, width=w, height=h,
        node_lo=np.ascontiguousarray(lo), node_hi=np.ascontiguousarray(hi),
        node_left=node_left, node_start=node_start2, node_count=count,
        scene_diag=diag,
        sensing_faces_total=int(sum(p.mesh.num_faces for p in design.parts
                                    if p.role == "sensing_surface")),
    )
