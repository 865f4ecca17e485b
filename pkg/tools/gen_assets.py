"""Regenerate the shipped design files and meshes under tacstudio/data/designs.

Run from the repository root:  python3 tools/gen_assets.py
"""

import json
import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from tacstudio.mesh import TriangleMesh, save_obj  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "src/tacstudio/data/designs"
MESHES = OUT / "meshes"


def grid_sheet(nx, ny, size_x, size_y, origin=(0.0, 0.0, 0.0),
               axis_u=(1, 0, 0), axis_v=(0, 1, 0)):
    """Rectangular sheet spanned by axis_u/axis_v, centered on origin."""
    au, av = np.asarray(axis_u, float), np.asarray(axis_v, float)
    us = np.linspace(-size_x / 2, size_x / 2, nx)
    vs = np.linspace(-size_y / 2, size_y / 2, ny)
    verts = np.asarray(origin, float) + us[:, None, None] * au + vs[None, :, None] * av
    verts = verts.reshape(-1, 3)
    faces = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            a = i * ny + j
            faces.append([a, a + ny, a + 1])
            faces.append([a + 1, a + ny, a + ny + 1])
    return TriangleMesh(verts, np.array(faces, dtype=np.int32))


def box(lo, hi):
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    v = np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1])
                  for z in (lo[2], hi[2])])
    f = np.array([
        [0, 1, 3], [0, 3, 2], [4, 6, 7], [4, 7, 5],
        [0, 4, 5], [0, 5, 1], [2, 3, 7], [2, 7, 6],
        [0, 2, 6], [0, 6, 4], [1, 5, 7], [1, 7, 3],
    ], dtype=np.int32)
    return TriangleMesh(v, f)


def walls(lo, hi):
    """Four vertical side sheets of an axis-aligned box."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    v = np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1])
                  for z in (lo[2], hi[2])])
    f = np.array([
        [0, 4, 5], [0, 5, 1], [2, 3, 7], [2, 7, 6],
        [0, 1, 3], [0, 3, 2], [4, 6, 7], [4, 7, 5],
    ], dtype=np.int32)
    return TriangleMesh(v, f)


def main():
    MESHES.mkdir(parents=True, exist_ok=True)

    # -- shared meshes -----------------------------------------------------
    save_obj(grid_sheet(21, 16, 20.0, 15.0), MESHES / "pad_coarse.obj")
    save_obj(grid_sheet(161, 121, 20.0, 15.0), MESHES / "pad_fine.obj")
    save_obj(box([-10, -7.5, -3.0], [10, 7.5, -0.6]), MESHES / "gel_slab.obj")
    save_obj(walls([-11, -8.5, -6.0], [11, 8.5, 0.5]), MESHES / "housing.obj")

    # Fold mirror above the pad: plane through (0, 0, 18).  At exactly 45
    # degrees a horizontal +x camera ray would reflect straight down onto
    # the pad; the shipped mirror is deliberately 5 degrees off (normal 40
    # degrees from +z) so the starting view is oblique and a shape
    # optimizer has something to correct.  Sized so the camera frustum's
    # footprint roughly matches the pad.
    tilt = math.radians(40.0)
    normal = (math.sin(tilt), 0.0, math.cos(tilt))
    save_obj(grid_sheet(13, 13, 30.0, 30.0, origin=(0, 0, 18),
                        axis_u=(0, 1, 0),
                        axis_v=(-math.cos(tilt), 0.0, math.sin(tilt))),
             MESHES / "mirror45.obj")

    # -- flat_probe: near-orthographic camera, frustum footprint == pad ---
    d = 1000.0
    fov = 2 * math.degrees(math.atan(10.0 / d))
    flat_probe = {
        "schema_version": 1,
        "parts": [{"name": "pad", "role": "sensing_surface",
                   "mesh": "meshes/pad_coarse.obj",
                   "material": "coating_semi_specular"}],
        "lights": [{"name": "fill", "preset": "area_flat_5730",
                    "position": [0, 0, -20], "orientation": [0, 0, 1],
                    "color": "W", "group": "main", "scale": 4.0}],
        "camera": {"position": [0, 0, -d], "look_at": [0, 0, 0],
                   "up": [0, 1, 0], "fov_degrees": fov,
                   "width": 160, "height": 120},
        "indentations": {
            "center": {"center": [0.0, 0.0, 0.0], "radius": 1.5, "depth": 0.5}},
    }

    # -- mini_flat: flat pad, R/G/B groups on three sides, camera below ---
    def light_row(group, color, preset, x, y, n, along, aim):
        out = []
        pts = np.linspace(-along / 2, along / 2, n)
        for i, t in enumerate(pts):
            pos = [x if along == 0 or aim[0] else x + 0, y, -2.0]
            pos = [x, y + t, -2.0] if aim[0] else [x + t, y, -2.0]
            out.append({"name": f"{group}{i}", "preset": preset,
                        "position": pos, "orientation": list(aim),
                        "color": color, "group": group, "scale": 60.0})
        return out

    lights = []
    lights += light_row("left_r", "R", "point_chanzon_5730_like", -11.0, 0.0, 3,
                        10.0, (0.6, 0.0, 0.8))
    lights += light_row("right_g", "G", "point_chanzon_5730_like", 11.0, 0.0, 3,
                        10.0, (-0.6, 0.0, 0.8))
    lights += light_row("front_b", "B", "point_chanzon_5730_like", 0.0, -8.5, 3,
                        12.0, (0.0, 0.6, 0.8))
    mini_flat = {
        "schema_version": 1,
        "parts": [
            {"name": "pad", "role": "sensing_surface",
             "mesh": "meshes/pad_fine.obj", "material": "coating_semi_specular"},
            {"name": "gel", "role": "elastomer",
             "mesh": "meshes/gel_slab.obj", "material": "pdms"},
            {"name": "housing", "role": "support",
             "mesh": "meshes/housing.obj", "material": "matte_black"},
        ],
        "lights": lights,
        "camera": {"position": [0, 0, -25], "look_at": [0, 0, 0],
                   "up": [0, 1, 0], "fov_degrees": 45,
                   "width": 160, "height": 120},
        "indentations": {
            "center": {"center": [0.0, 0.0, 0.0], "radius": 1.5, "depth": 0.5},
            "center_deep": {"center": [0.0, 0.0, 0.0], "radius": 4.0,
                            "depth": 1.0}},
    }

    # -- toy_mirror: camera looks sideways into a 45-degree mirror --------
    toy_mirror = {
        "schema_version": 1,
        "parts": [
            {"name": "pad", "role": "sensing_surface",
             "mesh": "meshes/pad_coarse.obj", "material": "coating_semi_specular"},
            {"name": "m1", "role": "mirror",
             "mesh": "meshes/mirror45.obj", "material": "mirror",
             "cage": {
                 # c_min = flat bind-time cage; c_max pushes control points
                 # along the mirror normal so tilt and curvature can develop
                 "c_max_offset": [[-3.0 * normal[0], 0.0,
                                   -3.0 * normal[2]]] * 27,
                 # the draft ships with a deliberately rough mirror shape
                 # (fixed pseudo-random control offsets) so shape
                 # optimization has real work to do
                 "alpha": np.repeat(np.random.default_rng(1).random(27),
                                    3).reshape(27, 3).tolist(),
             }},
        ],
        "lights": [{"name": "fill", "preset": "area_flat_5730",
                    "position": [0, 0, -20], "orientation": [0, 0, 1],
                    "color": "W", "group": "main", "scale": 4.0}],
        "camera": {"position": [-35, 0, 18], "look_at": [0, 0, 18],
                   "up": [0, 0, 1], "fov_degrees": 21.366459734586575,
                   "width": 160, "height": 120},
        "indentations": {
            "center": {"center": [0.0, 0.0, 0.0], "radius": 1.5, "depth": 0.5}},
    }

    # -- oracle scenes: unobstructed light paths for the path tracer ------
    oracle_diffuse = {
        "schema_version": 1,
        "parts": [{"name": "pad", "role": "sensing_surface",
                   "mesh": "meshes/pad_coarse.obj",
                   "material": {"kind": "diffuse", "albedo_rgb": [0.6, 0.5, 0.4]}}],
        "lights": [{"name": "p0", "preset": "point_isotropic",
                    "position": [0, 0, -10], "orientation": [0, 0, 1],
                    "color": "W", "group": "main", "scale": 40.0}],
        "camera": {"position": [0, 0, -30], "look_at": [0, 0, 0],
                   "up": [0, 1, 0], "fov_degrees": 40,
                   "width": 160, "height": 120},
    }
    oracle_pad = {
        "schema_version": 1,
        "parts": [{"name": "pad", "role": "sensing_surface",
                   "mesh": "meshes/pad_coarse.obj",
                   "material": "coating_semi_specular"}],
        "lights": [
            {"name": "r0", "preset": "point_chanzon_5730_like",
             "position": [-9, 0, -3], "orientation": [0.5, 0, 0.866],
             "color": "R", "group": "left", "scale": 40.0},
            {"name": "g0", "preset": "point_chanzon_5730_like",
             "position": [9, 0, -3], "orientation": [-0.5, 0, 0.866],
             "color": "G", "group": "right", "scale": 40.0},
            {"name": "b0", "preset": "point_chanzon_5730_like",
             "position": [0, -7, -3], "orientation": [0, 0.5, 0.866],
             "color": "B", "group": "front", "scale": 40.0},
        ],
        "camera": {"position": [0, 0, -30], "look_at": [0, 0, 0],
                   "up": [0, 1, 0], "fov_degrees": 40,
                   "width": 160, "height": 120},
        "indentations": {
            "center": {"center": [0.0, 0.0, 0.0], "radius": 1.5, "depth": 0.5}},
    }
    oracle_pad_indent = dict(oracle_pad)
    oracle_pad_indent["parts"] = [
        {"name": "pad", "role": "sensing_surface",
         "mesh": "meshes/pad_mid.obj", "material": "coating_semi_specular"}]
    oracle_pad_indent["lights"] = [
        {"name": "a0", "preset": "area_flat_5730",
         "position": [-8, 0, -4], "orientation": [0.4, 0, 0.917],
         "color": "W", "group": "left", "scale": 6.0},
        {"name": "a1", "preset": "area_flat_5730",
         "position": [8, 0, -4], "orientation": [-0.4, 0, 0.917],
         "color": "W", "group": "right", "scale": 6.0},
    ]
    save_obj(grid_sheet(81, 61, 20.0, 15.0), MESHES / "pad_mid.obj")

    for name, doc in [("flat_probe", flat_probe), ("mini_flat", mini_flat),
                      ("toy_mirror", toy_mirror),
                      ("oracle_diffuse", oracle_diffuse),
                      ("oracle_pad", oracle_pad),
                      ("oracle_pad_indent", oracle_pad_indent)]:
        (OUT / f"{name}.json").write_text(json.dumps(doc, indent=2))
    print("wrote", len(list(OUT.glob('*.json'))), "designs,",
          len(list(MESHES.glob('*.obj'))), "meshes")


if __name__ == "__main__":
    main()
