import json

import numpy as np
import pytest

from tacstudio.library import library_load
from tacstudio.mesh import TriangleMesh, save_obj
from tacstudio.optics import AreaLight, CameraModel
from tacstudio.scene import SensorDesign, SensorPart


@pytest.fixture(scope="session")
def library():
    return library_load()


def make_grid_mesh(nx, ny, size_x, size_y, z=0.0, center=(0.0, 0.0)):
    """Flat rectangular sheet in the z plane, normals up (+z)."""
    xs = np.linspace(-size_x / 2, size_x / 2, nx) + center[0]
    ys = np.linspace(-size_y / 2, size_y / 2, ny) + center[1]
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    verts = np.stack([X.ravel(), Y.ravel(), np.full(nx * ny, float(z))], axis=1)
    faces = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            a = i * ny + j
            faces.append([a, a + ny, a + 1])
            faces.append([a + 1, a + ny, a + ny + 1])
    return TriangleMesh(verts, np.array(faces, dtype=np.int32))


def flat_pad_design(nx=81, ny=61, size=(20.0, 15.0), material=None,
                    camera_distance=30.0, fov=40.0, res=(160, 120)):
    """Sensing pad at z=0 viewed from below by a perspective camera."""
    from tacstudio.optics import RoughConductor

    mesh = make_grid_mesh(nx, ny, size[0], size[1])
    mat = material or RoughConductor(specularity=0.3)
    pad = SensorPart("pad", "sensing_surface", mesh, mat)
    light = AreaLight([0, 0, -5.0], [2.0, 0, 0], [0, 2.0, 0], [5.0, 5.0, 5.0],
                      group_id="main")
    cam = CameraModel([0, 0, -camera_distance], [0, 0, 0], up=[0, 1, 0],
                      fov_degrees=fov, width=res[0], height=res[1])
    return SensorDesign((pad,), (light,), cam, name="flat-pad")


@pytest.fixture
def pad_design():
    return flat_pad_design()


def write_minimal_design(tmp_path, library, extra=None):
    """Minimal legal design file: flat slab, one area light, one camera."""
    mesh = make_grid_mesh(9, 7, 20.0, 15.0)
    save_obj(mesh, tmp_path / "pad.obj")
    doc = {
        "schema_version": 1,
        "parts": [{"name": "pad", "role": "sensing_surface",
                   "mesh": "pad.obj", "material": "coating_semi_specular"}],
        "lights": [{"name": "l0", "preset": "area_flat_3528",
                    "position": [0, 0, -5], "orientation": [0, 0, 1],
                    "color": "W", "group": "main"}],
        "camera": {"position": [0, 0, -30], "look_at": [0, 0, 0],
                   "fov_degrees": 40, "width": 64, "height": 48},
    }
    if extra:
        doc.update(extra)
    p = tmp_path / "design.json"
    p.write_text(json.dumps(doc))
    return p
