import json
import math

import numpy as np
import pytest

from tacstudio.library import LibraryError
from tacstudio.scene import (
    AssemblyError,
    ContactError,
    IndentationSpec,
    SensorDesign,
    assemble,
    indent,
    indenter_grid,
)

from .conftest import flat_pad_design, make_grid_mesh, write_minimal_design


class TestLibrary:
    def test_shipped_counts(self, library):
        s = library.summary()
        assert len(s["materials"]) >= 7
        assert len(s["lights"]) >= 6
        assert len(s["cameras"]) >= 6

    def test_unknown_preset(self, library):
        with pytest.raises(LibraryError, match="unobtanium"):
            library.material("unobtanium")

    def test_camera_fov_range(self, library):
        fovs = {library.camera(n).fov_degrees for n in library.summary()["cameras"]}
        assert 60.0 in fovs and 160.0 in fovs

    def test_point_presets_have_profiles(self, library):
        assert library.light("point_topled_like").profile is not None
        assert library.light("point_chanzon_5730_like").profile is not None

    def test_color_masking(self, library):
        preset = library.light("point_isotropic")
        red = preset.instantiate([0, 0, 0], [0, 0, 1], color="R")
        assert red.intensity_rgb[0] > 0
        assert red.intensity_rgb[1] == 0 and red.intensity_rgb[2] == 0


class TestAssemble:
    def test_minimal_design(self, tmp_path, library):
        design = assemble(write_minimal_design(tmp_path, library), library)
        assert len(design.light_groups()) == 1
        assert design.sensing_surface.name == "pad"

    def test_missing_camera(self, tmp_path, library):
        p = write_minimal_design(tmp_path, library)
        doc = json.loads(p.read_text())
        del doc["camera"]
        p.write_text(json.dumps(doc))
        with pytest.raises(AssemblyError, match="camera"):
            assemble(p, library)

    def test_multiple_cameras(self, tmp_path, library):
        p = write_minimal_design(tmp_path, library)
        doc = json.loads(p.read_text())
        doc["camera"] = [doc["camera"], doc["camera"]]
        p.write_text(json.dumps(doc))
        with pytest.raises(AssemblyError, match="multiple cameras"):
            assemble(p, library)

    def test_zero_lights(self, tmp_path, library):
        p = write_minimal_design(tmp_path, library)
        doc = json.loads(p.read_text())
        doc["lights"] = []
        p.write_text(json.dumps(doc))
        with pytest.raises(AssemblyError, match="light"):
            assemble(p, library)

    def test_unknown_material_preset(self, tmp_path, library):
        p = write_minimal_design(tmp_path, library)
        doc = json.loads(p.read_text())
        doc["parts"][0]["material"] = "unobtanium"
        p.write_text(json.dumps(doc))
        with pytest.raises(AssemblyError, match="unobtanium"):
            assemble(p, library)

    def test_missing_mesh(self, tmp_path, library):
        p = write_minimal_design(tmp_path, library)
        doc = json.loads(p.read_text())
        doc["parts"][0]["mesh"] = "nope.obj"
        p.write_text(json.dumps(doc))
        with pytest.raises(AssemblyError, match="missing mesh"):
            assemble(p, library)

    def test_path_escape_rejected(self, tmp_path, library):
        p = write_minimal_design(tmp_path, library)
        doc = json.loads(p.read_text())
        doc["parts"][0]["mesh"] = "../../etc/passwd"
        p.write_text(json.dumps(doc))
        with pytest.raises(AssemblyError, match="escape"):
            assemble(p, library)

    def test_shipped_mini_like(self, library):
        from tacstudio.designs import shipped_design_path
        design = assemble(shipped_design_path("mini_flat"), library)
        assert len(design.light_groups()) == 3
        roles = {p.role for p in design.parts}
        assert "sensing_surface" in roles and "elastomer" in roles


class TestIndent:
    def test_zero_depth_is_identity(self, pad_design):
        spec = IndentationSpec([0.0, 0.0, 0.0], radius=1.5, depth=0.0)
        out = indent(pad_design, spec)
        np.testing.assert_allclose(out.sensing_surface.mesh.vertices,
                                   pad_design.sensing_surface.mesh.vertices,
                                   atol=1e-9)

    def test_flat_plane_geometry(self):
        design = flat_pad_design(nx=161, ny=121)  # 0.125 mm spacing
        spec = IndentationSpec([0.0, 0.0, 0.0], radius=1.5, depth=0.5)
        out = indent(design, spec)
        v_in = design.sensing_surface.mesh.vertices
        v_out = out.sensing_surface.mesh.vertices
        disp = np.linalg.norm(v_out - v_in, axis=1)

        # vertex under the center moves exactly depth, downward
        ci = int(np.argmin(np.linalg.norm(v_in[:, :2], axis=1)))
        assert disp[ci] == pytest.approx(0.5, abs=1e-9)
        assert v_out[ci, 2] == pytest.approx(-0.5, abs=1e-9)

        # displaced region matches the analytic contact disc
        rho = np.linalg.norm(v_in[:, :2], axis=1)
        moved = disp > 1e-12
        assert rho[moved].max() <= spec.contact_radius + 1e-6
        untouched = rho > spec.contact_radius + 1e-6
        np.testing.assert_array_equal(v_out[untouched], v_in[untouched])

        # max displacement equals depth
        assert disp.max() == pytest.approx(0.5, abs=1e-9)

    def test_topology_and_other_parts_untouched(self, pad_design, library):
        from tacstudio.optics import RoughDielectric
        from tacstudio.scene import SensorPart
        slab = SensorPart("slab", "elastomer",
                          make_grid_mesh(5, 5, 20, 15, z=-1.0),
                          RoughDielectric(1.41, 0.05))
        design = SensorDesign(pad_design.parts + (slab,), pad_design.lights,
                              pad_design.camera)
        out = indent(design, IndentationSpec([2.0, 1.0, 0.0]))
        np.testing.assert_array_equal(out.part("slab").mesh.vertices,
                                      slab.mesh.vertices)
        np.testing.assert_array_equal(out.sensing_surface.mesh.faces,
                                      design.sensing_surface.mesh.faces)

    def test_disjoint_indents_commute(self):
        design = flat_pad_design(nx=161, ny=121)
        a = IndentationSpec([-5.0, 0.0, 0.0], radius=1.5, depth=0.5)
        b = IndentationSpec([5.0, 0.0, 0.0], radius=1.5, depth=0.5)
        ab = indent(indent(design, a), b)
        ba = indent(indent(design, b), a)
        np.testing.assert_allclose(ab.sensing_surface.mesh.vertices,
                                   ba.sensing_surface.mesh.vertices, atol=1e-12)

    def test_no_contact_error(self, pad_design):
        with pytest.raises(ContactError):
            indent(pad_design, IndentationSpec([500.0, 400.0, 300.0]))


class TestIndenterGrid:
    def test_nine_on_flat_surface(self, pad_design):
        specs = indenter_grid(pad_design, 9)
        assert len(specs) == 9
        xs = sorted({round(s.sphere_center[0], 6) for s in specs})
        ys = sorted({round(s.sphere_center[1], 6) for s in specs})
        # 10% inset of the 20x15 pad centered at origin
        np.testing.assert_allclose(xs, [-8.0, 0.0, 8.0], atol=1e-9)
        np.testing.assert_allclose(ys, [-6.0, 0.0, 6.0], atol=1e-9)

    def test_single_center(self, pad_design):
        specs = indenter_grid(pad_design, 1)
        assert len(specs) == 1
        np.testing.assert_allclose(specs[0].sphere_center[:2], [0, 0], atol=1e-9)

    def test_curved_surface_projection(self):
        # cylindrical sheet: z = -0.05 x^2
        mesh = make_grid_mesh(81, 61, 20.0, 15.0)
        v = mesh.vertices.copy()
        v[:, 2] = -0.05 * v[:, 0] ** 2
        mesh = mesh.with_vertices(v)
        design = flat_pad_design()
        design = design.replace_part(
            "pad", design.sensing_surface.__class__(
                "pad", "sensing_surface", mesh, design.sensing_surface.material))
        specs = indenter_grid(design, 9)
        assert len(specs) == 9
        for s in specs:
            x = s.sphere_center[0]
            assert s.sphere_center[2] == pytest.approx(-0.05 * x * x, abs=1e-6)

    def test_invalid_count(self, pad_design):
        with pytest.raises(ValueError):
            indenter_grid(pad_design, 0)


class TestIndentationSpec:
    def test_bounds(self):
        with pytest.raises(ValueError):
            IndentationSpec([0, 0, 0], radius=-1.0)
        with pytest.raises(ValueError):
            IndentationSpec([0, 0, 0], radius=1.0, depth=1.0)

    def test_contact_radius(self):
        s = IndentationSpec([0, 0, 0], radius=1.5, depth=0.5)
        assert s.contact_radius == pytest.approx(math.sqrt(1.25))
