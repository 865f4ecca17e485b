import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tacstudio.mesh import (
    CageBlend,
    MeshError,
    TriangleMesh,
    build_cage,
    deform,
    load_obj,
    save_obj,
)


def unit_cube():
    corners = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)],
                       dtype=float)
    # 12 triangles, winding irrelevant for these tests
    faces = np.array([
        [0, 1, 3], [0, 3, 2], [4, 6, 7], [4, 7, 5],
        [0, 4, 5], [0, 5, 1], [2, 3, 7], [2, 7, 6],
        [0, 2, 6], [0, 6, 4], [1, 5, 7], [1, 7, 3],
    ], dtype=np.int32)
    return TriangleMesh(corners, faces)


def grid_mesh(nx=8, ny=8, span=1.0):
    xs, ys = np.meshgrid(np.linspace(0, span, nx), np.linspace(0, span, ny),
                         indexing="ij")
    verts = np.stack([xs.ravel(), ys.ravel(), np.zeros(nx * ny)], axis=1)
    faces = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            a = i * ny + j
            faces.append([a, a + ny, a + 1])
            faces.append([a + 1, a + ny, a + ny + 1])
    return TriangleMesh(verts, np.array(faces, dtype=np.int32))


class TestObjIO:
    def test_minimal_file(self, tmp_path):
        p = tmp_path / "tri.obj"
        p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
        m = load_obj(p)
        assert m.num_vertices == 3
        assert m.num_faces == 1

    def test_quad_fan_triangulation(self, tmp_path):
        p = tmp_path / "quad.obj"
        p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
        m = load_obj(p)
        assert m.num_faces == 2
        # both triangles share the first vertex of the polygon
        assert m.faces[0][0] == 0 and m.faces[1][0] == 0

    def test_empty_file_rejected(self, tmp_path):
        p = tmp_path / "empty.obj"
        p.write_text("# nothing here\n")
        with pytest.raises(MeshError, match="empty"):
            load_obj(p)

    def test_parse_error_reports_line(self, tmp_path):
        p = tmp_path / "bad.obj"
        p.write_text("v 0 0 0\nv 1 oops 0\n")
        with pytest.raises(MeshError, match="line 2"):
            load_obj(p)

    def test_round_trip(self, tmp_path):
        m = unit_cube()
        save_obj(m, tmp_path / "cube.obj")
        m2 = load_obj(tmp_path / "cube.obj")
        np.testing.assert_allclose(m2.vertices, m.vertices)
        np.testing.assert_array_equal(m2.faces, m.faces)


class TestBuildCage:
    def test_unit_cube_lattice(self):
        cage = build_cage(unit_cube())
        expected = {(x, y, z) for x in (0, 0.5, 1) for y in (0, 0.5, 1)
                    for z in (0, 0.5, 1)}
        got = {tuple(v) for v in cage.vertices}
        assert got == expected

    def test_degenerate_axis_padded(self):
        m = TriangleMesh(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0.0]]),
                         np.array([[0, 1, 2]], dtype=np.int32))
        cage = build_cage(m)
        assert cage.vertices.shape == (27, 3)
        zs = np.unique(cage.vertices[:, 2])
        assert len(zs) == 3 and zs[0] < 0 < zs[2]

    def test_dimensionality_reduction_count(self):
        # a dense sheet: thousands of coordinates collapse to 27*3 = 81
        m = grid_mesh(64, 64)
        cage = build_cage(m)
        assert m.num_vertices * 3 > 10_000
        assert cage.vertices.size == 81


class TestDeform:
    def test_identity(self):
        m = grid_mesh()
        cage = build_cage(m)
        out = deform(m, cage, CageBlend.identity(cage))
        np.testing.assert_allclose(out.vertices, m.vertices, atol=1e-9)

    def test_uniform_translation(self):
        m = unit_cube()
        cage = build_cage(m)
        t = np.array([0.3, -1.2, 5.0])
        blend = CageBlend(cage.vertices, cage.vertices + t,
                          np.ones((27, 3)))
        out = deform(m, cage, blend)
        np.testing.assert_allclose(out.vertices, m.vertices + t, atol=1e-9)

    def test_affine_reproduction(self):
        m = grid_mesh(10, 10)
        cage = build_cage(m)
        rng = np.random.default_rng(0)
        A = rng.normal(size=(3, 3))
        b = rng.normal(size=3)
        blend = CageBlend(cage.vertices @ A.T + b, cage.vertices @ A.T + b,
                          np.zeros((27, 3)))
        out = deform(m, cage, blend)
        np.testing.assert_allclose(out.vertices, m.vertices @ A.T + b, atol=1e-9)

    def test_trilinear_against_corner_oracle(self):
        # one vertex at known local coords of cell (0,0,0) of a unit-box cage
        u, v, w = 0.25, 0.5, 0.75
        verts = np.array([[u / 2, v / 2, w / 2], [2, 2, 2], [-1, -1, -1.0]])
        m = TriangleMesh(
            np.vstack([verts, [[3, 3, 3]]])[:3],
            np.array([[0, 1, 2]], dtype=np.int32),
        )
        # cage over AABB [-1,2]^3: vertex 0 lands in cell (0,0,0)
        cage = build_cage(m)
        rng = np.random.default_rng(7)
        c_cur = cage.vertices + rng.normal(scale=0.1, size=(27, 3))
        blend = CageBlend(c_cur, c_cur, np.zeros((27, 3)))
        out = deform(m, cage, blend)

        # independent 8-corner weighted sum
        uvw = cage.local[0]
        cell = cage.cells[0]
        expect = np.zeros(3)
        for di in (0, 1):
            for dj in (0, 1):
                for dk in (0, 1):
                    wgt = ((uvw[0] if di else 1 - uvw[0])
                           * (uvw[1] if dj else 1 - uvw[1])
                           * (uvw[2] if dk else 1 - uvw[2]))
                    idx = ((cell[0] + di) * 3 + (cell[1] + dj)) * 3 + (cell[2] + dk)
                    expect += wgt * c_cur[idx]
        np.testing.assert_allclose(out.vertices[0], expect, atol=1e-12)

    def test_locality(self):
        m = grid_mesh(9, 9)  # spans [0,1]^2, cells split at 0.5
        cage = build_cage(m)
        # move only the (0,0,*) column of cage corners: touches cell (0,0,·)
        alpha = np.zeros((27, 3))
        c_max = cage.vertices.copy()
        for k in range(3):
            idx = (0 * 3 + 0) * 3 + k
            c_max[idx] += [0, 0, 1.0]
            alpha[idx] = 1.0
        out = deform(m, cage, CageBlend(cage.vertices, c_max, alpha))
        far = (cage.cells[:, 0] == 1) & (cage.cells[:, 1] == 1)
        np.testing.assert_allclose(out.vertices[far], m.vertices[far], atol=1e-12)

    def test_continuity_across_cells(self):
        # a vertex exactly on the mid-plane evaluates identically from
        # either adjacent cell
        m = grid_mesh(9, 9)
        cage = build_cage(m)
        rng = np.random.default_rng(3)
        c_cur = cage.vertices + rng.normal(scale=0.2, size=(27, 3))
        blend = CageBlend(c_cur, c_cur, np.zeros((27, 3)))
        out = deform(m, cage, blend)

        onplane = np.isclose(m.vertices[:, 0], 0.5)
        assert onplane.any()
        # flip those vertices to the other cell with local coord 1.0
        cells = cage.cells.copy()
        local = cage.local.copy()
        sel = onplane & (cells[:, 0] == 1) & np.isclose(local[:, 0], 0.0)
        cells[sel, 0] = 0
        local[sel, 0] = 1.0
        from tacstudio.mesh import DeformationCage
        cage2 = DeformationCage(cage.vertices, cells, local)
        out2 = deform(m, cage2, blend)
        np.testing.assert_allclose(out2.vertices[sel], out.vertices[sel], atol=1e-12)

    @given(st.floats(min_value=1.0, max_value=5.0))
    @settings(max_examples=20, deadline=None)
    def test_alpha_clamped(self, a):
        m = unit_cube()
        cage = build_cage(m)
        c_max = cage.vertices + 1.0
        out_hi = deform(m, cage, CageBlend(cage.vertices, c_max,
                                           np.full((27, 3), a)))
        out_one = deform(m, cage, CageBlend(cage.vertices, c_max,
                                            np.ones((27, 3))))
        np.testing.assert_allclose(out_hi.vertices, out_one.vertices)

    def test_unbound_cage_rejected(self):
        m = unit_cube()
        cage = build_cage(grid_mesh())
        with pytest.raises(ValueError, match="not bound"):
            deform(m, cage, CageBlend.identity(cage))
