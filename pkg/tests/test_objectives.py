"""Objective-function tests against closed-form and brute-force oracles."""

import dataclasses

import numpy as np
import pytest

from tacstudio.designs import shipped_design_path
from tacstudio.library import library_load
from tacstudio.objectives import NormalColorSample, ObjectiveConfig, \
    aoap_score, design_fingerprint, linearity_r2, normal_confusion, \
    normdiff_score, pca_dominant, rgb2normal_score, snr_metric, warp_score
from tacstudio.optics import CameraModel
from tacstudio.render import render_normals
from tacstudio.scene import assemble

from .conftest import flat_pad_design


@pytest.fixture(scope="module")
def lib():
    return library_load()


@pytest.fixture(scope="module")
def flat_probe(lib):
    return assemble(shipped_design_path("flat_probe"), lib)


def theta_stub_renderer(design):
    """Image whose red channel equals theta / (pi/2): linear by design."""
    nm = render_normals(design)
    ldr = np.zeros(nm.normals.shape)
    ldr[..., 0] = nm.theta() / (np.pi / 2)
    return ldr


def angle_stub_renderer(design):
    """Injective (theta, phi) -> rgb encoding."""
    nm = render_normals(design)
    ldr = np.zeros(nm.normals.shape)
    ldr[..., 0] = nm.theta() / (np.pi / 2)
    ldr[..., 1] = (nm.phi() + np.pi) / (2 * np.pi)
    ldr[..., 2] = 0.5
    return ldr


# ---------------------------------------------------------------------------
# building blocks

def test_pca_single_axis():
    t = np.linspace(0.0, 1.0, 11)
    colors = np.stack([t, np.full(11, 0.2), np.full(11, 0.2)], axis=1)
    proj = pca_dominant(colors)
    np.testing.assert_allclose(proj, t - t.mean(), atol=1e-12)


def test_pca_isotropic_noise_explains_one_third():
    rng = np.random.default_rng(0)
    colors = rng.normal(size=(10_000, 3))
    proj = pca_dominant(colors)
    ratio = proj.var() / colors.var(axis=0).sum()
    assert abs(ratio - 1.0 / 3.0) < 0.05


def test_pca_matches_eigendecomposition():
    rng = np.random.default_rng(1)
    colors = rng.normal(size=(200, 3)) @ np.diag([3.0, 1.0, 0.2])
    proj = pca_dominant(colors)
    centered = colors - colors.mean(axis=0)
    evals, evecs = np.linalg.eigh(np.cov(centered.T))
    axis = evecs[:, np.argmax(evals)]
    expect = centered @ axis
    if np.dot(expect, proj) < 0:
        expect = -expect
    np.testing.assert_allclose(np.abs(proj), np.abs(expect), atol=1e-8)


def test_pca_constant_colors():
    proj = pca_dominant(np.full((5, 3), 0.3))
    assert np.all(proj == 0.0)


def test_pca_requires_three_samples():
    with pytest.raises(ValueError):
        pca_dominant(np.zeros((2, 3)))


def test_r2_perfect_line():
    x = np.linspace(0.0, 1.0, 7)
    assert linearity_r2(x, 2 * x + 1) == pytest.approx(1.0)


def test_r2_constant_y():
    assert linearity_r2(np.arange(5.0), np.full(5, 3.0)) == 0.0


def test_r2_symmetric_parabola():
    x = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    assert linearity_r2(x, x ** 2) == pytest.approx(0.0, abs=1e-12)


def test_r2_matches_polyfit_oracle():
    rng = np.random.default_rng(2)
    x = rng.uniform(size=50)
    y = 3 * x + rng.normal(scale=0.1, size=50)
    coeffs = np.polyfit(x, y, 1)
    resid = y - np.polyval(coeffs, x)
    expect = 1 - resid.var() / y.var()
    assert linearity_r2(x, y) == pytest.approx(expect, abs=1e-10)


def test_r2_length_mismatch():
    with pytest.raises(ValueError):
        linearity_r2(np.arange(4.0), np.arange(5.0))


# ---------------------------------------------------------------------------
# SNR metric

def test_snr_constant_targets():
    assert snr_metric(np.random.default_rng(0).normal(size=(20, 2)),
                      np.ones(20)) == 0.0


def test_snr_separated_clusters_hits_cap():
    f = np.concatenate([np.zeros((10, 2)), 100.0 + np.zeros((10, 2))])
    t = np.concatenate([np.zeros(10), np.ones(10)])
    assert snr_metric(f, t, k=3) == 1e9


def test_snr_iid_targets_near_one():
    rng = np.random.default_rng(3)
    f = rng.normal(size=(1000, 4))
    t = rng.normal(size=1000)
    assert snr_metric(f, t, k=5) == pytest.approx(1.0, abs=0.15)


def test_snr_isometry_and_target_scale_invariance():
    rng = np.random.default_rng(4)
    f = rng.normal(size=(200, 3))
    t = rng.normal(size=200)
    base = snr_metric(f, t, k=5)
    rot = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    assert snr_metric(f @ rot + 7.0, t, k=5) == pytest.approx(base, rel=1e-9)
    assert snr_metric(f, 3.5 * t, k=5) == pytest.approx(base, rel=1e-9)


def test_snr_needs_enough_samples():
    with pytest.raises(ValueError):
        snr_metric(np.zeros((4, 2)), np.zeros(4), k=5)


# ---------------------------------------------------------------------------
# AOAP

def test_aoap_flat_orthographic_endpoint(flat_probe):
    report = aoap_score(flat_probe)
    assert report.score == pytest.approx(1.01, abs=0.005)


def test_aoap_all_escape_is_zero():
    design = flat_pad_design()
    away = CameraModel([0, 0, -30], [0, 0, -60], up=[0, 1, 0],
                       fov_degrees=40, width=64, height=48)
    design = dataclasses.replace(design, camera=away)
    assert aoap_score(design).score == 0.0


def test_aoap_matches_brute_force_resummation(flat_probe):
    from tacstudio.render import ray_probe

    cfg = ObjectiveConfig()
    report = aoap_score(flat_probe, cfg)
    p = ray_probe(flat_probe)
    hits = p.hit.astype(bool)
    total = 0.0
    for i in np.flatnonzero(hits):
        total += abs(p.cos_incidence[i])
    expect = total / p.rays_total \
        + cfg.aoap_k1 * len(set(p.face[hits])) / p.faces_total
    assert report.score == pytest.approx(expect, rel=1e-12)


def test_aoap_resolution_invariance(flat_probe):
    a = aoap_score(flat_probe).score
    doubled = dataclasses.replace(
        flat_probe, camera=flat_probe.camera.with_resolution(320, 240))
    assert abs(aoap_score(doubled).score - a) < 0.01


# ---------------------------------------------------------------------------
# warp

def test_warp_uniform_flat_is_capped_high(flat_probe):
    report = warp_score(flat_probe)
    assert 1e5 < report.score <= 1e9
    # only border pixels may lose a grazing corner ray on the pad's rim
    assert report.breakdown["pixels_excluded"] <= 2 * (160 + 120)


def test_warp_scale_invariance():
    # tilt first so the footprint spread is real (a perpendicular plane has
    # delta ~ 0, where the epsilon guard dominates and nothing can scale)
    base = flat_pad_design(res=(40, 30))
    c, si = np.cos(np.radians(25)), np.sin(np.radians(25))
    rot = np.array([[c, 0, si], [0, 1, 0], [-si, 0, c]])
    base = dataclasses.replace(
        base,
        parts=tuple(dataclasses.replace(
            p, mesh=p.mesh.with_vertices(p.mesh.vertices @ rot.T))
            for p in base.parts))
    s = 2.5
    scaled = dataclasses.replace(
        base,
        parts=tuple(dataclasses.replace(
            p, mesh=p.mesh.with_vertices(p.mesh.vertices * s))
            for p in base.parts),
        camera=dataclasses.replace(
            base.camera,
            position=np.asarray(base.camera.position) * s,
            look_at=np.asarray(base.camera.look_at) * s),
    )
    a = warp_score(base).score
    b = warp_score(scaled).score
    assert a == pytest.approx(b, rel=1e-6)


def test_warp_tilted_plane_matches_analytic_oracle():
    """Perspective view of a tilted plane: footprints grow with depth; the
    oracle intersects each corner ray with the plane analytically."""
    import tacstudio.render.probe as probe_mod

    design = flat_pad_design(nx=161, ny=121, res=(24, 18), fov=14.0)
    # tilt the pad 30 degrees about the y axis
    c, s = np.cos(np.radians(30)), np.sin(np.radians(30))
    rot = np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
    parts = tuple(dataclasses.replace(
        p, mesh=p.mesh.with_vertices(p.mesh.vertices @ rot.T))
        for p in design.parts)
    design = dataclasses.replace(design, parts=parts)
    report = warp_score(design)

    scene = probe_mod.compile_scene(design, width=24, height=18)
    origins, dirs = probe_mod._camera_rays(scene, corners=True)
    n = rot @ np.array([0.0, 0.0, 1.0])
    t = -(origins @ n) / (dirs @ n)
    pts = (origins + t[:, None] * dirs).reshape(19, 25, 3)
    a, b = pts[:-1, :-1], pts[:-1, 1:]
    cc, d = pts[1:, :-1], pts[1:, 1:]
    areas = np.concatenate([
        0.5 * np.linalg.norm(np.cross(b - a, cc - a), axis=2).ravel(),
        0.5 * np.linalg.norm(np.cross(b - d, cc - d), axis=2).ravel()])
    expect = areas.mean() / (areas.std() + 1e-9)
    assert report.score == pytest.approx(expect, rel=1e-6)
    assert areas.std() > 1e-6  # genuinely non-uniform under tilt


# ---------------------------------------------------------------------------
# rgb2normal / normdiff with stub renderers

def test_rgb2normal_linear_stub_scores_one():
    design = flat_pad_design(res=(80, 60))
    cfg = ObjectiveConfig(locations=4)
    report = rgb2normal_score(design, cfg, renderer=theta_stub_renderer)
    assert report.score == pytest.approx(1.0, abs=1e-6)


def test_rgb2normal_constant_stub_scores_zero():
    design = flat_pad_design(res=(80, 60))
    cfg = ObjectiveConfig(locations=4)
    report = rgb2normal_score(
        design, cfg, renderer=lambda d: np.full((60, 80, 3), 0.5))
    assert report.score == 0.0


def test_rgb2normal_affine_invariance():
    design = flat_pad_design(res=(80, 60))
    cfg = ObjectiveConfig(locations=4)
    a = rgb2normal_score(design, cfg, renderer=theta_stub_renderer).score

    def rescaled(d):
        return 0.25 + 0.5 * theta_stub_renderer(d)

    b = rgb2normal_score(design, cfg, renderer=rescaled).score
    assert a == pytest.approx(b, abs=1e-9)


def test_normdiff_zero_noise_injective_is_zero():
    design = flat_pad_design(res=(80, 60))
    cfg = ObjectiveConfig(noise_fraction=1e-9)
    report = normdiff_score(design, cfg, renderer=angle_stub_renderer)
    assert report.score == pytest.approx(0.0, abs=1e-6)


def test_normdiff_monotone_in_noise():
    design = flat_pad_design(res=(80, 60))
    scores = []
    for nf in (0.1, 0.3, 0.5):
        cfg = ObjectiveConfig(noise_fraction=nf)
        scores.append(normdiff_score(design, cfg,
                                     renderer=angle_stub_renderer).score)
    assert scores[0] >= scores[1] >= scores[2]
    assert all(s <= 0.0 for s in scores)


def test_normal_confusion_brute_force_oracle():
    """Exhaustive check on a tiny synthetic dataset including a color
    collision between two distant normals."""
    rgb = np.array([[0.2, 0.2, 0.2], [0.2, 0.2, 0.2], [0.8, 0.1, 0.1],
                    [0.5, 0.5, 0.1], [0.55, 0.52, 0.1]])
    theta = np.array([0.1, 0.5, 0.3, 0.2, 0.25])
    phi = np.array([0.0, 1.0, -1.0, 2.0, 2.1])
    cfg = ObjectiveConfig(noise_fraction=0.3)
    score, confusions = normal_confusion(rgb, theta, phi, cfg, grid=8)

    tq = np.linspace(theta.min(), theta.max(), 8)
    pq = np.linspace(phi.min(), phi.max(), 8)
    vals = []
    for p in pq:
        for t in tq:
            d2 = (theta - t) ** 2 + (phi - p) ** 2
            j = int(np.argmin(d2))
            inside = [i for i in range(5)
                      if all(rgb[j][c] * 0.7 - 1e-12 <= rgb[i][c]
                             <= rgb[j][c] * 1.3 + 1e-12 for c in range(3))]
            vals.append((theta[inside].max() - theta[inside].min())
                        + (phi[inside].max() - phi[inside].min()))
    assert score == pytest.approx(-np.mean(vals), rel=1e-12)
    # the colliding pair (rows 0, 1) must show up as confusion somewhere
    assert confusions.max() >= 0.4 + 1.0


def test_normal_color_sample_validation():
    NormalColorSample(0.1, 0.2, 0.3, theta=0.5, phi=-1.0)
    with pytest.raises(ValueError):
        NormalColorSample(0, 0, 0, theta=2.0, phi=0.0)
    with pytest.raises(ValueError):
        NormalColorSample(0, 0, 0, theta=0.5, phi=3.5)


def test_report_text_and_fingerprint(flat_probe):
    report = aoap_score(flat_probe)
    text = report.to_text()
    assert "objective: aoap" in text and "provenance.design" in text
    assert design_fingerprint(flat_probe) == design_fingerprint(flat_probe)


def test_objective_config_validation():
    with pytest.raises(ValueError):
        ObjectiveConfig(noise_fraction=1.5)
    with pytest.raises(ValueError):
        ObjectiveConfig(locations=0)
