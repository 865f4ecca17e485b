"""Stochastic progressive photon mapping entry point."""

from dataclasses import dataclass

import numpy as np

from ..optics import AreaLight, PointLight
from .compile import compile_scene
from .image import TactileImage
from .kernels import sppm_pass


@dataclass(frozen=True)
class RenderConfig:
    """Controls for the photon-mapping renderer.

    r0_fraction is the initial gather radius as a fraction of the scene
    diagonal; alpha is the radius-shrink exponent of the progressive
    estimator.
    """

    iterations: int = 32
    photons_per_iter: int = 100_000
    r0_fraction: float = 0.01
    alpha: float = 0.7
    max_depth: int = 12
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1 or self.photons_per_iter < 1:
            raise ValueError("iterations and photons_per_iter must be >= 1")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")
        if self.r0_fraction <= 0.0:
            raise ValueError("r0_fraction must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


def _light_pick_cdf(design, scene):
    """Selection CDF proportional to each light's total emitted power."""
    powers = []
    for i, lt in enumerate(design.lights):
        if isinstance(lt, PointLight):
            lo, hi = scene.prof_off[i], scene.prof_off[i + 1]
            if hi > lo:
                avg = float(np.trapezoid(
                    scene.prof_mul[lo:hi] * np.sin(scene.prof_ang[lo:hi]),
                    scene.prof_ang[lo:hi])) / 2.0
            else:
                avg = 1.0
            powers.append(4.0 * np.pi * float(np.mean(lt.intensity_rgb)) * avg)
        elif isinstance(lt, AreaLight):
            powers.append(np.pi * 4.0 * lt.area
                          * float(np.mean(lt.radiance_rgb)))
    powers = np.asarray(powers, dtype=float)
    total = powers.sum()
    if total <= 0.0:
        return np.full(len(powers), 1.0)
    return np.cumsum(powers / total)


def render_sppm(design, config=None, width=None, height=None,
                progress=None):
    """Render a sensor design to a linear HDR image.

    Deterministic: the same design, config, and resolution give a
    bit-identical result.  ``progress`` (if given) is called with a
    fraction in (0, 1] after each iteration.
    """
    if config is None:
        config = RenderConfig()
    scene = compile_scene(design, width=width, height=height)
    cdf = _light_pick_cdf(design, scene)

    npix = scene.width * scene.height
    r0 = config.r0_fraction * scene.scene_diag
    r2 = np.full(npix, r0 * r0)
    n_acc = np.zeros(npix)
    tau = np.zeros((npix, 3))
    direct = np.zeros((npix, 3))
    phi_it = np.zeros((npix, 3))
    m_it = np.zeros(npix, dtype=np.int64)
    vp_pos = np.zeros((npix, 3))
    vp_nrm = np.zeros((npix, 3))
    vp_wo = np.zeros((npix, 3))
    vp_beta = np.zeros((npix, 3))
    vp_part = np.zeros(npix, dtype=np.int32)
    vp_live = np.zeros(npix, dtype=np.uint8)
    table_size = 1
    while table_size < 2 * npix:
        table_size *= 2
    bucket_cnt = np.zeros(table_size + 1, dtype=np.int64)
    bucket_idx = np.zeros(npix, dtype=np.int64)

    for it in range(config.iterations):
        sppm_pass(
            it, scene.verts, scene.vnormals, scene.tris, scene.tri_part,
            scene.mat_kind, scene.mat_rgb, scene.mat_alpha, scene.mat_eta,
            scene.node_lo, scene.node_hi, scene.node_left, scene.node_start,
            scene.node_count,
            scene.light_kind, scene.light_pos, scene.light_dir,
            scene.light_rgb, scene.light_eu, scene.light_ev, scene.light_area,
            scene.prof_ang, scene.prof_mul, scene.prof_off, cdf,
            scene.cam_pos, scene.cam_right, scene.cam_up, scene.cam_fwd,
            scene.tan_x, scene.tan_y, scene.width, scene.height,
            config.photons_per_iter, config.alpha, config.max_depth,
            config.seed,
            r2, n_acc, tau, direct, phi_it, m_it,
            vp_pos, vp_nrm, vp_wo, vp_beta, vp_part, vp_live,
            bucket_cnt, bucket_idx)
        if progress is not None:
            progress((it + 1) / config.iterations)

    denom = np.pi * r2 * config.iterations
    hdr = (tau / denom[:, None]
           + direct / config.iterations).reshape(scene.height, scene.width, 3)
    meta = {
        "design": design.name,
        "width": scene.width,
        "height": scene.height,
        "iterations": config.iterations,
        "photons_per_iter": config.photons_per_iter,
        "seed": config.seed,
    }
    return TactileImage(hdr=hdr, metadata=meta)
