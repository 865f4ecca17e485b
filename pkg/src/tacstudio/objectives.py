"""Design-evaluation objectives for camera-based tactile sensors.

Four sensor-level scores — color/normal linearity (rgb2normal), normal
confusion under sensor noise (normdiff), incidence orthogonality (aoap),
and footprint uniformity (warp) — plus a model-free SNR metric for
arbitrary datasets.  Rendering is injectable so the expensive scores can be
driven by stub images in tests.
"""

import dataclasses
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .render.image import tonemap
from .render.probe import ray_probe, render_normals
from .render.sppm import RenderConfig, render_sppm
from .scene import DEFAULT_DEPTH, IndentationSpec, indent, indenter_grid

SNR_CAP = 1e9
WARP_CAP = 1e9
INDENT_ANGLE_THRESHOLD = 1e-3  # rad of normal change that marks contact


@dataclass(frozen=True)
class NormalColorSample:
    """One (color, normal) observation from an indented pixel."""

    r: float
    g: float
    b: float
    theta: float                     # polar angle of the normal, radians
    phi: float                       # azimuth, radians
    pixel: tuple = (0, 0)

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi / 2:
            raise ValueError("theta must be in [0, pi/2]")
        if not -np.pi <= self.phi < np.pi:
            raise ValueError("phi must be in [-pi, pi)")


@dataclass(frozen=True)
class ObjectiveConfig:
    indenter_radius: float = 1.5     # mm
    indent_depth: float = DEFAULT_DEPTH
    locations: int = 9
    directions: int = 8              # cardinal + ordinal chords
    noise_fraction: float = 0.30
    w_theta: float = 1.0
    w_phi: float = 1.0
    aoap_k1: float = 0.01
    warp_epsilon: float = 1e-9       # mm^2
    snr_k: int = 5
    seed: int = 0
    render: RenderConfig = field(default_factory=RenderConfig)

    def __post_init__(self):
        if min(self.indenter_radius, self.indent_depth, self.locations,
               self.directions, self.w_theta, self.w_phi, self.aoap_k1,
               self.warp_epsilon, self.snr_k) <= 0:
            raise ValueError("objective config values must be positive")
        if not 0.0 <= self.noise_fraction <= 1.0:
            raise ValueError("noise_fraction must be in [0, 1]")


@dataclass(frozen=True)
class ObjectiveReport:
    objective: str
    score: float
    breakdown: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ValueError("objective score must be finite")

    def to_text(self):
        lines = [f"objective: {self.objective}", f"score: {self.score!r}"]
        for k in sorted(self.breakdown):
            lines.append(f"breakdown.{k}: {self.breakdown[k]!r}")
        for k in sorted(self.provenance):
            lines.append(f"provenance.{k}: {self.provenance[k]!r}")
        return "\n".join(lines) + "\n"


def design_fingerprint(design):
    """Stable content hash of geometry, materials, lights, and camera."""
    h = hashlib.sha256()
    for part in design.parts:
        h.update(part.name.encode())
        h.update(part.role.encode())
        h.update(np.ascontiguousarray(part.mesh.vertices).tobytes())
        h.update(np.ascontiguousarray(part.mesh.faces).tobytes())
        h.update(repr(part.material).encode())
    for lt in design.lights:
        h.update(repr(lt).encode())
    h.update(repr(design.camera).encode())
    return h.hexdigest()[:16]


def _provenance(design, cfg):
    return {"design": design_fingerprint(design),
            "config": dataclasses.asdict(cfg), "seed": cfg.seed}


# ---------------------------------------------------------------------------
# building blocks

def pca_dominant(colors):
    """Project mean-centered colors onto their first principal axis.

    The axis sign is chosen so the projection correlates non-negatively
    with sample order.  Constant input maps to all-zero projections.
    """
    c = np.asarray(colors, float)
    if c.ndim != 2 or c.shape[0] < 3:
        raise ValueError("need at least 3 color samples")
    centered = c - c.mean(axis=0)
    if not np.any(centered):
        return np.zeros(c.shape[0])
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    proj = centered @ vt[0]
    idx = np.arange(len(proj), dtype=float)
    if np.dot(proj, idx - idx.mean()) < 0:
        proj = -proj
    return proj


def linearity_r2(x, y):
    """Ordinary-least-squares R^2 of y against x; 0 when y is degenerate."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.shape != y.shape:
        raise ValueError("x and y must have equal length")
    if x.size < 3:
        raise ValueError("need at least 3 samples")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 0.0
    vx = float(np.sum((x - x.mean()) ** 2))
    if vx == 0.0:
        return 0.0
    slope = float(np.sum((x - x.mean()) * (y - y.mean()))) / vx
    resid = y - (y.mean() + slope * (x - x.mean()))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return min(max(r2, 0.0), 1.0)


def snr_metric(features, targets, k=5):
    """Global target variance over mean local k-NN target variance."""
    f = np.asarray(features, float)
    t = np.asarray(targets, float)
    if f.ndim == 1:
        f = f[:, None]
    if f.shape[0] != t.shape[0]:
        raise ValueError("features and targets must have equal length")
    n = f.shape[0]
    if k < 1 or n < k + 1:
        raise ValueError("need at least k+1 samples")
    signal = float(np.var(t))
    if signal == 0.0:
        return 0.0
    d2 = np.sum((f[:, None, :] - f[None, :, :]) ** 2, axis=2)
    np.fill_diagonal(d2, np.inf)
    nbrs = np.argpartition(d2, k - 1, axis=1)[:, :k]
    # unbiased local variance: k is small, so the 1/k estimator would
    # systematically inflate the ratio by k/(k-1)
    noise = float(np.mean(np.var(t[nbrs], axis=1, ddof=1)))
    if noise == 0.0:
        return SNR_CAP
    return min(signal / noise, SNR_CAP)


# ---------------------------------------------------------------------------
# indentation helpers

def _default_renderer(cfg):
    def run(design):
        img = render_sppm(design, cfg.render)
        return tonemap(img, exposure_ev=design.camera.exposure_ev).ldr
    return run


def _grid_specs(design, cfg):
    return indenter_grid(design, cfg.locations, radius=cfg.indenter_radius,
                         depth=cfg.indent_depth)


def _pixel_of_position(probe, target):
    """Index of the hit pixel whose surface point is nearest to target."""
    hits = probe.hit.astype(bool)
    if not hits.any():
        return None
    d2 = np.sum((probe.position[hits] - np.asarray(target, float)) ** 2,
                axis=1)
    return int(np.flatnonzero(hits)[np.argmin(d2)])


def _bresenham(x0, y0, x1, y1):
    """Integer pixel chain from (x0, y0) to (x1, y1), inclusive."""
    pts = []
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        pts.append((x, y))
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy
    return pts


_DIR8 = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]


def _direction_chords(cx, cy, radius_px, width, height, directions):
    """Pixel chords through (cx, cy), one per direction, clipped to image."""
    chords = []
    for dx, dy in _DIR8[:directions]:
        n = np.hypot(dx, dy)
        ex = int(round(cx + dx / n * radius_px))
        ey = int(round(cy + dy / n * radius_px))
        sx = int(round(cx - dx / n * radius_px))
        sy = int(round(cy - dy / n * radius_px))
        pts = [(x, y) for x, y in _bresenham(sx, sy, ex, ey)
               if 0 <= x < width and 0 <= y < height]
        chords.append(pts)
    return chords


# ---------------------------------------------------------------------------
# sensor-level objectives

def rgb2normal_score(design, cfg=None, renderer=None):
    """Mean linearity between dominant image color and surface tilt along
    chords through each contact, averaged over directions then locations."""
    cfg = cfg or ObjectiveConfig()
    renderer = renderer or _default_renderer(cfg)
    w, h = design.camera.width, design.camera.height
    base_probe = ray_probe(design)
    specs = _grid_specs(design, cfg)
    location_scores = []
    skipped = []
    for li, spec in enumerate(specs):
        pressed = indent(design, spec)
        probe = ray_probe(pressed)
        nm = render_normals(pressed)
        theta = nm.theta().reshape(-1)
        ldr = np.asarray(renderer(pressed), float).reshape(-1, 3)
        cpix = _pixel_of_position(probe, spec.sphere_center)
        if cpix is None:
            skipped.append(li)
            continue
        cy, cx = divmod(cpix, w)
        # contact disc extent in pixel units
        hits = probe.hit.astype(bool)
        in_disc = hits.copy()
        in_disc[hits] = (np.sum((probe.position[hits]
                                 - np.asarray(spec.sphere_center)) ** 2,
                                axis=1) <= spec.contact_radius ** 2)
        if in_disc.sum() < 9:
            skipped.append(li)
            continue
        ys, xs = np.divmod(np.flatnonzero(in_disc), w)
        radius_px = float(np.hypot(xs - cx, ys - cy).max())
        scores = []
        for pts in _direction_chords(cx, cy, radius_px, w, h,
                                     cfg.directions):
            idx = [y * w + x for x, y in pts if in_disc[y * w + x]]
            if len(idx) < 3:
                continue
            proj = pca_dominant(ldr[idx])
            scores.append(linearity_r2(theta[idx], proj))
        if not scores:
            skipped.append(li)
            continue
        location_scores.append(float(np.mean(scores)))
    if not location_scores:
        raise ValueError("no contact at any indenter location")
    score = float(np.mean(location_scores))
    return ObjectiveReport(
        "rgb2normal", score,
        breakdown={"locations": location_scores, "skipped": skipped,
                   "coverage": float(base_probe.hit.mean())},
        provenance=_provenance(design, cfg))


def normal_confusion(rgb, theta, phi, cfg=None, grid=32):
    """Mean angular spread of dataset normals whose colors fall inside a
    per-channel relative noise box around each query's nearest tuple.

    Returns (score, per-query confusion values); score is the negated mean,
    so 0 is a perfectly unambiguous color->normal mapping.
    """
    cfg = cfg or ObjectiveConfig()
    rgb = np.asarray(rgb, float)
    theta = np.asarray(theta, float)
    phi = np.asarray(phi, float)
    if rgb.shape[0] == 0:
        raise ValueError("empty dataset")
    tq = np.linspace(theta.min(), theta.max(), grid)
    pq = np.linspace(phi.min(), phi.max(), grid)
    gt, gp = np.meshgrid(tq, pq)
    queries = np.stack([gt.ravel(), gp.ravel()], axis=1)
    data_angles = np.stack([theta, phi], axis=1)
    confusions = np.empty(len(queries))
    for i, q in enumerate(queries):
        j = int(np.argmin(np.sum((data_angles - q) ** 2, axis=1)))
        lo = rgb[j] * (1.0 - cfg.noise_fraction)
        hi = rgb[j] * (1.0 + cfg.noise_fraction)
        inside = np.all((rgb >= lo - 1e-12) & (rgb <= hi + 1e-12), axis=1)
        confusions[i] = (cfg.w_theta * np.ptp(theta[inside])
                         + cfg.w_phi * np.ptp(phi[inside]))
    return -float(np.mean(confusions)), confusions


def normdiff_score(design, cfg=None, renderer=None):
    """Negated mean confusion of normals that share similar colors under
    per-channel relative sensor noise."""
    cfg = cfg or ObjectiveConfig()
    renderer = renderer or _default_renderer(cfg)
    specs = _grid_specs(design, cfg)
    pressed = indent(design, specs[len(specs) // 2])
    nm0 = render_normals(design)
    nm1 = render_normals(pressed)
    both = nm0.valid & nm1.valid
    cos_change = np.clip(np.sum(nm0.normals * nm1.normals, axis=2), -1.0, 1.0)
    indented = both & (np.arccos(cos_change) > INDENT_ANGLE_THRESHOLD)
    if not indented.any():
        raise ValueError("indentation produced no changed pixels")
    ldr = np.asarray(renderer(pressed), float)
    rgb = ldr[indented]
    theta = nm1.theta()[indented]
    phi = nm1.phi()[indented]
    score, confusions = normal_confusion(rgb, theta, phi, cfg)
    return ObjectiveReport(
        "normdiff", score,
        breakdown={"dataset_size": int(indented.sum()),
                   "mean_confusion": -score,
                   "theta_range": [float(theta.min()), float(theta.max())],
                   "phi_range": [float(phi.min()), float(phi.max())]},
        provenance=_provenance(design, cfg))


def aoap_score(design, cfg=None):
    """Mean incidence cosine of camera rays on the sensing surface plus a
    face-coverage bonus: (1/N) sum |n . w| + k1 * U / T."""
    cfg = cfg or ObjectiveConfig()
    probe = ray_probe(design)
    if probe.faces_total == 0:
        raise ValueError("design has no sensing faces")
    hits = probe.hit.astype(bool)
    mean_cos = float(probe.cos_incidence[hits].sum()) / probe.rays_total
    coverage = probe.faces_covered / probe.faces_total
    score = mean_cos + cfg.aoap_k1 * coverage
    return ObjectiveReport(
        "aoap", score,
        breakdown={"mean_cos": mean_cos, "faces_covered": probe.faces_covered,
                   "faces_total": probe.faces_total,
                   "rays_hit": int(hits.sum()),
                   "rays_total": probe.rays_total},
        provenance=_provenance(design, cfg))


def warp_score(design, cfg=None):
    """Uniformity of per-pixel footprint areas on the sensing surface:
    mean / (std + epsilon) over complete pixels, capped at 1e9."""
    cfg = cfg or ObjectiveConfig()
    probe = ray_probe(design, corners=True)
    w1, h1 = probe.width, probe.height
    hit = probe.hit.reshape(h1, w1).astype(bool)
    pos = probe.position.reshape(h1, w1, 3)
    complete = hit[:-1, :-1] & hit[:-1, 1:] & hit[1:, :-1] & hit[1:, 1:]
    if complete.sum() < 2:
        raise ValueError("fewer than 2 pixels have all 4 corner hits")
    a = pos[:-1, :-1][complete]
    b = pos[:-1, 1:][complete]
    c = pos[1:, :-1][complete]
    d = pos[1:, 1:][complete]
    t1 = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    t2 = 0.5 * np.linalg.norm(np.cross(b - d, c - d), axis=1)
    areas = np.concatenate([t1, t2])
    mu = float(areas.mean())
    delta = float(areas.std())
    score = min(mu / (delta + cfg.warp_epsilon), WARP_CAP)
    excluded = int((~complete).sum())
    return ObjectiveReport(
        "warp", score,
        breakdown={"mean_area": mu, "std_area": delta,
                   "pixels_complete": int(complete.sum()),
                   "pixels_excluded": excluded},
        provenance=_provenance(design, cfg))
