"""Analytic optical models: materials, emitters, and cameras.

Three BSDF families cover the optical surfaces found in camera-based
tactile sensors: RoughDielectric (clear elastomer, resin), RoughConductor
(the opaque skin coating, with a single 1-D specularity knob), and Diffuse
(matte support parts).  Emitters are point lights with optional angular
intensity profiles and rectangular area lights.

Conventions: directions are unit vectors; ``wi``/``wo`` both point away
from the surface; shading is two-sided (normals are flipped toward the
query side where it matters).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: GGX alpha floor; keeps the specularity -> roughness map away from the
#: singular mirror lobe
ALPHA_FLOOR = 0.01


def specularity_to_alpha(specularity: float) -> float:
    """Map the 1-D coating specularity knob to a GGX roughness alpha."""
    return max(1.0 - float(specularity), ALPHA_FLOOR)


# ---------------------------------------------------------------------------
# Materials

@dataclass(frozen=True)
class RoughDielectric:
    """Refractive surface: relative index eta, GGX roughness."""

    eta: float = 1.5
    roughness: float = 0.05

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if not 0.0 <= self.roughness <= 1.0:
            raise ValueError("roughness must be in [0, 1]")

    kind = "rough_dielectric"


@dataclass(frozen=True)
class RoughConductor:
    """Opaque coating: RGB reflectance, RGB eta, scalar specularity.

    ``eta_rgb`` is carried for library fidelity; the shading math uses a
    Schlick reflectance built from ``reflectance_rgb``.
    """

    reflectance_rgb: tuple[float, float, float] = (0.9, 0.9, 0.9)
    eta_rgb: tuple[float, float, float] = (1.5, 1.5, 1.5)
    specularity: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.specularity <= 1.0:
            raise ValueError("specularity must be in [0, 1]")
        if any(not 0.0 <= c <= 1.0 for c in self.reflectance_rgb):
            raise ValueError("reflectance_rgb must be in [0, 1] per channel")

    kind = "rough_conductor"

    @property
    def alpha(self) -> float:
        return specularity_to_alpha(self.specularity)


@dataclass(frozen=True)
class Diffuse:
    albedo_rgb: tuple[float, float, float] = (0.5, 0.5, 0.5)

    def __post_init__(self):
        if any(not 0.0 <= c <= 1.0 for c in self.albedo_rgb):
            raise ValueError("albedo_rgb must be in [0, 1] per channel")

    kind = "diffuse"


OpticalMaterial = RoughDielectric | RoughConductor | Diffuse


# ---------------------------------------------------------------------------
# Fresnel / Snell

def fresnel_dielectric(cos_theta_i: float, eta: float) -> float:
    """Unpolarized Fresnel reflectance for a dielectric interface.

    ``eta`` is the ratio transmitted/incident index for the side the ray
    arrives from.  Returns 1.0 under total internal reflection.
    """
    ci = abs(float(cos_theta_i))
    ci = min(ci, 1.0)
    sin2_t = (1.0 - ci * ci) / (eta * eta)
    if sin2_t >= 1.0:
        return 1.0
    ct = math.sqrt(1.0 - sin2_t)
    r_par = (eta * ci - ct) / (eta * ci + ct)
    r_perp = (ci - eta * ct) / (ci + eta * ct)
    return 0.5 * (r_par * r_par + r_perp * r_perp)


def refract(incident: np.ndarray, normal: np.ndarray, eta: float) -> np.ndarray | None:
    """Snell transmitted direction, or None under total internal reflection.

    ``incident`` points along the ray (into the surface); ``normal`` is
    flipped internally to oppose it.
    """
    d = np.asarray(incident, dtype=float)
    n = np.asarray(normal, dtype=float)
    cos_i = -float(np.dot(d, n))
    if cos_i < 0.0:
        n = -n
        cos_i = -cos_i
    inv_eta = 1.0 / eta
    sin2_t = inv_eta * inv_eta * (1.0 - cos_i * cos_i)
    if sin2_t >= 1.0:
        return None
    cos_t = math.sqrt(1.0 - sin2_t)
    t = inv_eta * d + (inv_eta * cos_i - cos_t) * n
    return t / np.linalg.norm(t)


def reflect(incident: np.ndarray, normal: np.ndarray) -> np.ndarray:
    d = np.asarray(incident, dtype=float)
    n = np.asarray(normal, dtype=float)
    return d - 2.0 * float(np.dot(d, n)) * n


# ---------------------------------------------------------------------------
# GGX microfacet helpers (Trowbridge-Reitz, Smith separable masking)

def _ggx_d(cos_h: float, alpha: float) -> float:
    if cos_h <= 0.0:
        return 0.0
    a2 = alpha * alpha
    d = cos_h * cos_h * (a2 - 1.0) + 1.0
    return a2 / (math.pi * d * d)

def _ggx_g1(cos_v: float, alpha: float) -> float:
    if cos_v <= 0.0:
        return 0.0
    a2 = alpha * alpha
    return 2.0 * cos_v / (cos_v + math.sqrt(a2 + (1.0 - a2) * cos_v * cos_v))


def _schlick(f0: np.ndarray, cos_t: float) -> np.ndarray:
    return f0 + (1.0 - f0) * (1.0 - cos_t) ** 5


def _orient(n: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Flip n so it lies in the hemisphere of w (two-sided shading)."""
    return n if np.dot(n, w) >= 0.0 else -n


def eval_bsdf(material: OpticalMaterial, wi: np.ndarray, wo: np.ndarray,
              n: np.ndarray) -> np.ndarray:
    """Evaluate the BSDF for directions wi, wo (both away from surface).

    Returns an RGB spectrum in 1/sr.  Reflection lobes are reciprocal;
    shading is two-sided with the normal oriented toward ``wi``.
    """
    wi = np.asarray(wi, float)
    wo = np.asarray(wo, float)
    n = _orient(np.asarray(n, float), wi)
    ci = float(np.dot(n, wi))
    co = float(np.dot(n, wo))

    if isinstance(material, Diffuse):
        if ci <= 0.0 or co <= 0.0:
            return np.zeros(3)
        return np.asarray(material.albedo_rgb, float) / math.pi

    if isinstance(material, RoughConductor):
        if ci <= 0.0 or co <= 0.0:
            return np.zeros(3)
        h = wi + wo
        hn = np.linalg.norm(h)
        if hn < 1e-12:
            return np.zeros(3)
        h = h / hn
        a = material.alpha
        d = _ggx_d(float(np.dot(n, h)), a)
        g = _ggx_g1(ci, a) * _ggx_g1(co, a)
        f = _schlick(np.asarray(material.reflectance_rgb, float),
                     abs(float(np.dot(wi, h))))
        return f * (d * g / (4.0 * ci * co))

    if isinstance(material, RoughDielectric):
        eta = material.eta  # outside -> inside ratio; invert below the surface
        a = max(material.roughness, ALPHA_FLOOR)
        if co > 0.0:
            # reflection lobe
            h = wi + wo
            hn = np.linalg.norm(h)
            if hn < 1e-12:
                return np.zeros(3)
            h = h / hn
            fr = fresnel_dielectric(float(np.dot(wi, h)), eta)
            d = _ggx_d(float(np.dot(n, h)), a)
            g = _ggx_g1(ci, a) * _ggx_g1(abs(co), a)
            val = fr * d * g / (4.0 * ci * abs(co))
            return np.full(3, val)
        elif co < 0.0:
            # transmission lobe (Walter et al. microfacet refraction)
            h = -(wi + eta * wo)
            hn = np.linalg.norm(h)
            if hn < 1e-12:
                return np.zeros(3)
            h = h / hn
            h = _orient(h, wi)
            c_ih = float(np.dot(wi, h))
            c_oh = float(np.dot(wo, h))
            if c_ih <= 0.0 or c_oh >= 0.0:
                return np.zeros(3)
            fr = fresnel_dielectric(c_ih, eta)
            d = _ggx_d(float(np.dot(n, h)), a)
            g = _ggx_g1(ci, a) * _ggx_g1(abs(co), a)
            denom = (c_ih + eta * c_oh)
            if abs(denom) < 1e-12:
                return np.zeros(3)
            val = ((1.0 - fr) * d * g * abs(c_ih * c_oh)
                   / (ci * abs(co) * denom * denom))
            return np.full(3, val)
        return np.zeros(3)

    raise TypeError(f"unknown material {material!r}")


def _cosine_sample(n: np.ndarray, u1: float, u2: float) -> tuple[np.ndarray, float]:
    """Cosine-weighted hemisphere direction around n with its pdf."""
    r = math.sqrt(u1)
    phi = 2.0 * math.pi * u2
    x, y = r * math.cos(phi), r * math.sin(phi)
    z = math.sqrt(max(0.0, 1.0 - u1))
    t, b = _basis(n)
    w = x * t + y * b + z * n
    return w, z / math.pi


def _basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Any orthonormal tangent frame for unit n."""
    if abs(n[2]) < 0.999:
        t = np.cross(np.array([0.0, 0.0, 1.0]), n)
    else:
        t = np.cross(np.array([1.0, 0.0, 0.0]), n)
    t = t / np.linalg.norm(t)
    return t, np.cross(n, t)


def _sample_ggx_h(n: np.ndarray, alpha: float, u1: float, u2: float) -> np.ndarray:
    """Sample a half vector from the GGX normal distribution (D * cos)."""
    phi = 2.0 * math.pi * u2
    ct = math.sqrt((1.0 - u1) / (1.0 + (alpha * alpha - 1.0) * u1))
    st = math.sqrt(max(0.0, 1.0 - ct * ct))
    t, b = _basis(n)
    return st * math.cos(phi) * t + st * math.sin(phi) * b + ct * n


def sample_bsdf(material: OpticalMaterial, wi: np.ndarray, n: np.ndarray,
                u: tuple[float, float]):
    """Importance-sample an outgoing direction.

    Returns (wo, pdf, throughput) where throughput = f * |cos| / pdf, or
    (None, 0, zeros) for a rejected sample.
    """
    wi = np.asarray(wi, float)
    n = _orient(np.asarray(n, float), wi)
    u1, u2 = float(u[0]), float(u[1])
    zero = (None, 0.0, np.zeros(3))

    if isinstance(material, Diffuse):
        wo, pdf = _cosine_sample(n, u1, u2)
        if pdf <= 0.0:
            return zero
        return wo, pdf, np.asarray(material.albedo_rgb, float)

    if isinstance(material, RoughConductor):
        a = material.alpha
        h = _sample_ggx_h(n, a, u1, u2)
        wo = reflect(-wi, h)
        co = float(np.dot(n, wo))
        if co <= 0.0:
            return zero
        cos_h = float(np.dot(n, h))
        pdf = _ggx_d(cos_h, a) * cos_h / (4.0 * abs(float(np.dot(wi, h))) + 1e-12)
        if pdf <= 0.0:
            return zero
        f = eval_bsdf(material, wi, wo, n)
        return wo, pdf, f * co / pdf

    if isinstance(material, RoughDielectric):
        # smooth-interface sampling: Fresnel chooses reflect vs refract;
        # the microfacet lobes of eval are for reciprocity checks, the
        # transport path treats low-roughness dielectrics as ideal
        fr = fresnel_dielectric(float(np.dot(n, wi)), material.eta)
        if u1 < fr:
            wo = reflect(-wi, n)
            return wo, fr, np.ones(3)
        t = refract(-wi, n, material.eta)
        if t is None:
            wo = reflect(-wi, n)
            return wo, 1.0, np.ones(3)
        return t, 1.0 - fr, np.ones(3)

    raise TypeError(f"unknown material {material!r}")


# ---------------------------------------------------------------------------
# Emitters

@dataclass(frozen=True)
class AngularProfile:
    """Azimuthally symmetric intensity multiplier vs polar angle (degrees)."""

    angles_deg: np.ndarray
    multipliers: np.ndarray
    name: str = ""

    def __post_init__(self):
        a = np.asarray(self.angles_deg, float)
        m = np.asarray(self.multipliers, float)
        if a.ndim != 1 or len(a) < 2 or a.shape != m.shape:
            raise ValueError("profile needs >= 2 (angle, multiplier) samples")
        if not np.all(np.diff(a) > 0):
            raise ValueError("profile angles must be strictly increasing")
        if a[0] < 0.0 or a[-1] > 180.0:
            raise ValueError("profile angles must lie in [0, 180] degrees")
        if np.any(m < 0):
            raise ValueError("profile multipliers must be >= 0")
        object.__setattr__(self, "angles_deg", a)
        object.__setattr__(self, "multipliers", m)

    def __call__(self, angle_deg: float) -> float:
        return float(np.interp(angle_deg, self.angles_deg, self.multipliers))

    @classmethod
    def load(cls, path) -> "AngularProfile":
        """Read a two-column (angle_degrees, multiplier) text profile.

        First line is a header carrying the profile name.
        """
        with open(path) as fh:
            name = fh.readline().strip().lstrip("#").strip()
            data = np.loadtxt(fh)
        return cls(data[:, 0], data[:, 1], name=name)


@dataclass(frozen=True)
class PointLight:
    position: np.ndarray
    orientation: np.ndarray          # unit vector, profile polar axis
    intensity_rgb: np.ndarray        # W/sr
    ies_profile: AngularProfile | None = None
    group_id: str = "default"
    color: str = "W"                 # one of R, G, B, W

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, float))
        o = np.asarray(self.orientation, float)
        object.__setattr__(self, "orientation", o / np.linalg.norm(o))
        i = np.asarray(self.intensity_rgb, float)
        if np.any(i < 0):
            raise ValueError("intensity must be >= 0")
        object.__setattr__(self, "intensity_rgb", i)

    kind = "point"


@dataclass(frozen=True)
class AreaLight:
    """Rectangular one-sided emitter: center plus two edge vectors."""

    center: np.ndarray
    edge_u: np.ndarray
    edge_v: np.ndarray
    radiance_rgb: np.ndarray         # W/(sr*m^2)-proportional
    group_id: str = "default"
    color: str = "W"

    def __post_init__(self):
        for name in ("center", "edge_u", "edge_v", "radiance_rgb"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), float))
        if np.any(self.radiance_rgb < 0):
            raise ValueError("radiance must be >= 0")
        n = np.cross(self.edge_u, self.edge_v)
        if np.linalg.norm(n) < 1e-12:
            raise ValueError("area light edges must not be parallel")

    kind = "area"

    @property
    def normal(self) -> np.ndarray:
        n = np.cross(self.edge_u, self.edge_v)
        return n / np.linalg.norm(n)

    @property
    def area(self) -> float:
        return float(np.linalg.norm(np.cross(self.edge_u, self.edge_v)))


LightSource = PointLight | AreaLight


def emit(light: LightSource, direction: np.ndarray) -> np.ndarray:
    """Emitted intensity (point) or radiance (area) along a unit direction."""
    d = np.asarray(direction, float)
    if isinstance(light, PointLight):
        if light.ies_profile is None:
            return light.intensity_rgb.copy()
        cos_a = float(np.clip(np.dot(d, light.orientation), -1.0, 1.0))
        angle = math.degrees(math.acos(cos_a))
        return light.intensity_rgb * light.ies_profile(angle)
    if isinstance(light, AreaLight):
        if float(np.dot(d, light.normal)) > 0.0:
            return light.radiance_rgb.copy()
        return np.zeros(3)
    raise TypeError(f"unknown light {light!r}")


# ---------------------------------------------------------------------------
# Camera

@dataclass(frozen=True)
class CameraModel:
    """Perspective camera: position, look-at orientation, FoV, resolution."""

    position: np.ndarray
    look_at: np.ndarray
    up: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    fov_degrees: float = 60.0
    width: int = 320
    height: int = 240
    exposure_ev: float = 0.0

    def __post_init__(self):
        for name in ("position", "look_at", "up"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), float))
        if not (0.0 < self.fov_degrees < 180.0 and math.isfinite(self.fov_degrees)):
            raise ValueError("fov must be in (0, 180)")
        if self.width < 8 or self.height < 8:
            raise ValueError("resolution must be >= 8 px per axis")

    def frame(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(right, up, forward) orthonormal camera frame."""
        fwd = self.look_at - self.position
        fwd = fwd / np.linalg.norm(fwd)
        right = np.cross(fwd, self.up)
        rn = np.linalg.norm(right)
        if rn < 1e-9:  # up parallel to view axis: pick another up
            alt = np.array([1.0, 0.0, 0.0]) if abs(fwd[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
            right = np.cross(fwd, alt)
            rn = np.linalg.norm(right)
        right = right / rn
        return right, np.cross(right, fwd), fwd

    def with_resolution(self, width: int, height: int) -> "CameraModel":
        return CameraModel(self.position, self.look_at, self.up,
                           self.fov_degrees, width, height, self.exposure_ev)
