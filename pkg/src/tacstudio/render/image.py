"""Tactile image containers, HDR->LDR post-processing, and file I/O.

HDR payloads are stored as linear radiance and written as PFM
(little-endian, scale -1.0); LDR payloads are 8-bit PNG.  The saturation
pass reproduces camera overexposure: overexposed pixels are masked, the
mask is Gaussian-blurred, and pixels are pushed toward white by the
blurred mask so LED hot spots bloom whitish.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace

import numpy as np
from PIL import Image
from scipy.ndimage import gaussian_filter

GAMMA = 2.2
#: Gaussian sigma (px) for the overexposure mask blur
SATURATION_SIGMA = 1.5


class ImagePayloadError(ValueError):
    """Requested an image payload that is not present."""


@dataclass(frozen=True)
class TactileImage:
    hdr: np.ndarray                    # (h, w, 3) float32/float64 linear
    ldr: np.ndarray | None = None      # (h, w, 3) in [0, 1]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        hdr = np.asarray(self.hdr)
        if hdr.ndim != 3 or hdr.shape[2] != 3:
            raise ValueError("hdr must be (h, w, 3)")
        if not np.all(np.isfinite(hdr)) or hdr.min() < 0:
            raise ValueError("hdr values must be finite and >= 0")
        object.__setattr__(self, "hdr", hdr)

    @property
    def width(self) -> int:
        return self.hdr.shape[1]

    @property
    def height(self) -> int:
        return self.hdr.shape[0]


@dataclass(frozen=True)
class NormalMap:
    """Per-pixel unit normal of the first sensing-surface hit."""

    normals: np.ndarray     # (h, w, 3), sensor frame
    valid: np.ndarray       # (h, w) bool

    def __post_init__(self):
        n = np.asarray(self.normals, float)
        v = np.asarray(self.valid, bool)
        norms = np.linalg.norm(n[v], axis=-1)
        if len(norms) and not np.allclose(norms, 1.0, atol=1e-6):
            raise ValueError("valid normals must be unit length")
        object.__setattr__(self, "normals", n)
        object.__setattr__(self, "valid", v)

    def theta(self) -> np.ndarray:
        """Polar angle of the normal vs the sensor +z axis (radians)."""
        nz = np.clip(self.normals[..., 2], -1.0, 1.0)
        return np.arccos(np.abs(nz))

    def phi(self) -> np.ndarray:
        """Azimuth in [-pi, pi)."""
        return np.arctan2(self.normals[..., 1], self.normals[..., 0])


def tonemap(img: TactileImage, exposure_ev: float = 0.0,
            saturation: bool = False) -> TactileImage:
    """Scale by 2^EV, clamp, gamma 2.2; optionally bloom overexposed pixels."""
    scaled = img.hdr.astype(np.float64) * (2.0 ** exposure_ev)
    ldr = np.clip(scaled, 0.0, 1.0) ** (1.0 / GAMMA)
    if saturation:
        mask = (scaled > 1.0).any(axis=2).astype(np.float64)
        blurred = np.clip(gaussian_filter(mask, SATURATION_SIGMA), 0.0, 1.0)
        ldr = ldr + blurred[..., None] * (1.0 - ldr)
    meta = dict(img.metadata, exposure_ev=exposure_ev, saturation=saturation)
    return replace(img, ldr=ldr, metadata=meta)


# ---------------------------------------------------------------------------
# File formats

def write_pfm(img: TactileImage, path) -> None:
    """Color PFM, little-endian (scale -1.0), rows bottom-to-top."""
    data = np.asarray(img.hdr, dtype="<f4")
    h, w, _ = data.shape
    with open(path, "wb") as fh:
        fh.write(b"PF\n")
        fh.write(f"{w} {h}\n".encode())
        fh.write(b"-1.0\n")
        fh.write(np.ascontiguousarray(data[::-1]).tobytes())


def read_pfm(path) -> TactileImage:
    with open(path, "rb") as fh:
        header = fh.readline().strip()
        if header != b"PF":
            raise ValueError(f"not a color PFM file: header {header!r}")
        w, h = map(int, fh.readline().split())
        scale = float(fh.readline())
        dtype = "<f4" if scale < 0 else ">f4"
        data = np.frombuffer(fh.read(w * h * 3 * 4), dtype=dtype)
    return TactileImage(data.reshape(h, w, 3)[::-1].copy())


def write_png(img: TactileImage, path) -> None:
    if img.ldr is None:
        raise ImagePayloadError("PNG export needs an LDR payload; tonemap first")
    # round half up so a uniform 0.5 maps to 128
    quant = np.floor(np.clip(img.ldr, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    Image.fromarray(quant, mode="RGB").save(path)


def write_image(img: TactileImage, path, format: str | None = None) -> None:
    """Write PFM (HDR) or PNG (LDR); format inferred from the suffix."""
    fmt = (format or str(path).rsplit(".", 1)[-1]).upper()
    if fmt == "PFM":
        write_pfm(img, path)
    elif fmt == "PNG":
        write_png(img, path)
    else:
        raise ValueError(f"unsupported image format {fmt!r} (PFM or PNG)")
