from .image import (ImagePayloadError, NormalMap, TactileImage, read_pfm,
                    tonemap, write_image, write_pfm, write_png)
from .probe import RayProbeResult, ray_probe, render_normals
from .sppm import RenderConfig, render_sppm

__all__ = [
    "ImagePayloadError", "NormalMap", "TactileImage", "read_pfm", "tonemap",
    "write_image", "write_pfm", "write_png",
    "RayProbeResult", "ray_probe", "render_normals",
    "RenderConfig", "render_sppm",
]
