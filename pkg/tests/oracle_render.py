"""Independent direct-lighting reference renderer for renderer tests.

Deterministic, numpy-only: pixel-center rays, brute-force nearest triangle
hit, direct illumination summed analytically for point lights and by fixed
quadrature for area lights.  Valid only for scenes designed without
occluders or refractive layers between lights and the viewed surface.
"""

import numpy as np

from tacstudio.optics import AreaLight, PointLight, eval_bsdf
from tacstudio.render.compile import compile_scene


def _nearest_hit(origins, dirs, verts, tris):
    """Brute-force Moller-Trumbore over every triangle for each ray."""
    n = origins.shape[0]
    best_t = np.full(n, np.inf)
    best_tri = np.full(n, -1, dtype=np.int64)
    best_uv = np.zeros((n, 2))
    a = verts[tris[:, 0]]
    e1 = verts[tris[:, 1]] - a
    e2 = verts[tris[:, 2]] - a
    for i in range(n):
        o, d = origins[i], dirs[i]
        p = np.cross(d, e2)
        det = np.einsum("ij,ij->i", e1, p)
        ok = np.abs(det) > 1e-14
        inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
        s = o - a
        u = np.einsum("ij,ij->i", s, p) * inv
        q = np.cross(s, e1)
        v = np.einsum("ij,j->i", q, d) * inv
        t = np.einsum("ij,ij->i", e2, q) * inv
        ok &= (u >= -1e-9) & (v >= -1e-9) & (u + v <= 1.0 + 1e-9) & (t > 1e-7)
        if not ok.any():
            continue
        idx = np.where(ok)[0]
        k = idx[np.argmin(t[idx])]
        best_t[i] = t[k]
        best_tri[i] = k
        best_uv[i] = (u[k], v[k])
    return best_t, best_tri, best_uv


def emitter_mask(design, width, height):
    """Boolean (height, width) mask of pixels whose camera ray reaches an
    area-light rectangle before any surface.

    Those pixels record emission in a full renderer, which this
    direct-lighting reference deliberately omits, so comparisons exclude
    them.
    """
    scene = compile_scene(design, width=width, height=height)
    xs = ((np.arange(width) + 0.5) / width * 2.0 - 1.0) * scene.tan_x
    ys = (1.0 - (np.arange(height) + 0.5) / height * 2.0) * scene.tan_y
    gx, gy = np.meshgrid(xs, ys)
    dirs = (scene.cam_fwd + gx[..., None] * scene.cam_right
            + gy[..., None] * scene.cam_up).reshape(-1, 3)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    origins = np.broadcast_to(scene.cam_pos, dirs.shape)
    t_surf, _, _ = _nearest_hit(origins, dirs, scene.verts, scene.tris)

    mask = np.zeros(dirs.shape[0], dtype=bool)
    for lt in design.lights:
        if not isinstance(lt, AreaLight):
            continue
        c = np.asarray(lt.center, float)
        eu = np.asarray(lt.edge_u, float)
        ev = np.asarray(lt.edge_v, float)
        n = lt.normal
        denom = dirs @ n
        ok = np.abs(denom) > 1e-12
        t = np.where(ok, ((c - origins) @ n) / np.where(ok, denom, 1.0),
                     np.inf)
        p = origins + t[:, None] * dirs - c
        su = (p @ eu) / float(eu @ eu)
        sv = (p @ ev) / float(ev @ ev)
        hit = ok & (t > 1e-7) & (np.abs(su) <= 1.0) & (np.abs(sv) <= 1.0)
        mask |= hit & (t < t_surf)
    return mask.reshape(height, width)


def direct_lighting_image(design, width, height, area_samples=12):
    """Reference HDR image of direct lighting only (no shadows, no GI)."""
    scene = compile_scene(design, width=width, height=height)
    xs = ((np.arange(width) + 0.5) / width * 2.0 - 1.0) * scene.tan_x
    ys = (1.0 - (np.arange(height) + 0.5) / height * 2.0) * scene.tan_y
    gx, gy = np.meshgrid(xs, ys)
    dirs = (scene.cam_fwd + gx[..., None] * scene.cam_right
            + gy[..., None] * scene.cam_up).reshape(-1, 3)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    origins = np.broadcast_to(scene.cam_pos, dirs.shape)

    t, tri, uv = _nearest_hit(origins, dirs, scene.verts, scene.tris)
    img = np.zeros((height * width, 3))
    materials = {i: p.material for i, p in enumerate(design.parts)}
    g = np.linspace(-1.0, 1.0, 2 * area_samples + 1)[1::2]  # cell midpoints
    for i in range(dirs.shape[0]):
        if tri[i] < 0:
            continue
        k = int(tri[i])
        mat = materials[int(scene.tri_part[k])]
        u, v = uv[i]
        i0, i1, i2 = scene.tris[k]
        n = ((1 - u - v) * scene.vnormals[i0] + u * scene.vnormals[i1]
             + v * scene.vnormals[i2])
        n /= np.linalg.norm(n)
        p = origins[i] + t[i] * dirs[i]
        wo = -dirs[i]
        total = np.zeros(3)
        for lt in design.lights:
            if isinstance(lt, PointLight):
                w = np.asarray(lt.position, float) - p
                d2 = float(w @ w)
                wi = w / np.sqrt(d2)
                f = eval_bsdf(mat, wi, wo, n)
                cos_s = abs(float(n @ wi))
                ang = np.arccos(np.clip(
                    -wi @ np.asarray(lt.orientation, float), -1.0, 1.0))
                mult = (lt.ies_profile(np.degrees(ang))
                        if lt.ies_profile is not None else 1.0)
                total += f * np.asarray(lt.intensity_rgb, float) * mult \
                    * cos_s / d2
            elif isinstance(lt, AreaLight):
                c = np.asarray(lt.center, float)
                eu = np.asarray(lt.edge_u, float)
                ev = np.asarray(lt.edge_v, float)
                ln = lt.normal
                acc = np.zeros(3)
                for su in g:
                    for sv in g:
                        q = c + su * eu + sv * ev
                        w = q - p
                        d2 = float(w @ w)
                        wi = w / np.sqrt(d2)
                        cos_l = float(-wi @ ln)
                        if cos_l <= 0.0:
                            continue
                        f = eval_bsdf(mat, wi, wo, n)
                        cos_s = abs(float(n @ wi))
                        acc += f * cos_s * cos_l / d2
                total += acc * np.asarray(lt.radiance_rgb, float) \
                    * 4.0 * lt.area / g.size ** 2
        img[i] = total
    return img.reshape(height, width, 3)
