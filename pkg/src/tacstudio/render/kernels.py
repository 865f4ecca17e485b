"""Numba kernels: BVH traversal, ideal-path probing, and SPPM.

Everything here is serial and seeded with a counter-based generator, so a
given (scene, config, seed) produces bit-identical output on every run.
All functions are nopython-jitted; the wrappers in sppm.py / probe.py own
array preparation and result packaging.
"""

import numpy as np
from numba import njit

U64 = np.uint64
F_EPS = 1e-9
RAY_BIAS = 1e-4   # mm, origin offset after a bounce

MAT_DIFFUSE = 0
MAT_CONDUCTOR = 1
MAT_DIELECTRIC = 2
LIGHT_POINT = 0
LIGHT_AREA = 1


# ---------------------------------------------------------------------------
# counter-based RNG (splitmix64 stream)

@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def rng_init(seed, a, b, c):
    s = U64(seed) * U64(0x9E3779B97F4A7C15)
    s = _mix64(s ^ (U64(a) * U64(0xBF58476D1CE4E5B9)))
    s = _mix64(s ^ (U64(b) * U64(0x94D049BB133111EB)))
    s = _mix64(s ^ (U64(c) * U64(0xD6E8FEB86659FD93)))
    return s


@njit(cache=True, inline="always")
def rng_next(state):
    state = state + U64(0x9E3779B97F4A7C15)
    z = _mix64(state)
    return (z >> U64(11)) * (1.0 / 9007199254740992.0), state


# ---------------------------------------------------------------------------
# intersection

@njit(cache=True, inline="always")
def _ray_aabb(ox, oy, oz, ix, iy, iz, lo, hi, t_max):
    t0 = (lo[0] - ox) * ix
    t1 = (hi[0] - ox) * ix
    tmin = min(t0, t1)
    tmax = max(t0, t1)
    t0 = (lo[1] - oy) * iy
    t1 = (hi[1] - oy) * iy
    tmin = max(tmin, min(t0, t1))
    tmax = min(tmax, max(t0, t1))
    t0 = (lo[2] - oz) * iz
    t1 = (hi[2] - oz) * iz
    tmin = max(tmin, min(t0, t1))
    tmax = min(tmax, max(t0, t1))
    return tmax >= max(tmin, 0.0) and tmin <= t_max


@njit(cache=True)
def intersect(o, d, t_max, verts, tris, node_lo, node_hi, node_left,
              node_start, node_count):
    """Nearest hit: returns (t, tri_index, bary_u, bary_v) or t = inf."""
    inv0 = 1.0 / d[0] if abs(d[0]) > 1e-300 else 1e300
    inv1 = 1.0 / d[1] if abs(d[1]) > 1e-300 else 1e300
    inv2 = 1.0 / d[2] if abs(d[2]) > 1e-300 else 1e300
    best_t = t_max
    best_i = -1
    best_u = 0.0
    best_v = 0.0
    stack = np.empty(64, dtype=np.int32)
    sp = 0
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        ni = stack[sp]
        if not _ray_aabb(o[0], o[1], o[2], inv0, inv1, inv2,
                         node_lo[ni], node_hi[ni], best_t):
            continue
        if node_left[ni] < 0:
            s = node_start[ni]
            for k in range(s, s + node_count[ni]):
                i0 = tris[k, 0]
                i1 = tris[k, 1]
                i2 = tris[k, 2]
                ax = verts[i0, 0]
                ay = verts[i0, 1]
                az = verts[i0, 2]
                e1x = verts[i1, 0] - ax
                e1y = verts[i1, 1] - ay
                e1z = verts[i1, 2] - az
                e2x = verts[i2, 0] - ax
                e2y = verts[i2, 1] - ay
                e2z = verts[i2, 2] - az
                px = d[1] * e2z - d[2] * e2y
                py = d[2] * e2x - d[0] * e2z
                pz = d[0] * e2y - d[1] * e2x
                det = e1x * px + e1y * py + e1z * pz
                if abs(det) < 1e-14:
                    continue
                inv = 1.0 / det
                sx = o[0] - ax
                sy = o[1] - ay
                sz = o[2] - az
                u = (sx * px + sy * py + sz * pz) * inv
                if u < -F_EPS or u > 1.0 + F_EPS:
                    continue
                qx = sy * e1z - sz * e1y
                qy = sz * e1x - sx * e1z
                qz = sx * e1y - sy * e1x
                v = (d[0] * qx + d[1] * qy + d[2] * qz) * inv
                if v < -F_EPS or u + v > 1.0 + F_EPS:
                    continue
                t = (e2x * qx + e2y * qy + e2z * qz) * inv
                if 1e-7 < t < best_t:
                    best_t = t
                    best_i = k
                    best_u = u
                    best_v = v
        else:
            stack[sp] = node_left[ni]
            sp += 1
            stack[sp] = node_start[ni]  # right child
            sp += 1
    return best_t, best_i, best_u, best_v


@njit(cache=True, inline="always")
def shading_normal(tri, u, v, tris, vnormals):
    i0 = tris[tri, 0]
    i1 = tris[tri, 1]
    i2 = tris[tri, 2]
    w = 1.0 - u - v
    nx = w * vnormals[i0, 0] + u * vnormals[i1, 0] + v * vnormals[i2, 0]
    ny = w * vnormals[i0, 1] + u * vnormals[i1, 1] + v * vnormals[i2, 1]
    nz = w * vnormals[i0, 2] + u * vnormals[i1, 2] + v * vnormals[i2, 2]
    inv = 1.0 / max(np.sqrt(nx * nx + ny * ny + nz * nz), 1e-300)
    return nx * inv, ny * inv, nz * inv


# ---------------------------------------------------------------------------
# local shading helpers (scalar mirror of optics.py)

@njit(cache=True, inline="always")
def fresnel(cos_i, eta):
    ci = min(abs(cos_i), 1.0)
    sin2_t = (1.0 - ci * ci) / (eta * eta)
    if sin2_t >= 1.0:
        return 1.0
    ct = np.sqrt(1.0 - sin2_t)
    rp = (eta * ci - ct) / (eta * ci + ct)
    rs = (ci - eta * ct) / (ci + eta * ct)
    return 0.5 * (rp * rp + rs * rs)


@njit(cache=True, inline="always")
def ggx_d(cos_h, alpha):
    if cos_h <= 0.0:
        return 0.0
    a2 = alpha * alpha
    dd = cos_h * cos_h * (a2 - 1.0) + 1.0
    return a2 / (np.pi * dd * dd)


@njit(cache=True, inline="always")
def ggx_g1(cos_v, alpha):
    if cos_v <= 0.0:
        return 0.0
    a2 = alpha * alpha
    return 2.0 * cos_v / (cos_v + np.sqrt(a2 + (1.0 - a2) * cos_v * cos_v))


@njit(cache=True, inline="always")
def eval_brdf(kind, rgb_r, rgb_g, rgb_b, alpha,
              nx, ny, nz, wix, wiy, wiz, wox, woy, woz):
    """Reflection-side BRDF; normal is flipped toward wi (two-sided)."""
    ci = nx * wix + ny * wiy + nz * wiz
    if ci < 0.0:
        nx = -nx
        ny = -ny
        nz = -nz
        ci = -ci
    co = nx * wox + ny * woy + nz * woz
    if ci <= 0.0 or co <= 0.0:
        return 0.0, 0.0, 0.0
    if kind == MAT_DIFFUSE:
        inv_pi = 1.0 / np.pi
        return rgb_r * inv_pi, rgb_g * inv_pi, rgb_b * inv_pi
    # conductor
    hx = wix + wox
    hy = wiy + woy
    hz = wiz + woz
    hn = np.sqrt(hx * hx + hy * hy + hz * hz)
    if hn < 1e-12:
        return 0.0, 0.0, 0.0
    hx /= hn
    hy /= hn
    hz /= hn
    cos_h = nx * hx + ny * hy + nz * hz
    d = ggx_d(cos_h, alpha)
    g = ggx_g1(ci, alpha) * ggx_g1(co, alpha)
    wih = abs(wix * hx + wiy * hy + wiz * hz)
    s = (1.0 - wih) ** 5
    scale = d * g / (4.0 * ci * co)
    return ((rgb_r + (1.0 - rgb_r) * s) * scale,
            (rgb_g + (1.0 - rgb_g) * s) * scale,
            (rgb_b + (1.0 - rgb_b) * s) * scale)


@njit(cache=True, inline="always")
def make_basis(nx, ny, nz):
    if abs(nz) < 0.999:
        tx = -ny
        ty = nx
        tz = 0.0
    else:
        tx = 0.0
        ty = -nz
        tz = ny
    inv = 1.0 / np.sqrt(tx * tx + ty * ty + tz * tz)
    tx *= inv
    ty *= inv
    tz *= inv
    bx = ny * tz - nz * ty
    by = nz * tx - nx * tz
    bz = nx * ty - ny * tx
    return tx, ty, tz, bx, by, bz


@njit(cache=True, inline="always")
def cosine_dir(nx, ny, nz, u1, u2):
    r = np.sqrt(u1)
    phi = 2.0 * np.pi * u2
    x = r * np.cos(phi)
    y = r * np.sin(phi)
    z = np.sqrt(max(0.0, 1.0 - u1))
    tx, ty, tz, bx, by, bz = make_basis(nx, ny, nz)
    return (x * tx + y * bx + z * nx,
            x * ty + y * by + z * ny,
            x * tz + y * bz + z * nz)


@njit(cache=True, inline="always")
def ggx_half_dir(nx, ny, nz, alpha, u1, u2):
    phi = 2.0 * np.pi * u2
    ct = np.sqrt((1.0 - u1) / (1.0 + (alpha * alpha - 1.0) * u1))
    st = np.sqrt(max(0.0, 1.0 - ct * ct))
    tx, ty, tz, bx, by, bz = make_basis(nx, ny, nz)
    cx = st * np.cos(phi)
    cy = st * np.sin(phi)
    return (cx * tx + cy * bx + ct * nx,
            cx * ty + cy * by + ct * ny,
            cx * tz + cy * bz + ct * nz)


@njit(cache=True, inline="always")
def profile_mult(angle, ang, mul, lo, hi):
    """Linear interpolation in a (sorted) angular table slice."""
    if hi <= lo:
        return 1.0
    if angle <= ang[lo]:
        return mul[lo]
    if angle >= ang[hi - 1]:
        return mul[hi - 1]
    for k in range(lo + 1, hi):
        if angle <= ang[k]:
            t = (angle - ang[k - 1]) / (ang[k] - ang[k - 1])
            return mul[k - 1] + t * (mul[k] - mul[k - 1])
    return mul[hi - 1]


# ---------------------------------------------------------------------------
# ideal-path probe

@njit(cache=True)
def probe_rays(origins, dirs, verts, vnormals, tris, tri_part,
               face_id, mat_kind, mat_eta, is_sensing, is_mirror,
               node_lo, node_hi, node_left, node_start, node_count,
               max_depth):
    """Deterministic ideal refraction/reflection until the sensing surface.

    Returns per-ray (hit, position, face, cos_incidence, shading normal).
    """
    n = origins.shape[0]
    hit = np.zeros(n, dtype=np.uint8)
    pos = np.zeros((n, 3))
    face = np.full(n, -1, dtype=np.int32)
    cosi = np.zeros(n)
    nrm = np.zeros((n, 3))
    o = np.empty(3)
    d = np.empty(3)
    for i in range(n):
        for a in range(3):
            o[a] = origins[i, a]
            d[a] = dirs[i, a]
        for _ in range(max_depth):
            t, tri, u, v = intersect(o, d, 1e30, verts, tris, node_lo,
                                     node_hi, node_left, node_start, node_count)
            if tri < 0:
                break
            part = tri_part[tri]
            hx = o[0] + t * d[0]
            hy = o[1] + t * d[1]
            hz = o[2] + t * d[2]
            nx, ny, nz = shading_normal(tri, u, v, tris, vnormals)
            if is_sensing[part]:
                hit[i] = 1
                pos[i, 0] = hx
                pos[i, 1] = hy
                pos[i, 2] = hz
                face[i] = face_id[tri]
                c = nx * d[0] + ny * d[1] + nz * d[2]
                cosi[i] = abs(c)
                nrm[i, 0] = nx
                nrm[i, 1] = ny
                nrm[i, 2] = nz
                break
            kind = mat_kind[part]
            if kind == MAT_DIELECTRIC:
                # orient normal against the ray; eta for the crossing
                c = nx * d[0] + ny * d[1] + nz * d[2]
                if c > 0.0:
                    nx = -nx
                    ny = -ny
                    nz = -nz
                    c = -c
                    eta = 1.0 / mat_eta[part]
                else:
                    eta = mat_eta[part]
                ci = -c
                inv_eta = 1.0 / eta
                sin2 = inv_eta * inv_eta * (1.0 - ci * ci)
                if sin2 >= 1.0:  # TIR: mirror instead
                    dd = 2.0 * (d[0] * nx + d[1] * ny + d[2] * nz)
                    d[0] -= dd * nx
                    d[1] -= dd * ny
                    d[2] -= dd * nz
                else:
                    ct = np.sqrt(1.0 - sin2)
                    f = inv_eta * ci - ct
                    d[0] = inv_eta * d[0] + f * nx
                    d[1] = inv_eta * d[1] + f * ny
                    d[2] = inv_eta * d[2] + f * nz
                inv = 1.0 / np.sqrt(d[0] ** 2 + d[1] ** 2 + d[2] ** 2)
                d[0] *= inv
                d[1] *= inv
                d[2] *= inv
            elif is_mirror[part]:
                dd = 2.0 * (d[0] * nx + d[1] * ny + d[2] * nz)
                d[0] -= dd * nx
                d[1] -= dd * ny
                d[2] -= dd * nz
                inv = 1.0 / np.sqrt(d[0] ** 2 + d[1] ** 2 + d[2] ** 2)
                d[0] *= inv
                d[1] *= inv
                d[2] *= inv
            else:
                break  # absorbing / non-ideal surface: ray is lost
            o[0] = hx + d[0] * RAY_BIAS
            o[1] = hy + d[1] * RAY_BIAS
            o[2] = hz + d[2] * RAY_BIAS
    return hit, pos, face, cosi, nrm

# ---------------------------------------------------------------------------
# SPPM

@njit(cache=True, inline="always")
def _ray_rect(o, d, cx, cy, cz, nx, ny, nz, eux, euy, euz, evx, evy, evz,
              t_max):
    """Hit parameter against a light rectangle (center, half-edges), or inf."""
    denom = d[0] * nx + d[1] * ny + d[2] * nz
    if abs(denom) < 1e-12:
        return 1e30
    t = ((cx - o[0]) * nx + (cy - o[1]) * ny + (cz - o[2]) * nz) / denom
    if t < 1e-7 or t > t_max:
        return 1e30
    px = o[0] + t * d[0] - cx
    py = o[1] + t * d[1] - cy
    pz = o[2] + t * d[2] - cz
    lu2 = eux * eux + euy * euy + euz * euz
    lv2 = evx * evx + evy * evy + evz * evz
    u = (px * eux + py * euy + pz * euz) / max(lu2, 1e-300)
    v = (px * evx + py * evy + pz * evz) / max(lv2, 1e-300)
    if abs(u) <= 1.0 and abs(v) <= 1.0:
        return t
    return 1e30


@njit(cache=True)
def sppm_pass(it, verts, vnormals, tris, tri_part,
              mat_kind, mat_rgb, mat_alpha, mat_eta,
              node_lo, node_hi, node_left, node_start, node_count,
              light_kind, light_pos, light_dir, light_rgb,
              light_eu, light_ev, light_area,
              prof_ang, prof_mul, prof_off, light_pick_cdf,
              cam_pos, cam_right, cam_up, cam_fwd, tan_x, tan_y,
              width, height, photons, alpha_sppm, max_depth, seed,
              r2, n_acc, tau, direct, phi_it, m_it,
              vp_pos, vp_nrm, vp_wo, vp_beta, vp_part, vp_live,
              bucket_cnt, bucket_idx):
    """One SPPM iteration: camera pass, photon pass, radius/flux update.

    All state arrays are caller-owned and mutated in place; RNG streams are
    keyed on (seed, it, counter), so a sequence of calls it = 0..k-1 is
    bit-identical to any other chunking of the same range.
    """
    npix = width * height
    nlight = light_kind.shape[0]
    table_size = bucket_cnt.shape[0] - 1
    mask = table_size - 1
    o = np.empty(3)
    d = np.empty(3)
    beta = np.empty(3)
    # ---- camera pass: one jittered ray per pixel ----
    for px in range(npix):
        vp_live[px] = 0
        iy = px // width
        ix = px - iy * width
        st = rng_init(seed, it, px, 1)
        u1, st = rng_next(st)
        u2, st = rng_next(st)
        sx = ((ix + u1) / width * 2.0 - 1.0) * tan_x
        sy = (1.0 - (iy + u2) / height * 2.0) * tan_y
        for a in range(3):
            d[a] = cam_fwd[a] + sx * cam_right[a] + sy * cam_up[a]
            o[a] = cam_pos[a]
        inv = 1.0 / np.sqrt(d[0] ** 2 + d[1] ** 2 + d[2] ** 2)
        for a in range(3):
            d[a] *= inv
            beta[a] = 1.0
        for _ in range(max_depth):
            t, tri, bu, bv = intersect(o, d, 1e30, verts, tris, node_lo,
                                       node_hi, node_left, node_start,
                                       node_count)
            # direct view of an area light before the nearest surface
            t_l = 1e30
            l_hit = -1
            for li in range(nlight):
                if light_kind[li] != LIGHT_AREA:
                    continue
                tl = _ray_rect(o, d,
                               light_pos[li, 0], light_pos[li, 1],
                               light_pos[li, 2],
                               light_dir[li, 0], light_dir[li, 1],
                               light_dir[li, 2],
                               light_eu[li, 0], light_eu[li, 1],
                               light_eu[li, 2],
                               light_ev[li, 0], light_ev[li, 1],
                               light_ev[li, 2],
                               min(t, t_l))
                if tl < t_l:
                    t_l = tl
                    l_hit = li
            if l_hit >= 0 and t_l < t:
                for a in range(3):
                    direct[px, a] += beta[a] * light_rgb[l_hit, a]
                break
            if tri < 0:
                break
            part = tri_part[tri]
            kind = mat_kind[part]
            hx = o[0] + t * d[0]
            hy = o[1] + t * d[1]
            hz = o[2] + t * d[2]
            nx, ny, nz = shading_normal(tri, bu, bv, tris, vnormals)
            if kind == MAT_DIELECTRIC:
                c = nx * d[0] + ny * d[1] + nz * d[2]
                if c > 0.0:
                    nx = -nx
                    ny = -ny
                    nz = -nz
                    c = -c
                    eta = 1.0 / mat_eta[part]
                else:
                    eta = mat_eta[part]
                ci = -c
                fr = fresnel(ci, eta)
                u1, st = rng_next(st)
                if u1 < fr:
                    dd = 2.0 * (d[0] * nx + d[1] * ny + d[2] * nz)
                    d[0] -= dd * nx
                    d[1] -= dd * ny
                    d[2] -= dd * nz
                else:
                    inv_eta = 1.0 / eta
                    sin2 = inv_eta * inv_eta * (1.0 - ci * ci)
                    ct = np.sqrt(max(0.0, 1.0 - sin2))
                    f = inv_eta * ci - ct
                    d[0] = inv_eta * d[0] + f * nx
                    d[1] = inv_eta * d[1] + f * ny
                    d[2] = inv_eta * d[2] + f * nz
                inv = 1.0 / np.sqrt(d[0] ** 2 + d[1] ** 2 + d[2] ** 2)
                d[0] *= inv
                d[1] *= inv
                d[2] *= inv
                o[0] = hx + d[0] * RAY_BIAS
                o[1] = hy + d[1] * RAY_BIAS
                o[2] = hz + d[2] * RAY_BIAS
                continue
            # diffuse or conductor: store the visible point
            vp_live[px] = 1
            vp_pos[px, 0] = hx
            vp_pos[px, 1] = hy
            vp_pos[px, 2] = hz
            vp_nrm[px, 0] = nx
            vp_nrm[px, 1] = ny
            vp_nrm[px, 2] = nz
            vp_wo[px, 0] = -d[0]
            vp_wo[px, 1] = -d[1]
            vp_wo[px, 2] = -d[2]
            for a in range(3):
                vp_beta[px, a] = beta[a]
            vp_part[px] = part
            break

    # ---- hash grid over live visible points ----
    cell = 1e-30
    for px in range(npix):
        if vp_live[px]:
            r = np.sqrt(r2[px])
            if r > cell:
                cell = r
    inv_cell = 1.0 / cell
    gx0 = 1e30
    gy0 = 1e30
    gz0 = 1e30
    for px in range(npix):
        if vp_live[px]:
            gx0 = min(gx0, vp_pos[px, 0])
            gy0 = min(gy0, vp_pos[px, 1])
            gz0 = min(gz0, vp_pos[px, 2])
    for b in range(table_size + 1):
        bucket_cnt[b] = 0
    for px in range(npix):
        if vp_live[px]:
            cx = np.int64((vp_pos[px, 0] - gx0) * inv_cell)
            cy = np.int64((vp_pos[px, 1] - gy0) * inv_cell)
            cz = np.int64((vp_pos[px, 2] - gz0) * inv_cell)
            h = ((cx * 73856093) ^ (cy * 19349663) ^ (cz * 83492791)) & mask
            bucket_cnt[h + 1] += 1
    for b in range(1, table_size + 1):
        bucket_cnt[b] += bucket_cnt[b - 1]
    fill = np.zeros(table_size, dtype=np.int64)
    for px in range(npix):
        if vp_live[px]:
            cx = np.int64((vp_pos[px, 0] - gx0) * inv_cell)
            cy = np.int64((vp_pos[px, 1] - gy0) * inv_cell)
            cz = np.int64((vp_pos[px, 2] - gz0) * inv_cell)
            h = ((cx * 73856093) ^ (cy * 19349663) ^ (cz * 83492791)) & mask
            bucket_idx[bucket_cnt[h] + fill[h]] = px
            fill[h] += 1

    for px in range(npix):
        m_it[px] = 0
        for a in range(3):
            phi_it[px, a] = 0.0

    # ---- photon pass ----
    for j in range(photons):
        st = rng_init(seed, it, j, 2)
        u1, st = rng_next(st)
        li = 0
        while li < nlight - 1 and u1 > light_pick_cdf[li]:
            li += 1
        pick = light_pick_cdf[li]
        if li > 0:
            pick -= light_pick_cdf[li - 1]
        if pick <= 0.0:
            continue
        u1, st = rng_next(st)
        u2, st = rng_next(st)
        if light_kind[li] == LIGHT_POINT:
            z = 1.0 - 2.0 * u1
            r = np.sqrt(max(0.0, 1.0 - z * z))
            ph = 2.0 * np.pi * u2
            d[0] = r * np.cos(ph)
            d[1] = r * np.sin(ph)
            d[2] = z
            for a in range(3):
                o[a] = light_pos[li, a]
            co = (d[0] * light_dir[li, 0] + d[1] * light_dir[li, 1]
                  + d[2] * light_dir[li, 2])
            ang = np.arccos(min(max(co, -1.0), 1.0))
            mult = profile_mult(ang, prof_ang, prof_mul,
                                prof_off[li], prof_off[li + 1])
            scale = 4.0 * np.pi * mult / (photons * pick)
            for a in range(3):
                beta[a] = light_rgb[li, a] * scale
        else:
            su = 2.0 * u1 - 1.0
            sv = 2.0 * u2 - 1.0
            for a in range(3):
                o[a] = (light_pos[li, a] + su * light_eu[li, a]
                        + sv * light_ev[li, a])
            u1, st = rng_next(st)
            u2, st = rng_next(st)
            d[0], d[1], d[2] = cosine_dir(light_dir[li, 0],
                                          light_dir[li, 1],
                                          light_dir[li, 2], u1, u2)
            scale = np.pi * light_area[li] / (photons * pick)
            for a in range(3):
                beta[a] = light_rgb[li, a] * scale
        o[0] += d[0] * RAY_BIAS
        o[1] += d[1] * RAY_BIAS
        o[2] += d[2] * RAY_BIAS
        for depth in range(max_depth):
            t, tri, bu, bv = intersect(o, d, 1e30, verts, tris, node_lo,
                                       node_hi, node_left, node_start,
                                       node_count)
            if tri < 0:
                break
            part = tri_part[tri]
            kind = mat_kind[part]
            hx = o[0] + t * d[0]
            hy = o[1] + t * d[1]
            hz = o[2] + t * d[2]
            nx, ny, nz = shading_normal(tri, bu, bv, tris, vnormals)
            if kind == MAT_DIELECTRIC:
                c = nx * d[0] + ny * d[1] + nz * d[2]
                if c > 0.0:
                    nx = -nx
                    ny = -ny
                    nz = -nz
                    c = -c
                    eta = 1.0 / mat_eta[part]
                else:
                    eta = mat_eta[part]
                ci = -c
                fr = fresnel(ci, eta)
                u1, st = rng_next(st)
                if u1 < fr:
                    dd = 2.0 * (d[0] * nx + d[1] * ny + d[2] * nz)
                    d[0] -= dd * nx
                    d[1] -= dd * ny
                    d[2] -= dd * nz
                else:
                    inv_eta = 1.0 / eta
                    sin2 = inv_eta * inv_eta * (1.0 - ci * ci)
                    ct = np.sqrt(max(0.0, 1.0 - sin2))
                    f = inv_eta * ci - ct
                    d[0] = inv_eta * d[0] + f * nx
                    d[1] = inv_eta * d[1] + f * ny
                    d[2] = inv_eta * d[2] + f * nz
                inv = 1.0 / np.sqrt(d[0] ** 2 + d[1] ** 2 + d[2] ** 2)
                d[0] *= inv
                d[1] *= inv
                d[2] *= inv
                o[0] = hx + d[0] * RAY_BIAS
                o[1] = hy + d[1] * RAY_BIAS
                o[2] = hz + d[2] * RAY_BIAS
                continue
            # deposit on nearby visible points
            cx = np.int64((hx - gx0) * inv_cell)
            cy = np.int64((hy - gy0) * inv_cell)
            cz = np.int64((hz - gz0) * inv_cell)
            for dz in range(-1, 2):
                for dy in range(-1, 2):
                    for dx in range(-1, 2):
                        h = (((cx + dx) * 73856093)
                             ^ ((cy + dy) * 19349663)
                             ^ ((cz + dz) * 83492791)) & mask
                        for bi in range(bucket_cnt[h], bucket_cnt[h + 1]):
                            px = bucket_idx[bi]
                            ddx = vp_pos[px, 0] - hx
                            ddy = vp_pos[px, 1] - hy
                            ddz = vp_pos[px, 2] - hz
                            if (ddx * ddx + ddy * ddy + ddz * ddz
                                    > r2[px]):
                                continue
                            vpart = vp_part[px]
                            fr_, fg_, fb_ = eval_brdf(
                                mat_kind[vpart],
                                mat_rgb[vpart, 0], mat_rgb[vpart, 1],
                                mat_rgb[vpart, 2], mat_alpha[vpart],
                                vp_nrm[px, 0], vp_nrm[px, 1],
                                vp_nrm[px, 2],
                                -d[0], -d[1], -d[2],
                                vp_wo[px, 0], vp_wo[px, 1],
                                vp_wo[px, 2])
                            if fr_ == 0.0 and fg_ == 0.0 and fb_ == 0.0:
                                continue
                            phi_it[px, 0] += vp_beta[px, 0] * fr_ * beta[0]
                            phi_it[px, 1] += vp_beta[px, 1] * fg_ * beta[1]
                            phi_it[px, 2] += vp_beta[px, 2] * fb_ * beta[2]
                            m_it[px] += 1
            # scatter onward
            ci = nx * d[0] + ny * d[1] + nz * d[2]
            if ci > 0.0:
                nx = -nx
                ny = -ny
                nz = -nz
            wix = -d[0]
            wiy = -d[1]
            wiz = -d[2]
            u1, st = rng_next(st)
            u2, st = rng_next(st)
            if kind == MAT_DIFFUSE:
                ndx, ndy, ndz = cosine_dir(nx, ny, nz, u1, u2)
                wr = mat_rgb[part, 0]
                wg = mat_rgb[part, 1]
                wb = mat_rgb[part, 2]
            else:
                hxn, hyn, hzn = ggx_half_dir(nx, ny, nz,
                                             mat_alpha[part], u1, u2)
                wh = wix * hxn + wiy * hyn + wiz * hzn
                if wh <= 0.0:
                    break
                ndx = 2.0 * wh * hxn - wix
                ndy = 2.0 * wh * hyn - wiy
                ndz = 2.0 * wh * hzn - wiz
                if ndx * nx + ndy * ny + ndz * nz <= 0.0:
                    break
                co = ndx * nx + ndy * ny + ndz * nz
                g = ggx_g1(wix * nx + wiy * ny + wiz * nz,
                           mat_alpha[part]) * ggx_g1(co, mat_alpha[part])
                s = (1.0 - wh) ** 5
                cosh = nx * hxn + ny * hyn + nz * hzn
                wgt = g * wh / max(cosh * (wix * nx + wiy * ny
                                           + wiz * nz), 1e-12)
                wr = (mat_rgb[part, 0]
                      + (1.0 - mat_rgb[part, 0]) * s) * wgt
                wg = (mat_rgb[part, 1]
                      + (1.0 - mat_rgb[part, 1]) * s) * wgt
                wb = (mat_rgb[part, 2]
                      + (1.0 - mat_rgb[part, 2]) * s) * wgt
            beta[0] *= wr
            beta[1] *= wg
            beta[2] *= wb
            p_cont = max(beta[0], max(beta[1], beta[2]))
            if depth >= 3:
                p_cont = min(max(p_cont, 0.05), 0.95)
                u1, st = rng_next(st)
                if u1 > p_cont:
                    break
                beta[0] /= p_cont
                beta[1] /= p_cont
                beta[2] /= p_cont
            elif p_cont <= 0.0:
                break
            d[0] = ndx
            d[1] = ndy
            d[2] = ndz
            o[0] = hx + d[0] * RAY_BIAS
            o[1] = hy + d[1] * RAY_BIAS
            o[2] = hz + d[2] * RAY_BIAS

    # ---- radius / flux update ----
    for px in range(npix):
        m = m_it[px]
        if m > 0:
            n_new = n_acc[px] + alpha_sppm * m
            ratio = n_new / (n_acc[px] + m)
            r2[px] *= ratio
            for a in range(3):
                tau[px, a] = (tau[px, a] + phi_it[px, a]) * ratio
            n_acc[px] = n_new
