"""Image container, tonemapping, and file-format tests."""

import numpy as np
import pytest

from tacstudio.render import NormalMap, TactileImage, read_pfm, tonemap, \
    write_image, write_pfm, write_png


def checker_hdr(h=8, w=10):
    img = np.zeros((h, w, 3))
    img[::2, ::2] = [0.25, 0.5, 0.75]
    img[1::2, 1::2] = [1.5, 0.1, 0.9]
    return img


def test_tactile_image_validation():
    with pytest.raises(ValueError):
        TactileImage(hdr=np.zeros((4, 4)))
    with pytest.raises(ValueError):
        TactileImage(hdr=-np.ones((4, 4, 3)))
    bad = np.zeros((4, 4, 3))
    bad[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        TactileImage(hdr=bad)


def test_tonemap_gamma_and_clamp():
    img = TactileImage(hdr=np.full((2, 2, 3), 0.25))
    out = tonemap(img)
    np.testing.assert_allclose(out.ldr, 0.25 ** (1 / 2.2))
    hot = TactileImage(hdr=np.full((2, 2, 3), 4.0))
    assert np.all(tonemap(hot).ldr == 1.0)


def test_tonemap_exposure_scale():
    img = TactileImage(hdr=np.full((2, 2, 3), 0.125))
    out = tonemap(img, exposure_ev=1.0)
    np.testing.assert_allclose(out.ldr, 0.25 ** (1 / 2.2))


def test_tonemap_saturation_blooms_neighbours():
    """One overexposed pixel brightens its neighbourhood in every channel,
    including channels that were not themselves clipped."""
    hdr = np.full((9, 9, 3), 0.1)
    hdr[4, 4, 0] = 3.0  # red channel only
    base = tonemap(TactileImage(hdr=hdr), saturation=False)
    bloom = tonemap(TactileImage(hdr=hdr), saturation=True)
    assert np.all(bloom.ldr >= base.ldr - 1e-12)
    assert bloom.ldr[4, 3, 1] > base.ldr[4, 3, 1]  # green bled sideways
    assert bloom.ldr[4, 4, 2] > base.ldr[4, 4, 2]
    # far corner is essentially untouched (sigma = 1.5 px)
    assert bloom.ldr[0, 0, 1] - base.ldr[0, 0, 1] < 1e-3


def test_pfm_round_trip_exact(tmp_path):
    img = TactileImage(hdr=checker_hdr().astype(np.float32))
    path = tmp_path / "img.pfm"
    write_pfm(img, path)
    back = read_pfm(path)
    assert np.array_equal(back.hdr.astype(np.float32),
                          img.hdr.astype(np.float32))


def test_png_rounding(tmp_path):
    from PIL import Image

    ldr = np.zeros((1, 3, 3))
    ldr[0, 0] = 0.5
    ldr[0, 1] = 1.0
    img = TactileImage(hdr=np.zeros((1, 3, 3)), ldr=ldr)
    path = tmp_path / "img.png"
    write_png(img, path)
    px = np.asarray(Image.open(path))
    assert tuple(px[0, 0]) == (128, 128, 128)
    assert tuple(px[0, 1]) == (255, 255, 255)
    assert tuple(px[0, 2]) == (0, 0, 0)


def test_write_image_dispatch(tmp_path):
    img = tonemap(TactileImage(hdr=checker_hdr()))
    write_image(img, tmp_path / "a.pfm")
    write_image(img, tmp_path / "a.png")
    assert (tmp_path / "a.pfm").exists() and (tmp_path / "a.png").exists()
    with pytest.raises(ValueError):
        write_image(img, tmp_path / "a.xyz")


def test_normal_map_angles():
    normals = np.zeros((1, 2, 3))
    normals[0, 0] = [0.0, 0.0, 1.0]
    s = np.sin(np.radians(30.0))
    normals[0, 1] = [s, 0.0, np.cos(np.radians(30.0))]
    nm = NormalMap(normals=normals, valid=np.ones((1, 2), dtype=bool))
    np.testing.assert_allclose(nm.theta()[0], [0.0, np.radians(30.0)],
                               atol=1e-12)
    np.testing.assert_allclose(nm.phi()[0, 1], 0.0, atol=1e-12)
