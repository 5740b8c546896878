import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from cliprm import kernels
from cliprm.kernels import numpy_impl as npk

nbk = kernels.numba_impl
needs_numba = pytest.mark.skipif(nbk is None, reason="numba path disabled")


def blank(h=40, w=60, value=255.0):
    return np.full((h, w, 3), value, dtype=np.float32)


def test_backend_flag_matches_import():
    assert kernels.BACKEND in ("numba", "numpy")
    assert (kernels.BACKEND == "numba") == (nbk is not None)
    assert len(kernels.STAT_NAMES) == kernels.N_STATS == 12


@needs_numba
@pytest.mark.parametrize("ss", [1, 3])
def test_polygon_backends_agree(ss):
    xs = np.array([5.2, 40.7, 33.1, 8.0])
    ys = np.array([3.3, 6.1, 30.9, 25.5])
    col = np.array([200.0, 10.0, 30.0], dtype=np.float32)
    a, b = blank(), blank()
    npk.fill_polygon(a, xs, ys, col, ss)
    nbk.fill_polygon(b, xs, ys, col, ss)
    np.testing.assert_allclose(a, b, atol=1e-3)
    assert (a < 255).any()


@needs_numba
def test_disc_and_curve_backends_agree():
    col = np.array([20.0, 200.0, 90.0], dtype=np.float32)
    a, b = blank(), blank()
    npk.fill_disc(a, 20.3, 17.8, 9.4, col, 4)
    nbk.fill_disc(b, 20.3, 17.8, 9.4, col, 4)
    np.testing.assert_allclose(a, b, atol=1e-3)

    tex = np.random.default_rng(0).uniform(0, 255, (7, 5, 3)).astype(np.float32)
    curve = 20 + 8 * np.sin(np.linspace(0, 6, 60 * 2))
    a, b = blank(), blank()
    npk.fill_under_curve(a, curve, tex, 2)
    nbk.fill_under_curve(b, curve, tex, 2)
    np.testing.assert_allclose(a, b, atol=1e-3)


@needs_numba
def test_sprite_backends_agree():
    rng = np.random.default_rng(3)
    sprite = rng.uniform(0, 255, (9, 14, 4)).astype(np.float32)
    a, b = blank(), blank()
    npk.blit_sprite(a, sprite, 30.5, 20.2, 0.4, 1.7, 3)
    nbk.blit_sprite(b, sprite, 30.5, 20.2, 0.4, 1.7, 3)
    np.testing.assert_allclose(a, b, atol=1e-2)


def test_polygon_fully_covers_interior_pixels():
    c = blank(10, 10)
    npk.fill_polygon(c, np.array([0.0, 10, 10, 0]), np.array([0.0, 0, 10, 10]), np.zeros(3, np.float32), 2)
    assert np.all(c == 0)


def test_offscreen_shapes_are_noops():
    c = blank(10, 10)
    kernels.fill_polygon(c, np.array([-20.0, -10, -10]), np.array([0.0, 0, 5]), np.zeros(3, np.float32), 2)
    kernels.fill_disc(c, 100.0, 100.0, 3.0, np.zeros(3, np.float32), 2)
    assert np.all(c == 255)


@settings(max_examples=30, deadline=None)
@given(arrays(np.uint8, (3, 4, 5, 3)))
def test_image_stats_match_oracle(frames):
    got = npk.image_stats(frames)
    for i in range(frames.shape[0]):
        np.testing.assert_allclose(got[i], oracles.pixel_stats(frames[i].tolist()), atol=1e-9)
    if nbk is not None:
        np.testing.assert_allclose(nbk.image_stats(frames), got, atol=1e-9)


def test_image_stats_pure_red_by_hand():
    # 2x2 red: warm weight 1 everywhere, centroid (0, 0.5),
    # vyy = 1/16, vxx = 1/4 -> elongation (1/16 - 1/4) / (5/16) = -3/5
    frame = np.zeros((1, 2, 2, 3), np.uint8)
    frame[..., 0] = 255
    expected = [1, 1, 0, 0, 1, 0.5, 0, -0.6, 0, 0, 0, 0]
    np.testing.assert_allclose(kernels.image_stats(frame)[0], expected, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.integers(1, 12), st.integers(1, 12))
def test_resize_backends_agree(h, w, oh, ow):
    img = np.random.default_rng(h * 100 + w).uniform(0, 255, (h, w, 3)).astype(np.float32)
    out = npk.resize_bilinear(img, oh, ow)
    assert out.shape == (oh, ow, 3)
    assert out.min() >= img.min() - 1e-3 and out.max() <= img.max() + 1e-3
    if nbk is not None:
        np.testing.assert_allclose(nbk.resize_bilinear(img, oh, ow), out, atol=1e-3)


def test_resize_identity():
    img = np.random.default_rng(0).uniform(0, 255, (6, 7, 3)).astype(np.float32)
    np.testing.assert_array_equal(kernels.resize_bilinear(img, 6, 7), img)


@pytest.mark.parametrize("alpha", [0.0, 0.3, 1.0])
def test_regularized_rewards_backends_agree(alpha, rng):
    from conftest import random_units

    s = random_units(rng, 50, 8)
    g, b = random_units(rng, 2, 8)
    d = (g - b) / np.linalg.norm(g - b)
    ref = npk.regularized_rewards(s, g, b, d, alpha)
    for i in range(5):
        assert ref[i] == pytest.approx(oracles.regularized(s[i].tolist(), b.tolist(), g.tolist(), alpha), abs=1e-12)
    if nbk is not None:
        np.testing.assert_allclose(nbk.regularized_rewards(s, g, b, d, alpha), ref, atol=1e-12)
