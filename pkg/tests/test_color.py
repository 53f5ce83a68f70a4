import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from edoks.color import (delta_e, delta_e_map, grayscale, ok_term, oklab_to_rgb,
                         rgb_to_oklab)
from edoks.errors import DimensionMismatchError, InvalidInputError

from oracles import delta_e_scalar, oklab_scalar

rgb_images = arrays(np.uint8, st.tuples(st.integers(1, 6), st.integers(1, 6), st.just(3)))


def px(r, g, b):
    return np.array([[[r, g, b]]], dtype=np.uint8)


def test_white_maps_to_unit_lightness():
    lab = rgb_to_oklab(px(255, 255, 255))[0, 0]
    np.testing.assert_allclose(lab, [1.0, 0.0, 0.0], atol=1e-6)


def test_black_is_origin():
    np.testing.assert_array_equal(rgb_to_oklab(px(0, 0, 0))[0, 0], [0.0, 0.0, 0.0])


def test_matches_scalar_transcription():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, (5, 7, 3), dtype=np.uint8)
    lab = rgb_to_oklab(img)
    for i in range(5):
        for j in range(7):
            np.testing.assert_allclose(lab[i, j], oklab_scalar(*img[i, j].tolist()), atol=1e-12)


def test_shape_preserved_and_float64():
    img = np.zeros((3, 4, 3), dtype=np.uint8)
    lab = rgb_to_oklab(img)
    assert lab.shape == (3, 4, 3)
    assert lab.dtype == np.float64


@pytest.mark.parametrize("shape", [(0, 4, 3), (4, 0, 3), (4, 4), (4, 4, 4)])
def test_rejects_bad_images(shape):
    with pytest.raises(InvalidInputError):
        rgb_to_oklab(np.zeros(shape, dtype=np.uint8))


def test_delta_e_examples():
    assert delta_e((0.2, 0.1, -0.05), (0.2, 0.1, -0.05)) == 0.0
    assert delta_e((1, 0, 0), (0, 0, 0)) == 1.0
    assert delta_e((0.5, 0.1, -0.1), (0.5, -0.1, 0.1)) == pytest.approx(math.sqrt(0.08), abs=1e-15)


def test_delta_e_map_hand_pair():
    # Expected values come from the scalar Oklab transcription in oracles.py.
    x = np.array([[[200, 30, 40], [10, 120, 250]]], dtype=np.uint8)
    y = np.array([[[180, 60, 40], [10, 120, 200]]], dtype=np.uint8)
    m = delta_e_map(rgb_to_oklab(x), rgb_to_oklab(y))
    np.testing.assert_allclose(m, [[0.04828079644444626, 0.07668728121578958]], rtol=1e-12)


def test_delta_e_map_locality():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 256, (6, 6, 3), dtype=np.uint8)
    y = x.copy()
    y[2, 4] = 255 - y[2, 4]
    m = delta_e_map(rgb_to_oklab(x), rgb_to_oklab(y))
    assert m[2, 4] > 0
    m[2, 4] = 0
    assert not m.any()


def test_delta_e_map_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        delta_e_map(np.zeros((2, 2, 3)), np.zeros((2, 3, 3)))


def test_ok_term_examples():
    black = np.zeros((4, 4, 3), dtype=np.uint8)
    white = np.full((4, 4, 3), 255, dtype=np.uint8)
    assert ok_term(rgb_to_oklab(black), rgb_to_oklab(black)) == 0.0
    assert ok_term(rgb_to_oklab(black), rgb_to_oklab(white)) == pytest.approx(1.0, abs=1e-6)


def test_ok_term_random_4x4_against_scalar_oracle():
    x = np.array([[(165, 77, 202), (24, 37, 48), (187, 29, 109), (19, 44, 222)],
                  [(214, 35, 123), (46, 217, 30), (63, 114, 31), (203, 25, 113)],
                  [(23, 68, 148), (214, 73, 60), (157, 92, 52), (96, 190, 49)],
                  [(32, 30, 105), (254, 218, 160), (238, 232, 185), (153, 127, 92)]], dtype=np.uint8)
    y = np.array([[(124, 41, 153), (253, 175, 229), (147, 37, 60), (214, 84, 175)],
                  [(77, 250, 215), (20, 39, 160), (174, 179, 254), (233, 35, 47)],
                  [(138, 242, 33), (31, 158, 228), (145, 197, 177), (11, 236, 181)],
                  [(86, 59, 252), (30, 111, 147), (66, 126, 203), (200, 254, 41)]], dtype=np.uint8)
    expected = 0.3428682015549918  # mean of 16 scalar delta-E values, see oracles.py
    assert ok_term(rgb_to_oklab(x), rgb_to_oklab(y)) == pytest.approx(expected, rel=1e-12)
    by_hand = np.mean([delta_e_scalar(oklab_scalar(*x[i, j].tolist()), oklab_scalar(*y[i, j].tolist()))
                       for i in range(4) for j in range(4)])
    assert by_hand == pytest.approx(expected, rel=1e-14)


def test_ok_term_empty_or_mismatched():
    with pytest.raises(InvalidInputError):
        ok_term(np.zeros((0, 0, 3)), np.zeros((0, 0, 3)))
    with pytest.raises(DimensionMismatchError):
        ok_term(np.zeros((2, 2, 3)), np.zeros((3, 2, 3)))


@settings(max_examples=60, deadline=None)
@given(rgb_images, st.data())
def test_ok_term_properties(x, data):
    y = data.draw(arrays(np.uint8, x.shape))
    lx, ly = rgb_to_oklab(x), rgb_to_oklab(y)
    v = ok_term(lx, ly)
    assert ok_term(lx, lx) == 0.0
    assert v == ok_term(ly, lx)
    m = delta_e_map(lx, ly)
    assert 0.0 <= v <= m.max() + 1e-15
    assert m.max() <= 1.05


@settings(max_examples=60, deadline=None)
@given(rgb_images)
def test_pixel_envelope(x):
    lab = rgb_to_oklab(x)
    assert np.all((lab[..., 0] >= -1e-9) & (lab[..., 0] <= 1 + 1e-9))
    assert np.all((lab[..., 1] >= -0.24) & (lab[..., 1] <= 0.28))
    assert np.all((lab[..., 2] >= -0.32) & (lab[..., 2] <= 0.20))


def test_round_trip_sampled_grid():
    levels = np.arange(0, 256, 11, dtype=np.uint8)  # 24 levels -> 13824 colors
    r, g, b = np.meshgrid(levels, levels, levels, indexing="ij")
    img = np.stack([r, g, b], axis=-1).reshape(-1, 1, 3)
    back = oklab_to_rgb(rgb_to_oklab(img))
    assert np.abs(back.astype(int) - img.astype(int)).max() <= 1


def test_grayscale_uses_linear_light():
    g = grayscale(px(255, 255, 255))
    assert g[0, 0] == pytest.approx(1.0)
    mid = grayscale(px(128, 128, 128))[0, 0]
    assert mid == pytest.approx(((128 / 255 + 0.055) / 1.055) ** 2.4, rel=1e-9)
