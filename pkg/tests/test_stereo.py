"""Stereo matchers: shift recovery, degenerate cases, bias robustness,
pyramid/block equivalence, disparity-to-depth."""

import numpy as np
import pytest

from helpers import flat_plane_scene
from icefield._kernels import kernels
from icefield.render import RenderSettings, render_stereo, srgb_encode
from icefield.stereo import (
    BlockMatchParams,
    DisparityMap,
    PyramidParams,
    block_match,
    disparity_to_depth,
    log_filter,
    pyramid_match,
    quantize_gray,
    to_grayscale,
)

H, W = 72, 200


def shift_pair(s, rng, lo=0, hi=256, h=H, w=W):
    """right(x) = left(x + s): true disparity s everywhere."""
    base = rng.integers(lo, hi, size=(h, w + s)).astype(np.float64) / 255.0
    return base[:, :w], base[:, s : w + s]


def interior_mask(s, window, h=H, w=W):
    half = window // 2
    m = np.zeros((h, w), dtype=bool)
    m[half : h - half, max(half, s + half) : w - half] = True
    return m


FASTP = BlockMatchParams(num_disparities=96, window=11, subpixel=False)


def test_paper_default_parameters():
    p = BlockMatchParams()
    assert p.num_disparities == 96
    assert p.window == 49
    q = PyramidParams()
    assert q.levels == 3 and q.log_kernel_sigma == 1.0


def test_params_validation():
    with pytest.raises(ValueError):
        BlockMatchParams(window=10)
    with pytest.raises(ValueError):
        BlockMatchParams(window=3)
    with pytest.raises(ValueError):
        BlockMatchParams(num_disparities=0)
    with pytest.raises(ValueError):
        PyramidParams(levels=0)


def test_pure_shift_recovers_exactly():
    rng = np.random.default_rng(0)
    left, right = shift_pair(7, rng)
    dm = block_match(left, right, FASTP)
    assert dm.validity.sum() > 0.8 * interior_mask(7, 11).sum()
    assert np.all(dm.values[dm.validity] == 7.0)


def test_constant_image_all_invalid():
    img = np.full((H, W), 0.5)
    dm = block_match(img, img, FASTP)
    assert not dm.validity.any()
    assert np.all(dm.values == 0.0)


def test_mismatched_sizes_rejected():
    with pytest.raises(ValueError):
        block_match(np.zeros((10, 20)), np.zeros((10, 21)), FASTP)
    with pytest.raises(ValueError):
        pyramid_match(np.zeros((10, 20)), np.zeros((12, 20)))


@pytest.mark.parametrize("s", [1, 7, 31, 95])
def test_shift_recovery_rates(s):
    rng = np.random.default_rng(s)
    left, right = shift_pair(s, rng)
    dm = block_match(left, right, FASTP)
    assert dm.validity.any()
    exact = np.count_nonzero(dm.values[dm.validity] == float(s))
    assert exact / dm.validity.sum() >= 0.99


def test_monotone_cost_at_true_shift():
    rng = np.random.default_rng(2)
    s = 9
    left, right = shift_pair(s, rng)
    vol = kernels.sad_cost_volume(quantize_gray(left), quantize_gray(right),
                                  0, 32, 11)
    inter = interior_mask(31, 11)
    true_cost = vol[s][inter]
    assert np.all(true_cost == 0)
    for d in range(32):
        assert np.all(true_cost <= vol[d][inter])


def test_lr_consistency_mask_subset():
    rng = np.random.default_rng(3)
    left, right = shift_pair(5, rng)
    right = np.clip(right + rng.normal(0, 0.03, right.shape), 0, 1)
    strict = block_match(left, right, BlockMatchParams(
        num_disparities=32, window=11, lr_consistency_px=0, subpixel=False))
    loose = block_match(left, right, BlockMatchParams(
        num_disparities=32, window=11, lr_consistency_px=1, subpixel=False))
    assert np.all(loose.validity[strict.validity])  # strict subset of loose


def test_subpixel_stays_in_range():
    rng = np.random.default_rng(4)
    left, right = shift_pair(13, rng)
    right = np.clip(right + rng.normal(0, 0.02, right.shape), 0, 1)
    p = BlockMatchParams(num_disparities=32, window=11, subpixel=True)
    dm = block_match(left, right, p)
    v = dm.values[dm.validity]
    assert np.all(v >= p.min_disparity)
    assert np.all(v < p.min_disparity + p.num_disparities)
    assert np.median(np.abs(v - 13.0)) <= 0.5


def test_pyramid_levels1_equals_block_on_log():
    rng = np.random.default_rng(5)
    left, right = shift_pair(6, rng)
    p = BlockMatchParams(num_disparities=32, window=11, subpixel=False)
    pm = pyramid_match(left, right, PyramidParams(levels=1, base=p))
    Lf = log_filter(quantize_gray(left), 1.0)
    Rf = log_filter(quantize_gray(right), 1.0)
    from icefield.stereo import block_match_int

    bm = block_match_int(Lf, Rf, p)
    assert np.array_equal(pm.validity, bm.validity)
    assert np.array_equal(pm.values, bm.values)


def test_pyramid_recovers_shift():
    rng = np.random.default_rng(6)
    left, right = shift_pair(21, rng)
    p = PyramidParams(levels=3, base=BlockMatchParams(
        num_disparities=64, window=11, subpixel=False))
    dm = pyramid_match(left, right, p)
    assert dm.validity.sum() > 0.5 * interior_mask(21, 11).sum()
    exact = np.count_nonzero(dm.values[dm.validity] == 21.0)
    assert exact / dm.validity.sum() >= 0.99


def test_bias_robustness_log_vs_plain():
    # +20% additive bias on a low-contrast texture: LoG matching survives,
    # plain SAD degrades (cost ties swamp the uniqueness test)
    rng = np.random.default_rng(7)
    s = 11
    left, right = shift_pair(s, rng, lo=77, hi=154)
    right_biased = right + 0.2
    base = BlockMatchParams(num_disparities=32, window=11, subpixel=False)
    inter = interior_mask(s, 11)

    plain_clean = block_match(left, right, base)
    rate_clean = np.count_nonzero(
        plain_clean.values[plain_clean.validity & inter] == s) / inter.sum()
    assert rate_clean >= 0.99

    plain = block_match(left, right_biased, base)
    rate_plain = np.count_nonzero(
        plain.values[plain.validity & inter] == s) / inter.sum()

    pyr = pyramid_match(left, right_biased, PyramidParams(levels=2, base=base))
    rate_pyr = np.count_nonzero(
        pyr.values[pyr.validity & inter] == s) / inter.sum()

    assert rate_pyr >= 0.99
    assert rate_plain < rate_pyr


def test_log_filter_removes_constant_bias_exactly():
    rng = np.random.default_rng(8)
    img = rng.integers(0, 200, size=(40, 50)).astype(np.int64)
    assert np.array_equal(log_filter(img + 51, 1.0), log_filter(img, 1.0))
    assert np.array_equal(log_filter(np.full((20, 20), 7, np.int64), 1.0),
                          np.zeros((20, 20), np.int64))


def test_to_grayscale_anchors():
    assert to_grayscale(np.array([1.0, 1.0, 1.0])) == pytest.approx(1.0)
    assert to_grayscale(np.array([0.0, 1.0, 0.0])) == pytest.approx(0.7152)
    assert to_grayscale(np.array([0.5, 0.5, 0.5])) == pytest.approx(0.5)


def test_disparity_to_depth_values():
    vals = np.array([[341.3333333 * 0.25 / 5.0, 1.0, 3.0]], dtype=np.float32)
    valid = np.array([[True, True, False]])
    dm = DisparityMap(values=vals, validity=valid)
    z = disparity_to_depth(dm, focal_px=341.3333333, baseline=0.25)
    assert z[0, 0] == pytest.approx(5.0, abs=1e-5)
    assert z[0, 1] == pytest.approx(85.3333333, abs=1e-4)
    assert z[0, 2] == 0.0
    with pytest.raises(ValueError):
        disparity_to_depth(dm, focal_px=0.0, baseline=0.25)


def test_textured_plane_full_rig_median_disparity():
    # default rig at 640x480, plane at 5 m: median disparity f*B/Z = 17.07 +- 1
    from icefield.cli import display_gray_from_png

    scene = flat_plane_scene(5.0, img=(640, 480), texture_amp=0.45)
    left, right = render_stereo(scene, RenderSettings(
        shadow_samples=1, exposure=0.07, seed=6))
    gl = display_gray_from_png(left.rgb)
    gr = display_gray_from_png(right.rgb)
    expected = scene.rig.intrinsics.focal_px * scene.rig.baseline / 5.0
    assert expected == pytest.approx(17.0667, abs=1e-3)
    p = BlockMatchParams(num_disparities=32, window=21)
    for dm in (
        block_match(gl, gr, p),
        pyramid_match(gl, gr, PyramidParams(levels=3, base=p)),
    ):
        assert dm.validity.mean() > 0.8
        assert abs(np.median(dm.values[dm.validity]) - expected) <= 1.0


def test_textured_plane_stereo_end_to_end_small():
    # scaled-down version of the flagship check: rendered textured plane at
    # 5 m; both matchers recover d = f*B/Z within a pixel
    scene = flat_plane_scene(5.0, img=(160, 120), texture_amp=0.45)
    left, right = render_stereo(scene, RenderSettings(
        shadow_samples=2, exposure=0.06, seed=3))
    gray_l = srgb_encode(to_grayscale(left.linear * 0.06))
    gray_r = srgb_encode(to_grayscale(right.linear * 0.06))
    expected = scene.rig.intrinsics.focal_px * 0.25 / 5.0
    p = BlockMatchParams(num_disparities=16, window=13, subpixel=True)
    for dm in (
        block_match(gray_l, gray_r, p),
        pyramid_match(gray_l, gray_r, PyramidParams(levels=2, base=p)),
    ):
        assert dm.validity.mean() > 0.5
        med = np.median(dm.values[dm.validity])
        assert abs(med - expected) <= 1.0
