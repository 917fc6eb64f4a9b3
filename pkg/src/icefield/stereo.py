"""Classical stereo disparity estimation.

`block_match` is plain SAD window matching over rectified rows, with a
uniqueness test, left-right consistency and optional parabolic subpixel
refinement. Costs are exact integers computed by the kernel backend as
box-filtered absolute differences (incremental sums: O(W*H*D) regardless of
window size). `pyramid_match` is the scale-pyramid variant: every level is
Laplacian-of-Gaussian filtered (removing additive intensity bias), the
coarsest level searches the full range and finer levels refine +/-2 px around
the upsampled estimate.

Matching operates on 8-bit-equivalent display grayscale (what a camera
delivers), quantized internally to integers so both kernel backends produce
identical costs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import COST_INVALID, kernels as default_kernels


@dataclass(frozen=True)
class BlockMatchParams:
    num_disparities: int = 96
    window: int = 49
    min_disparity: int = 0
    uniqueness_ratio: float = 0.15
    lr_consistency_px: int = 1
    subpixel: bool = True

    def __post_init__(self):
        if self.num_disparities <= 0:
            raise ValueError("num_disparities must be > 0")
        if self.window < 5 or self.window % 2 == 0:
            raise ValueError("window must be odd and >= 5")
        if self.min_disparity < 0:
            raise ValueError("min_disparity must be >= 0")
        if self.uniqueness_ratio < 0:
            raise ValueError("uniqueness_ratio must be >= 0")
        if self.lr_consistency_px < 0:
            raise ValueError("lr_consistency_px must be >= 0")


@dataclass(frozen=True)
class PyramidParams:
    levels: int = 3
    log_kernel_sigma: float = 1.0
    base: BlockMatchParams = field(default_factory=BlockMatchParams)

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if not self.log_kernel_sigma > 0:
            raise ValueError("log_kernel_sigma must be > 0")


@dataclass
class DisparityMap:
    values: np.ndarray  # (H, W) float32, disparity in px
    validity: np.ndarray  # (H, W) bool


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """Rec. 709 luma of linear RGB: 0.2126 R + 0.7152 G + 0.0722 B."""
    rgb = np.asarray(rgb, dtype=np.float64)
    return 0.2126 * rgb[..., 0] + 0.7152 * rgb[..., 1] + 0.0722 * rgb[..., 2]


def quantize_gray(img: np.ndarray) -> np.ndarray:
    """Display gray in [0, 1] (or uint8) -> integer levels 0..255."""
    img = np.asarray(img)
    if img.dtype == np.uint8:
        return img.astype(np.int64)
    return np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.int64)


def log_kernel_int(sigma: float, scale: int = 64) -> np.ndarray:
    """Integer Laplacian-of-Gaussian kernel, adjusted to sum exactly to 0 so
    integer convolution removes any additive bias exactly."""
    r = int(math.ceil(3.0 * sigma))
    ax = np.arange(-r, r + 1, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax)
    r2 = xx * xx + yy * yy
    k = (r2 - 2.0 * sigma * sigma) / sigma**4 * np.exp(-r2 / (2.0 * sigma * sigma))
    ki = np.rint(k * scale).astype(np.int64)
    ki[r, r] -= ki.sum()
    return ki


def log_filter(img_int: np.ndarray, sigma: float = 1.0) -> np.ndarray:
    """Integer LoG convolution ('same' size, edge-replicated borders)."""
    ki = log_kernel_int(sigma)
    r = ki.shape[0] // 2
    src = np.pad(np.asarray(img_int, dtype=np.int64), r, mode="edge")
    h, w = np.asarray(img_int).shape
    out = np.zeros((h, w), dtype=np.int64)
    for dy in range(ki.shape[0]):
        for dx in range(ki.shape[1]):
            c = ki[dy, dx]
            if c != 0:
                out += c * src[dy : dy + h, dx : dx + w]
    return out


def _match_volume(vol: np.ndarray, p: BlockMatchParams):
    """Shared cost-volume post-processing: argmin, uniqueness, LR check,
    subpixel. Returns a DisparityMap."""
    num_d, h, w = vol.shape
    best_i = np.argmin(vol, axis=0)  # ties -> lowest disparity
    best_c = np.min(vol, axis=0)
    valid = best_c < COST_INVALID

    # uniqueness: best must beat every candidate further than 1 disparity
    # away; pixels without enough candidates to judge are rejected too
    second = np.full((h, w), COST_INVALID, dtype=np.int64)
    for di in range(num_d):
        far = np.abs(best_i - di) > 1
        np.minimum(second, np.where(far, vol[di], COST_INVALID), out=second)
    judged = second < COST_INVALID
    keep = second.astype(np.float64) > best_c.astype(np.float64) * (
        1.0 + p.uniqueness_ratio
    )
    valid &= judged & keep

    # right-view disparity from the same volume: costR(xr, d) = cost(xr + d, d)
    if p.lr_consistency_px >= 0:
        bestR_c = np.full((h, w), COST_INVALID, dtype=np.int64)
        bestR_i = np.zeros((h, w), dtype=np.int64)
        for di in range(num_d):
            a = p.min_disparity + di
            cand = np.full((h, w), COST_INVALID, dtype=np.int64)
            if a < w:
                cand[:, : w - a] = vol[di][:, a:]
            better = cand < bestR_c
            bestR_i[better] = di
            bestR_c[better] = cand[better]
        xs = np.arange(w)[None, :].repeat(h, axis=0)
        xr = xs - (p.min_disparity + best_i)
        in_r = xr >= 0
        xr_c = np.clip(xr, 0, w - 1)
        ys = np.arange(h)[:, None].repeat(w, axis=1)
        dR = bestR_i[ys, xr_c]
        dR_ok = bestR_c[ys, xr_c] < COST_INVALID
        lr_ok = in_r & dR_ok & (np.abs(best_i - dR) <= p.lr_consistency_px)
        valid &= lr_ok

    values = (p.min_disparity + best_i).astype(np.float32)
    if p.subpixel:
        interior = (best_i > 0) & (best_i < num_d - 1)
        ii = np.flatnonzero(interior & valid)
        if len(ii):
            bi = best_i.ravel()[ii]
            flat = vol.reshape(num_d, -1)
            c0 = flat[bi, ii].astype(np.float64)
            cm = flat[bi - 1, ii].astype(np.float64)
            cp = flat[bi + 1, ii].astype(np.float64)
            ok = (cm < COST_INVALID) & (cp < COST_INVALID)
            denom = cm - 2.0 * c0 + cp
            ok &= denom > 0
            delta = np.zeros(len(ii))
            delta[ok] = np.clip((cm[ok] - cp[ok]) / (2.0 * denom[ok]), -0.5, 0.5)
            v = values.ravel()
            v[ii] = v[ii] + delta.astype(np.float32)
    values[~valid] = 0.0
    return DisparityMap(values=values, validity=valid)


def block_match(left, right, p: BlockMatchParams = BlockMatchParams(),
                kern=None) -> DisparityMap:
    """SAD block matching of a rectified pair (display gray in [0,1] or uint8)."""
    L = quantize_gray(left)
    R = quantize_gray(right)
    return block_match_int(L, R, p, kern=kern)


def block_match_int(L: np.ndarray, R: np.ndarray,
                    p: BlockMatchParams = BlockMatchParams(),
                    kern=None) -> DisparityMap:
    """Integer-image entry point (shared with the pyramid matcher)."""
    if L.shape != R.shape:
        raise ValueError(f"image sizes differ: {L.shape} vs {R.shape}")
    kern = kern or default_kernels
    vol = kern.sad_cost_volume(L, R, p.min_disparity, p.num_disparities, p.window)
    return _match_volume(vol, p)


def _binomial_downsample(img: np.ndarray) -> np.ndarray:
    """[1,4,6,4,1]/16 separable blur (integer, floor), then 2x decimation."""
    k = np.array([1, 4, 6, 4, 1], dtype=np.int64)

    def blur_axis(a, axis):
        src = np.pad(a, [(2, 2) if ax == axis else (0, 0) for ax in range(a.ndim)],
                     mode="edge")
        out = np.zeros_like(a)
        for i, c in enumerate(k):
            sl = [slice(None)] * a.ndim
            sl[axis] = slice(i, i + a.shape[axis])
            out += c * src[tuple(sl)]
        return out >> 4

    return blur_axis(blur_axis(img, 0), 1)[::2, ::2]


def _refine_level(Lf, Rf, d_pred, p: BlockMatchParams, kern, search: int = 2):
    """Match over the absolute disparity range the predictions span, with each
    pixel's candidates restricted to +/-search of its own prediction. Exact
    box-filtered SAD planes, then the shared volume post-processing."""
    h, w = Lf.shape
    lo = max(0, int(d_pred.min()) - search)
    hi = max(lo, int(d_pred.max()) + search)
    width = hi - lo + 1
    vol = kern.sad_cost_volume(Lf, Rf, lo, width, p.window)
    for di in range(width):
        vol[di][np.abs(d_pred - (lo + di)) > search] = COST_INVALID
    level_p = BlockMatchParams(
        num_disparities=width, window=p.window, min_disparity=lo,
        uniqueness_ratio=p.uniqueness_ratio,
        lr_consistency_px=p.lr_consistency_px, subpixel=p.subpixel,
    )
    return _match_volume(vol, level_p)


def _pyramid_match_gray(L: np.ndarray, R: np.ndarray, p: PyramidParams, kern):
    """Left-reference coarse-to-fine matching on integer grayscale images."""
    base = p.base
    pyr_L = [np.asarray(L, dtype=np.int64)]
    pyr_R = [np.asarray(R, dtype=np.int64)]
    for _ in range(p.levels - 1):
        pyr_L.append(_binomial_downsample(pyr_L[-1]))
        pyr_R.append(_binomial_downsample(pyr_R[-1]))

    if p.levels == 1:
        # degenerate pyramid: exactly block matching on LoG images
        Lf = log_filter(pyr_L[0], p.log_kernel_sigma)
        Rf = log_filter(pyr_R[0], p.log_kernel_sigma)
        return block_match_int(Lf, Rf, base, kern=kern)

    # coarsest level: full (scaled-down) disparity range
    f = 2 ** (p.levels - 1)
    lo_c = base.min_disparity // f
    hi_c = -(-(base.min_disparity + base.num_disparities - 1) // f)
    coarse_p = BlockMatchParams(
        num_disparities=hi_c - lo_c + 1,
        window=_coarse_window(base.window),
        min_disparity=lo_c,
        uniqueness_ratio=base.uniqueness_ratio,
        lr_consistency_px=base.lr_consistency_px,
        subpixel=False,
    )
    Lf = log_filter(pyr_L[-1], p.log_kernel_sigma)
    Rf = log_filter(pyr_R[-1], p.log_kernel_sigma)
    dm = block_match_int(Lf, Rf, coarse_p, kern=kern)
    d = np.rint(dm.values).astype(np.int64)
    d[~dm.validity] = _fill_value(d, dm.validity)

    for level in range(p.levels - 2, -1, -1):
        d_pred = 2 * _upsample_nearest(d, pyr_L[level].shape)
        Lf = log_filter(pyr_L[level], p.log_kernel_sigma)
        Rf = log_filter(pyr_R[level], p.log_kernel_sigma)
        level_p = base if level == 0 else BlockMatchParams(
            num_disparities=base.num_disparities,
            window=_coarse_window(base.window),
            min_disparity=base.min_disparity,
            uniqueness_ratio=base.uniqueness_ratio,
            lr_consistency_px=base.lr_consistency_px,
            subpixel=False,
        )
        dm = _refine_level(Lf, Rf, d_pred, level_p, kern)
        d = np.rint(dm.values).astype(np.int64)
        d[~dm.validity] = _fill_value(d, dm.validity)
    return dm


def _coarse_window(window: int) -> int:
    w = max(5, window // 2)
    return w if w % 2 == 1 else w + 1


def _fill_value(d: np.ndarray, valid: np.ndarray) -> int:
    return int(np.median(d[valid])) if valid.any() else 0


def _upsample_nearest(d: np.ndarray, shape) -> np.ndarray:
    out = d.repeat(2, axis=0).repeat(2, axis=1)
    return out[: shape[0], : shape[1]]


def pyramid_match(left, right, p: PyramidParams = PyramidParams(),
                  kern=None) -> DisparityMap:
    """Coarse-to-fine LoG matcher (uniqueness and left-right consistency run
    within each level's restricted cost volume)."""
    kern = kern or default_kernels
    L = quantize_gray(left)
    R = quantize_gray(right)
    if L.shape != R.shape:
        raise ValueError(f"image sizes differ: {L.shape} vs {R.shape}")

    dm = _pyramid_match_gray(L, R, p, kern)
    if p.levels == 1:
        return dm

    base = p.base
    in_range = (dm.values >= base.min_disparity) & (
        dm.values < base.min_disparity + base.num_disparities
    )
    valid = dm.validity & in_range
    values = dm.values.copy()
    values[~valid] = 0.0
    return DisparityMap(values=values, validity=valid)


def disparity_to_depth(d: DisparityMap, focal_px: float, baseline: float) -> np.ndarray:
    """Z = focal_px * baseline / d for valid d > 0; 0 sentinel elsewhere."""
    if not focal_px > 0 or not baseline > 0:
        raise ValueError("focal_px and baseline must be > 0")
    depth = np.zeros(d.values.shape, dtype=np.float32)
    ok = d.validity & (d.values > 0)
    depth[ok] = focal_px * baseline / d.values[ok]
    return depth
