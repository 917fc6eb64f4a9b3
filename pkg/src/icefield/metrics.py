"""Depth-map evaluation metrics.

Four metrics over the pixels where both prediction and ground truth are
valid (> 0): mean absolute depth error (L1, meters), the percentage of pixels
with L1 error strictly above 10 cm, the scale-invariant log error (the
variance of per-pixel log-depth differences; invariant to global depth
scaling by construction), and the depth-ordering disagreement rate (fraction
of pixel pairs whose closer/further/same relation, with ratio tolerance tau,
differs between prediction and ground truth).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import philox

DOD_TAU = 0.01
DOD_DEFAULT_PAIRS = 100_000


@dataclass(frozen=True)
class MetricsReport:
    l1: float  # meters
    l1_rate_10: float  # percent of pixels with error > 0.10 m
    si_rmse: float  # variance of log-depth differences
    dod: float  # percent of disagreeing pixel pairs
    valid_fraction: float  # percent of pixels valid in both maps
    n_pixels: int
    n_pairs: int

    def __post_init__(self):
        for name in ("l1_rate_10", "dod", "valid_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 100.0:
                raise ValueError(f"{name} must be a percentage, got {v}")
        if self.l1 < 0 or self.si_rmse < -1e-12:
            raise ValueError("l1 and si_rmse must be >= 0")

    @property
    def si_rmse_sqrt(self) -> float:
        """Auxiliary square root of the scale-invariant error."""
        return float(np.sqrt(max(self.si_rmse, 0.0)))


def valid_mask(pred: np.ndarray, gt: np.ndarray) -> np.ndarray:
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {gt.shape}")
    return (np.asarray(pred) > 0) & (np.asarray(gt) > 0)


def _masked(pred, gt, mask):
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or mask.shape != gt.shape:
        raise ValueError("pred/gt/mask shapes must match")
    p = pred[mask]
    g = gt[mask]
    if p.size == 0:
        raise ValueError("no valid pixels to evaluate")
    return p, g


def l1_error(pred, gt, mask) -> float:
    """Mean |pred - gt| in meters over masked pixels."""
    p, g = _masked(pred, gt, mask)
    return float(np.mean(np.abs(p - g)))


def l1_rate(pred, gt, mask, threshold: float = 0.10) -> float:
    """Percent of masked pixels with |pred - gt| strictly above threshold."""
    p, g = _masked(pred, gt, mask)
    return float(100.0 * np.count_nonzero(np.abs(p - g) > threshold) / p.size)


def si_rmse(pred, gt, mask) -> float:
    """Variance of d_i = log(pred_i) - log(gt_i): mean(d^2) - mean(d)^2."""
    p, g = _masked(pred, gt, mask)
    if np.any(p <= 0) or np.any(g <= 0):
        raise ValueError("si_rmse requires positive masked depths")
    d = np.log(p) - np.log(g)
    return float(np.var(d))


def _ord(a: np.ndarray, b: np.ndarray, tau: float) -> np.ndarray:
    """Ordering relation: 1 further, -1 closer, 0 same within ratio tau."""
    r = a / b
    return np.where(r > 1.0 + tau, 1, np.where(r < 1.0 - tau, -1, 0))


def dod(pred, gt, mask, tau: float = DOD_TAU, n_pairs=DOD_DEFAULT_PAIRS,
        seed: int = 0) -> tuple[float, int]:
    """Depth-ordering disagreement in percent, plus the pair count used.

    n_pairs="all" scores every unordered pixel pair; an integer samples that
    many pairs (i != j) with a fixed Philox stream.
    """
    p, g = _masked(pred, gt, mask)
    n = p.size
    if n < 2:
        raise ValueError("dod requires at least 2 valid pixels")
    if n_pairs == "all":
        i, j = np.triu_indices(n, k=1)
    else:
        if int(n_pairs) < 1:
            raise ValueError("n_pairs must be >= 1 or 'all'")
        gen = philox(seed, "dod-pairs")
        i = gen.integers(0, n, size=int(n_pairs))
        # j uniform over the other n-1 pixels
        j = (i + 1 + gen.integers(0, n - 1, size=int(n_pairs))) % n
    disagree = _ord(p[i], p[j], tau) != _ord(g[i], g[j], tau)
    return float(100.0 * np.count_nonzero(disagree) / len(i)), int(len(i))


def evaluate(pred, gt, tau: float = DOD_TAU, n_pairs=DOD_DEFAULT_PAIRS,
             seed: int = 0) -> MetricsReport:
    """All four metrics plus coverage for one predicted/GT depth pair."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    mask = valid_mask(pred, gt)
    n = int(np.count_nonzero(mask))
    if n == 0:
        raise ValueError("no pixels are valid in both depth maps")
    dod_pct, used_pairs = dod(pred, gt, mask, tau=tau, n_pairs=n_pairs, seed=seed)
    return MetricsReport(
        l1=l1_error(pred, gt, mask),
        l1_rate_10=l1_rate(pred, gt, mask),
        si_rmse=si_rmse(pred, gt, mask),
        dod=dod_pct,
        valid_fraction=float(100.0 * n / mask.size),
        n_pixels=n,
        n_pairs=used_pairs,
    )


CSV_FIELDS = (
    "l1_m", "l1_rate_10_pct", "si_rmse", "si_rmse_sqrt", "dod_pct",
    "valid_fraction_pct", "n_pixels", "n_pairs",
)


def report_row(r: MetricsReport) -> dict:
    return {
        "l1_m": f"{r.l1:.9g}",
        "l1_rate_10_pct": f"{r.l1_rate_10:.9g}",
        "si_rmse": f"{r.si_rmse:.9g}",
        "si_rmse_sqrt": f"{r.si_rmse_sqrt:.9g}",
        "dod_pct": f"{r.dod:.9g}",
        "valid_fraction_pct": f"{r.valid_fraction:.9g}",
        "n_pixels": str(r.n_pixels),
        "n_pairs": str(r.n_pairs),
    }


def report_text(r: MetricsReport) -> str:
    return (
        f"L1            {r.l1:.4f} m\n"
        f"L1 rate 10    {r.l1_rate_10:.2f} %\n"
        f"si-RMSE       {r.si_rmse:.6f} (sqrt {r.si_rmse_sqrt:.6f})\n"
        f"DOD           {r.dod:.2f} % ({r.n_pairs} pairs)\n"
        f"coverage      {r.valid_fraction:.2f} % ({r.n_pixels} px)"
    )
