"""Acceptance suite: one test per release criterion, each printing a
pass/fail line (run with `pytest -v -s tests/test_acceptance.py`).

Criterion 11's exact-angle cross-check is encoded as a strict xfail: the
small-angle formula differs from 2*atan(D/2d) by 2.07-2.11% for the
Saturn-from-Enceladus geometry, which can never satisfy the stated 2% bound;
see notes in the test.
"""

import csv
import math
import time
from pathlib import Path

import numpy as np
import pytest

from helpers import flat_plane_scene, rocky_scene
from oracles import (
    oracle_dod,
    oracle_l1,
    oracle_l1_rate,
    oracle_si_rmse,
    spearman,
)
from icefield.cli import display_gray_from_png, main as cli_main
from icefield.lighting import AmbientLight, SunLight, apparent_size
from icefield.material import Material
from icefield.metrics import dod, evaluate, l1_error, l1_rate, si_rmse, valid_mask
from icefield.render import RenderSettings, render, render_stereo, validate_output
from icefield.scene import SEM_ROCK
from icefield.stereo import (
    BlockMatchParams,
    PyramidParams,
    block_match,
    disparity_to_depth,
    pyramid_match,
)


def _report(criterion, ok, detail=""):
    state = "PASS" if ok else "FAIL"
    print(f"[{state}] criterion {criterion}: {detail}")
    assert ok, f"criterion {criterion}: {detail}"


# -- 1 ------------------------------------------------------------------


def test_criterion_1_metric_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        gt = rng.uniform(0.5, 20.0, (8, 8))
        pred = np.where(rng.uniform(size=(8, 8)) < 0.92,
                        gt * rng.uniform(0.5, 2.0, (8, 8)), 0.0)
        mask = valid_mask(pred, gt)
        if mask.sum() < 2:
            continue
        pairs = (
            (l1_error(pred, gt, mask), oracle_l1(pred, gt, mask)),
            (l1_rate(pred, gt, mask), oracle_l1_rate(pred, gt, mask)),
            (si_rmse(pred, gt, mask), oracle_si_rmse(pred, gt, mask)),
            (dod(pred, gt, mask, n_pairs="all")[0], oracle_dod(pred, gt, mask)),
        )
        for got, ref in pairs:
            rel = abs(got - ref) / max(abs(ref), 1e-30)
            worst = max(worst, rel if ref != 0 else abs(got - ref))
    elapsed = time.perf_counter() - t0
    _report(1, worst <= 1e-9 and elapsed < 5.0,
            f"metrics vs brute force, worst rel err {worst:.2e}, {elapsed:.2f} s")


# -- 2 ------------------------------------------------------------------


def test_criterion_2_si_rmse_scale_invariance():
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(20):
        gt = rng.uniform(0.5, 25.0, (12, 12))
        pred = gt * rng.uniform(0.6, 1.6, (12, 12))
        mask = np.ones_like(gt, bool)
        base = si_rmse(pred, gt, mask)
        for c in (0.1, 1.0, 10.0):
            worst = max(worst, abs(si_rmse(c * pred, gt, mask) - base))
    _report(2, worst <= 1e-12, f"max |si(c*pred) - si(pred)| = {worst:.2e}")


# -- 3 ------------------------------------------------------------------


def test_criterion_3_ground_truth_depth():
    settings = RenderSettings(shadow_samples=1, exposure=0.05, seed=31)
    worst_depth, worst_disp = 0.0, 0.0
    for z0 in (2.0, 5.0, 10.0):
        scene = flat_plane_scene(z0, img=(640, 480))
        out = render(scene, "left", settings)
        assert np.all(out.semantic != 0), "plane should fill the view"
        rel = np.abs(out.depth - z0) / z0
        worst_depth = max(worst_depth, float(rel.max()))
        d = scene.rig.gt_disparity(out.depth)
        d_true = scene.rig.intrinsics.focal_px * scene.rig.baseline / z0
        worst_disp = max(worst_disp, float(np.abs(d - d_true).max()))
    _report(3, worst_depth <= 1e-4 and worst_disp <= 1e-3,
            f"max rel depth err {worst_depth:.2e}, max disparity err {worst_disp:.2e} px")


# -- 4 ------------------------------------------------------------------


def test_criterion_4_shift_recovery():
    rng = np.random.default_rng(404)
    p = BlockMatchParams(num_disparities=96, window=11, subpixel=False)
    rates = {}
    for s in (1, 7, 31, 95):
        base = rng.integers(0, 256, size=(80, 220 + s)).astype(np.float64) / 255.0
        left, right = base[:, :220], base[:, s : 220 + s]
        dm = block_match(left, right, p)
        assert dm.validity.any()
        rates[s] = float(np.mean(dm.values[dm.validity] == float(s)))
    _report(4, all(r >= 0.99 for r in rates.values()),
            "exact recovery " + ", ".join(f"s={s}: {r:.4f}" for s, r in rates.items()))


# -- 5 ------------------------------------------------------------------


def test_criterion_5_bias_robustness():
    rng = np.random.default_rng(505)
    s = 11
    h, w = 80, 220
    base = rng.integers(77, 154, size=(h, w + s)).astype(np.float64) / 255.0
    left, right = base[:, :w], base[:, s : w + s]
    right_biased = right + 0.2  # +20% of full scale
    p = BlockMatchParams(num_disparities=32, window=11, subpixel=False)
    inter = np.zeros((h, w), bool)
    inter[5 : h - 5, s + 5 : w - 5] = True

    def recovery(dm):
        return float(np.count_nonzero(dm.values[dm.validity & inter] == s) / inter.sum())

    plain = recovery(block_match(left, right_biased, p))
    pyr = recovery(pyramid_match(left, right_biased, PyramidParams(levels=2, base=p)))
    _report(5, pyr >= 0.99 and plain < pyr,
            f"biased pair: pyramid(LoG) {pyr:.4f}, plain block {plain:.4f}")


# -- 6 ------------------------------------------------------------------


def test_criterion_6_textured_plane_end_to_end():
    t0 = time.perf_counter()
    scene = flat_plane_scene(5.0, img=(640, 480), texture_amp=0.45)
    left, right = render_stereo(scene, RenderSettings(
        shadow_samples=2, exposure=0.07, seed=6))
    gl = display_gray_from_png(left.rgb)
    gr = display_gray_from_png(right.rgb)
    dm = block_match(gl, gr, BlockMatchParams(num_disparities=32, window=21))
    depth = disparity_to_depth(dm, scene.rig.intrinsics.focal_px, scene.rig.baseline)
    coverage = float(dm.validity.mean())
    l1 = float(np.abs(depth[dm.validity] - left.depth[dm.validity]).mean())
    med_disp = float(np.median(dm.values[dm.validity]))
    d_true = scene.rig.intrinsics.focal_px * scene.rig.baseline / 5.0  # 17.07 px
    elapsed = time.perf_counter() - t0
    _report(6, l1 <= 0.10 and coverage >= 0.80 and abs(med_disp - d_true) <= 1.0
            and elapsed <= 60.0,
            f"L1 {l1:.4f} m, coverage {coverage:.1%}, "
            f"median disparity {med_disp:.2f} px (f*B/Z {d_true:.2f}), {elapsed:.1f} s")


# -- 7 ------------------------------------------------------------------


SWEEP_CONFIG = """
version = 1

[terrain]
kind = "smooth"
extent = 20.0
resolution = 129
seed = 7

[material]
albedo = [0.2, 0.35, 0.5, 0.65, 0.8, 0.95]
texture_noise = 0.7
texture_frequency = 2.2
texture_octaves = 5
specular = 0.0

[lighting]
elevation = 35.0

[rig]
height = 6.0
pitch = 90.0
x = 10.0
y = 10.0

[render]
shadow_samples = 4
exposure = 0.17
"""


def test_criterion_7_albedo_degradation_trend(tmp_path):
    t0 = time.perf_counter()
    cfg = tmp_path / "sweep.toml"
    cfg.write_text(SWEEP_CONFIG, encoding="utf-8")
    out = tmp_path / "ds"
    assert cli_main(["generate", "--config", str(cfg), "--out", str(out)]) == 0
    assert cli_main(["estimate", "--dataset", str(out), "--matcher", "block",
                     "--num-disparities", "32", "--window", "21"]) == 0
    assert cli_main(["evaluate", "--dataset", str(out)]) == 0
    assert cli_main(["sweep-report", "--metrics", str(out / "metrics.csv"),
                     "--axis", "albedo"]) == 0
    with open(out / "sweep_albedo.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    albedo = [float(r["albedo"]) for r in rows]
    l1 = [float(r["mean_l1_m"]) for r in rows]
    r10 = [float(r["mean_l1_rate_10_pct"]) for r in rows]
    assert albedo == sorted(albedo) and len(albedo) >= 5
    inv_l1 = sum(1 for i in range(len(l1) - 1) if l1[i + 1] < l1[i])
    inv_r10 = sum(1 for i in range(len(r10) - 1) if r10[i + 1] < r10[i])
    rho = spearman(albedo, l1)
    elapsed = time.perf_counter() - t0
    _report(7, inv_l1 <= 1 and inv_r10 <= 1 and rho >= 0.7 and elapsed <= 900.0,
            f"L1 {l1}, inversions L1/rate10 {inv_l1}/{inv_r10}, "
            f"Spearman(albedo, L1) {rho:.3f}, {elapsed:.0f} s")


# -- 8 ------------------------------------------------------------------


def test_criterion_8_illumination_analytic():
    means = {}
    for elev in (10.0, 35.0, 90.0):
        scene = flat_plane_scene(
            5.0,
            material=Material(albedo=(0.8,) * 3, specular=0.0),
            sun=SunLight(irradiance=50.26, elevation=elev),
            ambient=AmbientLight(),
        )
        out = render(scene, "left", RenderSettings(shadow_samples=64, exposure=1.0))
        means[elev] = float(out.linear[..., 0].mean())
    worst = 0.0
    elevs = list(means)
    for i in range(len(elevs)):
        for j in range(i + 1, len(elevs)):
            got = means[elevs[i]] / means[elevs[j]]
            want = math.sin(math.radians(elevs[i])) / math.sin(math.radians(elevs[j]))
            worst = max(worst, abs(got / want - 1.0))
    _report(8, worst <= 0.02,
            f"radiance ratios vs sin(e) ratios, worst rel err {worst:.2e}")


# -- 9 ------------------------------------------------------------------


def test_criterion_9_mask_invariants():
    checked = 0
    for seed in range(20):
        scene = rocky_scene(seed=seed, density=0.06 + 0.004 * seed)
        out = render(scene, "left", RenderSettings(shadow_samples=1, exposure=0.05,
                                                   seed=seed))
        validate_output(out)
        ids = scene.instance_ids
        assert sorted(ids) == list(range(1, len(ids) + 1))
        present = set(np.unique(out.instance)) - {0}
        assert present <= set(ids)
        assert np.all(out.semantic[out.instance > 0] == SEM_ROCK)
        checked += 1
    _report(9, checked == 20, f"all RenderOutput invariants hold on {checked} scenes")


# -- 10 -----------------------------------------------------------------


DET_CONFIG = """
version = 1

[terrain]
kind = "rugged_low"
extent = 20.0
resolution = 65
seed = 5

[rocks]
density = 0.03

[material]
albedo = [0.4, 0.7]
texture_noise = 0.4
texture_frequency = 2.0

[rig]
image_width = 96
image_height = 72
height = 5.0
pitch = 60.0

[render]
shadow_samples = 2
exposure = 0.1
"""


def test_criterion_10_pipeline_determinism(tmp_path):
    cfg = tmp_path / "det.toml"
    cfg.write_text(DET_CONFIG, encoding="utf-8")
    outs = []
    for run in ("r1", "r2"):
        out = tmp_path / run
        assert cli_main(["generate", "--config", str(cfg), "--out", str(out)]) == 0
        assert cli_main(["estimate", "--dataset", str(out), "--matcher", "block",
                         "--num-disparities", "16", "--window", "11"]) == 0
        assert cli_main(["estimate", "--dataset", str(out), "--matcher", "pyramid",
                         "--num-disparities", "16", "--window", "11",
                         "--levels", "2"]) == 0
        assert cli_main(["evaluate", "--dataset", str(out)]) == 0
        outs.append(out)
    n_files = 0
    rel1 = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.is_file())
    rel2 = sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*") if p.is_file())
    assert rel1 == rel2
    for rel in rel1:
        if rel.name.startswith("runtimes_"):
            continue  # wall-clock log; the spec marks runtimes informational
        b1 = (outs[0] / rel).read_bytes()
        b2 = (outs[1] / rel).read_bytes()
        assert b1 == b2, f"{rel} differs between runs"
        n_files += 1
    _report(10, n_files > 0,
            f"{n_files} files (images, depth, masks, manifests, CSVs) byte-identical")


# -- 11 -----------------------------------------------------------------


def test_criterion_11_apparent_size_value():
    deg = apparent_size(120536.0, 238000.0)
    _report("11a", abs(deg - 29.02) <= 0.01,
            f"apparent_size(120536, 238000) = {deg:.4f} deg")


@pytest.mark.xfail(
    strict=True,
    reason=(
        "unattainable as stated: 57.3*D/d = 29.0198 deg vs exact "
        "2*atan(D/2d) = 28.4202 deg differ by 2.07-2.11% depending on the "
        "baseline, which is never within the stated 2%"
    ),
)
def test_criterion_11_exact_crosscheck():
    small = apparent_size(120536.0, 238000.0)
    exact = math.degrees(2.0 * math.atan(120536.0 / (2.0 * 238000.0)))
    rel = abs(small - exact) / exact
    _report("11b", rel <= 0.02,
            f"small-angle {small:.4f} vs exact {exact:.4f} deg: {rel:.2%} > 2%")
