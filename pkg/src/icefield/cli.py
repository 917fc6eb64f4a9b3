"""Command-line pipeline: generate -> estimate -> evaluate -> sweep-report.

generate renders every sweep point of a config into a scene directory (left
and right PNG, left ground-truth depth PFM, 16-bit semantic/instance PNG,
manifest). estimate runs a stereo matcher over a dataset and writes disparity
and depth PFMs plus a runtime log. evaluate scores predictions against the
ground truth into one CSV row per (scene, matcher). sweep-report aggregates a
metrics CSV over one parameter axis.
"""

from __future__ import annotations

import argparse
import csv
import shutil
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import imgio, metrics, stereo
from .render import render_stereo, srgb_encode, srgb_decode
from .stereo import BlockMatchParams, DisparityMap, PyramidParams

MATCHERS = ("block", "pyramid")

_GT_FILES = ("left.png", "right.png", "depth_left.pfm",
             "semantic_left.png", "instance_left.png", "manifest.toml")


def generate_scene(manifest: dict, scene_dir: Path, write_depth_png16: bool = False) -> None:
    """Render one sweep point into scene_dir (removed again on any failure)."""
    scene_dir.mkdir(parents=True, exist_ok=True)
    try:
        scene, settings = cfgmod.scene_from_manifest(manifest)
        left, right = render_stereo(scene, settings)
        imgio.write_png8(scene_dir / "left.png", left.rgb)
        imgio.write_png8(scene_dir / "right.png", right.rgb)
        imgio.write_pfm(scene_dir / "depth_left.pfm", left.depth)
        imgio.write_png16(scene_dir / "semantic_left.png", left.semantic)
        imgio.write_png16(scene_dir / "instance_left.png", left.instance)
        if write_depth_png16:
            imgio.write_png16(scene_dir / "depth_left_mm.png", imgio.depth_to_png16(left.depth))
        with open(scene_dir / "manifest.toml", "w", encoding="utf-8") as f:
            f.write(cfgmod.dump_toml(manifest))
    except BaseException:
        shutil.rmtree(scene_dir, ignore_errors=True)
        raise


def _generate_one(args):
    manifest, scene_dir, png16 = args
    generate_scene(manifest, Path(scene_dir), png16)
    return manifest["scene_name"]


def cmd_generate(args) -> int:
    cfg = cfgmod.parse_config(args.config)
    if args.seed_override is not None:
        cfg = cfgmod.apply_seed_override(cfg, args.seed_override)
    out = Path(args.out) if args.out else Path(cfg["output"]["directory"])
    out.mkdir(parents=True, exist_ok=True)
    manifests = cfgmod.expand_sweep(cfg)
    png16 = bool(cfg["output"]["write_depth_png16"])
    jobs = [(m, str(out / m["scene_name"]), png16) for m in manifests]
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            for name in pool.map(_generate_one, jobs):
                print(f"rendered {name}")
    else:
        for job in jobs:
            print(f"rendered {_generate_one(job)}")
    print(f"dataset: {len(manifests)} scenes in {out}")
    return 0


def display_gray_from_png(rgb_u8: np.ndarray) -> np.ndarray:
    """PNG bytes -> display-referred gray in [0, 1]: decode sRGB, take the
    linear luma, re-encode. This is the matcher's camera-like input."""
    lin = srgb_decode(rgb_u8.astype(np.float64) / 255.0)
    return srgb_encode(stereo.to_grayscale(lin))


def matcher_params(args) -> tuple[BlockMatchParams, PyramidParams]:
    base = BlockMatchParams(
        num_disparities=args.num_disparities,
        window=args.window,
        min_disparity=args.min_disparity,
        uniqueness_ratio=args.uniqueness_ratio,
        lr_consistency_px=args.lr_consistency,
        subpixel=not args.no_subpixel,
    )
    return base, PyramidParams(levels=args.levels, log_kernel_sigma=args.log_sigma, base=base)


def estimate_scene(scene_dir: Path, matcher: str, base: BlockMatchParams,
                   pyr: PyramidParams) -> tuple[DisparityMap, float]:
    left = display_gray_from_png(imgio.read_png8(scene_dir / "left.png"))
    right = display_gray_from_png(imgio.read_png8(scene_dir / "right.png"))
    t0 = time.perf_counter()
    if matcher == "block":
        disp = stereo.block_match(left, right, base)
    else:
        disp = stereo.pyramid_match(left, right, pyr)
    return disp, time.perf_counter() - t0


def _scene_dirs(dataset: Path) -> list[Path]:
    return sorted(p for p in dataset.iterdir() if (p / "manifest.toml").is_file())


def _estimate_one(packed):
    scene_dir, matcher, base, pyr = packed
    scene_dir = Path(scene_dir)
    manifest = cfgmod.load_manifest(scene_dir / "manifest.toml")
    disp, seconds = estimate_scene(scene_dir, matcher, base, pyr)
    rig = manifest["rig"]
    focal_px = rig["focal_length"] / rig["sensor_width"] * rig["image_width"]
    depth = stereo.disparity_to_depth(disp, focal_px, rig["baseline"])
    disp_img = np.where(disp.validity, disp.values, 0.0).astype(np.float32)
    imgio.write_pfm(scene_dir / f"disparity_{matcher}.pfm", disp_img)
    imgio.write_pfm(scene_dir / f"depth_{matcher}.pfm", depth)
    return scene_dir.name, seconds


def cmd_estimate(args) -> int:
    dataset = Path(args.dataset)
    base, pyr = matcher_params(args)
    scene_dirs = _scene_dirs(dataset)
    if not scene_dirs:
        print(f"error: no scenes found in {dataset}", file=sys.stderr)
        return 2

    runnable, skipped = [], []
    for d in scene_dirs:
        if (d / "left.png").is_file() and (d / "right.png").is_file():
            runnable.append(d)
        else:
            skipped.append(d.name)
    jobs = [(str(d), args.matcher, base, pyr) for d in runnable]
    rows = []
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(_estimate_one, jobs))
    else:
        rows = [_estimate_one(j) for j in jobs]
    for name, seconds in rows:
        print(f"{name}: {seconds:.3f} s")
    for name in skipped:
        print(f"{name}: skipped (missing stereo pair)", file=sys.stderr)

    log = dataset / f"runtimes_{args.matcher}.csv"
    with open(log, "w", newline="", encoding="utf-8") as f:
        wr = csv.writer(f)
        wr.writerow(["scene", "seconds", "matcher", "num_disparities", "window",
                     "min_disparity", "levels"])
        for name, seconds in sorted(rows):
            wr.writerow([name, f"{seconds:.4f}", args.matcher, base.num_disparities,
                         base.window, base.min_disparity,
                         pyr.levels if args.matcher == "pyramid" else 1])
    print(f"runtime log: {log}")
    return 0


_PARAM_COLUMNS = (
    ("terrain", "kind"), ("terrain", "seed"),
    ("material", "albedo"), ("material", "specular"), ("material", "subsurface"),
    ("material", "transmission"), ("material", "texture_noise"),
    ("lighting", "irradiance"), ("lighting", "elevation"), ("lighting", "azimuth"),
)


def cmd_evaluate(args) -> int:
    dataset = Path(args.dataset)
    scene_dirs = _scene_dirs(dataset)
    if not scene_dirs:
        print(f"error: no scenes found in {dataset}", file=sys.stderr)
        return 2

    header = ["scene", "matcher", "status", *metrics.CSV_FIELDS,
              *[f"{s}_{k}" for s, k in _PARAM_COLUMNS]]
    rows = []
    for d in scene_dirs:
        manifest = cfgmod.load_manifest(d / "manifest.toml")
        params = [str(manifest[s][k]) for s, k in _PARAM_COLUMNS]
        gt_path = d / "depth_left.pfm"
        for matcher in MATCHERS:
            pred_path = d / f"depth_{matcher}.pfm"
            if not pred_path.is_file():
                continue
            row = [d.name, matcher]
            try:
                gt = imgio.read_pfm(gt_path)
                pred = imgio.read_pfm(pred_path)
                rep = metrics.evaluate(pred, gt)
                vals = metrics.report_row(rep)
                row += ["ok", *[vals[k] for k in metrics.CSV_FIELDS]]
            except (ValueError, OSError) as e:
                row += ["error", *[""] * len(metrics.CSV_FIELDS)]
                print(f"{d.name}/{matcher}: {e}", file=sys.stderr)
            rows.append(row + params)

    out = Path(args.out) if args.out else dataset / "metrics.csv"
    with open(out, "w", newline="", encoding="utf-8") as f:
        wr = csv.writer(f)
        wr.writerow(header)
        wr.writerows(rows)

    # aggregate means per matcher over clean rows
    summary = Path(str(out).replace(".csv", "_summary.csv"))
    with open(summary, "w", newline="", encoding="utf-8") as f:
        wr = csv.writer(f)
        wr.writerow(["matcher", "n_scenes", *metrics.CSV_FIELDS[:6]])
        for matcher in MATCHERS:
            sel = [r for r in rows if r[1] == matcher and r[2] == "ok"]
            if not sel:
                continue
            cols = []
            for ci in range(3, 3 + 6):
                cols.append(f"{np.mean([float(r[ci]) for r in sel]):.9g}")
            wr.writerow([matcher, len(sel), *cols])
    print(f"metrics: {out}\nsummary: {summary}")
    return 0


def cmd_sweep_report(args) -> int:
    path = Path(args.metrics)
    with open(path, newline="", encoding="utf-8") as f:
        rd = csv.DictReader(f)
        rows = [r for r in rd if r.get("status") == "ok"]
    if not rows:
        print("error: no ok rows in metrics CSV", file=sys.stderr)
        return 2
    axis_cols = [c for c in rows[0] if c == args.axis or c.endswith(f"_{args.axis}")]
    if not axis_cols:
        print(f"error: unknown axis {args.axis!r}; columns: {list(rows[0])}",
              file=sys.stderr)
        return 2
    axis_col = axis_cols[0]

    metric_cols = list(metrics.CSV_FIELDS[:6])
    groups: dict[float, list[dict]] = {}
    for r in rows:
        groups.setdefault(float(r[axis_col]), []).append(r)

    out = Path(args.out) if args.out else path.with_name(f"sweep_{args.axis}.csv")
    with open(out, "w", newline="", encoding="utf-8") as f:
        wr = csv.writer(f)
        wr.writerow([args.axis, "n", *[f"mean_{c}" for c in metric_cols]])
        for val in sorted(groups):
            grp = groups[val]
            means = [f"{np.mean([float(g[c]) for g in grp]):.9g}" for c in metric_cols]
            wr.writerow([f"{val:.9g}", len(grp), *means])
    print(f"sweep report: {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="icefield",
                                 description="icy-terrain stereo dataset pipeline")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="render a dataset from a config file")
    g.add_argument("--config", required=True)
    g.add_argument("--out", default=None, help="output dataset directory")
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--seed-override", type=int, default=None)
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("estimate", help="run a stereo matcher over a dataset")
    e.add_argument("--dataset", required=True)
    e.add_argument("--matcher", choices=MATCHERS, default="block")
    e.add_argument("--threads", type=int, default=1)
    e.add_argument("--num-disparities", type=int, default=96)
    e.add_argument("--window", type=int, default=49)
    e.add_argument("--min-disparity", type=int, default=0)
    e.add_argument("--uniqueness-ratio", type=float, default=0.15)
    e.add_argument("--lr-consistency", type=int, default=1)
    e.add_argument("--no-subpixel", action="store_true")
    e.add_argument("--levels", type=int, default=3)
    e.add_argument("--log-sigma", type=float, default=1.0)
    e.set_defaults(func=cmd_estimate)

    v = sub.add_parser("evaluate", help="score predictions against ground truth")
    v.add_argument("--dataset", required=True)
    v.add_argument("--out", default=None, help="metrics CSV path")
    v.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sweep-report", help="aggregate metrics over one axis")
    s.add_argument("--metrics", required=True)
    s.add_argument("--axis", required=True)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_sweep_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except cfgmod.ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
