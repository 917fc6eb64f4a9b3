"""Benchmark the compiled kernel extension against the pure-numpy fallback.

Covers the three hot paths: primary-ray casting, shadow (any-hit) rays, and
the SAD cost volume, plus an end-to-end frame render. Verifies along the way
that both backends return identical results.

    python benchmarks/bench_kernels.py [--full]
"""

import argparse
import sys
import time

import numpy as np

from icefield._kernels import HAVE_NATIVE, get_backend
from icefield.camera import CameraIntrinsics, StereoRig
from icefield.render import RenderSettings, render
from icefield.scene import assemble_scene
from icefield.terrain import RockSpec, generate_terrain, scatter_rocks


def build_scene(extent=20.0, resolution=129, img=(320, 240)):
    hf = generate_terrain("rugged_mid", extent, resolution, seed=11)
    rocks = scatter_rocks(hf, RockSpec(density=0.05, scale_min=0.2, scale_max=1.0, seed=3))
    import numpy as _np

    from icefield.camera import CameraPose

    pose = CameraPose(
        position=_np.array([extent / 2, extent * 0.15, hf.elevations.max() + 4.0]),
        right=_np.array([1.0, 0.0, 0.0]),
        up=_np.array([0.0, 0.0, 1.0]),
        forward=_np.array([0.0, 1.0, 0.0]),
    )
    rig = StereoRig(
        intrinsics=CameraIntrinsics(image_width=img[0], image_height=img[1]),
        baseline=0.25,
        pose=pose,
    )
    return assemble_scene(hf, rocks=rocks, rig=rig)


def time_call(fn, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--full", action="store_true",
                    help="also benchmark a 640x480 frame render")
    args = ap.parse_args(argv)

    if not HAVE_NATIVE:
        print("native extension not built; nothing to compare", file=sys.stderr)
        return 1
    native = get_backend("native")
    fallback = get_backend("numpy")

    scene = build_scene()
    geom = scene.geometry
    print(f"scene: {geom.n_triangles} triangles, {geom.bounds_min.shape[0]} BVH nodes")

    from icefield.camera import primary_rays

    o, d = primary_rays(scene.rig.intrinsics, scene.rig.pose)
    rows = [("kernel", "native (s)", "numpy (s)", "speedup")]

    tn, rn = time_call(lambda: native.trace_rays(geom, o, d))
    tp, rp = time_call(lambda: fallback.trace_rays(geom, o, d), repeats=1)
    assert np.array_equal(rn[1], rp[1]), "backends disagree on primary rays"
    rows.append((f"trace_rays ({len(o)} rays)", f"{tn:.3f}", f"{tp:.3f}", f"{tp / tn:.1f}x"))

    hit = rn[1] >= 0
    p = o[hit] + rn[0][hit, None] * d[hit]
    sd = np.broadcast_to(scene.sun.direction, p.shape)
    t_max = np.full(len(p), 1e30)
    skip = rn[1][hit]
    tn, an = time_call(lambda: native.trace_any(geom, p + 1e-3 * sd, sd, t_max, skip))
    tp, ap_ = time_call(lambda: fallback.trace_any(geom, p + 1e-3 * sd, sd, t_max, skip),
                        repeats=1)
    assert np.array_equal(an, ap_), "backends disagree on occlusion"
    rows.append((f"trace_any ({len(p)} rays)", f"{tn:.3f}", f"{tp:.3f}", f"{tp / tn:.1f}x"))

    rng = np.random.default_rng(0)
    L = rng.integers(0, 256, size=(480, 640)).astype(np.int64)
    R = np.roll(L, 9, axis=1)
    tn, vn = time_call(lambda: native.sad_cost_volume(L, R, 0, 96, 49), repeats=1)
    tp, vp = time_call(lambda: fallback.sad_cost_volume(L, R, 0, 96, 49), repeats=1)
    assert np.array_equal(vn, vp), "backends disagree on cost volume"
    rows.append(("sad_cost_volume (640x480x96, w49)", f"{tn:.3f}", f"{tp:.3f}",
                 f"{tp / tn:.1f}x"))

    settings = RenderSettings(shadow_samples=4, exposure=0.08, seed=1)
    tn, fn_ = time_call(lambda: render(scene, "left", settings, kern=native), repeats=1)
    tp, fp_ = time_call(lambda: render(scene, "left", settings, kern=fallback), repeats=1)
    assert np.array_equal(fn_.rgb, fp_.rgb), "backends disagree on a full frame"
    rows.append(("render 320x240, 4 shadow samples", f"{tn:.3f}", f"{tp:.3f}",
                 f"{tp / tn:.1f}x"))

    if args.full:
        scene_full = build_scene(img=(640, 480))
        tn, _ = time_call(lambda: render(scene_full, "left", settings, kern=native),
                          repeats=1)
        tp, _ = time_call(lambda: render(scene_full, "left", settings, kern=fallback),
                          repeats=1)
        rows.append(("render 640x480, 4 shadow samples", f"{tn:.3f}", f"{tp:.3f}",
                     f"{tp / tn:.1f}x"))

    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    for r in rows:
        print("  ".join(str(c).ljust(w) for c, w in zip(r, widths)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
