"""Noise basis and fractal combinator tests."""

import subprocess
import sys

import numpy as np
import pytest

from icefield.noise import (
    NoiseSpec,
    eval_basis,
    eval_fbm,
    fbm_bound,
    midpoint_displace,
    worley_feature_point,
)


def test_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(octaves=0)
    with pytest.raises(ValueError):
        NoiseSpec(lacunarity=1.0)
    with pytest.raises(ValueError):
        NoiseSpec(gain=0.0)
    with pytest.raises(ValueError):
        NoiseSpec(gain=1.5)
    with pytest.raises(ValueError):
        NoiseSpec(basis="simplex")
    with pytest.raises(ValueError):
        NoiseSpec(base_frequency=0.0)


def test_perlin_zero_at_lattice_points():
    spec = NoiseSpec(basis="perlin", seed=42)
    xs, ys = np.meshgrid(np.arange(-8, 9, dtype=float), np.arange(-8, 9, dtype=float))
    pts = np.stack([xs, ys], axis=-1)
    assert np.all(eval_basis(spec, pts) == 0.0)
    assert eval_basis(spec, (3.0, 7.0)) == 0.0


def test_perlin_bounded_and_deterministic():
    spec = NoiseSpec(basis="perlin", seed=42)
    v = eval_basis(spec, (0.37, 0.81))
    assert abs(v) <= 1.0
    assert v == eval_basis(spec, (0.37, 0.81))


def test_perlin_determinism_across_processes():
    # the determinism oracle: evaluate in a fresh interpreter, compare bits
    code = (
        "from icefield.noise import NoiseSpec, eval_basis;"
        "v = eval_basis(NoiseSpec(basis='perlin', seed=42), (0.37, 0.81));"
        "print(float(v).hex())"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    here = float(eval_basis(NoiseSpec(basis="perlin", seed=42), (0.37, 0.81)))
    assert out.stdout.strip() == here.hex()


@pytest.mark.parametrize("basis,lo,hi", [
    ("perlin", -1.0, 1.0),
    ("turbulence", 0.0, 1.0),
    ("worley_f1", 0.0, np.sqrt(2.0) + 1e-12),
])
def test_basis_value_bounds(basis, lo, hi):
    spec = NoiseSpec(basis=basis, seed=3)
    pts = np.random.default_rng(0).uniform(-100, 100, size=(100_000, 2))
    v = eval_basis(spec, pts)
    assert v.min() >= lo
    assert v.max() <= hi


def test_worley_zero_at_feature_point():
    fx, fy = worley_feature_point(7, 4, -2)
    spec = NoiseSpec(basis="worley_f1", seed=7)
    assert eval_basis(spec, (float(fx), float(fy))) == 0.0


def test_midpoint_basis_rejects_point_evaluation():
    spec = NoiseSpec(basis="midpoint_displacement", seed=1)
    with pytest.raises(ValueError):
        eval_basis(spec, (0.5, 0.5))


def test_fbm_single_octave_equals_scaled_basis():
    spec = NoiseSpec(basis="perlin", seed=9, octaves=1, base_frequency=1.7, amplitude=2.5)
    pts = np.random.default_rng(1).uniform(-20, 20, size=(1000, 2))
    assert np.array_equal(eval_fbm(spec, pts), spec.amplitude * eval_basis(spec, pts))


def test_fbm_bound():
    spec = NoiseSpec(basis="perlin", seed=5, octaves=4, gain=0.5, amplitude=1.0)
    pts = np.random.default_rng(2).uniform(-50, 50, size=(100_000, 2))
    bound = 1.0 * (1 + 0.5 + 0.25 + 0.125)
    v = eval_fbm(spec, pts)
    assert np.all(np.abs(v) <= bound)
    assert fbm_bound(spec) == pytest.approx(bound)


def test_fbm_zero_amplitude():
    spec = NoiseSpec(basis="perlin", seed=5, octaves=3, amplitude=0.0)
    pts = np.random.default_rng(3).uniform(-5, 5, size=(100, 2))
    assert np.all(eval_fbm(spec, pts) == 0.0)


def test_midpoint_displace_shapes_and_determinism():
    hf1 = midpoint_displace(seed=123, size=17, roughness=0.5, initial_amplitude=2.0)
    hf2 = midpoint_displace(seed=123, size=17, roughness=0.5, initial_amplitude=2.0)
    assert hf1.elevations.shape == (17, 17)
    assert np.array_equal(hf1.elevations, hf2.elevations)
    hf3 = midpoint_displace(seed=124, size=17, roughness=0.5, initial_amplitude=2.0)
    assert not np.array_equal(hf1.elevations, hf3.elevations)


def test_midpoint_displace_zero_amplitude():
    hf = midpoint_displace(seed=1, size=9, roughness=0.5, initial_amplitude=0.0)
    assert np.all(hf.elevations == 0.0)


def test_midpoint_displace_recurrence_size3():
    # hand-step: corners stay 0; center = mean of corners + offset, |offset| <= a;
    # edge midpoints average their 3 in-grid neighbors plus a bounded offset
    a = 2.0
    hf = midpoint_displace(seed=1, size=3, roughness=0.5, initial_amplitude=a)
    z = hf.elevations
    assert z.shape == (3, 3)
    corners = z[[0, 0, 2, 2], [0, 2, 0, 2]]
    assert np.all(corners == 0.0)
    center = z[1, 1]
    assert abs(center - 0.0) <= a  # mean of corners is 0
    # edges: mean of 3 neighbors (two corners + center) + offset
    for (i, j), neighbors in {
        (0, 1): [z[0, 0], z[0, 2], z[1, 1]],
        (2, 1): [z[2, 0], z[2, 2], z[1, 1]],
        (1, 0): [z[0, 0], z[2, 0], z[1, 1]],
        (1, 2): [z[0, 2], z[2, 2], z[1, 1]],
    }.items():
        assert abs(z[i, j] - np.mean(neighbors)) <= a


def test_midpoint_displace_rejects_bad_size():
    for bad in (4, 6, 7, 2, 10):
        with pytest.raises(ValueError):
            midpoint_displace(seed=1, size=bad, roughness=0.5, initial_amplitude=1.0)
