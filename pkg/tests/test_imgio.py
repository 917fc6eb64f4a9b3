"""File format round-trips."""

import numpy as np
import pytest

from icefield.imgio import (
    depth_to_png16,
    read_pfm,
    read_png8,
    read_png16,
    write_pfm,
    write_png8,
    write_png16,
)


def test_png8_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, size=(24, 32, 3), dtype=np.uint8)
    path = tmp_path / "a.png"
    write_png8(path, img)
    assert np.array_equal(read_png8(path), img)


def test_png8_rejects_bad_input(tmp_path):
    with pytest.raises(ValueError):
        write_png8(tmp_path / "x.png", np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(ValueError):
        write_png8(tmp_path / "x.png", np.zeros((4, 4, 3), dtype=np.float32))


def test_png16_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    img = rng.integers(0, 65536, size=(20, 20), dtype=np.uint16)
    path = tmp_path / "m.png"
    write_png16(path, img)
    assert np.array_equal(read_png16(path), img)


def test_png_bytes_deterministic(tmp_path):
    img = np.random.default_rng(2).integers(0, 256, (16, 16, 3), dtype=np.uint8)
    p1, p2 = tmp_path / "d1.png", tmp_path / "d2.png"
    write_png8(p1, img)
    write_png8(p2, img)
    assert p1.read_bytes() == p2.read_bytes()


def test_pfm_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    depth = rng.uniform(0, 100, size=(30, 40)).astype(np.float32)
    depth[0, :] = 0.0  # sky sentinel row
    path = tmp_path / "d.pfm"
    write_pfm(path, depth)
    assert np.array_equal(read_pfm(path), depth)


def test_pfm_header_layout(tmp_path):
    path = tmp_path / "h.pfm"
    write_pfm(path, np.zeros((2, 3), dtype=np.float32))
    raw = path.read_bytes()
    assert raw.startswith(b"Pf\n3 2\n-1.0\n")  # little-endian scale -1.0
    assert len(raw) == len(b"Pf\n3 2\n-1.0\n") + 2 * 3 * 4


def test_pfm_bottom_up_raster(tmp_path):
    # bottom image row is stored first
    img = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32)
    path = tmp_path / "b.pfm"
    write_pfm(path, img)
    raw = path.read_bytes()
    payload = np.frombuffer(raw[len(b"Pf\n2 2\n-1.0\n"):], dtype="<f4")
    assert payload.tolist() == [3.0, 4.0, 1.0, 2.0]


def test_pfm_rejects_garbage(tmp_path):
    path = tmp_path / "g.pfm"
    path.write_bytes(b"P6\n1 1\n255\n rubbish")
    with pytest.raises(ValueError):
        read_pfm(path)


def test_depth_to_png16_saturates():
    depth = np.array([[0.0, 1.2345, 70.0]])
    mm = depth_to_png16(depth)
    assert mm.dtype == np.uint16
    assert mm[0, 0] == 0
    assert mm[0, 1] == 1234 or mm[0, 1] == 1235  # rounding
    assert mm[0, 2] == 65535  # 70 m saturates
