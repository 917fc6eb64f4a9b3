"""Image and depth file formats.

PNG: 8-bit RGB for renders, 16-bit grayscale for masks and millimeter depth.
PFM: 32-bit float, little-endian (scale header -1.0), bottom-up raster — the
standard disparity/depth interchange format. Depth uses a 0 sentinel for sky
(never infinity), which round-trips exactly through both formats.
"""

from __future__ import annotations

import numpy as np
from PIL import Image


def srgb_encode(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.where(x <= 0.0031308, 12.92 * x, 1.055 * np.power(x, 1.0 / 2.4) - 0.055)


def srgb_decode(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.where(x <= 0.04045, x / 12.92, np.power((x + 0.055) / 1.055, 2.4))


def write_png8(path, rgb: np.ndarray) -> None:
    rgb = np.asarray(rgb)
    if rgb.dtype != np.uint8 or rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("write_png8 expects (H, W, 3) uint8")
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")


def read_png8(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def write_png16(path, img: np.ndarray) -> None:
    img = np.asarray(img)
    if img.dtype != np.uint16 or img.ndim != 2:
        raise ValueError("write_png16 expects (H, W) uint16")
    Image.fromarray(img).save(path, format="PNG")  # uint16 -> I;16


def read_png16(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im, dtype=np.uint16)


def depth_to_png16(depth_m: np.ndarray) -> np.ndarray:
    """Depth in meters -> millimeters, saturating at the uint16 ceiling."""
    mm = np.rint(np.asarray(depth_m, dtype=np.float64) * 1000.0)
    return np.clip(mm, 0, 65535).astype(np.uint16)


def write_pfm(path, data: np.ndarray) -> None:
    """Single-channel PFM: 'Pf', little-endian (scale -1.0), bottom-up rows."""
    data = np.asarray(data, dtype=np.float32)
    if data.ndim != 2:
        raise ValueError("write_pfm expects a 2D array")
    h, w = data.shape
    with open(path, "wb") as f:
        f.write(b"Pf\n")
        f.write(f"{w} {h}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(np.flipud(data).astype("<f4").tobytes())


def read_pfm(path) -> np.ndarray:
    with open(path, "rb") as f:
        header = f.readline().strip()
        if header not in (b"Pf", b"PF"):
            raise ValueError(f"not a PFM file: header {header!r}")
        channels = 3 if header == b"PF" else 1
        dims = f.readline().split()
        w, h = int(dims[0]), int(dims[1])
        scale = float(f.readline().strip())
        endian = "<" if scale < 0 else ">"
        count = w * h * channels
        data = np.frombuffer(f.read(count * 4), dtype=f"{endian}f4", count=count)
    img = data.reshape(h, w, channels) if channels == 3 else data.reshape(h, w)
    return np.flipud(img).astype(np.float32).copy()
