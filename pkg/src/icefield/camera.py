"""Pinhole camera model and the parallel stereo rig."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class CameraIntrinsics:
    sensor_width: float = 60.0  # mm
    focal_length: float = 32.0  # mm
    image_width: int = 640
    image_height: int = 480

    def __post_init__(self):
        for name in ("sensor_width", "focal_length", "image_width", "image_height"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def focal_px(self) -> float:
        return self.focal_length / self.sensor_width * self.image_width


@dataclass(frozen=True)
class CameraPose:
    """Position plus orthonormal (right, up, forward) axes. Image x runs
    along `right`, image y runs along -`up`."""

    position: np.ndarray
    right: np.ndarray
    up: np.ndarray
    forward: np.ndarray

    def __post_init__(self):
        for name in ("position", "right", "up", "forward"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        r, u, f = self.right, self.up, self.forward
        m = np.stack([r, u, f])
        if not np.allclose(m @ m.T, np.eye(3), atol=1e-8):
            raise ValueError("camera axes must be orthonormal")

    def translated(self, offset: np.ndarray) -> "CameraPose":
        return CameraPose(self.position + offset, self.right, self.up, self.forward)


def look_at(position, target, up_hint=(0.0, 0.0, 1.0)) -> CameraPose:
    position = np.asarray(position, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - position
    n = np.linalg.norm(forward)
    if n == 0:
        raise ValueError("look_at target coincides with position")
    forward = forward / n
    hint = np.asarray(up_hint, dtype=np.float64)
    right = np.cross(forward, hint)
    if np.linalg.norm(right) < 1e-9:  # looking along the hint; fall back
        hint = np.array([0.0, 1.0, 0.0])
        right = np.cross(forward, hint)
    right /= np.linalg.norm(right)
    upv = np.cross(right, forward)
    return CameraPose(position=position, right=right, up=upv, forward=forward)


@dataclass(frozen=True)
class StereoRig:
    """Two pinhole cameras with identical intrinsics and parallel optical
    axes; the right camera sits +baseline along the left camera's x axis."""

    intrinsics: CameraIntrinsics = field(default_factory=CameraIntrinsics)
    baseline: float = 0.25  # m
    pose: CameraPose = None  # left camera

    def __post_init__(self):
        if not self.baseline > 0:
            raise ValueError("baseline must be > 0")
        if self.pose is None:
            object.__setattr__(
                self,
                "pose",
                CameraPose(
                    position=np.zeros(3),
                    right=np.array([1.0, 0.0, 0.0]),
                    up=np.array([0.0, 0.0, 1.0]),
                    forward=np.array([0.0, 1.0, 0.0]),
                ),
            )

    def eye_pose(self, eye: str) -> CameraPose:
        if eye == "left":
            return self.pose
        if eye == "right":
            return self.pose.translated(self.baseline * self.pose.right)
        raise ValueError(f"eye must be 'left' or 'right', got {eye!r}")

    def gt_disparity(self, depth: np.ndarray) -> np.ndarray:
        """Ground-truth disparity for left-image depth Z: focal_px * B / Z
        (0 where depth is the 0 sky sentinel)."""
        depth = np.asarray(depth, dtype=np.float64)
        out = np.zeros_like(depth)
        hit = depth > 0
        out[hit] = self.intrinsics.focal_px * self.baseline / depth[hit]
        return out


def primary_rays(intr: CameraIntrinsics, pose: CameraPose, rows=None):
    """Pinhole rays through pixel centers. Returns (origins, dirs) flattened
    row-major over the given row range (default all rows)."""
    w, h = intr.image_width, intr.image_height
    if rows is None:
        rows = (0, h)
    y0, y1 = rows
    xs = (np.arange(w) + 0.5 - w / 2.0) / intr.focal_px
    ys = (np.arange(y0, y1) + 0.5 - h / 2.0) / intr.focal_px
    sx, sy = np.meshgrid(xs, ys)
    d = (
        sx[..., None] * pose.right
        - sy[..., None] * pose.up
        + pose.forward
    )
    d = d / np.linalg.norm(d, axis=-1, keepdims=True)
    d = d.reshape(-1, 3)
    o = np.broadcast_to(pose.position, d.shape)
    return o, d
