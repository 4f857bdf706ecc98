"""Coordinate frames, pinhole projection and 3D box manipulation.

Conventions used throughout the library:

Egocentric frame (right-handed):
  x forward, y left, z up; ground plane at z = 0; units meters.

Camera frame (standard computer vision):
  x right (in image), y down, z forward along the optical axis.

Image frame:
  u right, v down, origin at the top-left corner; units pixels.

Yaw is measured in the egocentric frame about the vertical axis,
zero along +x (forward), positive counter-clockwise when seen from above,
normalized to (-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import FullyBehindCamera, PointBehindCamera

# Two overlapping orientation bins covering [-7pi/6, pi/6] and [-pi/6, 7pi/6].
ORIENTATION_BIN_CENTERS = (-math.pi / 2.0, math.pi / 2.0)
ORIENTATION_BIN_HALF_WIDTH = 2.0 * math.pi / 3.0


def normalize_angle(angle: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = math.fmod(angle, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


@dataclass(frozen=True)
class Pose:
    """Rigid transform: p_out = rotation @ p_in + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        trans = np.asarray(self.translation, dtype=np.float64).reshape(3)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", trans)
        if not np.allclose(rot.T @ rot, np.eye(3), atol=1e-8):
            raise ValueError("rotation is not orthonormal")
        if np.linalg.det(rot) < 0:
            raise ValueError("rotation must be proper (det +1)")

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    @staticmethod
    def from_yaw(yaw: float, translation=(0.0, 0.0, 0.0)) -> "Pose":
        """Rotation about the vertical axis plus a translation."""
        c, s = math.cos(yaw), math.sin(yaw)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return Pose(rot, np.asarray(translation, dtype=np.float64))

    def apply(self, p) -> np.ndarray:
        """Transform one point or an (N, 3) array of points."""
        p = np.asarray(p, dtype=np.float64)
        return p @ self.rotation.T + self.translation

    def rotate(self, v) -> np.ndarray:
        """Apply only the rotation part (for direction-like quantities)."""
        v = np.asarray(v, dtype=np.float64)
        return v @ self.rotation.T

    def inverse(self) -> "Pose":
        rot_inv = self.rotation.T
        return Pose(rot_inv, -rot_inv @ self.translation)

    def compose(self, other: "Pose") -> "Pose":
        """self after other: (self.compose(other)).apply(p) == self.apply(other.apply(p))."""
        return Pose(self.rotation @ other.rotation,
                    self.rotation @ other.translation + self.translation)


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera with a rigid ego-to-camera extrinsic pose."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    extrinsic: Pose = field(default_factory=Pose.identity)

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image size must be positive")

    def ego_to_cam(self, p) -> np.ndarray:
        return self.extrinsic.apply(p)

    def cam_to_ego(self, p) -> np.ndarray:
        return self.extrinsic.inverse().apply(p)


@dataclass(frozen=True)
class Box3D:
    """Oriented 3D bounding box in the egocentric frame."""

    center: np.ndarray
    dims: np.ndarray          # (w, l, h) meters; w along local x, l along local y
    yaw: float
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    class_id: int = 0
    attribute_id: int = -1
    score: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64).reshape(3))
        object.__setattr__(self, "dims", np.asarray(self.dims, dtype=np.float64).reshape(3))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=np.float64).reshape(2))
        object.__setattr__(self, "yaw", normalize_angle(float(self.yaw)))
        if np.any(self.dims <= 0):
            raise ValueError("box dims must be positive")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError("score must be in [0, 1]")

    def with_score(self, score: float) -> "Box3D":
        return replace(self, score=score)


@dataclass(frozen=True)
class Box2D:
    """Axis-aligned image-plane box stored as center + size."""

    cx: float
    cy: float
    w: float
    h: float
    clipped: bool = False

    def __post_init__(self):
        if self.w < 0 or self.h < 0:
            raise ValueError("box size must be non-negative")

    @property
    def area(self) -> float:
        return self.w * self.h

    def contains(self, u: float, v: float) -> bool:
        return abs(u - self.cx) <= self.w / 2.0 and abs(v - self.cy) <= self.h / 2.0


def transform_point(p, pose: Pose) -> np.ndarray:
    """Apply a rigid pose to a 3D point."""
    return pose.apply(p)


def project_to_image(p_cam, cam: CameraModel):
    """Project a camera-frame point to (u, v, depth).

    Raises:
        PointBehindCamera: if the point has depth z <= 0.
    """
    x, y, z = np.asarray(p_cam, dtype=np.float64).reshape(3)
    if z <= 0:
        raise PointBehindCamera(f"z = {z}")
    return cam.fx * x / z + cam.cx, cam.fy * y / z + cam.cy, z


def backproject(u: float, v: float, depth: float, cam: CameraModel) -> np.ndarray:
    """Invert the pinhole projection: pixel + z-depth -> camera-frame point."""
    if depth <= 0:
        raise PointBehindCamera(f"depth = {depth}")
    return np.array([(u - cam.cx) / cam.fx * depth,
                     (v - cam.cy) / cam.fy * depth,
                     depth])


def ray_angle(u: float, cam: CameraModel) -> float:
    """BEV azimuth (in the egocentric frame) of the viewing ray through pixel column u."""
    d_cam = np.array([(u - cam.cx) / cam.fx, 0.0, 1.0])
    d_ego = cam.extrinsic.inverse().rotate(d_cam)
    return math.atan2(d_ego[1], d_ego[0])


# Corner sign pattern, fixed order: local (x, y, z) in units of half-dims.
_CORNER_SIGNS = np.array([
    [+1, +1, +1], [+1, +1, -1], [+1, -1, +1], [+1, -1, -1],
    [-1, +1, +1], [-1, +1, -1], [-1, -1, +1], [-1, -1, -1],
], dtype=np.float64)


def box3d_corners(box: Box3D) -> np.ndarray:
    """Return the 8 corners of the yaw-rotated cuboid, shape (8, 3)."""
    local = _CORNER_SIGNS * (box.dims / 2.0)
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return local @ rot.T + box.center


def box3d_to_box2d(box: Box3D, cam: CameraModel) -> Box2D:
    """Axis-aligned image box of the projected visible corners, clipped to the image.

    Raises:
        FullyBehindCamera: if every corner has camera-frame z <= 0.
    """
    corners_cam = cam.ego_to_cam(box3d_corners(box))
    visible = corners_cam[corners_cam[:, 2] > 0]
    if visible.size == 0:
        raise FullyBehindCamera("all corners behind camera")
    u = cam.fx * visible[:, 0] / visible[:, 2] + cam.cx
    v = cam.fy * visible[:, 1] / visible[:, 2] + cam.cy
    u0, u1 = float(u.min()), float(u.max())
    v0, v1 = float(v.min()), float(v.max())
    cu0, cu1 = max(u0, 0.0), min(u1, float(cam.width))
    cv0, cv1 = max(v0, 0.0), min(v1, float(cam.height))
    clipped = (cu0, cu1, cv0, cv1) != (u0, u1, v0, v1) or len(visible) < 8
    cu1, cv1 = max(cu1, cu0), max(cv1, cv0)
    return Box2D(cx=(cu0 + cu1) / 2.0, cy=(cv0 + cv1) / 2.0,
                 w=cu1 - cu0, h=cv1 - cv0, clipped=clipped)


def _bin_offset(angle: float, center: float) -> float:
    """Signed offset of angle from a bin center, wrapped to (-pi, pi]."""
    return normalize_angle(angle - center)


def encode_orientation(yaw: float, ray: float) -> np.ndarray:
    """Encode a global yaw as the 8-scalar two-bin observation-angle representation.

    Per bin: [in_bin, out_of_bin] one-hot indicator followed by (sin, cos) of
    the offset from the bin center. The encoded angle is the ray-relative
    observation angle, yaw - ray.
    """
    obs = normalize_angle(yaw - ray)
    out = np.zeros(8)
    for b, center in enumerate(ORIENTATION_BIN_CENTERS):
        off = _bin_offset(obs, center)
        in_bin = abs(off) <= ORIENTATION_BIN_HALF_WIDTH
        out[4 * b + 0] = 1.0 if in_bin else 0.0
        out[4 * b + 1] = 0.0 if in_bin else 1.0
        out[4 * b + 2] = math.sin(off)
        out[4 * b + 3] = math.cos(off)
    return out


def decode_orientation(scalars, ray: float) -> float:
    """Invert encode_orientation: pick the higher-scored bin, add back the ray angle."""
    s = np.asarray(scalars, dtype=np.float64).reshape(8)
    b = 0 if s[0] >= s[4] else 1
    center = ORIENTATION_BIN_CENTERS[b]
    obs = center + math.atan2(s[4 * b + 2], s[4 * b + 3])
    return normalize_angle(obs + ray)
