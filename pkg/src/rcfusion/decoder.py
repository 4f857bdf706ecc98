"""Peak extraction and decoding of regression values into 3D boxes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import MissingSecondary
from .feature_maps import depth_decode
from .geometry import (Box2D, Box3D, CameraModel, backproject, decode_orientation,
                       ray_angle)

DEFAULT_MAX_PEAKS = 100
DEFAULT_PEAK_THRESHOLD = 0.3


@dataclass(frozen=True)
class PrimaryHead:
    """Pre-fusion regression outputs for one detection."""

    depth: float                      # z-depth in the camera frame, meters
    dims: np.ndarray                  # (w, l, h) meters
    orientation: np.ndarray           # 8-scalar two-bin encoding
    offset: np.ndarray = field(default_factory=lambda: np.zeros(2))   # sub-cell (dx, dy)
    size2d: np.ndarray = field(default_factory=lambda: np.zeros(2))   # (w, h) pixels

    def __post_init__(self):
        object.__setattr__(self, "dims", np.asarray(self.dims, dtype=np.float64).reshape(3))
        object.__setattr__(self, "orientation",
                           np.asarray(self.orientation, dtype=np.float64).reshape(8))
        object.__setattr__(self, "offset", np.asarray(self.offset, dtype=np.float64).reshape(2))
        object.__setattr__(self, "size2d", np.asarray(self.size2d, dtype=np.float64).reshape(2))
        if self.depth <= 0:
            raise ValueError("primary depth must be positive")


@dataclass(frozen=True)
class SecondaryHead:
    """Post-fusion regression outputs; present only after radar association."""

    depth: float
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    orientation: Optional[np.ndarray] = None
    attribute_scores: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "velocity",
                           np.asarray(self.velocity, dtype=np.float64).reshape(2))
        if self.orientation is not None:
            object.__setattr__(self, "orientation",
                               np.asarray(self.orientation, dtype=np.float64).reshape(8))
        if self.attribute_scores is not None:
            object.__setattr__(self, "attribute_scores",
                               np.asarray(self.attribute_scores, dtype=np.float64))


@dataclass(frozen=True)
class DetectionRecord:
    """One detected object: 2D box, class/score and regression head values."""

    box2d: Box2D
    class_id: int
    score: float
    primary: PrimaryHead
    secondary: Optional[SecondaryHead] = None
    gt_box3d: Optional[Box3D] = None
    # Refined center pixel (u, v) of the underlying heatmap peak, when known.
    center_px: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.center_px is not None:
            object.__setattr__(self, "center_px",
                               np.asarray(self.center_px, dtype=np.float64).reshape(2))

    def with_secondary(self, secondary: SecondaryHead) -> "DetectionRecord":
        return DetectionRecord(self.box2d, self.class_id, self.score,
                               self.primary, secondary, self.gt_box3d, self.center_px)


@dataclass(frozen=True)
class Peak:
    """A heatmap peak: cell coordinates (x right, y down), score and class."""

    x: int
    y: int
    score: float
    class_id: int


def extract_peaks(heatmap: np.ndarray,
                  max_peaks: int = DEFAULT_MAX_PEAKS,
                  threshold: float = DEFAULT_PEAK_THRESHOLD) -> list[Peak]:
    """Find cells that dominate their 3x3 neighborhood, top-K by score.

    Accepts a (H, W) plane or a (C, H, W) stack. Ties between equal neighbors
    break toward the lower row-major index, so a flat plateau yields one peak.
    """
    hm = np.asarray(heatmap, dtype=np.float64)
    if hm.ndim == 2:
        hm = hm[None]
    peaks: list[Peak] = []
    for c in range(hm.shape[0]):
        plane = hm[c]
        is_peak = plane >= threshold
        h, w = plane.shape
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dy == 0 and dx == 0:
                    continue
                shifted = np.full_like(plane, -np.inf)
                ys = slice(max(dy, 0), h + min(dy, 0))
                xs = slice(max(dx, 0), w + min(dx, 0))
                ys_src = slice(max(-dy, 0), h + min(-dy, 0))
                xs_src = slice(max(-dx, 0), w + min(-dx, 0))
                shifted[ys_src, xs_src] = plane[ys, xs]
                # Neighbor at (dy, dx) has row-major index offset dy*w + dx.
                later = dy > 0 or (dy == 0 and dx > 0)
                if later:
                    ok = (plane > shifted) | (plane == shifted)
                else:
                    ok = plane > shifted
                is_peak &= ok
        ys, xs = np.nonzero(is_peak)
        for y, x in zip(ys.tolist(), xs.tolist()):
            peaks.append(Peak(x=x, y=y, score=float(plane[y, x]), class_id=c))
    peaks.sort(key=lambda p: (-p.score, p.class_id, p.y, p.x))
    return peaks[:max_peaks]


def decode_boxes(peaks, records, stride: float, cam: CameraModel,
                 use_secondary: bool = False) -> list[Box3D]:
    """Turn peaks plus their aligned regression records into 3D boxes.

    Depth, velocity, orientation and attribute come from the secondary head
    when use_secondary is set (or when a record carries one); everything else
    comes from the primary head. The 3D center is the back-projection of the
    refined center pixel at the chosen z-depth, in the egocentric frame.

    Raises:
        MissingSecondary: if use_secondary is set and a record has no secondary.
    """
    if len(peaks) != len(records):
        raise ValueError("peaks and records must align one-to-one")
    boxes: list[Box3D] = []
    for peak, rec in zip(peaks, records):
        u = (peak.x + rec.primary.offset[0]) * stride
        v = (peak.y + rec.primary.offset[1]) * stride
        sec = rec.secondary
        if use_secondary and sec is None:
            raise MissingSecondary(f"record for peak ({peak.x}, {peak.y}) has no secondary head")
        take_sec = use_secondary and sec is not None
        depth = sec.depth if take_sec else rec.primary.depth
        center = cam.cam_to_ego(backproject(u, v, depth, cam))
        ray = ray_angle(u, cam)
        if take_sec and sec.orientation is not None:
            yaw = decode_orientation(sec.orientation, ray)
        else:
            yaw = decode_orientation(rec.primary.orientation, ray)
        velocity = sec.velocity if take_sec else np.zeros(2)
        if take_sec and sec.attribute_scores is not None:
            attribute = int(np.argmax(sec.attribute_scores))
        else:
            attribute = -1
        boxes.append(Box3D(center=center, dims=rec.primary.dims, yaw=yaw,
                           velocity=velocity, class_id=rec.class_id,
                           attribute_id=attribute, score=peak.score))
    return boxes


def records_from_planes(planes: dict, peaks) -> list[DetectionRecord]:
    """Read regression plane values at peak cells into DetectionRecords.

    Expects planes: depth (encoded to the unit interval), dims (3, H, W),
    offset (2, H, W), size2d (2, H, W), orientation (8, H, W). Depth is
    decoded back to meters.
    """
    records = []
    for p in peaks:
        depth = depth_decode(float(planes["depth"][p.y, p.x]))
        dims = planes["dims"][:, p.y, p.x]
        offset = planes["offset"][:, p.y, p.x]
        size2d = planes["size2d"][:, p.y, p.x]
        orientation = planes["orientation"][:, p.y, p.x]
        primary = PrimaryHead(depth=depth, dims=dims, orientation=orientation,
                              offset=offset, size2d=size2d)
        box2d = Box2D(cx=float(p.x), cy=float(p.y), w=float(size2d[0]), h=float(size2d[1]))
        records.append(DetectionRecord(box2d=box2d, class_id=p.class_id,
                                       score=p.score, primary=primary))
    return records
