"""Grid-space feature generation: GT keypoint heatmaps, radar feature channels
and the reciprocal depth transform."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDepth

DEFAULT_MIN_OVERLAP = 0.7
DEFAULT_RADAR_EXTENT = 0.3       # alpha: radar rectangle half-size as a fraction of the 2D box
DEFAULT_DEPTH_NORMALIZER = 60.0  # M_d, meters
DEFAULT_VELOCITY_NORMALIZER = 10.0  # M_v, m/s

_MAGIC = b"FMAP"


@dataclass
class FeatureMapStack:
    """Named feature planes on a common W/R x H/R grid."""

    width: int          # cells
    height: int         # cells
    stride: float       # pixels per cell
    channels: dict[str, np.ndarray] = field(default_factory=dict)

    def add(self, name: str, plane: np.ndarray) -> None:
        plane = np.asarray(plane, dtype=np.float32)
        if plane.shape[-2:] != (self.height, self.width):
            raise ValueError(f"plane {name} shape {plane.shape} does not match "
                             f"({self.height}, {self.width})")
        self.channels[name] = plane

    def flat_planes(self) -> list[tuple[str, np.ndarray]]:
        """Expand multi-channel entries into individually named 2D planes."""
        out = []
        for name, plane in self.channels.items():
            if plane.ndim == 2:
                out.append((name, plane))
            else:
                for i in range(plane.shape[0]):
                    out.append((f"{name}.{i}", plane[i]))
        return out

    def to_bytes(self) -> bytes:
        """Serialize as little-endian float32 planes with a name header."""
        planes = self.flat_planes()
        parts = [_MAGIC,
                 struct.pack("<IIfI", self.width, self.height, self.stride, len(planes))]
        for name, plane in planes:
            raw = name.encode("utf-8")
            parts.append(struct.pack("<I", len(raw)))
            parts.append(raw)
        for _, plane in planes:
            parts.append(np.ascontiguousarray(plane, dtype="<f4").tobytes())
        return b"".join(parts)

    @staticmethod
    def from_bytes(data: bytes) -> "FeatureMapStack":
        if data[:4] != _MAGIC:
            raise ValueError("bad feature map header")
        width, height, stride, n = struct.unpack_from("<IIfI", data, 4)
        pos = 4 + struct.calcsize("<IIfI")
        names = []
        for _ in range(n):
            (ln,) = struct.unpack_from("<I", data, pos)
            pos += 4
            names.append(data[pos:pos + ln].decode("utf-8"))
            pos += ln
        stack = FeatureMapStack(width=width, height=height, stride=stride)
        for name in names:
            plane = np.frombuffer(data, dtype="<f4", count=width * height, offset=pos)
            pos += width * height * 4
            stack.channels[name] = plane.reshape(height, width).copy()
        return stack


def gaussian_radius(box_w: float, box_h: float,
                    min_overlap: float = DEFAULT_MIN_OVERLAP) -> float:
    """Size-adaptive Gaussian sigma for a 2D box, in cells.

    The underlying radius is the largest center shift that keeps the shifted
    box's IoU with the original at least min_overlap, taken as the minimum of
    the three quadratic-root cases (both corners out, both in, one of each).
    Sigma is max(radius, 1) / 3.
    """
    if box_w <= 0 or box_h <= 0:
        raise ValueError("box size must be positive")
    if not 0 < min_overlap < 1:
        raise ValueError("min_overlap must be in (0, 1)")
    w, h = box_w, box_h

    a1 = 1.0
    b1 = h + w
    c1 = w * h * (1 - min_overlap) / (1 + min_overlap)
    r1 = (b1 - math.sqrt(b1 * b1 - 4 * a1 * c1)) / (2 * a1)

    a2 = 4.0
    b2 = 2 * (h + w)
    c2 = (1 - min_overlap) * w * h
    r2 = (b2 - math.sqrt(b2 * b2 - 4 * a2 * c2)) / (2 * a2)

    a3 = 4.0 * min_overlap
    b3 = -2 * min_overlap * (h + w)
    c3 = (min_overlap - 1) * w * h
    r3 = (b3 + math.sqrt(b3 * b3 - 4 * a3 * c3)) / (2 * a3)

    radius = min(r1, r2, r3)
    return max(radius, 1.0) / 3.0


def render_gt_heatmap(annotations, shape: tuple[int, int], num_classes: int,
                      stride: float, min_overlap: float = DEFAULT_MIN_OVERLAP) -> np.ndarray:
    """Ground-truth keypoint heatmap: per class, max over per-object Gaussians.

    annotations: iterable of (center_px (u, v), class_id, box2d_w_px, box2d_h_px).
    shape: (height, width) in cells. Centers are quantized to their cell, so
    the quantized center cell carries the exact value 1.
    """
    h, w = shape
    planes = np.zeros((num_classes, h, w), dtype=np.float64)
    ys, xs = np.mgrid[0:h, 0:w]
    for center_px, class_id, bw, bh in annotations:
        cx = math.floor(center_px[0] / stride)
        cy = math.floor(center_px[1] / stride)
        sigma = gaussian_radius(bw / stride, bh / stride, min_overlap)
        g = np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2.0 * sigma * sigma))
        np.maximum(planes[class_id], g, out=planes[class_id])
    return planes


def rasterize_radar_features(matches, shape: tuple[int, int], stride: float,
                             extent: float = DEFAULT_RADAR_EXTENT,
                             depth_normalizer: float = DEFAULT_DEPTH_NORMALIZER,
                             velocity_normalizer: float = DEFAULT_VELOCITY_NORMALIZER) -> np.ndarray:
    """Rasterize per-object radar values into (depth, vx, vy) planes.

    matches: iterable of (box2d, depth_m, vx, vy) for every radar-matched
    object; box2d in pixels. Each object fills the rectangle
    |x - cx| <= extent * w, |y - cy| <= extent * h (in cells) with its
    normalized values; where rectangles overlap, the object with the smaller
    depth wins on all three channels. Velocities clamp to [-1, 1] after
    normalization.
    """
    if extent <= 0:
        raise ValueError("extent must be positive")
    if depth_normalizer <= 0 or velocity_normalizer <= 0:
        raise ValueError("normalizers must be positive")
    h, w = shape
    planes = np.zeros((3, h, w), dtype=np.float64)
    zbuf = np.full((h, w), np.inf)
    for box2d, depth, vx, vy in matches:
        cx, cy = box2d.cx / stride, box2d.cy / stride
        hx, hy = extent * box2d.w / stride, extent * box2d.h / stride
        x0 = max(math.ceil(cx - hx), 0)
        x1 = min(math.floor(cx + hx), w - 1)
        y0 = max(math.ceil(cy - hy), 0)
        y1 = min(math.floor(cy + hy), h - 1)
        if x1 < x0 or y1 < y0:
            continue
        region = (slice(y0, y1 + 1), slice(x0, x1 + 1))
        win = depth < zbuf[region]
        vals = (depth / depth_normalizer,
                float(np.clip(vx / velocity_normalizer, -1.0, 1.0)),
                float(np.clip(vy / velocity_normalizer, -1.0, 1.0)))
        for i, val in enumerate(vals):
            planes[i][region] = np.where(win, val, planes[i][region])
        zbuf[region] = np.where(win, depth, zbuf[region])
    return planes


def depth_encode(d: float) -> float:
    """Map a metric depth to the unit interval: d -> 1 / (1 + d)."""
    if d <= 0:
        raise InvalidDepth(f"depth must be positive, got {d}")
    return 1.0 / (1.0 + d)


def depth_decode(y: float) -> float:
    """Invert depth_encode: y -> 1/y - 1, for y in (0, 1)."""
    if not 0.0 < y < 1.0:
        raise InvalidDepth(f"encoded depth must be in (0, 1), got {y}")
    return 1.0 / y - 1.0
