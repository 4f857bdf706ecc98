"""RoI frustum construction and radar-pillar-to-object association."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .decoder import DetectionRecord
from .errors import DegenerateBox, InvalidDepth
from .geometry import (Box2D, Box3D, CameraModel, backproject, box3d_corners,
                       decode_orientation, ray_angle)
from .radar import RadarPillar

DEFAULT_DELTA = 0.2  # test-time radial length expansion: +20%


class FrustumMode(enum.Enum):
    TRAIN = "train"
    TEST = "test"


@dataclass(frozen=True)
class FrustumRoI:
    """Image-plane gate plus a radial depth interval along the camera ray."""

    box2d: Box2D
    radial_near: float
    radial_far: float
    mode: FrustumMode

    def __post_init__(self):
        if not 0 < self.radial_near < self.radial_far:
            raise ValueError("need 0 < radial_near < radial_far")
        if self.box2d.area <= 0:
            raise DegenerateBox("frustum gate has zero area")


@dataclass(frozen=True)
class Association:
    object_index: int
    pillar_index: Optional[int]   # None when no radar match
    match_depth: float = math.nan  # radial distance of the matched anchor, meters

    @property
    def matched(self) -> bool:
        return self.pillar_index is not None


def _radial(points_cam: np.ndarray) -> np.ndarray:
    """Radial distance from the camera origin, per point."""
    return np.linalg.norm(np.atleast_2d(points_cam), axis=1)


def estimated_box3d(det: DetectionRecord, cam: CameraModel) -> Box3D:
    """Reconstruct the preliminary 3D box from a record's primary head."""
    if det.primary.depth <= 0:
        raise InvalidDepth(f"estimated depth {det.primary.depth}")
    u, v = det.box2d.cx, det.box2d.cy
    center = cam.cam_to_ego(backproject(u, v, det.primary.depth, cam))
    yaw = decode_orientation(det.primary.orientation, ray_angle(u, cam))
    return Box3D(center=center, dims=det.primary.dims, yaw=yaw,
                 class_id=det.class_id, score=det.score)


def build_frustum(det: DetectionRecord, cam: CameraModel,
                  delta: float = DEFAULT_DELTA,
                  mode: FrustumMode = FrustumMode.TEST) -> FrustumRoI:
    """Build the RoI frustum gating radar association for one detection.

    Train mode uses the GT 3D box: the radial interval is the exact corner
    span (tight frustum). Test mode centers the interval on the estimated
    box's radial distance and sets its half-length to the estimated radial
    half-extent grown by delta.

    Raises:
        InvalidDepth: non-positive estimated depth in test mode.
        DegenerateBox: zero-area 2D gate.
    """
    if det.box2d.area <= 0:
        raise DegenerateBox("detection 2D box has zero area")
    if mode is FrustumMode.TRAIN:
        if det.gt_box3d is None:
            raise ValueError("train-mode frustum requires gt_box3d")
        radial = _radial(cam.ego_to_cam(box3d_corners(det.gt_box3d)))
        near, far = float(radial.min()), float(radial.max())
    else:
        box = estimated_box3d(det, cam)
        radial = _radial(cam.ego_to_cam(box3d_corners(box)))
        d_hat = float(_radial(cam.ego_to_cam(box.center))[0])
        half = (radial.max() - radial.min()) / 2.0 * (1.0 + delta)
        near, far = d_hat - half, d_hat + half
    near = max(near, 1e-6)
    return FrustumRoI(box2d=det.box2d, radial_near=near, radial_far=far, mode=mode)


def _pillar_test_points(pillar: RadarPillar) -> np.ndarray:
    return np.vstack([pillar.anchor.position[None, :], pillar.corners()])


def pillar_in_frustum(pillar: RadarPillar, frustum: FrustumRoI,
                      cam: CameraModel) -> bool:
    """True iff any pillar corner (or the anchor) falls inside the frustum.

    A point counts if it projects inside the 2D gate and its radial distance
    lies within [radial_near, radial_far]. Points behind the camera are
    skipped; a pillar fully behind the camera is outside.
    """
    pts = cam.ego_to_cam(_pillar_test_points(pillar))
    z = pts[:, 2]
    front = z > 0
    if not front.any():
        return False
    pts = pts[front]
    u = cam.fx * pts[:, 0] / pts[:, 2] + cam.cx
    v = cam.fy * pts[:, 1] / pts[:, 2] + cam.cy
    r = _radial(pts)
    inside = ((np.abs(u - frustum.box2d.cx) <= frustum.box2d.w / 2.0)
              & (np.abs(v - frustum.box2d.cy) <= frustum.box2d.h / 2.0)
              & (r >= frustum.radial_near) & (r <= frustum.radial_far))
    return bool(inside.any())


def associate(dets, pillars, cam: CameraModel,
              delta: float = DEFAULT_DELTA,
              mode: FrustumMode = FrustumMode.TEST) -> list[Association]:
    """Associate each detection with the radially closest pillar in its frustum.

    A pillar may serve multiple objects when it passes multiple frustums.
    Ties on radial distance break toward the lower pillar index. Objects with
    no passing pillar get an unmatched Association.
    """
    pillars = list(pillars)
    if pillars:
        # Precompute all pillar test points (anchor + 8 corners) in one batch.
        pts = np.concatenate([_pillar_test_points(p) for p in pillars])
        pts_cam = cam.ego_to_cam(pts).reshape(len(pillars), 9, 3)
        z = pts_cam[..., 2]
        front = z > 0
        zs = np.where(front, z, 1.0)
        u = cam.fx * pts_cam[..., 0] / zs + cam.cx
        v = cam.fy * pts_cam[..., 1] / zs + cam.cy
        r = np.linalg.norm(pts_cam, axis=2)
        anchor_r = r[:, 0]
    out: list[Association] = []
    for i, det in enumerate(dets):
        frustum = build_frustum(det, cam, delta=delta, mode=mode)
        if not pillars:
            out.append(Association(object_index=i, pillar_index=None))
            continue
        inside = (front
                  & (np.abs(u - frustum.box2d.cx) <= frustum.box2d.w / 2.0)
                  & (np.abs(v - frustum.box2d.cy) <= frustum.box2d.h / 2.0)
                  & (r >= frustum.radial_near) & (r <= frustum.radial_far))
        passing = inside.any(axis=1)
        if not passing.any():
            out.append(Association(object_index=i, pillar_index=None))
            continue
        cand = np.nonzero(passing)[0]
        # Anchors behind the camera still rank by radial distance of the anchor.
        best = cand[np.argmin(anchor_r[cand])]
        out.append(Association(object_index=i, pillar_index=int(best),
                               match_depth=float(anchor_r[best])))
    return out


def associate_by_containment(dets, pillars, cam: CameraModel) -> list[Association]:
    """Naive baseline: gate only by 2D box containment of the pillar anchor.

    No radial interval and no pillar extent; each object takes the radially
    closest anchor whose projection lies inside its 2D box. Under occlusion
    this collapses both objects onto the nearest radar return.
    """
    pillars = list(pillars)
    out: list[Association] = []
    if pillars:
        anchors = cam.ego_to_cam(np.vstack([p.anchor.position for p in pillars]))
        z = anchors[:, 2]
        front = z > 0
        zs = np.where(front, z, 1.0)
        u = cam.fx * anchors[:, 0] / zs + cam.cx
        v = cam.fy * anchors[:, 1] / zs + cam.cy
        r = np.linalg.norm(anchors, axis=1)
    for i, det in enumerate(dets):
        if not pillars:
            out.append(Association(object_index=i, pillar_index=None))
            continue
        inside = (front
                  & (np.abs(u - det.box2d.cx) <= det.box2d.w / 2.0)
                  & (np.abs(v - det.box2d.cy) <= det.box2d.h / 2.0))
        if not inside.any():
            out.append(Association(object_index=i, pillar_index=None))
            continue
        cand = np.nonzero(inside)[0]
        best = cand[np.argmin(r[cand])]
        out.append(Association(object_index=i, pillar_index=int(best),
                               match_depth=float(r[best])))
    return out


def multi_claim_count(associations) -> int:
    """Number of pillars claimed by more than one object (diagnostic)."""
    counts: dict[int, int] = {}
    for a in associations:
        if a.pillar_index is not None:
            counts[a.pillar_index] = counts.get(a.pillar_index, 0) + 1
    return sum(1 for c in counts.values() if c > 1)
