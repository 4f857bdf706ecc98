"""Synthetic scene generation: a controllable stand-in for the detector and
the world, used for desk-scale experiments and the test suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..decoder import DetectionRecord, PrimaryHead
from ..geometry import (Box3D, CameraModel, Pose, box3d_to_box2d, encode_orientation,
                        project_to_image, ray_angle)
from ..radar import RadarPoint, RadarSweep, radial_project
from .scene import Scene

# Ego frame: x forward, y left, z up. Camera looks forward from the ego origin.
_EGO_TO_CAM = np.array([[0.0, -1.0, 0.0],
                        [0.0, 0.0, -1.0],
                        [1.0, 0.0, 0.0]])


def default_camera(width: int = 800, height: int = 450,
                   focal: float = 633.0) -> CameraModel:
    return CameraModel(fx=focal, fy=focal, cx=width / 2.0, cy=height / 2.0,
                       width=width, height=height,
                       extrinsic=Pose(_EGO_TO_CAM, np.zeros(3)))


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for scene generation: world, detector noise and radar model."""

    num_objects: tuple = (3, 8)
    depth_range: tuple = (8.0, 40.0)          # camera-frame z of object centers
    num_classes: int = 3
    base_dims: tuple = (1.9, 4.6, 1.7)        # (w, l, h) before jitter
    dims_jitter: float = 0.15
    speed_range: tuple = (1.0, 10.0)
    parked_fraction: float = 0.2
    moving_speed_threshold: float = 0.5
    tangential_fraction: float = 0.0          # 0 keeps GT velocities radial
    occluded_pair_fraction: float = 0.0       # fraction of objects spawning an occluded partner
    avoid_overlap: bool = False               # rejection-sample non-overlapping 2D boxes

    # Detector noise model for the preliminary detections.
    depth_sigma_rel: float = 0.0
    center_px_sigma: float = 0.0
    yaw_sigma: float = 0.0
    dims_sigma_rel: float = 0.0
    score_noise: float = 0.0

    # Radar model.
    points_per_object: int = 1
    radial_sigma: float = 0.0                 # position noise along the line of sight
    lateral_sigma: float = 0.0
    z_mode: str = "true"                      # "true" | "zero" | "uniform"
    z_noise: float = 1.0                      # half-range of the uniform z corruption
    clutter_rate: float = 0.0                 # expected clutter points per scene
    num_sweeps: int = 1
    sweep_dt: float = 0.083

    image_margin: float = 80.0                # keep object centers off the image border

    def __post_init__(self):
        if self.z_mode not in ("true", "zero", "uniform"):
            raise ValueError(f"unknown z_mode {self.z_mode!r}")
        for name in ("depth_sigma_rel", "center_px_sigma", "yaw_sigma",
                     "dims_sigma_rel", "radial_sigma", "lateral_sigma",
                     "clutter_rate", "score_noise"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @staticmethod
    def from_dict(d: dict) -> "SynthConfig":
        d = dict(d)
        for key in ("num_objects", "depth_range", "base_dims", "speed_range"):
            if key in d:
                d[key] = tuple(d[key])
        return SynthConfig(**d)


def _sample_center(rng, cfg: SynthConfig, cam: CameraModel, height: float,
                   u: float | None = None, depth: float | None = None) -> np.ndarray:
    """Ego-frame center on the viewing ray through image column u at given depth."""
    if depth is None:
        depth = rng.uniform(*cfg.depth_range)
    if u is None:
        u = rng.uniform(cfg.image_margin, cam.width - cfg.image_margin)
    x_cam = (u - cam.cx) / cam.fx * depth
    # With the forward-looking extrinsic: ego x = cam z, ego y = -cam x.
    return np.array([depth, -x_cam, height / 2.0])


def _sample_object(rng, cfg: SynthConfig, cam: CameraModel,
                   u: float | None = None, depth: float | None = None) -> Box3D:
    dims = np.array(cfg.base_dims) * (1.0 + rng.uniform(-cfg.dims_jitter,
                                                        cfg.dims_jitter, size=3))
    center = _sample_center(rng, cfg, cam, dims[2], u=u, depth=depth)
    yaw = rng.uniform(-math.pi, math.pi)
    parked = rng.uniform() < cfg.parked_fraction
    if parked:
        velocity = np.zeros(2)
    else:
        speed = rng.uniform(*cfg.speed_range)
        los = center[:2] / np.linalg.norm(center[:2])
        tangent = np.array([-los[1], los[0]])
        sign = 1.0 if rng.uniform() < 0.5 else -1.0
        direction = (1.0 - cfg.tangential_fraction) * sign * los \
            + cfg.tangential_fraction * tangent
        direction /= np.linalg.norm(direction)
        velocity = speed * direction
    attribute = 1 if np.linalg.norm(velocity) > cfg.moving_speed_threshold else 0
    return Box3D(center=center, dims=dims, yaw=yaw, velocity=velocity,
                 class_id=int(rng.integers(cfg.num_classes)), attribute_id=attribute)


def _radar_points_for(rng, cfg: SynthConfig, box: Box3D, timestamp: float) -> list[RadarPoint]:
    points = []
    los = box.center[:2] / np.linalg.norm(box.center[:2])
    for _ in range(cfg.points_per_object):
        pos = box.center.copy()
        pos[:2] += los * rng.normal(0.0, cfg.radial_sigma) if cfg.radial_sigma else 0.0
        if cfg.lateral_sigma:
            pos[:2] += np.array([-los[1], los[0]]) * rng.normal(0.0, cfg.lateral_sigma)
        if cfg.z_mode == "zero":
            pos[2] = 0.0
        elif cfg.z_mode == "uniform":
            pos[2] += rng.uniform(-cfg.z_noise, cfg.z_noise)
        vr = radial_project(pos[:2], box.velocity) if np.linalg.norm(pos[:2]) > 0 else np.zeros(2)
        points.append(RadarPoint(pos[0], pos[1], pos[2], vr[0], vr[1], timestamp))
    return points


def _detector_record(rng, cfg: SynthConfig, cam: CameraModel, box: Box3D) -> DetectionRecord | None:
    try:
        box2d = box3d_to_box2d(box, cam)
        u, v, depth = project_to_image(cam.ego_to_cam(box.center), cam)
    except Exception:
        return None
    if box2d.area <= 0:
        return None
    u += rng.normal(0.0, cfg.center_px_sigma) if cfg.center_px_sigma else 0.0
    v += rng.normal(0.0, cfg.center_px_sigma) if cfg.center_px_sigma else 0.0
    depth_hat = depth * (1.0 + (rng.normal(0.0, cfg.depth_sigma_rel)
                                if cfg.depth_sigma_rel else 0.0))
    depth_hat = max(depth_hat, 0.5)
    dims_hat = box.dims * (1.0 + (rng.normal(0.0, cfg.dims_sigma_rel, size=3)
                                  if cfg.dims_sigma_rel else np.zeros(3)))
    dims_hat = np.maximum(dims_hat, 0.1)
    yaw_hat = box.yaw + (rng.normal(0.0, cfg.yaw_sigma) if cfg.yaw_sigma else 0.0)
    orientation = encode_orientation(yaw_hat, ray_angle(u, cam))
    score = float(np.clip(1.0 - cfg.score_noise * rng.uniform(), 0.01, 1.0))
    primary = PrimaryHead(depth=depth_hat, dims=dims_hat, orientation=orientation,
                          size2d=np.array([box2d.w, box2d.h]))
    return DetectionRecord(box2d=box2d, class_id=box.class_id, score=score,
                           primary=primary, gt_box3d=box,
                           center_px=np.array([u, v]))


def generate_scene(cfg: SynthConfig, seed: int,
                   camera: CameraModel | None = None) -> Scene:
    """Deterministically generate one synthetic scene from (cfg, seed).

    Radar ownership (which GT object produced each point, -1 for clutter) is
    recorded per sweep in scene.radar_owners for diagnostic use.
    """
    rng = np.random.default_rng(seed)
    cam = camera or default_camera()
    timestamp = 0.0

    n = int(rng.integers(cfg.num_objects[0], cfg.num_objects[1] + 1))
    boxes: list[Box3D] = []
    rects: list = []
    for _ in range(n):
        box = _sample_object(rng, cfg, cam)
        if cfg.avoid_overlap:
            accepted = False
            for _attempt in range(50):
                r = box3d_to_box2d(box, cam)
                if all(abs(r.cx - o.cx) > (r.w + o.w) / 2.0
                       or abs(r.cy - o.cy) > (r.h + o.h) / 2.0 for o in rects):
                    rects.append(r)
                    accepted = True
                    break
                box = _sample_object(rng, cfg, cam)
            if not accepted:
                continue
        boxes.append(box)
        if rng.uniform() < cfg.occluded_pair_fraction:
            # Occluded partner: same viewing ray, strictly greater depth.
            u, _, d = project_to_image(cam.ego_to_cam(box.center), cam)
            boxes.append(_sample_object(rng, cfg, cam, u=u, depth=d + rng.uniform(8.0, 15.0)))

    sweeps = []
    owners = []
    for s in range(cfg.num_sweeps):
        ts = timestamp - s * cfg.sweep_dt
        pts: list[RadarPoint] = []
        own: list[int] = []
        for i, box in enumerate(boxes):
            new = _radar_points_for(rng, cfg, box, ts)
            pts.extend(new)
            own.extend([i] * len(new))
        n_clutter = int(rng.poisson(cfg.clutter_rate)) if cfg.clutter_rate > 0 else 0
        for _ in range(n_clutter):
            pos = _sample_center(rng, cfg, cam, height=rng.uniform(0.0, 3.0))
            vel = radial_project(pos[:2], rng.normal(0.0, 5.0, size=2))
            pts.append(RadarPoint(pos[0], pos[1], pos[2], vel[0], vel[1], ts))
            own.append(-1)
        sweeps.append(RadarSweep(points=tuple(pts), ego_pose=Pose.identity(), timestamp=ts))
        owners.append(own)

    records = []
    for box in boxes:
        rec = _detector_record(rng, cfg, cam, box)
        if rec is not None:
            records.append(rec)

    return Scene(scene_id=f"synth-{seed:06d}", timestamp=timestamp, camera=cam,
                 radar_sweeps=sweeps, gt_boxes=boxes, preliminary_dets=records,
                 radar_owners=owners)
