"""Scene container and its JSON serialization.

Schema (all angles radians, distances meters, velocities m/s):

    {
      "scene_id": str, "timestamp": float,
      "camera": {"fx","fy","cx","cy","width","height",
                 "extrinsic": {"rotation": 3x3, "translation": [3]}},
      "radar_sweeps": [{"timestamp", "ego_pose": {...},
                        "points": [[x, y, z, vx, vy], ...],
                        "owners": [int, ...]  # optional; -1 = clutter
                       }],
      "gt_boxes": [{"center","dims","yaw","velocity","class_id","attribute_id","score"}],
      "preliminary_dets": [...] | null
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..decoder import DetectionRecord, PrimaryHead, SecondaryHead
from ..geometry import Box2D, Box3D, CameraModel, Pose
from ..radar import RadarPoint, RadarSweep


@dataclass
class Scene:
    scene_id: str
    timestamp: float
    camera: CameraModel
    radar_sweeps: list = field(default_factory=list)
    gt_boxes: list = field(default_factory=list)
    preliminary_dets: Optional[list] = None
    radar_owners: Optional[list] = None   # per sweep, aligned with its points


def _pose_to_dict(pose: Pose) -> dict:
    return {"rotation": pose.rotation.tolist(), "translation": pose.translation.tolist()}


def _pose_from_dict(d: dict) -> Pose:
    return Pose(np.array(d["rotation"]), np.array(d["translation"]))


def _box3d_to_dict(b: Box3D) -> dict:
    return {"center": b.center.tolist(), "dims": b.dims.tolist(), "yaw": b.yaw,
            "velocity": b.velocity.tolist(), "class_id": b.class_id,
            "attribute_id": b.attribute_id, "score": b.score}


def _box3d_from_dict(d: dict) -> Box3D:
    return Box3D(center=np.array(d["center"]), dims=np.array(d["dims"]),
                 yaw=d["yaw"], velocity=np.array(d["velocity"]),
                 class_id=d["class_id"], attribute_id=d["attribute_id"],
                 score=d["score"])


def _box2d_to_dict(b: Box2D) -> dict:
    return {"cx": b.cx, "cy": b.cy, "w": b.w, "h": b.h, "clipped": b.clipped}


def _box2d_from_dict(d: dict) -> Box2D:
    return Box2D(cx=d["cx"], cy=d["cy"], w=d["w"], h=d["h"], clipped=d["clipped"])


def _record_to_dict(r: DetectionRecord) -> dict:
    out = {
        "box2d": _box2d_to_dict(r.box2d),
        "class_id": r.class_id,
        "score": r.score,
        "primary": {
            "depth": r.primary.depth,
            "dims": r.primary.dims.tolist(),
            "orientation": r.primary.orientation.tolist(),
            "offset": r.primary.offset.tolist(),
            "size2d": r.primary.size2d.tolist(),
        },
        "secondary": None,
        "gt_box3d": _box3d_to_dict(r.gt_box3d) if r.gt_box3d is not None else None,
        "center_px": r.center_px.tolist() if r.center_px is not None else None,
    }
    if r.secondary is not None:
        s = r.secondary
        out["secondary"] = {
            "depth": s.depth,
            "velocity": s.velocity.tolist(),
            "orientation": s.orientation.tolist() if s.orientation is not None else None,
            "attribute_scores": (s.attribute_scores.tolist()
                                 if s.attribute_scores is not None else None),
        }
    return out


def _record_from_dict(d: dict) -> DetectionRecord:
    p = d["primary"]
    primary = PrimaryHead(depth=p["depth"], dims=np.array(p["dims"]),
                          orientation=np.array(p["orientation"]),
                          offset=np.array(p["offset"]), size2d=np.array(p["size2d"]))
    secondary = None
    if d.get("secondary") is not None:
        s = d["secondary"]
        secondary = SecondaryHead(
            depth=s["depth"], velocity=np.array(s["velocity"]),
            orientation=np.array(s["orientation"]) if s["orientation"] is not None else None,
            attribute_scores=(np.array(s["attribute_scores"])
                              if s["attribute_scores"] is not None else None))
    gt = _box3d_from_dict(d["gt_box3d"]) if d.get("gt_box3d") is not None else None
    center_px = np.array(d["center_px"]) if d.get("center_px") is not None else None
    return DetectionRecord(box2d=_box2d_from_dict(d["box2d"]), class_id=d["class_id"],
                           score=d["score"], primary=primary, secondary=secondary,
                           gt_box3d=gt, center_px=center_px)


def scene_to_dict(scene: Scene) -> dict:
    sweeps = []
    for i, sw in enumerate(scene.radar_sweeps):
        entry = {
            "timestamp": sw.timestamp,
            "ego_pose": _pose_to_dict(sw.ego_pose),
            "points": [[p.x, p.y, p.z, p.vx, p.vy] for p in sw.points],
        }
        if scene.radar_owners is not None:
            entry["owners"] = list(scene.radar_owners[i])
        sweeps.append(entry)
    cam = scene.camera
    return {
        "scene_id": scene.scene_id,
        "timestamp": scene.timestamp,
        "camera": {"fx": cam.fx, "fy": cam.fy, "cx": cam.cx, "cy": cam.cy,
                   "width": cam.width, "height": cam.height,
                   "extrinsic": _pose_to_dict(cam.extrinsic)},
        "radar_sweeps": sweeps,
        "gt_boxes": [_box3d_to_dict(b) for b in scene.gt_boxes],
        "preliminary_dets": ([_record_to_dict(r) for r in scene.preliminary_dets]
                             if scene.preliminary_dets is not None else None),
    }


def scene_from_dict(d: dict) -> Scene:
    c = d["camera"]
    camera = CameraModel(fx=c["fx"], fy=c["fy"], cx=c["cx"], cy=c["cy"],
                         width=c["width"], height=c["height"],
                         extrinsic=_pose_from_dict(c["extrinsic"]))
    sweeps = []
    owners = []
    has_owners = False
    for sw in d["radar_sweeps"]:
        points = tuple(RadarPoint(x, y, z, vx, vy, timestamp=sw["timestamp"])
                       for x, y, z, vx, vy in sw["points"])
        sweeps.append(RadarSweep(points=points, ego_pose=_pose_from_dict(sw["ego_pose"]),
                                 timestamp=sw["timestamp"]))
        if "owners" in sw:
            has_owners = True
            owners.append(list(sw["owners"]))
        else:
            owners.append([-1] * len(points))
    dets = None
    if d.get("preliminary_dets") is not None:
        dets = [_record_from_dict(r) for r in d["preliminary_dets"]]
    return Scene(scene_id=d["scene_id"], timestamp=d["timestamp"], camera=camera,
                 radar_sweeps=sweeps, gt_boxes=[_box3d_from_dict(b) for b in d["gt_boxes"]],
                 preliminary_dets=dets, radar_owners=owners if has_owners else None)


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2, sort_keys=True))


def load_scene(path) -> Scene:
    return scene_from_dict(json.loads(Path(path).read_text()))
