"""Deterministic BEV rendering of scenes and detections.

Color conventions: GT boxes and GT velocity arrows red, detection boxes cyan,
predicted velocity arrows blue, radar points green. Axes in meters; forward
(ego x) points up, left (ego y) points left.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from ..geometry import Box3D, box3d_corners  # noqa: E402
from ..radar import aggregate_sweeps  # noqa: E402
from .scene import Scene  # noqa: E402

VELOCITY_ARROW_SCALE = 1.0  # seconds: arrow length = speed * scale, in meters


def _bev_outline(box: Box3D):
    # Top-face corners in BEV; plotted as (-y, x) so forward points up.
    corners = box3d_corners(box)
    top = corners[corners[:, 2] >= box.center[2]]
    # Order the 4 top corners around the box perimeter.
    import numpy as np
    rel = top[:, :2] - box.center[:2]
    order = np.argsort(np.arctan2(rel[:, 1], rel[:, 0]))
    ring = top[order][:, :2]
    ring = np.vstack([ring, ring[:1]])
    return -ring[:, 1], ring[:, 0]


def _draw_box(ax, box: Box3D, color: str) -> None:
    xs, ys = _bev_outline(box)
    ax.plot(xs, ys, color=color, linewidth=1.2)


def _draw_arrow(ax, box: Box3D, color: str) -> None:
    vx, vy = box.velocity
    speed = (vx * vx + vy * vy) ** 0.5
    if speed < 1e-6:
        return
    ax.annotate("", xy=(-(box.center[1] + vy * VELOCITY_ARROW_SCALE),
                        box.center[0] + vx * VELOCITY_ARROW_SCALE),
                xytext=(-box.center[1], box.center[0]),
                arrowprops=dict(arrowstyle="->", color=color, lw=1.0))


def render_bev(scene: Scene, detections, path, extent: float = 55.0) -> None:
    """Write a BEV image of GT boxes, detections and radar points.

    Raises:
        OSError: surfaced with the destination path on write failure.
    """
    fig, ax = plt.subplots(figsize=(6, 6), dpi=100)
    ax.set_xlim(-extent / 2, extent / 2)
    ax.set_ylim(0.0, extent)
    ax.set_xlabel("left-right [m]")
    ax.set_ylabel("forward [m]")
    ax.set_aspect("equal")
    ax.grid(True, linewidth=0.3, alpha=0.5)

    if scene.radar_sweeps:
        points = aggregate_sweeps(scene.radar_sweeps, scene.radar_sweeps[0].ego_pose)
        if points:
            ax.scatter([-p.y for p in points], [p.x for p in points],
                       s=8, color="green", marker=".")
    for box in scene.gt_boxes:
        _draw_box(ax, box, "red")
        _draw_arrow(ax, box, "red")
    for box in detections:
        _draw_box(ax, box, "cyan")
        _draw_arrow(ax, box, "blue")

    path = Path(path)
    try:
        fig.savefig(path, metadata={"Software": "rcfusion-bev"})
    except OSError as err:
        raise OSError(f"failed to write {path}: {err}") from err
    finally:
        plt.close(fig)
