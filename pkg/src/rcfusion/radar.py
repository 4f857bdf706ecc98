"""Radar point representation, multi-sweep aggregation and pillar expansion."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePosition
from .geometry import Pose

# Defaults from the fusion configuration: 3 sweeps within 0.25 s,
# pillars of [0.2, 0.2, 1.5] m in (x, y, z).
DEFAULT_SWEEP_WINDOW = 0.25
DEFAULT_MAX_SWEEPS = 3
DEFAULT_PILLAR_DIMS = (0.2, 0.2, 1.5)


@dataclass(frozen=True)
class RadarPoint:
    """A radar return in the egocentric frame.

    (vx, vy) is the ego-motion-compensated radial velocity; it is parallel
    to the BEV line of sight when nonzero.
    """

    x: float
    y: float
    z: float
    vx: float = 0.0
    vy: float = 0.0
    timestamp: float = 0.0

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def velocity(self) -> np.ndarray:
        return np.array([self.vx, self.vy])


@dataclass(frozen=True)
class RadarSweep:
    points: tuple
    ego_pose: Pose = field(default_factory=Pose.identity)
    timestamp: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))


@dataclass(frozen=True)
class RadarPillar:
    """Fixed-size upright box centered on a radar point."""

    anchor: RadarPoint
    half_extents: np.ndarray

    def __post_init__(self):
        he = np.asarray(self.half_extents, dtype=np.float64).reshape(3)
        object.__setattr__(self, "half_extents", he)
        if np.any(he <= 0):
            raise ValueError("pillar half extents must be positive")

    def corners(self) -> np.ndarray:
        """The 8 corners of the axis-aligned pillar box, shape (8, 3)."""
        signs = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)],
                         dtype=np.float64)
        return self.anchor.position + signs * self.half_extents


def aggregate_sweeps(sweeps, current_pose: Pose,
                     window: float = DEFAULT_SWEEP_WINDOW,
                     max_sweeps: int = DEFAULT_MAX_SWEEPS) -> list[RadarPoint]:
    """Merge the newest sweeps into the current egocentric frame.

    Sweeps must be sorted newest-first. A sweep is kept if it is among the
    newest max_sweeps and its age relative to the newest sweep is <= window.
    Positions are moved through global coordinates (current_pose^-1 o sweep_pose);
    velocities are rotated only, never translated.
    """
    sweeps = list(sweeps)
    if not sweeps:
        return []
    newest_ts = sweeps[0].timestamp
    to_current = current_pose.inverse()
    out: list[RadarPoint] = []
    for sweep in sweeps[:max_sweeps]:
        if newest_ts - sweep.timestamp > window:
            continue
        rel = to_current.compose(sweep.ego_pose)
        for p in sweep.points:
            pos = rel.apply(p.position)
            vel = rel.rotation[:2, :2] @ p.velocity
            out.append(RadarPoint(pos[0], pos[1], pos[2], vel[0], vel[1], p.timestamp))
    return out


def radial_project(position_bev, velocity_bev) -> np.ndarray:
    """Project a BEV velocity onto the line of sight through a BEV position.

    Raises:
        DegeneratePosition: if the position has zero norm.
    """
    pos = np.asarray(position_bev, dtype=np.float64).reshape(2)
    vel = np.asarray(velocity_bev, dtype=np.float64).reshape(2)
    norm = np.linalg.norm(pos)
    if norm == 0:
        raise DegeneratePosition("zero BEV position has no line of sight")
    unit = pos / norm
    return float(vel @ unit) * unit


def expand_pillars(points, pillar_dims=DEFAULT_PILLAR_DIMS) -> list[RadarPillar]:
    """Expand each radar point to a fixed-size pillar, preserving order."""
    dims = np.asarray(pillar_dims, dtype=np.float64).reshape(3)
    if np.any(dims <= 0):
        raise ValueError("pillar dims must be positive")
    half = dims / 2.0
    return [RadarPillar(anchor=p, half_extents=half) for p in points]
