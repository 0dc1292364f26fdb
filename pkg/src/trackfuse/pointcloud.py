"""Radar point-cloud containers.

A frame stores its points as an (n, 5) float array with columns
[x, y, z, v, p_rx]: Cartesian coordinates (m), radial velocity (m/s) and
received power (linear scale). Simulated frames may additionally carry a
per-point `origins` array (subject index, -1 for clutter) used by the
clustering-quality metrics; real frames leave it as None.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

COLUMNS = ("x", "y", "z", "v", "p_rx")


@dataclass(frozen=True)
class RadarPoint:
    x: float
    y: float
    z: float
    v: float
    p_rx: float

    def __post_init__(self) -> None:
        vals = (self.x, self.y, self.z, self.v, self.p_rx)
        if not all(np.isfinite(vals)):
            raise ValueError("radar point fields must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.v, self.p_rx])


class PointCloudFrame:
    """One radar frame: index k, timestamp k*delta and the detected points."""

    __slots__ = ("index", "timestamp", "points", "origins")

    def __init__(
        self,
        index: int,
        delta: float,
        points: np.ndarray | Iterable[RadarPoint] | None = None,
        origins: np.ndarray | None = None,
    ) -> None:
        if index < 0:
            raise ValueError("frame index must be nonnegative")
        if points is None:
            pts = np.empty((0, 5))
        elif isinstance(points, np.ndarray):
            pts = points.reshape(-1, 5).astype(float)
        else:
            pts = np.array([p.as_array() for p in points]).reshape(-1, 5)
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        self.index = int(index)
        self.timestamp = self.index * delta
        self.points = pts
        if origins is not None:
            origins = np.asarray(origins, dtype=int).reshape(-1)
            if origins.shape[0] != pts.shape[0]:
                raise ValueError("origins length must match point count")
        self.origins = origins

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def xy(self) -> np.ndarray:
        """(n, 2) horizontal-plane coordinates used for clustering."""
        return self.points[:, :2]

    @property
    def velocities(self) -> np.ndarray:
        return self.points[:, 3]

    def to_json_dict(self) -> dict:
        d = {
            "index": self.index,
            "timestamp": self.timestamp,
            "points": [[float(c) for c in row] for row in self.points],
        }
        if self.origins is not None:
            d["origins"] = [int(o) for o in self.origins]
        return d

    @classmethod
    def from_json_dict(cls, d: dict, delta: float) -> "PointCloudFrame":
        pts = np.array(d.get("points", []), dtype=float).reshape(-1, 5)
        origins = d.get("origins")
        return cls(
            int(d["index"]),
            delta,
            pts,
            None if origins is None else np.asarray(origins, dtype=int),
        )
