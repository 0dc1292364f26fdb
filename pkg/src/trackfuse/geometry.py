"""Rigid transforms, the thermal-camera model and point projection.

The camera model is an ideal pinhole with an upper-triangular intrinsic
matrix plus a polynomial radial distortion applied in pixel space around
the principal point. Distortion order is configurable through the number
of coefficients; an empty/zero coefficient list gives a pure pinhole.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BehindCameraError

_ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation mapping radar coordinates into camera ones."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        rot = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        tr = np.asarray(self.translation, dtype=float).reshape(3)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tr)
        if not np.allclose(rot @ rot.T, np.eye(3), atol=_ORTHO_TOL):
            raise ValueError("rotation block is not orthonormal")
        if abs(np.linalg.det(rot) - 1.0) > _ORTHO_TOL:
            raise ValueError("rotation block must have determinant +1")

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, point: np.ndarray) -> np.ndarray:
        return transform_to_camera(point, self)


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics, radial distortion coefficients and image size."""

    intrinsics: np.ndarray
    distortion: tuple[float, ...] = (0.0, 0.0)
    width: int = 640
    height: int = 512

    def __post_init__(self) -> None:
        psi = np.asarray(self.intrinsics, dtype=float).reshape(3, 3)
        object.__setattr__(self, "intrinsics", psi)
        object.__setattr__(self, "distortion", tuple(float(c) for c in self.distortion))
        if psi[1, 0] != 0.0 or psi[2, 0] != 0.0 or psi[2, 1] != 0.0 or psi[2, 2] != 1.0:
            raise ValueError("intrinsic matrix must be upper-triangular with unit [2,2]")
        if psi[0, 0] <= 0 or psi[1, 1] <= 0:
            raise ValueError("focal lengths must be positive")
        cx, cy = psi[0, 2], psi[1, 2]
        if not (0 <= cx < self.width and 0 <= cy < self.height):
            raise ValueError("principal point must lie inside the image")

    @classmethod
    def simple(
        cls,
        fx: float,
        fy: float | None = None,
        cx: float = 320.0,
        cy: float = 256.0,
        distortion: Sequence[float] = (0.0, 0.0),
        width: int = 640,
        height: int = 512,
    ) -> "CameraModel":
        fy = fx if fy is None else fy
        psi = np.array([[fx, 0.0, cx], [0.0, fy, cy], [0.0, 0.0, 1.0]])
        return cls(psi, tuple(distortion), width, height)

    @property
    def principal_point(self) -> np.ndarray:
        return self.intrinsics[:2, 2].copy()

    def contains(self, uv: np.ndarray) -> bool:
        u, v = float(uv[0]), float(uv[1])
        return 0.0 <= u < self.width and 0.0 <= v < self.height


def transform_to_camera(point: np.ndarray, t: RigidTransform) -> np.ndarray:
    """Map a 3-vector from radar coordinates into camera coordinates."""
    p = np.asarray(point, dtype=float).reshape(3)
    return t.rotation @ p + t.translation


def project_to_image(point: np.ndarray, cam: CameraModel) -> np.ndarray:
    """Project a camera-frame point to distorted pixel coordinates (u, v).

    Raises BehindCameraError when the point is not strictly in front of
    the camera (z <= 0).
    """
    p = np.asarray(point, dtype=float).reshape(3)
    if p[2] <= 0.0:
        raise BehindCameraError(f"point has non-positive depth z={p[2]:.6g}")
    uvw = cam.intrinsics @ (p / p[2])
    uv = uvw[:2]
    if not any(cam.distortion):
        return uv
    center = cam.principal_point
    offset = uv - center
    r2 = float(offset @ offset)
    scale = 1.0
    rpow = r2
    for coeff in cam.distortion:
        scale += coeff * rpow
        rpow *= r2
    return center + offset * scale
