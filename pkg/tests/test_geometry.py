import numpy as np
import pytest
from hypothesis import given, strategies as st

from trackfuse.errors import BehindCameraError
from trackfuse.geometry import (
    CameraModel,
    RigidTransform,
    project_to_image,
    transform_to_camera,
)


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


class TestTransform:
    def test_identity(self):
        t = RigidTransform.identity()
        assert np.allclose(transform_to_camera([1.0, 2.0, 3.0], t), [1.0, 2.0, 3.0])

    def test_pure_translation(self):
        t = RigidTransform(np.eye(3), [0.0, 0.0, 1.0])
        assert np.allclose(transform_to_camera([0.0, 0.0, 0.0], t), [0.0, 0.0, 1.0])

    def test_rotation_90_about_z(self):
        t = RigidTransform(rot_z(np.pi / 2), np.zeros(3))
        assert np.allclose(transform_to_camera([1.0, 0.0, 0.0], t), [0.0, 1.0, 0.0], atol=1e-12)

    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            RigidTransform(np.eye(3) * 2.0, np.zeros(3))

    def test_rejects_reflection(self):
        r = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(ValueError):
            RigidTransform(r, np.zeros(3))

    @given(st.integers(0, 2**32 - 1))
    def test_isometry(self, seed):
        rng = np.random.default_rng(seed)
        angle = rng.uniform(0, 2 * np.pi)
        axis_rot = rot_z(angle)
        t = RigidTransform(axis_rot, rng.normal(size=3))
        a, b = rng.normal(size=3), rng.normal(size=3)
        d_before = np.linalg.norm(a - b)
        d_after = np.linalg.norm(transform_to_camera(a, t) - transform_to_camera(b, t))
        assert abs(d_before - d_after) < 1e-9


class TestProjection:
    def test_optical_axis_maps_to_principal_point(self):
        cam = CameraModel.simple(fx=100.0, cx=320.0, cy=256.0)
        assert np.allclose(project_to_image([0.0, 0.0, 2.0], cam), [320.0, 256.0])

    def test_pinhole_arithmetic(self):
        cam = CameraModel.simple(fx=100.0, cx=320.0, cy=256.0)
        assert np.allclose(project_to_image([1.0, 0.0, 2.0], cam), [370.0, 256.0])

    def test_behind_camera_raises(self):
        cam = CameraModel.simple(fx=100.0)
        with pytest.raises(BehindCameraError):
            project_to_image([0.0, 0.0, -1.0], cam)
        with pytest.raises(BehindCameraError):
            project_to_image([0.0, 0.0, 0.0], cam)

    def test_zero_distortion_equals_pinhole(self):
        cam0 = CameraModel.simple(fx=480.0, fy=500.0, cx=310.0, cy=250.0, distortion=())
        cam2 = CameraModel.simple(fx=480.0, fy=500.0, cx=310.0, cy=250.0, distortion=(0.0, 0.0))
        rng = np.random.default_rng(3)
        for _ in range(50):
            p = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.5, 6)])
            assert np.allclose(project_to_image(p, cam0), project_to_image(p, cam2))

    def test_distortion_moves_off_center_points_radially(self):
        cam = CameraModel.simple(fx=400.0, cx=320.0, cy=256.0, distortion=(1e-7,))
        uv = project_to_image([0.5, 0.2, 2.0], cam)
        base = project_to_image([0.5, 0.2, 2.0], CameraModel.simple(fx=400.0, cx=320.0, cy=256.0))
        center = np.array([320.0, 256.0])
        off_base = base - center
        off_dist = uv - center
        # same direction, larger magnitude for a positive coefficient
        assert np.linalg.norm(off_dist) > np.linalg.norm(off_base)
        cos = off_base @ off_dist / (np.linalg.norm(off_base) * np.linalg.norm(off_dist))
        assert cos > 1 - 1e-12

    def test_intrinsics_validation(self):
        with pytest.raises(ValueError):
            CameraModel(np.array([[100.0, 0, 320], [5.0, 100.0, 256], [0, 0, 1]]))
        with pytest.raises(ValueError):
            CameraModel.simple(fx=-5.0)
        with pytest.raises(ValueError):
            CameraModel.simple(fx=100.0, cx=900.0)
