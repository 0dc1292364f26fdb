"""System-wide configuration shared by the tracking, fusion and re-id stages.

Default values match the reference deployment: a 15 Hz frame rate, DBSCAN
with a 0.4 m radius and 10-point density, the 1.2 m / chi-square(99%, 2 dof)
cluster-refinement regions, a 1024-unit weighted ELM, and the fitted
height/distance and temperature-correction coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class SystemConfig:
    # Frame period (s). 1/15 s matches the 15 Hz sensor frame rate.
    delta: float = 1.0 / 15.0

    # Face-detector observation noise variances: bbox center x/y (px^2) and
    # bbox height (px^2).
    r_xc: float = 0.01
    r_yc: float = 0.01
    r_h: float = 20.0

    # Face-track process noise. q_x/q_y are random accelerations of the bbox
    # center (px^2/s^4); a walking face sweeps the image plane at tens of
    # px/s^2, so the default tolerates ~140 px/s^2 maneuvers. q_d is a
    # random acceleration of the metric distance. The calibrated height
    # term is the unsquared 5.148; `sigma_h_is_std` selects whether it is
    # read as a standard deviation (default) or directly as a variance.
    q_x: float = 2.0e4
    q_y: float = 2.0e4
    q_d: float = 5.0
    sigma_h: float = 5.148
    sigma_h_is_std: bool = True

    # DBSCAN parameters: neighborhood radius (m) and minimum neighbor count.
    eps: float = 0.4
    m_pts: int = 10

    # Cluster refinement: nearby-subject radius (m), squared-Mahalanobis
    # gate (chi-square 99%, 2 dof), and the mixture-weight floor scale
    # (clusters with weight < pi_thr_scale / n_group are dropped as noise).
    d_th: float = 1.2
    gamma: float = 9.21
    pi_thr_scale: float = 0.1

    # Weighted ELM: hidden-layer width and ridge regularization.
    elm_hidden: int = 1024
    elm_lambda: float = 0.1

    # Re-identification score window (s).
    reid_window: float = 20.0

    # Temperature correction alpha(d) = a0 + a1 * d.
    a0: float = 1.116
    a1: float = 0.013

    # Bounding-box height hyperbola g(d) = b0 / (d + b1) + b2.
    b0: float = 162.04
    b1: float = 0.61
    b2: float = -14.79

    # Radar tracker: centroid observation noise std (m), white-acceleration
    # process noise std (m/s^2), gating threshold (chi-square 99%, 2 dof)
    # and the track birth/death policy.
    radar_obs_std: float = 0.1
    radar_accel_std: float = 1.0
    gate: float = 9.21
    confirm_hits: int = 3
    delete_misses: int = 10

    # Radar-to-thermal track association: minimum common-track overlap (s)
    # before a pair may be associated, and the cost above which an
    # assignment produced by the Hungarian step is rejected.
    min_overlap_s: float = 2.0
    assoc_cost_max: float = 5.0

    # Gait features: window length (frames), extraction stride (frames)
    # and feature dimension.
    feature_window: int = 45
    feature_stride: int = 5
    feature_dim: int = 16

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ValueError("frame period must be positive")
        for name in ("r_xc", "r_yc", "r_h", "q_x", "q_y", "q_d", "sigma_h"):
            if getattr(self, name) <= 0:
                raise ValueError(f"noise parameter {name} must be positive")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.m_pts < 1:
            raise ValueError("m_pts must be at least 1")

    @property
    def q_h(self) -> float:
        """Process-noise variance of the bbox-height term."""
        return self.sigma_h**2 if self.sigma_h_is_std else self.sigma_h


DEFAULT_CONFIG = SystemConfig()
