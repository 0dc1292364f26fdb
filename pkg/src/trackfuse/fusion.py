"""Radar/thermal track-to-track association and temperature correction.

Tracks from the two sensors are compared over their common frames through
two variance-normalized mean squared discrepancies: the subjects' distance
from the sensors, and the horizontal pixel coordinate after projecting the
radar position onto the image plane. Their sum, weighted by 1/log(K*delta)
to favor long overlaps, feeds a Hungarian assignment. Raw thermal readings
are corrected by the distance-dependent factor alpha(d) = a0 + a1*d, using
radar distances for fused pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import hypot, log

import numpy as np

from .assignment import forbidden_sentinel, solve_assignment
from .config import SystemConfig
from .errors import BehindCameraError, InsufficientDataError, NoOverlapError
from .geometry import CameraModel, RigidTransform, project_to_image, transform_to_camera
from .radar import RadarTrack
from .thermal import FaceTrack


def radar_distance(state: np.ndarray) -> float:
    """Subject distance from the sensor origin (ground-plane Pythagoras)."""
    return hypot(float(state[0]), float(state[1]))


def radar_distance_variance(state: np.ndarray, cov: np.ndarray) -> float:
    d = radar_distance(state)
    if d < 1e-9:
        return float(max(cov[0, 0], cov[1, 1]))
    jac = np.asarray(state[:2], dtype=float) / d
    return float(jac @ cov[:2, :2] @ jac)


def project_radar_u(
    state: np.ndarray, cam: CameraModel, transform: RigidTransform
) -> float:
    """Horizontal pixel coordinate of a radar position.

    The 2-D radar position is augmented with a zero height, mapped into the
    camera frame and projected with distortion; only the u component is kept.
    Raises BehindCameraError for positions behind the image plane.
    """
    aug = np.array([float(state[0]), float(state[1]), 0.0])
    return float(project_to_image(transform_to_camera(aug, transform), cam)[0])


def project_radar_u_variance(
    state: np.ndarray,
    cov: np.ndarray,
    cam: CameraModel,
    transform: RigidTransform,
    step: float = 1e-5,
) -> float:
    """First-order propagation of the x-y position covariance through the
    projection, with a central-difference Jacobian."""
    jac = np.zeros(2)
    for axis in range(2):
        hi = np.array(state, dtype=float)
        lo = np.array(state, dtype=float)
        hi[axis] += step
        lo[axis] -= step
        jac[axis] = (
            project_radar_u(hi, cam, transform) - project_radar_u(lo, cam, transform)
        ) / (2.0 * step)
    return float(jac @ cov[:2, :2] @ jac)


def _common_frames(radar: RadarTrack, face: FaceTrack) -> list[int]:
    return sorted(set(radar.history) & set(face.history))


def cost_distance(radar: RadarTrack, face: FaceTrack, frames: list[int] | None = None) -> float:
    """Mean squared distance discrepancy, normalized by the summed variances."""
    frames = _common_frames(radar, face) if frames is None else frames
    if not frames:
        raise NoOverlapError("tracks share no frames")
    total = 0.0
    for k in frames:
        rs, rp = radar.history[k]
        fs, fp = face.history[k]
        di = radar_distance(rs)
        dj = float(fs[5])
        var = radar_distance_variance(rs, rp) + float(fp[5, 5])
        total += (di - dj) ** 2 / var
    return total / len(frames)


def cost_horizontal(
    radar: RadarTrack,
    face: FaceTrack,
    cam: CameraModel,
    transform: RigidTransform,
    frames: list[int] | None = None,
) -> float:
    """Mean squared horizontal-pixel discrepancy between the projected radar
    position and the bounding-box center, variance-normalized.

    Frames whose radar position falls behind the camera are skipped; raises
    NoOverlapError when every frame is skipped.
    """
    frames = _common_frames(radar, face) if frames is None else frames
    if not frames:
        raise NoOverlapError("tracks share no frames")
    total = 0.0
    used = 0
    for k in frames:
        rs, rp = radar.history[k]
        fs, fp = face.history[k]
        try:
            xi = project_radar_u(rs, cam, transform)
            var_i = project_radar_u_variance(rs, rp, cam, transform)
        except BehindCameraError:
            continue
        xj = float(fs[0])
        var_j = float(fp[0, 0])
        total += (xi - xj) ** 2 / (var_i + var_j)
        used += 1
    if used == 0:
        raise NoOverlapError("all common frames fall behind the camera")
    return total / used


def track_length_weight(k: int, delta: float) -> float:
    """Overlap-length weight 1/log(K*delta); favors long common tracks."""
    kd = k * delta
    if kd <= 1.0 + 1e-12:
        raise NoOverlapError(f"overlap K*delta = {kd:.3g} is inside the log singularity")
    return 1.0 / log(kd)


@dataclass
class TrackPairCosts:
    """Cost matrix A(i, j) plus its components, for reporting/ablation."""

    radar_ids: list[int]
    face_ids: list[int]
    total: np.ndarray
    distance: np.ndarray
    horizontal: np.ndarray
    overlap: np.ndarray


@dataclass
class FusedIdentity:
    radar_id: int
    face_id: int
    cost: float
    overlap_frames: int
    t_hat: float | None = None
    per_frame: list[dict] = field(default_factory=list)
    used_radar_distances: bool = False


def pair_costs(
    radar_tracks: list[RadarTrack],
    face_tracks: list[FaceTrack],
    cam: CameraModel,
    transform: RigidTransform,
    config: SystemConfig | None = None,
    use_distance: bool = True,
    use_horizontal: bool = True,
    use_rho: bool = True,
) -> TrackPairCosts:
    """Association cost matrix; forbidden pairs carry +inf.

    The `use_*` switches support ablation studies: disabling a component
    removes its term (or sets the overlap weight to 1).
    """
    cfg = config or SystemConfig()
    n_r, n_f = len(radar_tracks), len(face_tracks)
    total = np.full((n_r, n_f), np.inf)
    dist = np.full((n_r, n_f), np.nan)
    horiz = np.full((n_r, n_f), np.nan)
    overlap = np.zeros((n_r, n_f), dtype=int)
    min_frames = cfg.min_overlap_s / cfg.delta
    for i, rt in enumerate(radar_tracks):
        for j, ft in enumerate(face_tracks):
            frames = _common_frames(rt, ft)
            overlap[i, j] = len(frames)
            if len(frames) < min_frames:
                continue
            cost = 0.0
            try:
                if use_distance:
                    dist[i, j] = cost_distance(rt, ft, frames)
                    cost += dist[i, j]
                if use_horizontal:
                    horiz[i, j] = cost_horizontal(rt, ft, cam, transform, frames)
                    cost += horiz[i, j]
                rho = track_length_weight(len(frames), cfg.delta) if use_rho else 1.0
            except NoOverlapError:
                continue
            total[i, j] = rho * cost
    return TrackPairCosts(
        radar_ids=[t.id for t in radar_tracks],
        face_ids=[t.id for t in face_tracks],
        total=total,
        distance=dist,
        horizontal=horiz,
        overlap=overlap,
    )


def associate_tracks(
    radar_tracks: list[RadarTrack],
    face_tracks: list[FaceTrack],
    cam: CameraModel,
    transform: RigidTransform,
    config: SystemConfig | None = None,
    **cost_switches: bool,
) -> list[FusedIdentity]:
    """One-to-one minimum-cost association of radar and face tracks.

    Pairs whose overlap is below the minimum window are never formed, and
    assignments whose final cost exceeds the acceptance threshold are
    dropped rather than forced.
    """
    cfg = config or SystemConfig()
    if not radar_tracks or not face_tracks:
        return []
    costs = pair_costs(radar_tracks, face_tracks, cam, transform, cfg, **cost_switches)
    finite = np.isfinite(costs.total)
    if not finite.any():
        return []
    matrix = costs.total.copy()
    sentinel = forbidden_sentinel(matrix[finite])
    matrix[~finite] = sentinel
    fused = []
    for i, j in solve_assignment(matrix):
        if matrix[i, j] >= sentinel or matrix[i, j] > cfg.assoc_cost_max:
            continue
        fused.append(
            FusedIdentity(
                radar_id=costs.radar_ids[i],
                face_id=costs.face_ids[j],
                cost=float(matrix[i, j]),
                overlap_frames=int(costs.overlap[i, j]),
            )
        )
    return fused


def associate_in_rounds(
    radar_tracks: list[RadarTrack],
    face_tracks: list[FaceTrack],
    cam: CameraModel,
    transform: RigidTransform,
    config: SystemConfig | None = None,
    **cost_switches: bool,
) -> list[FusedIdentity]:
    """Replay the pipeline's association schedule over finished tracks.

    Face tracks are associated in batches by the frame they ended on (the
    moment the subject left the camera view); each batch is a one-to-one
    round, and a radar track may pick up fragments across rounds. Used for
    post-hoc evaluation and cost ablations.
    """
    by_death: dict[int, list[FaceTrack]] = {}
    for ft in face_tracks:
        if ft.history:
            by_death.setdefault(max(ft.history), []).append(ft)
    fused: list[FusedIdentity] = []
    for death_frame in sorted(by_death):
        fused.extend(
            associate_tracks(
                radar_tracks, by_death[death_frame], cam, transform, config, **cost_switches
            )
        )
    return fused


@dataclass(frozen=True)
class AlphaModel:
    """Distance correction for raw thermal readings: T = alpha(d) * T_raw."""

    a0: float
    a1: float

    def value(self, d: float) -> float:
        return self.a0 + self.a1 * d


def fit_alpha(samples: np.ndarray) -> AlphaModel:
    """Closed-form least squares for the correction coefficients.

    `samples` rows are (T_raw, d, T_true); the residual is
    T_true - (a0 + a1 d) * T_raw, linear in (a0, a1).
    """
    data = np.asarray(samples, dtype=float).reshape(-1, 3)
    t_raw, d, t_true = data[:, 0], data[:, 1], data[:, 2]
    if data.shape[0] < 2 or np.unique(d).size < 2:
        raise InsufficientDataError("need at least 2 samples with distinct distances")
    design = np.column_stack([t_raw, d * t_raw])
    if np.linalg.matrix_rank(design) < 2:
        raise InsufficientDataError("rank-deficient design (distances or readings degenerate)")
    coef, *_ = np.linalg.lstsq(design, t_true, rcond=None)
    return AlphaModel(a0=float(coef[0]), a1=float(coef[1]))


def corrected_temperature(
    face: FaceTrack,
    alpha: AlphaModel,
    radar_distances: dict[int, float] | None = None,
) -> tuple[float, list[dict], bool]:
    """Averaged distance-corrected temperature for one face track.

    Each raw reading is scaled by alpha at that frame's distance, taken
    from the associated radar track when available and from the face
    track's own (coarser) estimate otherwise. Returns the estimate, the
    per-frame contributions and whether radar distances were used for
    every reading.
    """
    if not face.readings:
        raise InsufficientDataError("face track has no temperature readings")
    radar_distances = radar_distances or {}
    per_frame = []
    corrected = []
    all_radar = True
    for reading in face.readings:
        if reading.frame in radar_distances:
            d = radar_distances[reading.frame]
            source = "radar"
        else:
            d = reading.distance
            source = "tc"
            all_radar = False
        value = alpha.value(d) * reading.temp
        corrected.append(value)
        per_frame.append(
            {
                "frame": reading.frame,
                "t_raw": reading.temp,
                "distance": d,
                "distance_source": source,
                "t_corrected": value,
            }
        )
    return float(np.mean(corrected)), per_frame, all_radar
