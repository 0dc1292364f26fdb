"""Thermal-camera face tracking and temperature reading.

Face bounding boxes are tracked with an extended Kalman filter whose state
couples the image-plane motion of the box center with the subject's metric
distance from the camera. The coupling is the hyperbola h = g(d) relating
box height to distance; g is fitted offline from (distance, height) samples
with Levenberg-Marquardt. Because the process noise enters the transition
nonlinearly (through g), the filter propagates a transformed process-noise
covariance L Q L^T with L the noise Jacobian at the current estimate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assignment import forbidden_sentinel, solve_assignment
from .config import SystemConfig
from .errors import (
    ConvergenceError,
    DistanceRangeError,
    EmptyPatchError,
    InsufficientDataError,
)

STATE_DIM = 7  # [xc, yc, vxc, vyc, h, d, dd]
NOISE_DIM = 4  # [ux, uy, uh, ud]

H_OBS = np.zeros((3, STATE_DIM))
H_OBS[0, 0] = 1.0
H_OBS[1, 1] = 1.0
H_OBS[2, 4] = 1.0


@dataclass(frozen=True)
class GModel:
    """Bounding-box height as a function of distance: g(d) = b0/(d+b1) + b2."""

    b0: float
    b1: float
    b2: float
    residual_variance: float = 0.0

    def __post_init__(self) -> None:
        if self.b0 == 0.0:
            raise ValueError("b0 must be nonzero")

    def value(self, d: float) -> float:
        denom = d + self.b1
        if denom <= 0.0:
            raise DistanceRangeError(f"distance {d:.3g} outside hyperbola domain")
        return self.b0 / denom + self.b2

    def derivative(self, d: float) -> float:
        denom = d + self.b1
        if denom <= 0.0:
            raise DistanceRangeError(f"distance {d:.3g} outside hyperbola domain")
        return -self.b0 / denom**2

    def inverse(self, h: float) -> float:
        """Distance whose box height is h; valid for h on the g range."""
        if h == self.b2:
            raise DistanceRangeError("height equals the hyperbola asymptote")
        return self.b0 / (h - self.b2) - self.b1


def fit_g(
    samples: np.ndarray,
    max_iter: int = 200,
    lm_lambda0: float = 1e-3,
) -> GModel:
    """Least-squares hyperbola fit of (distance, height) pairs.

    Levenberg-Marquardt with multiplicative damping: lambda x10 on a
    rejected step, /10 on an accepted one.
    """
    data = np.asarray(samples, dtype=float).reshape(-1, 2)
    d, h = data[:, 0], data[:, 1]
    if data.shape[0] < 3 or np.unique(d).size < 3:
        raise InsufficientDataError("need at least 3 samples with 3 distinct distances")

    # Linear warm start with b1 fixed at 1: h ~ b0 * 1/(d+1) + b2.
    basis = np.column_stack([1.0 / (d + 1.0), np.ones_like(d)])
    warm, *_ = np.linalg.lstsq(basis, h, rcond=None)
    params = np.array([warm[0] if abs(warm[0]) > 1e-9 else 1.0, 1.0, warm[1]])

    def residuals(p: np.ndarray) -> np.ndarray:
        return h - (p[0] / (d + p[1]) + p[2])

    def jacobian(p: np.ndarray) -> np.ndarray:
        denom = d + p[1]
        return np.column_stack([-1.0 / denom, p[0] / denom**2, -np.ones_like(d)])

    lam = lm_lambda0
    cost = float(residuals(params) @ residuals(params))
    converged = False
    for _ in range(max_iter):
        r = residuals(params)
        jac = jacobian(params)
        jtj = jac.T @ jac
        grad = jac.T @ r
        step_ok = False
        prev_cost = cost
        for _ in range(50):
            damped = jtj + lam * np.diag(np.maximum(np.diag(jtj), 1e-12))
            try:
                delta = np.linalg.solve(damped, -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = params + delta
            if trial[1] <= -d.min():  # keep every sample in the domain
                lam *= 10.0
                continue
            trial_cost = float(residuals(trial) @ residuals(trial))
            if trial_cost < cost:
                params, cost = trial, trial_cost
                lam = max(lam / 10.0, 1e-12)
                step_ok = True
                break
            lam *= 10.0
        if not step_ok or prev_cost - cost < 1e-12 * (1.0 + cost):
            converged = True
            break
    if not converged:
        raise ConvergenceError(f"hyperbola fit did not converge (cost {cost:.3g})")
    return GModel(
        b0=float(params[0]),
        b1=float(params[1]),
        b2=float(params[2]),
        residual_variance=cost / data.shape[0],
    )


def transition(state: np.ndarray, noise: np.ndarray, g: GModel, delta: float) -> np.ndarray:
    """EKF state transition; the box height is tied to distance through g."""
    xc, yc, vx, vy, _, d, dd = state
    ux, uy, uh, ud = noise
    half = delta**2 / 2.0
    d_next = d + delta * dd + ud * half
    return np.array(
        [
            xc + delta * vx + ux * half,
            yc + delta * vy + uy * half,
            vx + ux * delta,
            vy + uy * delta,
            g.value(d_next) + uh,
            d_next,
            dd + ud * delta,
        ]
    )


def state_jacobian(state: np.ndarray, g: GModel, delta: float) -> np.ndarray:
    """d(transition)/d(state) at zero noise."""
    f = np.eye(STATE_DIM)
    f[0, 2] = delta
    f[1, 3] = delta
    d_pred = state[5] + delta * state[6]
    slope = g.derivative(d_pred)
    f[4, 4] = 0.0
    f[4, 5] = slope
    f[4, 6] = slope * delta
    f[5, 6] = delta
    return f


def noise_jacobian(state: np.ndarray, g: GModel, delta: float) -> np.ndarray:
    """d(transition)/d(noise) at zero noise (columns: ux, uy, uh, ud)."""
    half = delta**2 / 2.0
    jac = np.zeros((STATE_DIM, NOISE_DIM))
    jac[0, 0] = half
    jac[1, 1] = half
    jac[2, 0] = delta
    jac[3, 1] = delta
    d_pred = state[5] + delta * state[6]
    jac[4, 2] = 1.0
    jac[4, 3] = g.derivative(d_pred) * half
    jac[5, 3] = half
    jac[6, 3] = delta
    return jac


def _symmetrize(p: np.ndarray) -> np.ndarray:
    return (p + p.T) / 2.0


@dataclass
class TemperatureReading:
    frame: int
    temp: float
    distance: float
    distance_var: float


@dataclass
class FaceTrack:
    """One tracked face in the thermal image plane."""

    id: int
    state: np.ndarray
    cov: np.ndarray
    age: int = 1
    hits: int = 1
    misses: int = 0
    confirmed: bool = False
    history: dict[int, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    readings: list[TemperatureReading] = field(default_factory=list)

    @property
    def center(self) -> np.ndarray:
        return self.state[:2].copy()

    @property
    def box_height(self) -> float:
        return float(self.state[4])

    @property
    def distance(self) -> float:
        return float(self.state[5])


def ekf_predict(track: FaceTrack, g: GModel, q: np.ndarray, delta: float) -> None:
    """In-place prediction through the nonlinear transition."""
    d_pred = track.state[5] + delta * track.state[6]
    if d_pred + g.b1 <= 0.0:
        raise DistanceRangeError(f"predicted distance {d_pred:.3g} leaves the g domain")
    f = state_jacobian(track.state, g, delta)
    lmat = noise_jacobian(track.state, g, delta)
    track.state = transition(track.state, np.zeros(NOISE_DIM), g, delta)
    q_prime = lmat @ q @ lmat.T
    track.cov = _symmetrize(f @ track.cov @ f.T + q_prime)


def ekf_update(track: FaceTrack, observation: np.ndarray, r: np.ndarray) -> None:
    """In-place update with a (center_x, center_y, height) observation."""
    z = np.asarray(observation, dtype=float).reshape(3)
    if not np.all(np.isfinite(z)):
        raise ValueError("observation must be finite")
    if z[2] <= 0.0:
        raise ValueError("bounding-box height must be positive")
    innov = z - H_OBS @ track.state
    s = H_OBS @ track.cov @ H_OBS.T + r
    k = track.cov @ H_OBS.T @ np.linalg.inv(s)
    track.state = track.state + k @ innov
    ikh = np.eye(STATE_DIM) - k @ H_OBS
    track.cov = _symmetrize(ikh @ track.cov @ ikh.T + k @ r @ k.T)


def read_temperature(patch: np.ndarray | float) -> float:
    """Raw temperature of a bounding-box pixel patch: the maximum pixel.

    Accepts a scalar passthrough for pipelines that pre-reduce the patch.
    """
    if np.isscalar(patch):
        return float(patch)
    arr = np.asarray(patch, dtype=float)
    if arr.size == 0:
        raise EmptyPatchError("empty bounding-box patch")
    return float(arr.max())


@dataclass(frozen=True)
class FaceDetection:
    center_x: float
    center_y: float
    height: float
    temp_max: float


class FaceTracker:
    """Frame-by-frame EKF tracker over face detections."""

    def __init__(self, g: GModel, config: SystemConfig | None = None):
        self.g = g
        self.config = config or SystemConfig()
        c = self.config
        self.q = np.diag([c.q_x, c.q_y, c.q_h, c.q_d])
        self.r = np.diag([c.r_xc, c.r_yc, c.r_h])
        self.tracks: list[FaceTrack] = []
        self.dead_tracks: list[FaceTrack] = []
        self._next_id = 0

    def predict(self) -> None:
        for track in self.tracks:
            ekf_predict(track, self.g, self.q, self.config.delta)

    def step(self, frame_index: int, detections: list[FaceDetection]) -> list[FaceTrack]:
        """Predict, associate, update and manage lifecycle for one frame.

        Returns the tracks that died this frame (for fusion triggering).
        """
        self.predict()
        valid = [det for det in detections if det.height > 0.0]
        pairs, unassigned_d = self._associate(valid)

        assigned = set()
        for ti, di in pairs:
            track = self.tracks[ti]
            det = valid[di]
            ekf_update(track, np.array([det.center_x, det.center_y, det.height]), self.r)
            track.hits += 1
            track.misses = 0
            if track.hits >= self.config.confirm_hits:
                track.confirmed = True
            track.readings.append(
                TemperatureReading(
                    frame=frame_index,
                    temp=det.temp_max,
                    distance=track.distance,
                    distance_var=float(track.cov[5, 5]),
                )
            )
            assigned.add(ti)

        for ti, track in enumerate(self.tracks):
            track.age += 1
            if ti not in assigned:
                track.misses += 1
                track.hits = 0
            track.history[frame_index] = (track.state.copy(), track.cov.copy())

        died: list[FaceTrack] = []
        survivors: list[FaceTrack] = []
        for track in self.tracks:
            if track.misses >= self.config.delete_misses:
                died.append(track)
                self.dead_tracks.append(track)
            else:
                survivors.append(track)
        self.tracks = survivors

        for di in unassigned_d:
            self._spawn(frame_index, valid[di])
        return died

    def _associate(self, detections: list[FaceDetection]) -> tuple[list[tuple[int, int]], list[int]]:
        n_t, n_d = len(self.tracks), len(detections)
        if n_t == 0 or n_d == 0:
            return [], list(range(n_d))
        centers = np.array([[d.center_x, d.center_y] for d in detections])
        cost = np.zeros((n_t, n_d))
        r_xy = self.r[:2, :2]
        for i, track in enumerate(self.tracks):
            s = track.cov[:2, :2] + r_xy
            s_inv = np.linalg.inv(s)
            diff = centers - track.state[:2]
            cost[i] = np.einsum("nj,jk,nk->n", diff, s_inv, diff)
        sentinel = forbidden_sentinel(cost)
        gated = np.where(cost <= self.config.gate, cost, sentinel)
        pairs = [(i, j) for i, j in solve_assignment(gated) if gated[i, j] < sentinel]
        used_d = {j for _, j in pairs}
        return pairs, [j for j in range(n_d) if j not in used_d]

    def _spawn(self, frame_index: int, det: FaceDetection) -> None:
        try:
            d0 = self.g.inverse(det.height)
        except DistanceRangeError:
            d0 = 2.0
        if not (0.2 <= d0 <= 15.0):
            d0 = float(np.clip(d0, 0.2, 15.0))
        state = np.array([det.center_x, det.center_y, 0.0, 0.0, det.height, d0, 0.0])
        cov = np.diag([100.0, 100.0, 100.0, 100.0, self.config.r_h, 1.0, 1.0])
        track = FaceTrack(
            id=self._next_id,
            state=state,
            cov=cov,
            confirmed=self.config.confirm_hits <= 1,
        )
        track.history[frame_index] = (state.copy(), cov.copy())
        track.readings.append(
            TemperatureReading(
                frame=frame_index,
                temp=det.temp_max,
                distance=d0,
                distance_var=1.0,
            )
        )
        self._next_id += 1
        self.tracks.append(track)

    def all_tracks(self) -> list[FaceTrack]:
        return sorted(self.dead_tracks + self.tracks, key=lambda t: t.id)


def load_detections(path: str | Path) -> dict[int, list[FaceDetection]]:
    """Read a JSON-lines detection file: one frame per line, each with a
    frame index and a list of {center_x, center_y, height, temp_max}."""
    frames: dict[int, list[FaceDetection]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            frames[int(rec["index"])] = [
                FaceDetection(
                    center_x=float(d["center_x"]),
                    center_y=float(d["center_y"]),
                    height=float(d["height"]),
                    temp_max=float(d["temp_max"]),
                )
                for d in rec.get("detections", [])
            ]
    return frames


def save_detections(path: str | Path, frames: dict[int, list[FaceDetection]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for index in sorted(frames):
            rec = {
                "index": index,
                "detections": [
                    {
                        "center_x": d.center_x,
                        "center_y": d.center_y,
                        "height": d.height,
                        "temp_max": d.temp_max,
                    }
                    for d in frames[index]
                ],
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
