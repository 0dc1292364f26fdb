"""Constant-velocity Kalman tracking of cluster centroids.

Observation-to-track association is gated global-nearest-neighbor: squared
Mahalanobis innovation distances, pairs above the chi-square 99% gate
forbidden, then a Hungarian assignment. Track lifecycle follows an
M-consecutive-hits confirmation / N-consecutive-misses deletion policy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assignment import forbidden_sentinel, solve_assignment
from .clustering import ClusterLabeling, TrackPrior
from .config import SystemConfig


def cv_matrices(delta: float, accel_std: float) -> tuple[np.ndarray, np.ndarray]:
    """Transition and process-noise matrices for the [x, y, vx, vy] model."""
    a = np.eye(4)
    a[0, 2] = delta
    a[1, 3] = delta
    g = np.array(
        [
            [delta**2 / 2, 0.0],
            [0.0, delta**2 / 2],
            [delta, 0.0],
            [0.0, delta],
        ]
    )
    q = accel_std**2 * (g @ g.T)
    return a, q


H_POS = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])


def _symmetrize(p: np.ndarray) -> np.ndarray:
    return (p + p.T) / 2.0


@dataclass
class RadarTrack:
    """One tracked subject in the radar plane."""

    id: int
    state: np.ndarray
    cov: np.ndarray
    cluster_cov: np.ndarray | None = None
    age: int = 1
    hits: int = 1
    misses: int = 0
    confirmed: bool = False
    # frame index -> (state copy, covariance copy), for track-to-track fusion
    history: dict[int, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    # frame index -> (n, 5) cluster points, for gait feature extraction
    cluster_history: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def position(self) -> np.ndarray:
        return self.state[:2].copy()

    @property
    def velocity(self) -> np.ndarray:
        return self.state[2:].copy()

    def distance_from_origin(self) -> float:
        return float(np.hypot(self.state[0], self.state[1]))

    def distance_variance(self) -> float:
        """First-order propagation of the position covariance through
        d = sqrt(x^2 + y^2)."""
        d = self.distance_from_origin()
        if d < 1e-9:
            return float(max(self.cov[0, 0], self.cov[1, 1]))
        jac = self.state[:2] / d
        return float(jac @ self.cov[:2, :2] @ jac)


def kf_predict(track: RadarTrack, a: np.ndarray, q: np.ndarray) -> None:
    """In-place constant-velocity prediction."""
    track.state = a @ track.state
    track.cov = _symmetrize(a @ track.cov @ a.T + q)


def kf_update(track: RadarTrack, observation: np.ndarray, r: np.ndarray) -> None:
    """In-place position update with a cluster-centroid observation."""
    z = np.asarray(observation, dtype=float).reshape(2)
    if not np.all(np.isfinite(z)):
        raise ValueError("observation must be finite")
    innov = z - H_POS @ track.state
    s = H_POS @ track.cov @ H_POS.T + r
    k = track.cov @ H_POS.T @ np.linalg.inv(s)
    track.state = track.state + k @ innov
    ikh = np.eye(4) - k @ H_POS
    track.cov = _symmetrize(ikh @ track.cov @ ikh.T + k @ r @ k.T)


def associate_observations(
    tracks: list[RadarTrack],
    centroids: np.ndarray,
    r: np.ndarray,
    gate: float = 9.21,
) -> tuple[list[tuple[int, int]], list[int], list[int]]:
    """Gated GNN association of predicted tracks to centroids.

    Returns (pairs, unassigned_track_indices, unassigned_centroid_indices)
    where pairs holds (track_index, centroid_index) tuples. The cost is the
    squared Mahalanobis innovation distance; pairs above `gate` are never
    assigned.
    """
    centroids = np.asarray(centroids, dtype=float).reshape(-1, 2)
    n_t, n_c = len(tracks), centroids.shape[0]
    if n_t == 0 or n_c == 0:
        return [], list(range(n_t)), list(range(n_c))

    cost = np.zeros((n_t, n_c))
    for i, track in enumerate(tracks):
        s = H_POS @ track.cov @ H_POS.T + r
        s_inv = np.linalg.inv(s)
        diff = centroids - track.state[:2]
        cost[i] = np.einsum("nj,jk,nk->n", diff, s_inv, diff)

    sentinel = forbidden_sentinel(cost)
    gated = np.where(cost <= gate, cost, sentinel)
    pairs = [(i, j) for i, j in solve_assignment(gated) if gated[i, j] < sentinel]
    used_t = {i for i, _ in pairs}
    used_c = {j for _, j in pairs}
    return (
        pairs,
        [i for i in range(n_t) if i not in used_t],
        [j for j in range(n_c) if j not in used_c],
    )


class RadarTracker:
    """Frame-by-frame tracker over refined cluster labelings."""

    def __init__(self, config: SystemConfig | None = None, cluster_buffer: int = 450):
        self.config = config or SystemConfig()
        self.a, self.q = cv_matrices(self.config.delta, self.config.radar_accel_std)
        self.r = np.eye(2) * self.config.radar_obs_std**2
        self.tracks: list[RadarTrack] = []
        self.dead_tracks: list[RadarTrack] = []
        self._next_id = 0
        self._cluster_buffer = cluster_buffer

    @property
    def confirmed_tracks(self) -> list[RadarTrack]:
        return [t for t in self.tracks if t.confirmed]

    def predict(self) -> None:
        for track in self.tracks:
            kf_predict(track, self.a, self.q)

    def priors(self, confirmed_only: bool = True) -> dict[int, TrackPrior]:
        """Predicted positions + last cluster covariances, for refinement.

        Tentative tracks are excluded by default: a splinter track would
        inflate the nearby-group size and make the mixture over-split.
        """
        return {
            t.id: TrackPrior(position=t.position, cluster_cov=t.cluster_cov)
            for t in self.tracks
            if t.confirmed or not confirmed_only
        }

    def step(
        self,
        frame_index: int,
        labeling: ClusterLabeling,
        points: np.ndarray | None = None,
    ) -> None:
        """Associate the frame's clusters to tracks and manage lifecycles.

        `predict` must have been called for this frame already (the
        clustering refinement consumes the predicted positions). `points`
        is the (n, >=2) array the labeling refers to; when it carries all
        5 point-cloud columns the assigned clusters are buffered for gait
        feature extraction.
        """
        cluster_ids = labeling.cluster_ids
        centroids = np.array([labeling.centroids[c] for c in cluster_ids]).reshape(-1, 2)
        pairs, _, unassigned_c = associate_observations(
            self.tracks, centroids, self.r, self.config.gate
        )

        assigned_tracks = set()
        for ti, ci in pairs:
            track = self.tracks[ti]
            cid = cluster_ids[ci]
            kf_update(track, centroids[ci], self.r)
            track.cluster_cov = labeling.covariances[cid]
            track.hits += 1
            track.misses = 0
            if track.hits >= self.config.confirm_hits:
                track.confirmed = True
            if points is not None and points.shape[1] >= 5:
                track.cluster_history[frame_index] = points[labeling.members(cid)].copy()
                if len(track.cluster_history) > self._cluster_buffer:
                    del track.cluster_history[min(track.cluster_history)]
            assigned_tracks.add(ti)

        for ti, track in enumerate(self.tracks):
            track.age += 1
            if ti not in assigned_tracks:
                track.misses += 1
                track.hits = 0
            track.history[frame_index] = (track.state.copy(), track.cov.copy())

        survivors = []
        for track in self.tracks:
            if track.misses >= self.config.delete_misses:
                self.dead_tracks.append(track)
            else:
                survivors.append(track)
        self.tracks = survivors

        # Birth gating: an unassigned centroid close to a confirmed track is
        # ambiguous (typically a merge transient), not a new subject.
        blocked = np.array([t.state[:2] for t in self.tracks if t.confirmed]).reshape(-1, 2)
        for ci in unassigned_c:
            if blocked.size and np.linalg.norm(blocked - centroids[ci], axis=1).min() < self.config.d_th:
                continue
            self._spawn(frame_index, centroids[ci], labeling, cluster_ids[ci], points)

    def _spawn(
        self,
        frame_index: int,
        centroid: np.ndarray,
        labeling: ClusterLabeling,
        cid: int,
        points: np.ndarray | None,
    ) -> None:
        cov = np.diag(
            [self.config.radar_obs_std**2, self.config.radar_obs_std**2, 1.0, 1.0]
        )
        track = RadarTrack(
            id=self._next_id,
            state=np.array([centroid[0], centroid[1], 0.0, 0.0]),
            cov=cov,
            cluster_cov=labeling.covariances[cid],
            confirmed=self.config.confirm_hits <= 1,
        )
        track.history[frame_index] = (track.state.copy(), track.cov.copy())
        if points is not None and points.shape[1] >= 5:
            track.cluster_history[frame_index] = points[labeling.members(cid)].copy()
        self._next_id += 1
        self.tracks.append(track)

    def all_tracks(self) -> list[RadarTrack]:
        return sorted(self.dead_tracks + self.tracks, key=lambda t: t.id)
