import numpy as np
import pytest

from trackfuse.assignment import assignment_cost
from trackfuse.clustering import dbscan
from trackfuse.config import SystemConfig
from trackfuse.oracles import brute_force_assignment
from trackfuse.radar import (
    RadarTrack,
    RadarTracker,
    associate_observations,
    cv_matrices,
    kf_predict,
    kf_update,
)

DELTA = 1.0 / 15.0


def make_track(x=0.0, y=0.0, vx=0.0, vy=0.0, p=0.1):
    return RadarTrack(id=0, state=np.array([x, y, vx, vy]), cov=np.eye(4) * p)


class TestKalman:
    def test_cv_kinematics(self):
        a, q = cv_matrices(DELTA, 1.0)
        track = make_track(vx=1.0)
        kf_predict(track, a, q)
        assert track.state[0] == pytest.approx(DELTA)
        assert track.state[1] == 0.0

    def test_zero_velocity_stationary(self):
        a, q = cv_matrices(DELTA, 1.0)
        track = make_track(x=2.0, y=3.0)
        kf_predict(track, a, q)
        assert track.state[:2] == pytest.approx([2.0, 3.0])

    def test_prediction_inflates_covariance(self):
        a, q = cv_matrices(DELTA, 1.0)
        track = make_track()
        before = np.trace(track.cov)
        kf_predict(track, a, q)
        assert np.trace(track.cov) > before

    def test_zero_innovation_keeps_position(self):
        track = make_track(x=1.0, y=2.0)
        before_cov = track.cov.copy()
        kf_update(track, np.array([1.0, 2.0]), np.eye(2) * 0.01)
        assert track.state[:2] == pytest.approx([1.0, 2.0])
        assert np.trace(track.cov) < np.trace(before_cov)

    def test_huge_observation_noise_is_noop(self):
        track = make_track(x=1.0, y=1.0)
        kf_update(track, np.array([5.0, 5.0]), np.eye(2) * 1e9)
        assert np.linalg.norm(track.state[:2] - [1.0, 1.0]) < 1e-3 * np.linalg.norm([4.0, 4.0])

    def test_repeated_updates_converge_to_observation(self):
        a, q = cv_matrices(DELTA, 1.0)
        track = make_track()
        z = np.array([3.0, -1.0])
        for _ in range(200):
            kf_predict(track, a, q)
            kf_update(track, z, np.eye(2) * 0.01)
        assert np.linalg.norm(track.state[:2] - z) < 1e-3

    def test_covariance_stays_symmetric_positive(self):
        rng = np.random.default_rng(0)
        a, q = cv_matrices(DELTA, 1.0)
        track = make_track()
        for _ in range(100):
            kf_predict(track, a, q)
            kf_update(track, rng.normal(size=2), np.eye(2) * 0.01)
            assert np.allclose(track.cov, track.cov.T)
            assert np.linalg.eigvalsh(track.cov).min() > 0

    def test_noiseless_cv_trajectory_converges(self):
        cfg = SystemConfig()
        a, q = cv_matrices(cfg.delta, cfg.radar_accel_std)
        track = RadarTrack(id=0, state=np.array([0.0, 0.0, 1.0, 0.5]), cov=np.eye(4) * 0.1)
        r = np.eye(2) * cfg.radar_obs_std**2
        pos = np.array([0.0, 0.0])
        vel = np.array([1.0, 0.5])
        for k in range(1, 101):
            pos = pos + vel * cfg.delta
            kf_predict(track, a, q)
            kf_update(track, pos, r)
        assert np.linalg.norm(track.state[:2] - pos) < 1e-6


class TestAssociation:
    def test_unambiguous_pairing(self):
        t0 = make_track(0.0, 0.0)
        t1 = make_track(5.0, 0.0)
        t1.id = 1
        pairs, un_t, un_c = associate_observations(
            [t0, t1], np.array([[5.05, 0.0], [0.05, 0.0]]), np.eye(2) * 0.01
        )
        assert sorted(pairs) == [(0, 1), (1, 0)]
        assert un_t == [] and un_c == []

    def test_far_centroid_gated_out(self):
        t0 = make_track(0.0, 0.0)
        pairs, un_t, un_c = associate_observations(
            [t0], np.array([[10.0, 0.0]]), np.eye(2) * 0.01
        )
        assert pairs == [] and un_t == [0] and un_c == [0]

    def test_symmetric_case_matches_brute_force(self):
        t0 = make_track(-0.5, 0.0, p=0.05)
        t1 = make_track(0.5, 0.0, p=0.05)
        t1.id = 1
        centroids = np.array([[-0.4, 0.1], [0.4, 0.1]])
        r = np.eye(2) * 0.01
        pairs, _, _ = associate_observations([t0, t1], centroids, r, gate=100.0)
        cost = np.zeros((2, 2))
        for i, t in enumerate([t0, t1]):
            s_inv = np.linalg.inv(t.cov[:2, :2] + r)
            for j in range(2):
                d = centroids[j] - t.state[:2]
                cost[i, j] = d @ s_inv @ d
        assert assignment_cost(cost, pairs) == pytest.approx(brute_force_assignment(cost))

    def test_empty_inputs(self):
        pairs, un_t, un_c = associate_observations([], np.empty((0, 2)), np.eye(2))
        assert pairs == [] and un_t == [] and un_c == []


def feed(tracker: RadarTracker, frame: int, centroids: np.ndarray):
    """Drive the tracker with point blobs at given centroids."""
    rng = np.random.default_rng(1000 + frame)
    if centroids.size:
        pts = np.vstack([rng.normal(c, 0.05, size=(20, 2)) for c in centroids])
    else:
        pts = np.empty((0, 2))
    labeling = dbscan(pts, eps=0.4, m_pts=5)
    tracker.predict()
    tracker.step(frame, labeling, None)


class TestLifecycle:
    def test_confirmation_after_three_hits(self):
        tracker = RadarTracker(SystemConfig())
        for k in range(3):
            feed(tracker, k, np.array([[1.0, 1.0]]))
        assert len(tracker.confirmed_tracks) == 1

    def test_deletion_after_ten_misses(self):
        tracker = RadarTracker(SystemConfig())
        for k in range(5):
            feed(tracker, k, np.array([[1.0, 1.0]]))
        assert len(tracker.tracks) == 1
        for k in range(5, 15):
            feed(tracker, k, np.empty((0, 2)))
        assert tracker.tracks == []
        assert len(tracker.dead_tracks) == 1

    def test_coasting_track_keeps_identity(self):
        tracker = RadarTracker(SystemConfig())
        for k in range(5):
            feed(tracker, k, np.array([[1.0, 1.0]]))
        track_id = tracker.tracks[0].id
        for k in range(5, 10):
            feed(tracker, k, np.empty((0, 2)))
        for k in range(10, 14):
            feed(tracker, k, np.array([[1.0, 1.0]]))
        assert [t.id for t in tracker.tracks] == [track_id]
        assert tracker.tracks[0].misses == 0

    def test_ids_never_reused(self):
        tracker = RadarTracker(SystemConfig())
        seen = set()
        rng = np.random.default_rng(5)
        for k in range(60):
            # appear/disappear cycles at alternating spots
            if (k // 12) % 2 == 0:
                c = np.array([[rng.normal(5.0, 0.01), rng.normal((k // 12) * 3.0, 0.01)]])
            else:
                c = np.empty((0, 2))
            feed(tracker, k, c)
            for t in tracker.tracks:
                seen.add(t.id)
        ids = [t.id for t in tracker.all_tracks()]
        assert len(ids) == len(set(ids))

    def test_birth_suppressed_near_confirmed_track(self):
        tracker = RadarTracker(SystemConfig())
        for k in range(4):
            feed(tracker, k, np.array([[1.0, 1.0]]))
        assert len(tracker.tracks) == 1
        # second centroid well inside d_th of the confirmed track
        feed(tracker, 4, np.array([[1.0, 1.0], [1.4, 1.0]]))
        assert len(tracker.tracks) == 1
        # but a distant centroid still births
        feed(tracker, 5, np.array([[1.0, 1.0], [5.0, 5.0]]))
        assert len(tracker.tracks) == 2
