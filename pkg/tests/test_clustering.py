import numpy as np
import pytest

from trackfuse.clustering import (
    NOISE,
    ClusterLabeling,
    TrackPrior,
    dbscan,
    gm_fit,
    nearby_groups,
    refine_clusters,
)
from trackfuse.errors import InsufficientDataError
from trackfuse.oracles import verify_dbscan_axioms


def blob(center, n, sigma, rng):
    return rng.normal(center, sigma, size=(n, 2))


class TestDbscan:
    def test_two_separated_blobs(self):
        rng = np.random.default_rng(0)
        pts = np.vstack([blob((0, 0), 20, 0.05, rng), blob((2, 0), 20, 0.05, rng)])
        labeling = dbscan(pts, eps=0.4, m_pts=10)
        assert len(labeling.cluster_ids) == 2
        assert not np.any(labeling.labels == NOISE)
        assert verify_dbscan_axioms(pts, labeling.labels, 0.4, 10) is None

    def test_single_point_is_noise(self):
        labeling = dbscan(np.array([[1.0, 1.0]]), eps=0.4, m_pts=10)
        assert labeling.labels.tolist() == [NOISE]

    def test_coincident_points_form_one_cluster(self):
        pts = np.zeros((15, 2))
        labeling = dbscan(pts, eps=0.4, m_pts=10)
        assert len(labeling.cluster_ids) == 1
        assert not np.any(labeling.labels == NOISE)

    def test_empty_input(self):
        labeling = dbscan(np.empty((0, 2)), eps=0.4, m_pts=10)
        assert labeling.labels.size == 0
        assert labeling.cluster_ids == []

    def test_partition_is_permutation_invariant(self):
        rng = np.random.default_rng(7)
        pts = np.vstack(
            [blob((0, 0), 25, 0.1, rng), blob((1.5, 0.5), 18, 0.1, rng), rng.uniform(-3, 3, (5, 2))]
        )
        base = dbscan(pts, eps=0.4, m_pts=8)
        for seed in range(5):
            perm = np.random.default_rng(seed).permutation(pts.shape[0])
            shuffled = dbscan(pts[perm], eps=0.4, m_pts=8)
            perm_partition = {
                frozenset(perm[list(members)].tolist())
                for members in (shuffled.members(c) for c in shuffled.cluster_ids)
            }
            assert perm_partition == base.partition()

    def test_centroid_and_covariance(self):
        rng = np.random.default_rng(1)
        pts = blob((3, 1), 30, 0.1, rng)
        labeling = dbscan(pts, eps=0.5, m_pts=5)
        cid = labeling.cluster_ids[0]
        members = pts[labeling.labels == cid]
        assert np.allclose(labeling.centroids[cid], members.mean(axis=0))
        cov = labeling.covariances[cid]
        assert np.allclose(cov, cov.T)
        assert np.all(np.linalg.eigvalsh(cov) >= 0)


class TestGaussianMixture:
    def test_two_balanced_blobs(self):
        rng = np.random.default_rng(5)
        a = blob((0, 0), 100, 0.1, rng)
        b = blob((5, 0), 100, 0.1, rng)  # 50 sigma apart
        res = gm_fit(np.vstack([a, b]), 2, seed=3)
        assert res.weights == pytest.approx([0.5, 0.5], abs=0.05)
        la = res.labels[:100]
        lb = res.labels[100:]
        assert len(set(la.tolist())) == 1 and len(set(lb.tolist())) == 1
        assert la[0] != lb[0]

    def test_single_component(self):
        rng = np.random.default_rng(2)
        res = gm_fit(blob((1, 1), 40, 0.3, rng), 1, seed=0)
        assert set(res.labels.tolist()) == {0}
        assert res.weights == pytest.approx([1.0])

    def test_insufficient_points(self):
        with pytest.raises(InsufficientDataError):
            gm_fit(np.array([[0.0, 0.0]]), 2, seed=0)

    def test_responsibilities_sum_to_one(self):
        rng = np.random.default_rng(9)
        res = gm_fit(rng.normal(size=(60, 2)), 3, seed=1)
        assert np.allclose(res.responsibilities.sum(axis=1), 1.0, atol=1e-9)
        assert res.weights.sum() == pytest.approx(1.0, abs=1e-9)


class TestNearbyGroups:
    def test_chain_closure(self):
        groups = nearby_groups(
            {0: np.array([0.0, 0.0]), 1: np.array([1.0, 0.0]), 2: np.array([2.0, 0.0])},
            d_th=1.2,
        )
        assert groups == [{0, 1, 2}]

    def test_isolated_track(self):
        groups = nearby_groups(
            {0: np.array([0.0, 0.0]), 1: np.array([1.0, 0.0]), 2: np.array([5.0, 5.0])},
            d_th=1.2,
        )
        assert {0, 1} in groups and {2} in groups

    def test_single_track(self):
        assert nearby_groups({4: np.array([1.0, 2.0])}, 1.2) == [{4}]

    def test_union_covers_all(self):
        rng = np.random.default_rng(11)
        positions = {i: rng.uniform(-5, 5, 2) for i in range(12)}
        groups = nearby_groups(positions, 1.0)
        assert sorted(t for g in groups for t in g) == sorted(positions)
        seen = set()
        for g in groups:
            assert not (g & seen)
            seen |= g


def merged_pair_scene(rng, spacing=0.5, n=60):
    """Two subjects close enough that DBSCAN sees one cluster."""
    left = blob((-spacing / 2, 4.0), n, 0.15, rng)
    right = blob((spacing / 2, 4.0), n, 0.15, rng)
    return np.vstack([left, right])


class TestRefinement:
    def test_splits_merged_cluster(self):
        rng = np.random.default_rng(21)
        pts = merged_pair_scene(rng)
        labeling = dbscan(pts, eps=0.4, m_pts=10)
        assert len(labeling.cluster_ids) == 1  # genuinely merged
        tracks = {
            0: TrackPrior(np.array([-0.25, 4.0]), np.eye(2) * 0.02),
            1: TrackPrior(np.array([0.25, 4.0]), np.eye(2) * 0.02),
        }
        refined = refine_clusters(pts, labeling, tracks, d_th=1.2, gamma=9.21)
        assert len(refined.cluster_ids) == 2
        # split follows track sides
        for cid in refined.cluster_ids:
            members = refined.members(cid)
            side = np.sign(pts[members, 0].mean())
            purity = np.mean(np.sign(pts[members, 0]) == side)
            assert purity > 0.9

    def test_singleton_groups_untouched(self):
        rng = np.random.default_rng(22)
        pts = np.vstack([blob((0, 0), 30, 0.1, rng), blob((4, 4), 30, 0.1, rng)])
        labeling = dbscan(pts, eps=0.4, m_pts=10)
        tracks = {
            0: TrackPrior(np.array([0.0, 0.0]), np.eye(2) * 0.01),
            1: TrackPrior(np.array([4.0, 4.0]), np.eye(2) * 0.01),
        }
        refined = refine_clusters(pts, labeling, tracks)
        assert np.array_equal(refined.labels, labeling.labels)

    def test_low_weight_component_becomes_noise(self):
        rng = np.random.default_rng(23)
        # 97 points near track 0, 3 points near track 1: the second mixture
        # component's weight ~0.03 < 0.1/2, so its points drop to noise.
        pts = np.vstack([blob((0.0, 0.0), 97, 0.1, rng), blob((0.8, 0.0), 3, 0.05, rng)])
        labeling = ClusterLabeling.from_labels(pts, np.zeros(100, dtype=int))
        tracks = {
            0: TrackPrior(np.array([0.0, 0.0]), np.eye(2) * 0.02),
            1: TrackPrior(np.array([0.8, 0.0]), np.eye(2) * 0.02),
        }
        refined = refine_clusters(pts, labeling, tracks, d_th=1.2, gamma=9.21, pi_thr_scale=0.1)
        assert len(refined.cluster_ids) == 1
        assert np.all(refined.labels[-3:] == NOISE)

    def test_points_outside_pool_unchanged(self):
        rng = np.random.default_rng(24)
        near = merged_pair_scene(rng)
        far = blob((6.0, 6.0), 30, 0.1, rng)
        pts = np.vstack([near, far])
        labeling = dbscan(pts, eps=0.4, m_pts=10)
        far_labels = labeling.labels[near.shape[0] :].copy()
        tracks = {
            0: TrackPrior(np.array([-0.25, 4.0]), np.eye(2) * 0.02),
            1: TrackPrior(np.array([0.25, 4.0]), np.eye(2) * 0.02),
            2: TrackPrior(np.array([6.0, 6.0]), np.eye(2) * 0.02),
        }
        refined = refine_clusters(pts, labeling, tracks)
        assert np.array_equal(refined.labels[near.shape[0] :], far_labels)

    def test_cluster_count_bounded_by_group_size(self):
        rng = np.random.default_rng(25)
        for _ in range(10):
            pts = merged_pair_scene(rng, spacing=rng.uniform(0.3, 0.9))
            labeling = dbscan(pts, eps=0.4, m_pts=10)
            tracks = {
                0: TrackPrior(pts[:60].mean(axis=0), np.eye(2) * 0.02),
                1: TrackPrior(pts[60:].mean(axis=0), np.eye(2) * 0.02),
            }
            refined = refine_clusters(pts, labeling, tracks)
            assert len(refined.cluster_ids) <= 2

    def test_no_tracks_is_passthrough(self):
        rng = np.random.default_rng(26)
        pts = merged_pair_scene(rng)
        labeling = dbscan(pts, eps=0.4, m_pts=10)
        refined = refine_clusters(pts, labeling, {})
        assert np.array_equal(refined.labels, labeling.labels)

    def test_track_without_prior_cluster_uses_disc_region(self):
        rng = np.random.default_rng(27)
        pts = merged_pair_scene(rng)
        labeling = dbscan(pts, eps=0.4, m_pts=10)
        tracks = {
            0: TrackPrior(np.array([-0.25, 4.0]), None),
            1: TrackPrior(np.array([0.25, 4.0]), None),
        }
        refined = refine_clusters(pts, labeling, tracks)
        assert len(refined.cluster_ids) == 2
