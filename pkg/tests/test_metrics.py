import numpy as np
import pytest

from trackfuse.errors import NoMatchedFramesError
from trackfuse.metrics import (
    association_pr,
    clustering_ratio,
    match_tracks,
    reid_accuracy,
    relevant_pairs,
    rmse_metrics,
)


def series(points):
    return {k: np.asarray(p, dtype=float) for k, p in enumerate(points)}


class TestAssociationPr:
    maps = ({0: 0, 1: 1, 2: 2}, {10: 0, 11: 1, 12: 2})

    def test_two_of_three(self):
        rmap, fmap = self.maps
        performed = [(0, 10), (1, 11), (2, 10)]  # third is wrong
        relevant = [(0, 10), (1, 11), (2, 12)]
        rep = association_pr(performed, relevant, rmap, fmap)
        assert rep.precision == pytest.approx(2 / 3)
        assert rep.recall == pytest.approx(2 / 3)

    def test_perfect(self):
        rmap, fmap = self.maps
        pairs = [(0, 10), (1, 11), (2, 12)]
        rep = association_pr(pairs, pairs, rmap, fmap)
        assert rep.precision == 1.0 and rep.recall == 1.0

    def test_vacuous_convention(self):
        rep = association_pr([], [], {}, {})
        assert rep.precision == 1.0 and rep.recall == 1.0

    def test_per_frame_weighting(self):
        rmap, fmap = self.maps
        performed = [(0, 10), (2, 11)]
        relevant = [(0, 10), (1, 11)]
        overlaps = {(0, 10): 90, (2, 11): 10, (1, 11): 30}
        rep = association_pr(performed, relevant, rmap, fmap, overlaps)
        assert rep.frame_precision == pytest.approx(90 / 100)
        assert rep.frame_recall == pytest.approx(90 / 120)

    def test_per_frame_equals_per_track_when_all_correct(self):
        rmap, fmap = self.maps
        pairs = [(0, 10), (1, 11), (2, 12)]
        overlaps = {(0, 10): 40, (1, 11): 90, (2, 12): 10}
        rep = association_pr(pairs, pairs, rmap, fmap, overlaps)
        assert rep.precision == rep.frame_precision == 1.0
        assert rep.recall == rep.frame_recall == 1.0


class TestMatchTracks:
    def test_one_to_one_hungarian(self):
        tracks = {0: series([(0, 0), (1, 0)]), 1: series([(5, 5), (6, 5)])}
        subjects = {7: series([(5.1, 5.0), (6.1, 5.0)]), 8: series([(0.1, 0.0), (1.1, 0.0)])}
        assert match_tracks(tracks, subjects) == {0: 8, 1: 7}

    def test_fragments_map_many_to_one(self):
        tracks = {
            0: {0: np.array([0.0, 0.0]), 1: np.array([1.0, 0.0])},
            1: {5: np.array([5.0, 0.0]), 6: np.array([6.0, 0.0])},
        }
        subjects = {3: {k: np.array([float(k), 0.0]) for k in range(8)}}
        assert match_tracks(tracks, subjects, one_to_one=False) == {0: 3, 1: 3}

    def test_no_overlap_unmatched(self):
        tracks = {0: {0: np.zeros(2)}}
        subjects = {1: {5: np.zeros(2)}}
        assert match_tracks(tracks, subjects) == {}


class TestRelevantPairs:
    def test_longest_overlap_radar_chosen(self):
        rmap = {0: 0, 1: 0}
        fmap = {10: 0}
        rframes = {0: set(range(10)), 1: set(range(100))}
        fframes = {10: set(range(50))}
        assert relevant_pairs(rmap, fmap, rframes, fframes) == [(1, 10)]

    def test_min_overlap_filters(self):
        rmap, fmap = {0: 0}, {10: 0}
        rframes, fframes = {0: set(range(5))}, {10: set(range(5))}
        assert relevant_pairs(rmap, fmap, rframes, fframes, min_overlap=10) == []


class TestRmse:
    def test_exact_estimates(self):
        gt = {0: series([(0, 0), (1, 0), (2, 0)])}
        rep = rmse_metrics({5: series([(0, 0), (1, 0), (2, 0)])}, gt)
        assert rep.position_rmse == 0.0

    def test_constant_offset(self):
        gt = {
            0: series([(0, 0), (1, 0)]),
            1: series([(5, 5), (5, 6)]),
        }
        est = {
            10: series([(0.1, 0), (1.1, 0)]),  # +0.1 on x
            11: series([(5, 5), (5, 6)]),
        }
        rep = rmse_metrics(est, gt)
        assert rep.position_rmse == pytest.approx(np.sqrt(0.01 / 2))
        # inter-subject distances shift accordingly
        assert rep.n_distance_samples == 2

    def test_single_subject_offset(self):
        gt = {0: series([(0, 0), (1, 0), (2, 0)])}
        est = {9: series([(0.1, 0), (1.1, 0), (2.1, 0)])}
        rep = rmse_metrics(est, gt)
        assert rep.position_rmse == pytest.approx(0.1)
        assert rep.distance_rmse == 0.0

    def test_no_match_raises(self):
        with pytest.raises(NoMatchedFramesError):
            rmse_metrics({0: {0: np.zeros(2)}}, {1: {5: np.zeros(2)}})


class TestClusteringRatio:
    def test_all_correct(self):
        labels = {0: np.array([0, 0, 1, 1]), 1: np.array([2, 2, 3, 3])}
        origins = {0: np.array([0, 0, 1, 1]), 1: np.array([1, 1, 0, 0])}
        rep = clustering_ratio(labels, origins)
        assert rep.ratio == 1.0

    def test_half_correct(self):
        labels = {0: np.array([0, 0, 1, 1]), 1: np.array([0, 0, 0, 0])}
        origins = {0: np.array([0, 0, 1, 1]), 1: np.array([0, 0, 1, 1])}
        rep = clustering_ratio(labels, origins)
        assert rep.ratio == 0.5
        assert rep.per_frame == {0: True, 1: False}

    def test_purity_threshold(self):
        # cluster 0 is 3/4 subject 0: purity 0.75 < 0.8 -> wrong
        labels = {0: np.array([0, 0, 0, 0, 1, 1, 1, 1])}
        origins = {0: np.array([0, 0, 0, 1, 1, 1, 1, 0])}
        assert clustering_ratio(labels, origins).ratio == 0.0
        assert clustering_ratio(labels, origins, purity_threshold=0.7).ratio == 1.0

    def test_noise_only_frame_with_no_subjects(self):
        labels = {0: np.array([-1, -1])}
        origins = {0: np.array([-1, -1])}
        assert clustering_ratio(labels, origins).ratio == 1.0

    def test_majority_clutter_cluster_fails(self):
        labels = {0: np.array([0, 0, 0, 1, 1, 1])}
        origins = {0: np.array([-1, -1, -1, 1, 1, 1])}
        assert clustering_ratio(labels, origins).ratio == 0.0


def test_reid_accuracy():
    assert reid_accuracy([(1, 1), (2, 2)]) == 1.0
    assert reid_accuracy([(1, 1), (2, 1)]) == 0.5
    assert reid_accuracy([]) == 1.0
