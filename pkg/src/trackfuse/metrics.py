"""Evaluation metrics against simulated ground truth.

Estimated tracks carry no identity, so every metric first resolves a
track-to-subject matching by minimum time-averaged distance (Hungarian on
the track x subject matrix of mean distances over common frames). The
association precision/recall, the position and inter-subject distance
RMSEs and the correct-clustering ratio follow their standard definitions;
0/0 ratios are reported as 1 (vacuously correct).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assignment import forbidden_sentinel, solve_assignment
from .errors import NoMatchedFramesError

PositionSeries = dict[int, np.ndarray]  # frame -> (2,) position


def match_tracks(
    tracks: dict[int, PositionSeries],
    subjects: dict[int, PositionSeries],
    max_mean_distance: float = np.inf,
    one_to_one: bool = True,
) -> dict[int, int]:
    """Track-id -> subject-id matching by minimum time-averaged distance.

    `one_to_one` resolves contention with a Hungarian assignment (for RMSE
    metrics, where each subject should be represented once). With it off,
    every track maps independently to its closest subject, so several
    fragments of the same subject all resolve to it (the right notion for
    judging association correctness).
    """
    track_ids = sorted(tracks)
    subject_ids = sorted(subjects)
    if not track_ids or not subject_ids:
        return {}
    cost = np.full((len(track_ids), len(subject_ids)), np.inf)
    for i, tid in enumerate(track_ids):
        for j, sid in enumerate(subject_ids):
            common = sorted(set(tracks[tid]) & set(subjects[sid]))
            if not common:
                continue
            errs = [np.linalg.norm(tracks[tid][k] - subjects[sid][k]) for k in common]
            cost[i, j] = float(np.mean(errs))
    finite = np.isfinite(cost)
    if not finite.any():
        return {}
    out = {}
    if one_to_one:
        sentinel = forbidden_sentinel(cost[finite])
        matrix = np.where(finite, cost, sentinel)
        for i, j in solve_assignment(matrix):
            if matrix[i, j] < sentinel and matrix[i, j] <= max_mean_distance:
                out[track_ids[i]] = subject_ids[j]
    else:
        for i, tid in enumerate(track_ids):
            if finite[i].any():
                j = int(np.argmin(cost[i]))
                if cost[i, j] <= max_mean_distance:
                    out[tid] = subject_ids[j]
    return out


@dataclass
class AssociationReport:
    performed: list[tuple[int, int]]
    relevant: list[tuple[int, int]]
    true_positives: list[tuple[int, int]]
    precision: float
    recall: float
    frame_precision: float | None = None
    frame_recall: float | None = None


def relevant_pairs(
    radar_map: dict[int, int],
    face_map: dict[int, int],
    radar_frames: dict[int, set[int]],
    face_frames: dict[int, set[int]],
    min_overlap: int = 1,
) -> list[tuple[int, int]]:
    """Associations the algorithm should have made: for each face track,
    the same-subject radar track with the longest frame overlap."""
    out = []
    for fid, sid in face_map.items():
        best, best_overlap = None, 0
        for rid, r_sid in radar_map.items():
            if r_sid != sid:
                continue
            overlap = len(radar_frames[rid] & face_frames[fid])
            if overlap > best_overlap:
                best, best_overlap = rid, overlap
        if best is not None and best_overlap >= min_overlap:
            out.append((best, fid))
    return sorted(out)


def association_pr(
    performed: list[tuple[int, int]],
    relevant: list[tuple[int, int]],
    radar_map: dict[int, int],
    face_map: dict[int, int],
    overlaps: dict[tuple[int, int], int] | None = None,
) -> AssociationReport:
    """Precision and recall of performed track associations.

    A performed pair is correct when both tracks map to the same subject.
    With `overlaps` given (pair -> common-frame count) the per-frame
    variant weighs each pair by its overlap length.
    """
    def correct(pair: tuple[int, int]) -> bool:
        rid, fid = pair
        sid = radar_map.get(rid)
        return sid is not None and sid == face_map.get(fid)

    tp = sorted(p for p in performed if correct(p))
    precision = len(tp) / len(performed) if performed else 1.0
    recall = len(tp) / len(relevant) if relevant else 1.0
    report = AssociationReport(
        performed=sorted(performed),
        relevant=sorted(relevant),
        true_positives=tp,
        precision=precision,
        recall=recall,
    )
    if overlaps is not None:
        def weight(pair: tuple[int, int]) -> int:
            return overlaps.get(tuple(pair), 0)

        wp = sum(weight(p) for p in performed)
        wr = sum(weight(p) for p in relevant)
        wtp = sum(weight(p) for p in tp)
        report.frame_precision = wtp / wp if wp else 1.0
        report.frame_recall = wtp / wr if wr else 1.0
    return report


@dataclass
class TrackingReport:
    position_rmse: float
    distance_rmse: float
    n_position_samples: int
    n_distance_samples: int
    matching: dict[int, int]
    per_frame_error: dict[int, float] = field(default_factory=dict)


def rmse_metrics(
    tracks: dict[int, PositionSeries],
    subjects: dict[int, PositionSeries],
) -> TrackingReport:
    """Position RMSE and inter-subject distance RMSE over matched frames."""
    matching = match_tracks(tracks, subjects)
    if not matching:
        raise NoMatchedFramesError("no track could be matched to a subject")

    sq_errors = []
    per_frame: dict[int, list[float]] = {}
    for tid, sid in matching.items():
        for k in sorted(set(tracks[tid]) & set(subjects[sid])):
            err = float(np.linalg.norm(tracks[tid][k] - subjects[sid][k]))
            sq_errors.append(err**2)
            per_frame.setdefault(k, []).append(err)
    if not sq_errors:
        raise NoMatchedFramesError("matched tracks share no frames with ground truth")

    dist_sq_errors = []
    matched = sorted(matching.items())
    for a in range(len(matched)):
        for b in range(a + 1, len(matched)):
            tid_a, sid_a = matched[a]
            tid_b, sid_b = matched[b]
            common = (
                set(tracks[tid_a])
                & set(tracks[tid_b])
                & set(subjects[sid_a])
                & set(subjects[sid_b])
            )
            for k in common:
                est = np.linalg.norm(tracks[tid_a][k] - tracks[tid_b][k])
                true = np.linalg.norm(subjects[sid_a][k] - subjects[sid_b][k])
                dist_sq_errors.append(float(est - true) ** 2)

    return TrackingReport(
        position_rmse=float(np.sqrt(np.mean(sq_errors))),
        distance_rmse=float(np.sqrt(np.mean(dist_sq_errors))) if dist_sq_errors else 0.0,
        n_position_samples=len(sq_errors),
        n_distance_samples=len(dist_sq_errors),
        matching=matching,
        per_frame_error={k: float(np.mean(v)) for k, v in per_frame.items()},
    )


@dataclass
class ClusteringReport:
    ratio: float
    per_frame: dict[int, bool]


def clustering_ratio(
    labels: dict[int, np.ndarray],
    origins: dict[int, np.ndarray],
    purity_threshold: float = 0.8,
) -> ClusteringReport:
    """Fraction of frames whose clusters separate the subjects correctly.

    A frame is correct when the number of non-noise clusters equals the
    number of subjects with points in the frame and each cluster's majority
    origin is a distinct subject covering at least `purity_threshold` of
    the cluster.
    """
    per_frame = {}
    for k in sorted(labels):
        lab = np.asarray(labels[k])
        orig = np.asarray(origins[k])
        present = set(int(s) for s in orig if s >= 0)
        cluster_ids = sorted(set(int(c) for c in lab if c >= 0))
        if len(cluster_ids) != len(present):
            per_frame[k] = False
            continue
        seen = set()
        ok = True
        for cid in cluster_ids:
            members = orig[lab == cid]
            subjects, counts = np.unique(members, return_counts=True)
            major = int(subjects[np.argmax(counts)])
            purity = counts.max() / members.size
            if major < 0 or purity < purity_threshold or major in seen:
                ok = False
                break
            seen.add(major)
        per_frame[k] = ok
    ratio = float(np.mean([v for v in per_frame.values()])) if per_frame else 1.0
    return ClusteringReport(ratio=ratio, per_frame=per_frame)


def reid_accuracy(predictions: list[tuple[int, int]]) -> float:
    """Fraction of (predicted, true) identity pairs that agree."""
    if not predictions:
        return 1.0
    return float(np.mean([p == t for p, t in predictions]))
