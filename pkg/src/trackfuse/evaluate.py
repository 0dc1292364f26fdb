"""Report generation for a completed run directory."""

from __future__ import annotations

import numpy as np

from .errors import NoMatchedFramesError
from .metrics import (
    association_pr,
    clustering_ratio,
    match_tracks,
    relevant_pairs,
    rmse_metrics,
)
from .pipeline import RunData


def radar_track_positions(data: RunData, confirmed_only: bool = True) -> dict[int, dict[int, np.ndarray]]:
    out = {}
    for track in data.radar_tracks:
        if confirmed_only and not track.get("confirmed", True):
            continue
        out[int(track["id"])] = {
            int(k): np.array(state[:2], dtype=float)
            for k, state in zip(track["frames"], track["states"])
        }
    return out


def face_track_pixels(data: RunData, confirmed_only: bool = True) -> dict[int, dict[int, np.ndarray]]:
    out = {}
    for track in data.face_tracks:
        if confirmed_only and not track.get("confirmed", True):
            continue
        out[int(track["id"])] = {
            int(k): np.array(state[:2], dtype=float)
            for k, state in zip(track["frames"], track["states"])
        }
    return out


def subject_positions(data: RunData) -> dict[int, dict[int, np.ndarray]]:
    return {
        sid: data.ground_truth.subject_positions(sid)
        for sid in data.ground_truth.subjects()
    }


def subject_pixels(data: RunData) -> dict[int, dict[int, np.ndarray]]:
    out: dict[int, dict[int, np.ndarray]] = {}
    for frame, entries in data.ground_truth.entries.items():
        for e in entries:
            if e.in_fov:
                out.setdefault(e.subject, {})[frame] = np.array([e.u, e.v])
    return out


def evaluate_run(data: RunData, min_overlap_s: float = 2.0) -> dict:
    """All metric reports for one run, as a JSON-ready dictionary."""
    radar_pos = radar_track_positions(data)
    face_pix = face_track_pixels(data)
    gt_pos = subject_positions(data)
    gt_pix = subject_pixels(data)

    radar_map = match_tracks(radar_pos, gt_pos, one_to_one=False)
    face_map = match_tracks(face_pix, gt_pix, one_to_one=False)

    performed = [(int(f["radar_id"]), int(f["tc_id"])) for f in data.fused]
    overlaps = {
        (int(f["radar_id"]), int(f["tc_id"])): int(f["K"]) for f in data.fused
    }
    radar_frames = {tid: set(series) for tid, series in radar_pos.items()}
    face_frames = {tid: set(series) for tid, series in face_pix.items()}
    min_overlap_frames = int(round(min_overlap_s / data.delta))
    relevant = relevant_pairs(radar_map, face_map, radar_frames, face_frames, min_overlap_frames)
    for pair in relevant:
        overlaps.setdefault(pair, len(radar_frames[pair[0]] & face_frames[pair[1]]))
    assoc = association_pr(performed, relevant, radar_map, face_map, overlaps)

    try:
        tracking = rmse_metrics(radar_pos, gt_pos)
        tracking_out = {
            "position_rmse": tracking.position_rmse,
            "distance_rmse": tracking.distance_rmse,
            "n_position_samples": tracking.n_position_samples,
            "n_distance_samples": tracking.n_distance_samples,
            "matching": {str(k): v for k, v in sorted(tracking.matching.items())},
        }
        per_frame_error = tracking.per_frame_error
    except NoMatchedFramesError:
        tracking_out = {"position_rmse": None, "distance_rmse": None}
        per_frame_error = {}

    clustering_refined = clustering_ratio(data.refined_labels, data.frame_origins)
    clustering_plain = clustering_ratio(data.dbscan_labels, data.frame_origins)

    true_temp = {
        sid: next(
            e.temperature
            for entries in data.ground_truth.entries.values()
            for e in entries
            if e.subject == sid
        )
        for sid in data.ground_truth.subjects()
    }
    temp_pairs = []
    corrected_all, raw_bias_all = [], []
    for f in data.fused:
        rid = int(f["radar_id"])
        sid = radar_map.get(rid)
        entry = {
            "radar_id": rid,
            "tc_id": int(f["tc_id"]),
            "subject": sid,
            "t_hat": f["T_hat"],
            "t_true": true_temp.get(sid),
            "error": None if sid is None or f["T_hat"] is None else f["T_hat"] - true_temp[sid],
        }
        temp_pairs.append(entry)
        config = data.scenario_dict.get("config", {})
        a0 = float(config.get("a0", 1.116))
        a1 = float(config.get("a1", 0.013))
        for contrib in f.get("per_frame", []):
            corrected_all.append(contrib["t_corrected"])
            raw_bias_all.append((a0 + 2.0 * a1) * contrib["t_raw"])

    report = {
        "association": {
            "precision": assoc.precision,
            "recall": assoc.recall,
            "frame_precision": assoc.frame_precision,
            "frame_recall": assoc.frame_recall,
            "performed": [list(p) for p in assoc.performed],
            "relevant": [list(p) for p in assoc.relevant],
            "true_positives": [list(p) for p in assoc.true_positives],
        },
        "tracking": tracking_out,
        "clustering": {
            "r_cl_refined": clustering_refined.ratio,
            "r_cl_dbscan": clustering_plain.ratio,
            "n_frames": len(clustering_refined.per_frame),
        },
        "temperature": {
            "per_pair": temp_pairs,
            "corrected_spread": float(np.std(corrected_all)) if corrected_all else None,
            "raw_bias_spread": float(np.std(raw_bias_all)) if raw_bias_all else None,
        },
    }
    report["_per_frame_position_error"] = {str(k): v for k, v in sorted(per_frame_error.items())}
    return report


def format_report(report: dict) -> str:
    """Human-readable summary table of `evaluate_run` output."""
    lines = []
    assoc = report["association"]
    lines.append("association")
    lines.append(f"  precision        {assoc['precision']:.3f}")
    lines.append(f"  recall           {assoc['recall']:.3f}")
    if assoc.get("frame_precision") is not None:
        lines.append(f"  frame precision  {assoc['frame_precision']:.3f}")
        lines.append(f"  frame recall     {assoc['frame_recall']:.3f}")
    lines.append(f"  pairs            {assoc['performed']}")
    tracking = report["tracking"]
    lines.append("tracking")
    if tracking.get("position_rmse") is not None:
        lines.append(f"  position RMSE    {tracking['position_rmse']:.3f} m")
        lines.append(f"  distance RMSE    {tracking['distance_rmse']:.3f} m")
    else:
        lines.append("  no matched tracks")
    clustering = report["clustering"]
    lines.append("clustering")
    lines.append(f"  r_cl (refined)   {clustering['r_cl_refined']:.3f}")
    lines.append(f"  r_cl (DBSCAN)    {clustering['r_cl_dbscan']:.3f}")
    temp = report["temperature"]
    lines.append("temperature")
    for pair in temp["per_pair"]:
        err = "n/a" if pair["error"] is None else f"{pair['error']:+.3f}"
        t_hat = "n/a" if pair["t_hat"] is None else f"{pair['t_hat']:.2f}"
        lines.append(
            f"  radar {pair['radar_id']} / tc {pair['tc_id']}: "
            f"T_hat {t_hat} C (subject {pair['subject']}, err {err})"
        )
    if temp["corrected_spread"] is not None:
        lines.append(f"  corrected spread {temp['corrected_spread']:.3f} C")
        lines.append(f"  raw-bias spread  {temp['raw_bias_spread']:.3f} C")
    return "\n".join(lines) + "\n"
