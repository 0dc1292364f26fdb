"""End-to-end processing chain and run-directory serialization.

`run_pipeline` drives one scenario through the full chain: point-cloud
clustering with refinement, radar tracking, face tracking, track-to-track
association (triggered whenever a face track dies, with a final sweep at
the end of the run) and distance-corrected temperature estimation.

A run directory holds everything the evaluation stage needs, as JSON-lines
streams plus a fused-identity report and a per-frame CSV. All writers sort
keys and emit plain floats, so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clustering import dbscan, refine_clusters
from .errors import ScenarioError
from .fusion import AlphaModel, FusedIdentity, associate_tracks, corrected_temperature, radar_distance
from .radar import RadarTracker, RadarTrack
from .sim import (
    GroundTruthEntry,
    GroundTruthRecord,
    Scenario,
    SimulationResult,
    run_scenario,
    save_scenario,
)
from .thermal import FaceDetection, FaceTrack, FaceTracker, save_detections


@dataclass
class RunResult:
    scenario: Scenario
    sim: SimulationResult
    dbscan_labels: dict[int, np.ndarray]
    refined_labels: dict[int, np.ndarray]
    radar_tracks: list[RadarTrack]
    face_tracks: list[FaceTrack]
    fused: list[FusedIdentity]


def run_pipeline(
    scenario: Scenario,
    detections: dict[int, list[FaceDetection]] | None = None,
    cluster_buffer: int = 450,
) -> RunResult:
    """Process one scenario end to end.

    `detections` replays an external face-detection stream in place of the
    synthesized one (the radar side always comes from the simulator).
    `cluster_buffer` caps how many frames of cluster points each radar
    track retains for gait features.
    """
    cfg = scenario.config
    sim = run_scenario(scenario)
    det_stream = sim.detections if detections is None else detections
    alpha = AlphaModel(cfg.a0, cfg.a1)

    radar_tracker = RadarTracker(cfg, cluster_buffer=cluster_buffer)
    face_tracker = FaceTracker(scenario.g_model(), cfg)
    dbscan_labels: dict[int, np.ndarray] = {}
    refined_labels: dict[int, np.ndarray] = {}
    fused: list[FusedIdentity] = []
    fused_face: set[int] = set()

    def fusion_round(face_candidates: list[FaceTrack]) -> None:
        # One-to-one within a round; a radar track may re-associate in a
        # later round when another face fragment of its subject dies.
        face_candidates = [t for t in face_candidates if t.id not in fused_face and t.readings]
        radar_candidates = [t for t in radar_tracker.all_tracks() if t.confirmed]
        for identity in associate_tracks(
            radar_candidates, face_candidates, scenario.camera, scenario.transform, cfg
        ):
            radar = next(t for t in radar_candidates if t.id == identity.radar_id)
            face = next(t for t in face_candidates if t.id == identity.face_id)
            distances = {k: radar_distance(s) for k, (s, _) in radar.history.items()}
            t_hat, per_frame, all_radar = corrected_temperature(face, alpha, distances)
            identity.t_hat = t_hat
            identity.per_frame = per_frame
            identity.used_radar_distances = all_radar
            fused.append(identity)
            fused_face.add(identity.face_id)

    for frame in sim.frames:
        k = frame.index
        labeling = dbscan(frame.xy, cfg.eps, cfg.m_pts)
        dbscan_labels[k] = labeling.labels.copy()
        radar_tracker.predict()
        refined = refine_clusters(
            frame.xy,
            labeling,
            radar_tracker.priors(),
            d_th=cfg.d_th,
            gamma=cfg.gamma,
            pi_thr_scale=cfg.pi_thr_scale,
        )
        refined_labels[k] = refined.labels.copy()
        radar_tracker.step(k, refined, frame.points)
        died = face_tracker.step(k, det_stream.get(k, []))
        if died:
            fusion_round(died)

    fusion_round(face_tracker.all_tracks())

    return RunResult(
        scenario=scenario,
        sim=sim,
        dbscan_labels=dbscan_labels,
        refined_labels=refined_labels,
        radar_tracks=radar_tracker.all_tracks(),
        face_tracks=face_tracker.all_tracks(),
        fused=fused,
    )


# ---------------------------------------------------------------------------
# Run-directory writers

def _dump_json(obj: dict, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _dump_jsonl(records: list[dict], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _gt_record_lines(record: GroundTruthRecord) -> list[dict]:
    lines = []
    for frame in record.frames():
        subjects = []
        for e in record.entries[frame]:
            item = {
                "subject": e.subject,
                "x": e.x,
                "y": e.y,
                "vx": e.vx,
                "vy": e.vy,
                "distance": e.distance,
                "temperature": e.temperature,
                "in_fov": e.in_fov,
            }
            if e.in_fov:
                item.update({"u": e.u, "v": e.v, "bbox_height": e.bbox_height})
            subjects.append(item)
        lines.append({"index": frame, "subjects": subjects})
    return lines


def write_simulation(out: Path, sim: SimulationResult) -> None:
    out.mkdir(parents=True, exist_ok=True)
    save_scenario(out / "scenario.json", sim.scenario)
    _dump_jsonl([f.to_json_dict() for f in sim.frames], out / "radar_frames.jsonl")
    save_detections(out / "detections.jsonl", sim.detections)
    _dump_jsonl(_gt_record_lines(sim.ground_truth), out / "ground_truth.jsonl")


def _radar_track_lines(tracks: list[RadarTrack]) -> list[dict]:
    lines = []
    for t in tracks:
        frames = sorted(t.history)
        lines.append(
            {
                "id": t.id,
                "confirmed": t.confirmed,
                "frames": frames,
                "states": [[float(v) for v in t.history[k][0]] for k in frames],
                "cov_diag": [[float(v) for v in np.diag(t.history[k][1])] for k in frames],
            }
        )
    return lines


def _face_track_lines(tracks: list[FaceTrack]) -> list[dict]:
    lines = []
    for t in tracks:
        frames = sorted(t.history)
        lines.append(
            {
                "id": t.id,
                "confirmed": t.confirmed,
                "frames": frames,
                "states": [[float(v) for v in t.history[k][0]] for k in frames],
                "cov_diag": [[float(v) for v in np.diag(t.history[k][1])] for k in frames],
                "readings": [
                    {
                        "frame": r.frame,
                        "temp": r.temp,
                        "distance": r.distance,
                        "distance_var": r.distance_var,
                    }
                    for r in t.readings
                ],
            }
        )
    return lines


def _fused_report(result: RunResult) -> dict:
    return {
        "fused": [
            {
                "radar_id": f.radar_id,
                "tc_id": f.face_id,
                "cost": f.cost,
                "K": f.overlap_frames,
                "T_hat": f.t_hat,
                "used_radar_distances": f.used_radar_distances,
                "per_frame": f.per_frame,
            }
            for f in sorted(result.fused, key=lambda f: (f.radar_id, f.face_id))
        ]
    }


def _per_frame_rows(result: RunResult) -> list[tuple]:
    running: dict[int, list[tuple[int, float]]] = {}
    for f in result.fused:
        series = sorted((c["frame"], c["t_corrected"]) for c in f.per_frame)
        means = []
        acc = 0.0
        for n, (frame, val) in enumerate(series, start=1):
            acc += val
            means.append((frame, acc / n))
        running[f.radar_id] = means

    rows = []
    for track in result.radar_tracks:
        if not track.confirmed:
            continue
        means = running.get(track.id, [])
        for k in sorted(track.history):
            state, _ = track.history[k]
            t_hat = ""
            for frame, value in means:
                if frame <= k:
                    t_hat = f"{value:.4f}"
                else:
                    break
            rows.append(
                (
                    k,
                    track.id,
                    f"{state[0]:.6f}",
                    f"{state[1]:.6f}",
                    f"{radar_distance(state):.6f}",
                    t_hat,
                )
            )
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


def write_run(out: Path, result: RunResult) -> None:
    """Write the full run directory (simulation streams + pipeline outputs)."""
    out = Path(out)
    write_simulation(out, result.sim)
    _dump_jsonl(
        [
            {
                "index": k,
                "dbscan": [int(v) for v in result.dbscan_labels[k]],
                "refined": [int(v) for v in result.refined_labels[k]],
            }
            for k in sorted(result.dbscan_labels)
        ],
        out / "cluster_labels.jsonl",
    )
    _dump_jsonl(_radar_track_lines(result.radar_tracks), out / "radar_tracks.jsonl")
    _dump_jsonl(_face_track_lines(result.face_tracks), out / "face_tracks.jsonl")
    _dump_json(_fused_report(result), out / "fused.json")
    with open(out / "per_frame.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "track_id", "x", "y", "d", "T_hat"])
        writer.writerows(_per_frame_rows(result))
    _dump_json(
        {
            "seed": result.scenario.seed,
            "n_frames": result.scenario.n_frames,
            "n_radar_tracks": len(result.radar_tracks),
            "n_face_tracks": len(result.face_tracks),
            "n_fused": len(result.fused),
        },
        out / "run_meta.json",
    )


# ---------------------------------------------------------------------------
# Run-directory reader (for the evaluation stage)

@dataclass
class RunData:
    """Deserialized run directory."""

    scenario_dict: dict
    delta: float
    ground_truth: GroundTruthRecord
    frame_origins: dict[int, np.ndarray]
    dbscan_labels: dict[int, np.ndarray]
    refined_labels: dict[int, np.ndarray]
    radar_tracks: list[dict]
    face_tracks: list[dict]
    fused: list[dict] = field(default_factory=list)


def _load_jsonl(path: Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def load_run(run_dir: str | Path) -> RunData:
    run_dir = Path(run_dir)
    if not (run_dir / "scenario.json").exists():
        raise ScenarioError(f"{run_dir} does not look like a run directory")
    with open(run_dir / "scenario.json", encoding="utf-8") as fh:
        scenario_dict = json.load(fh)
    delta = float(scenario_dict.get("config", {}).get("delta", 1.0 / 15.0))

    record = GroundTruthRecord()
    for line in _load_jsonl(run_dir / "ground_truth.jsonl"):
        record.entries[int(line["index"])] = [
            GroundTruthEntry(
                subject=int(s["subject"]),
                x=float(s["x"]),
                y=float(s["y"]),
                vx=float(s["vx"]),
                vy=float(s["vy"]),
                distance=float(s["distance"]),
                temperature=float(s["temperature"]),
                in_fov=bool(s["in_fov"]),
                u=s.get("u"),
                v=s.get("v"),
                bbox_height=s.get("bbox_height"),
            )
            for s in line["subjects"]
        ]

    frame_origins = {}
    for line in _load_jsonl(run_dir / "radar_frames.jsonl"):
        frame_origins[int(line["index"])] = np.asarray(line.get("origins", []), dtype=int)

    dbscan_labels, refined_labels = {}, {}
    for line in _load_jsonl(run_dir / "cluster_labels.jsonl"):
        k = int(line["index"])
        dbscan_labels[k] = np.asarray(line["dbscan"], dtype=int)
        refined_labels[k] = np.asarray(line["refined"], dtype=int)

    radar_tracks = _load_jsonl(run_dir / "radar_tracks.jsonl")
    face_tracks = _load_jsonl(run_dir / "face_tracks.jsonl")
    with open(run_dir / "fused.json", encoding="utf-8") as fh:
        fused = json.load(fh)["fused"]

    return RunData(
        scenario_dict=scenario_dict,
        delta=delta,
        ground_truth=record,
        frame_origins=frame_origins,
        dbscan_labels=dbscan_labels,
        refined_labels=refined_labels,
        radar_tracks=radar_tracks,
        face_tracks=face_tracks,
        fused=fused,
    )
