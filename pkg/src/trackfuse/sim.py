"""Deterministic synthesis of pedestrian scenarios.

Replaces the sensing hardware: scripted subjects walk between waypoints and
the simulator emits post-detection radar point clouds (a statistical body
model, not an electromagnetic one), noisy thermal face detections with the
distance-dependent temperature distortion, and the ground-truth record used
by the evaluation metrics. Every random draw derives from the scenario seed,
so a fixed scenario is byte-identical across runs.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .config import SystemConfig
from .errors import BehindCameraError, ScenarioError
from .geometry import CameraModel, RigidTransform, project_to_image, transform_to_camera
from .pointcloud import PointCloudFrame
from .thermal import FaceDetection, GModel

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class GaitSignature:
    """Per-subject parameters that make gait features class-separable."""

    stride_period: float = 1.1  # s
    torso_height: float = 1.7  # m
    # Horizontal scatter of body reflections; ~0.2 m matches the footprint
    # of a walking person (torso + swinging limbs).
    spread_xy: float = 0.15
    modulation_amp: float = 0.25  # m/s, limb-velocity oscillation amplitude


@dataclass(frozen=True)
class SubjectScript:
    waypoints: tuple[tuple[float, float, float], ...]
    temperature: float = 36.6
    gait: GaitSignature = field(default_factory=GaitSignature)

    def __post_init__(self) -> None:
        if not self.waypoints:
            raise ScenarioError("subject needs at least one waypoint")
        times = [w[2] for w in self.waypoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ScenarioError("waypoint times must be strictly increasing")
        if not 34.0 <= self.temperature <= 42.0:
            raise ScenarioError(f"temperature {self.temperature} outside [34, 42] C")


@dataclass(frozen=True)
class RadarParams:
    points_min: int = 20
    points_max: int = 80
    clutter_rate: float = 3.0  # Poisson mean per frame
    room: tuple[tuple[float, float], tuple[float, float]] = ((-4.0, 4.0), (0.0, 8.0))
    velocity_noise_std: float = 0.0


@dataclass(frozen=True)
class ThermalParams:
    temp_noise_std: float = 0.3  # C, sensor noise on the max-pixel reading
    bbox_noise: bool = True  # draw center/height noise from the config R
    dropout: float = 0.0  # i.i.d. per-frame detection loss probability


@dataclass(frozen=True)
class Scenario:
    subjects: tuple[SubjectScript, ...]
    duration: float
    seed: int
    camera: CameraModel
    transform: RigidTransform
    camera_ground: tuple[float, float] = (0.0, 0.0)
    config: SystemConfig = field(default_factory=SystemConfig)
    radar: RadarParams = field(default_factory=RadarParams)
    thermal: ThermalParams = field(default_factory=ThermalParams)
    jitter_accel_std: float = 0.3  # m/s^2, trajectory wobble (0 disables)

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ScenarioError("duration must be positive")
        if not self.subjects:
            raise ScenarioError("scenario needs at least one subject")

    @property
    def n_frames(self) -> int:
        return int(round(self.duration / self.config.delta))

    def g_model(self) -> GModel:
        c = self.config
        return GModel(b0=c.b0, b1=c.b1, b2=c.b2)


def default_camera_transform(height: float = 1.5) -> RigidTransform:
    """Camera at (0, 0, height) looking along world +y, image y pointing down."""
    rot = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
    return RigidTransform(rot, -rot @ np.array([0.0, 0.0, height]))


def default_camera() -> CameraModel:
    return CameraModel.simple(fx=500.0, fy=500.0, cx=320.0, cy=256.0)


def generate_trajectory(
    script: SubjectScript,
    delta: float,
    n_frames: int,
    jitter_accel_std: float = 0.0,
    rng: np.random.Generator | int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame positions and velocities for one subject.

    Positions interpolate the waypoints at constant speed per segment and
    clamp outside the scripted time span. Gaussian acceleration jitter
    (damped and integrated) is added when enabled.
    """
    wp = np.array(script.waypoints, dtype=float).reshape(-1, 3)
    times = np.arange(n_frames) * delta
    pos = np.column_stack(
        [np.interp(times, wp[:, 2], wp[:, 0]), np.interp(times, wp[:, 2], wp[:, 1])]
    )
    vel = np.zeros((n_frames, 2))
    if wp.shape[0] > 1:
        seg_v = np.diff(wp[:, :2], axis=0) / np.diff(wp[:, 2])[:, None]
        seg = np.searchsorted(wp[:, 2], times, side="right") - 1
        inside = (seg >= 0) & (seg < seg_v.shape[0]) & (times >= wp[0, 2]) & (times < wp[-1, 2])
        vel[inside] = seg_v[np.clip(seg[inside], 0, seg_v.shape[0] - 1)]

    if jitter_accel_std > 0.0:
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        jitter_v = np.zeros(2)
        for k in range(n_frames):
            jitter_v = 0.9 * jitter_v + gen.normal(0.0, jitter_accel_std, 2) * delta
            if k + 1 < n_frames:
                pos[k + 1 :] += jitter_v * delta
            vel[k] += jitter_v
    return pos, vel


def synthesize_point_cloud(
    frame_index: int,
    delta: float,
    positions: np.ndarray,
    velocities: np.ndarray,
    gaits: list[GaitSignature],
    rng: np.random.Generator,
    params: RadarParams,
) -> PointCloudFrame:
    """One frame of detected points for the given subject states.

    Each subject contributes an anisotropic Gaussian blob around its
    position with vertical extent set by its torso height. Point velocities
    are the radial projection of the body velocity plus a coherent
    sinusoidal limb term at the stride period, scaled per point. Uniform
    clutter is added with a Poisson count.
    """
    t = frame_index * delta
    pts, origins = [], []
    for sid, (p, v, gait) in enumerate(zip(positions, velocities, gaits)):
        n = int(rng.integers(params.points_min, params.points_max + 1))
        xy = rng.normal(p, gait.spread_xy, size=(n, 2))
        z = rng.normal(0.5 * gait.torso_height, gait.torso_height / 4.0, size=n)
        range_norm = np.linalg.norm(p)
        radial = float(v @ (p / range_norm)) if range_norm > 1e-9 else 0.0
        point_v = np.full(n, radial)
        if gait.modulation_amp > 0.0:
            swing = gait.modulation_amp * np.sin(2.0 * np.pi * t / gait.stride_period)
            point_v = point_v + swing * rng.uniform(0.0, 1.0, size=n)
        if params.velocity_noise_std > 0.0:
            point_v = point_v + rng.normal(0.0, params.velocity_noise_std, size=n)
        dist = np.maximum(np.linalg.norm(xy, axis=1), 0.5)
        p_rx = np.exp(rng.normal(0.0, 0.5, size=n)) / dist**4
        pts.append(np.column_stack([xy, z, point_v, p_rx]))
        origins.append(np.full(n, sid))

    n_clutter = int(rng.poisson(params.clutter_rate)) if params.clutter_rate > 0 else 0
    if n_clutter:
        (x0, x1), (y0, y1) = params.room
        cx = rng.uniform(x0, x1, size=n_clutter)
        cy = rng.uniform(y0, y1, size=n_clutter)
        cz = rng.uniform(0.0, 2.5, size=n_clutter)
        cv = rng.normal(0.0, 0.1, size=n_clutter)
        cp = np.exp(rng.normal(-2.0, 0.5, size=n_clutter))
        pts.append(np.column_stack([cx, cy, cz, cv, cp]))
        origins.append(np.full(n_clutter, -1))

    if pts:
        points = np.concatenate(pts)
        origin_arr = np.concatenate(origins)
    else:
        points = np.empty((0, 5))
        origin_arr = np.empty(0, dtype=int)
    return PointCloudFrame(frame_index, delta, points, origin_arr)


@dataclass
class GroundTruthEntry:
    subject: int
    x: float
    y: float
    vx: float
    vy: float
    distance: float
    temperature: float
    in_fov: bool
    u: float | None = None
    v: float | None = None
    bbox_height: float | None = None


@dataclass
class GroundTruthRecord:
    """Per-frame truth for every subject, as emitted by the simulator."""

    entries: dict[int, list[GroundTruthEntry]] = field(default_factory=dict)

    def frames(self) -> list[int]:
        return sorted(self.entries)

    def subject_positions(self, subject: int) -> dict[int, np.ndarray]:
        out = {}
        for frame, items in self.entries.items():
            for e in items:
                if e.subject == subject:
                    out[frame] = np.array([e.x, e.y])
        return out

    def subjects(self) -> list[int]:
        ids = set()
        for items in self.entries.values():
            ids.update(e.subject for e in items)
        return sorted(ids)


def synthesize_thermal_detections(
    frame_entries: list[GroundTruthEntry],
    scenario: Scenario,
    rng: np.random.Generator,
) -> list[FaceDetection]:
    """Noisy face detections for the subjects inside the camera FoV.

    Bounding-box center and height noise follow the configured observation
    variances; the max-pixel temperature is the true temperature divided by
    alpha(distance) plus sensor noise.
    """
    cfg = scenario.config
    dets = []
    for e in frame_entries:
        if not e.in_fov:
            continue
        if scenario.thermal.dropout > 0.0 and rng.uniform() < scenario.thermal.dropout:
            continue
        if scenario.thermal.bbox_noise:
            cx = e.u + rng.normal(0.0, np.sqrt(cfg.r_xc))
            cy = e.v + rng.normal(0.0, np.sqrt(cfg.r_yc))
            h = e.bbox_height + rng.normal(0.0, np.sqrt(cfg.r_h))
        else:
            cx, cy, h = e.u, e.v, e.bbox_height
        alpha = cfg.a0 + cfg.a1 * e.distance
        t_raw = e.temperature / alpha
        if scenario.thermal.temp_noise_std > 0.0:
            t_raw += rng.normal(0.0, scenario.thermal.temp_noise_std)
        dets.append(FaceDetection(center_x=cx, center_y=cy, height=h, temp_max=t_raw))
    return dets


@dataclass
class SimulationResult:
    scenario: Scenario
    frames: list[PointCloudFrame]
    detections: dict[int, list[FaceDetection]]
    ground_truth: GroundTruthRecord


def run_scenario(scenario: Scenario) -> SimulationResult:
    """Full deterministic synthesis: trajectories, point clouds, detections
    and the ground-truth record."""
    cfg = scenario.config
    n_frames = scenario.n_frames
    g = scenario.g_model()
    seeds = np.random.SeedSequence(scenario.seed).spawn(3)
    traj_seeds = seeds[0].spawn(len(scenario.subjects))
    radar_rng = np.random.default_rng(seeds[1])
    thermal_rng = np.random.default_rng(seeds[2])

    trajectories = [
        generate_trajectory(
            script,
            cfg.delta,
            n_frames,
            scenario.jitter_accel_std,
            np.random.default_rng(traj_seeds[i]),
        )
        for i, script in enumerate(scenario.subjects)
    ]
    gaits = [s.gait for s in scenario.subjects]
    cam_ground = np.array(scenario.camera_ground)

    record = GroundTruthRecord()
    frames: list[PointCloudFrame] = []
    detections: dict[int, list[FaceDetection]] = {}
    for k in range(n_frames):
        positions = np.array([trajectories[i][0][k] for i in range(len(scenario.subjects))])
        velocities = np.array([trajectories[i][1][k] for i in range(len(scenario.subjects))])
        entries = []
        for sid, script in enumerate(scenario.subjects):
            x, y = positions[sid]
            dist = float(np.hypot(x - cam_ground[0], y - cam_ground[1]))
            entry = GroundTruthEntry(
                subject=sid,
                x=float(x),
                y=float(y),
                vx=float(velocities[sid][0]),
                vy=float(velocities[sid][1]),
                distance=dist,
                temperature=script.temperature,
                in_fov=False,
            )
            head = np.array([x, y, script.gait.torso_height])
            try:
                uv = project_to_image(transform_to_camera(head, scenario.transform), scenario.camera)
            except BehindCameraError:
                uv = None
            if uv is not None and scenario.camera.contains(uv):
                entry.in_fov = True
                entry.u = float(uv[0])
                entry.v = float(uv[1])
                entry.bbox_height = g.value(dist)
            entries.append(entry)
        record.entries[k] = entries
        frames.append(
            synthesize_point_cloud(k, cfg.delta, positions, velocities, gaits, radar_rng, scenario.radar)
        )
        detections[k] = synthesize_thermal_detections(entries, scenario, thermal_rng)

    return SimulationResult(scenario, frames, detections, record)


# ---------------------------------------------------------------------------
# Scenario JSON (schema_version 1)

def scenario_to_dict(s: Scenario) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "duration": s.duration,
        "seed": s.seed,
        "subjects": [
            {
                "waypoints": [list(w) for w in sub.waypoints],
                "temperature": sub.temperature,
                "gait": {
                    "stride_period": sub.gait.stride_period,
                    "torso_height": sub.gait.torso_height,
                    "spread_xy": sub.gait.spread_xy,
                    "modulation_amp": sub.gait.modulation_amp,
                },
            }
            for sub in s.subjects
        ],
        "camera": {
            "intrinsics": [[float(v) for v in row] for row in s.camera.intrinsics],
            "distortion": list(s.camera.distortion),
            "width": s.camera.width,
            "height": s.camera.height,
        },
        "transform": {
            "rotation": [[float(v) for v in row] for row in s.transform.rotation],
            "translation": [float(v) for v in s.transform.translation],
        },
        "camera_ground": list(s.camera_ground),
        "radar": {
            "points_min": s.radar.points_min,
            "points_max": s.radar.points_max,
            "clutter_rate": s.radar.clutter_rate,
            "room": [list(s.radar.room[0]), list(s.radar.room[1])],
            "velocity_noise_std": s.radar.velocity_noise_std,
        },
        "thermal": {
            "temp_noise_std": s.thermal.temp_noise_std,
            "bbox_noise": s.thermal.bbox_noise,
            "dropout": s.thermal.dropout,
        },
        "jitter_accel_std": s.jitter_accel_std,
        "config": dataclasses.asdict(s.config),
    }


def scenario_from_dict(d: dict, seed_override: int | None = None) -> Scenario:
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported scenario schema_version {version!r}")
    subjects = tuple(
        SubjectScript(
            waypoints=tuple(tuple(w) for w in sub["waypoints"]),
            temperature=float(sub.get("temperature", 36.6)),
            gait=GaitSignature(**sub.get("gait", {})),
        )
        for sub in d["subjects"]
    )
    cam_d = d.get("camera")
    if cam_d is None:
        camera = default_camera()
    else:
        camera = CameraModel(
            np.array(cam_d["intrinsics"], dtype=float),
            tuple(cam_d.get("distortion", (0.0, 0.0))),
            int(cam_d.get("width", 640)),
            int(cam_d.get("height", 512)),
        )
    tr_d = d.get("transform")
    if tr_d is None:
        transform = default_camera_transform()
    else:
        transform = RigidTransform(
            np.array(tr_d["rotation"], dtype=float),
            np.array(tr_d["translation"], dtype=float),
        )
    config = SystemConfig(**d.get("config", {}))
    scenario = Scenario(
        subjects=subjects,
        duration=float(d["duration"]),
        seed=int(d["seed"]) if seed_override is None else int(seed_override),
        camera=camera,
        transform=transform,
        camera_ground=tuple(d.get("camera_ground", (0.0, 0.0))),
        config=config,
        radar=RadarParams(
            points_min=int(d.get("radar", {}).get("points_min", 20)),
            points_max=int(d.get("radar", {}).get("points_max", 80)),
            clutter_rate=float(d.get("radar", {}).get("clutter_rate", 3.0)),
            room=tuple(tuple(r) for r in d.get("radar", {}).get("room", ((-4.0, 4.0), (0.0, 8.0)))),
            velocity_noise_std=float(d.get("radar", {}).get("velocity_noise_std", 0.0)),
        ),
        thermal=ThermalParams(
            temp_noise_std=float(d.get("thermal", {}).get("temp_noise_std", 0.3)),
            bbox_noise=bool(d.get("thermal", {}).get("bbox_noise", True)),
            dropout=float(d.get("thermal", {}).get("dropout", 0.0)),
        ),
        jitter_accel_std=float(d.get("jitter_accel_std", 0.3)),
    )
    return scenario


def load_scenario(path: str | Path, seed_override: int | None = None) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh), seed_override)


def save_scenario(path: str | Path, scenario: Scenario) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2, sort_keys=True)
        fh.write("\n")


def with_seed(scenario: Scenario, seed: int) -> Scenario:
    return replace(scenario, seed=seed)
