"""Re-identification benchmark: synthetic subjects with distinct gaits.

Each subject walks a rectangular loop in its own simulated capture; the
radar pipeline tracks it and gait features are extracted from the track's
cluster windows. The first part of every capture fills the training store,
the remainder provides disjoint test windows. Accuracies are averaged over
several hidden-layer initializations of the weighted ELM and compared with
the cosine-similarity centroid baseline.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .config import SystemConfig
from .pipeline import run_pipeline
from .reid import (
    FeatureStore,
    cs_baseline,
    reidentify,
    welm_train,
    window_features,
)
from .sim import GaitSignature, RadarParams, Scenario, SubjectScript, ThermalParams, default_camera, default_camera_transform

LOOP = ((-2.5, 1.5), (2.5, 1.5), (2.5, 6.0), (-2.5, 6.0))


def gait_grid(n_subjects: int) -> list[GaitSignature]:
    """Distinct, well-spread gait signatures for n subjects.

    Each parameter is assigned through a different fixed permutation so
    that no two parameters are monotonically coupled across subjects.
    """
    periods = np.linspace(0.7, 1.6, n_subjects)
    amps = np.linspace(0.25, 0.65, n_subjects)
    torsos = np.linspace(1.5, 1.95, n_subjects)
    spreads = np.linspace(0.13, 0.19, n_subjects)
    rng = np.random.default_rng(20_240_101)
    perm_a = rng.permutation(n_subjects)
    perm_t = rng.permutation(n_subjects)
    perm_s = rng.permutation(n_subjects)
    return [
        GaitSignature(
            stride_period=float(periods[i]),
            modulation_amp=float(amps[perm_a[i]]),
            torso_height=float(torsos[perm_t[i]]),
            spread_xy=float(spreads[perm_s[i]]),
        )
        for i in range(n_subjects)
    ]


def loop_script(
    speed: float,
    duration: float,
    gait: GaitSignature,
    start_corner: int = 0,
    temperature: float = 36.6,
) -> SubjectScript:
    """Waypoints walking the rectangular loop, alternating a slower and a
    faster pace every leg; free walking is not constant-speed, and the
    within-class spread it creates is what the re-id stage must absorb."""
    waypoints = []
    t = 0.0
    idx = start_corner % len(LOOP)
    pos = np.array(LOOP[idx])
    waypoints.append((float(pos[0]), float(pos[1]), t))
    leg = 0
    while t < duration:
        idx = (idx + 1) % len(LOOP)
        nxt = np.array(LOOP[idx])
        pace = speed * (0.85 if leg % 2 == 0 else 1.15)
        t += float(np.linalg.norm(nxt - pos)) / pace
        waypoints.append((float(nxt[0]), float(nxt[1]), t))
        pos = nxt
        leg += 1
    return SubjectScript(waypoints=tuple(waypoints), temperature=temperature, gait=gait)


def subject_capture(
    subject: int,
    gait: GaitSignature,
    duration: float,
    seed: int,
    config: SystemConfig,
) -> list[tuple[int, np.ndarray]]:
    """Simulate one subject's walk and return its track's gait features."""
    speed = 0.85 + 0.55 * (subject % 8) / 7.0
    scenario = Scenario(
        subjects=(loop_script(speed, duration, gait, start_corner=subject),),
        duration=duration,
        seed=seed,
        camera=default_camera(),
        transform=default_camera_transform(),
        config=config,
        radar=RadarParams(clutter_rate=1.0),
        thermal=ThermalParams(dropout=1.0),  # radar-only capture
    )
    result = run_pipeline(scenario, cluster_buffer=scenario.n_frames + 1)
    # Single-subject capture: every confirmed track belongs to the subject,
    # so pool features across track fragments, ordered by window end.
    feats: list[tuple[int, np.ndarray]] = []
    for track in result.radar_tracks:
        if track.confirmed:
            feats.extend(window_features(track.cluster_history, config.delta, config.feature_stride))
    return sorted(feats, key=lambda item: item[0])


@dataclass
class BenchData:
    store: FeatureStore
    test_features: dict[int, list[np.ndarray]]
    train_counts: dict[int, int]


def capture_features(
    n_subjects: int,
    duration: float,
    seed: int = 0,
    config: SystemConfig | None = None,
) -> dict[int, list[tuple[int, np.ndarray]]]:
    """One capture per subject; returns the per-subject feature streams."""
    cfg = config or SystemConfig()
    gaits = gait_grid(n_subjects)
    return {
        sid: subject_capture(sid, gaits[sid], duration, seed * 1000 + sid, cfg)
        for sid in range(n_subjects)
    }


def select_bench_data(
    features: dict[int, list[tuple[int, np.ndarray]]],
    trains: list[float],
    test_start_s: float,
    config: SystemConfig | None = None,
) -> BenchData:
    """Slice captured feature streams into a labeled store and test windows.

    Windows ending inside a subject's training span go to the store; those
    ending after `test_start_s` (common to all subjects, so every store
    variant is scored on the same test set) become its test stream.
    """
    cfg = config or SystemConfig()
    store = FeatureStore()
    test_features: dict[int, list[np.ndarray]] = {}
    train_counts: dict[int, int] = {}
    test_start = test_start_s / cfg.delta + cfg.feature_window
    for sid, feats in features.items():
        train_end = trains[sid] / cfg.delta
        n_train = 0
        test_features[sid] = []
        for end_frame, vec in feats:
            if end_frame < train_end:
                store.add(sid, vec)
                n_train += 1
            elif end_frame >= test_start:
                test_features[sid].append(vec)
        train_counts[sid] = n_train
    return BenchData(store=store, test_features=test_features, train_counts=train_counts)


def build_bench_data(
    n_subjects: int,
    train_s: float | list[float],
    test_s: float,
    seed: int = 0,
    config: SystemConfig | None = None,
) -> BenchData:
    """Simulate every subject and split its features into train and test.

    `train_s` may be a per-subject list to build imbalanced stores; the
    capture length is max(train_s) + test_s for everyone, but only windows
    ending inside the subject's own training span are stored.
    """
    cfg = config or SystemConfig()
    trains = [train_s] * n_subjects if np.isscalar(train_s) else list(train_s)
    duration = max(trains) + test_s + 3.0
    features = capture_features(n_subjects, duration, seed, cfg)
    return select_bench_data(features, trains, max(trains), cfg)


def _score_events(
    features: list[np.ndarray], window_s: float, delta: float, stride: int
) -> list[list[np.ndarray]]:
    """Disjoint feature chunks, each long enough for one decision."""
    needed = max(1, ceil(window_s / (stride * delta)))
    return [
        features[i : i + needed]
        for i in range(0, len(features) - needed + 1, needed)
    ]


def evaluate_welm(
    data: BenchData,
    window_s: float,
    seeds: list[int],
    config: SystemConfig | None = None,
) -> float:
    """Mean re-id accuracy over hidden-layer seeds."""
    cfg = config or SystemConfig()
    accuracies = []
    for seed in seeds:
        model = welm_train(data.store, cfg.elm_hidden, cfg.elm_lambda, seed=seed)
        hits, total = 0, 0
        for sid, feats in data.test_features.items():
            for chunk in _score_events(feats, window_s, cfg.delta, cfg.feature_stride):
                pred = reidentify(model, chunk, window_s, cfg.delta, cfg.feature_stride)
                hits += pred == sid
                total += 1
        accuracies.append(hits / total if total else 0.0)
    return float(np.mean(accuracies))


def evaluate_cs(
    data: BenchData, window_s: float, config: SystemConfig | None = None
) -> float:
    cfg = config or SystemConfig()
    hits, total = 0, 0
    for sid, feats in data.test_features.items():
        for chunk in _score_events(feats, window_s, cfg.delta, cfg.feature_stride):
            pred = cs_baseline(data.store, chunk, window_s, cfg.delta, cfg.feature_stride)
            hits += pred == sid
            total += 1
    return hits / total if total else 0.0


def run_reid_benchmark(
    n_subjects: int = 6,
    train_min: float = 3.0,
    windows: tuple[float, ...] = (0.0, 10.0, 20.0),
    n_seeds: int = 20,
    seed: int = 0,
    test_s: float = 60.0,
    config: SystemConfig | None = None,
) -> list[dict]:
    """Accuracy grid over score windows for the WELM and the CS baseline."""
    cfg = config or SystemConfig()
    data = build_bench_data(n_subjects, train_min * 60.0, test_s, seed=seed, config=cfg)
    seeds = list(range(seed, seed + n_seeds))
    rows = []
    for window_s in windows:
        rows.append(
            {
                "method": "welm",
                "subjects": n_subjects,
                "train_min": train_min,
                "window_s": window_s,
                "seeds": n_seeds,
                "accuracy": evaluate_welm(data, window_s, seeds, cfg),
            }
        )
        rows.append(
            {
                "method": "cs",
                "subjects": n_subjects,
                "train_min": train_min,
                "window_s": window_s,
                "seeds": 1,
                "accuracy": evaluate_cs(data, window_s, cfg),
            }
        )
    return rows
