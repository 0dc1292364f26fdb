"""Gait-based person re-identification.

Feature vectors are deterministic statistics over 45-frame windows of a
track's point-cloud clusters (velocity moments, oscillation frequency and
strength, vertical extent, point count, centroid speed), L2-normalized to a
fixed 16-dimensional embedding. Classification uses a weighted extreme
learning machine: a random fixed ReLU hidden layer and a closed-form
class-balanced ridge solution for the output weights, with a cosine
similarity centroid classifier as baseline. Decisions accumulate scores
over a time window through a cumulative average.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import ceil
from pathlib import Path

import numpy as np
from scipy.linalg import solve as sym_solve

from .errors import IncompleteWindowError, NoFeaturesError, StoreError

FEATURE_DIM = 16
WINDOW_FRAMES = 45


def _dominant_oscillation(series: np.ndarray, delta: float) -> tuple[float, float]:
    """Frequency (Hz) and normalized strength of the main periodic component.

    Takes the strongest local autocorrelation peak at lag >= 2 and refines
    it with parabolic interpolation for sub-lag frequency resolution.
    """
    x = series - series.mean()
    denom = float(x @ x)
    if denom < 1e-12:
        return 0.0, 0.0
    n = x.size
    ac = np.correlate(x, x, mode="full")[n - 1 :] / denom
    best_lag, best_val = 0, 0.0
    for lag in range(2, n - 1):
        if ac[lag] >= ac[lag - 1] and ac[lag] >= ac[lag + 1] and ac[lag] > best_val:
            best_lag, best_val = lag, float(ac[lag])
    if best_lag == 0:
        return 0.0, 0.0
    curvature = ac[best_lag - 1] - 2.0 * ac[best_lag] + ac[best_lag + 1]
    offset = 0.0
    if curvature < -1e-12:
        offset = float(np.clip(0.5 * (ac[best_lag - 1] - ac[best_lag + 1]) / curvature, -0.5, 0.5))
    return 1.0 / ((best_lag + offset) * delta), best_val


def extract_features(window: list[np.ndarray], delta: float = 1.0 / 15.0) -> np.ndarray:
    """Gait embedding of one 45-frame window of (n, 5) cluster point arrays.

    Raises IncompleteWindowError unless the window has exactly 45 frames,
    each with at least one point.
    """
    if len(window) != WINDOW_FRAMES:
        raise IncompleteWindowError(f"window has {len(window)} frames, expected {WINDOW_FRAMES}")
    if any(np.asarray(f).size == 0 for f in window):
        raise IncompleteWindowError("window contains an empty frame")

    mean_v = np.empty(WINDOW_FRAMES)
    std_v = np.empty(WINDOW_FRAMES)
    counts = np.empty(WINDOW_FRAMES)
    extents = np.empty(WINDOW_FRAMES)
    centroids = np.empty((WINDOW_FRAMES, 2))
    for k, pts in enumerate(window):
        pts = np.asarray(pts, dtype=float).reshape(-1, 5)
        mean_v[k] = pts[:, 3].mean()
        std_v[k] = pts[:, 3].std()
        counts[k] = pts.shape[0]
        extents[k] = pts[:, 2].max() - pts[:, 2].min()
        centroids[k] = pts[:, :2].mean(axis=0)

    speeds = np.linalg.norm(np.diff(centroids, axis=0), axis=1) / delta
    freq_m, strength_m = _dominant_oscillation(mean_v, delta)
    freq_s, strength_s = _dominant_oscillation(std_v, delta)

    # Signed radial-velocity statistics depend on the walking direction
    # relative to the sensor, not on the person; they stay in the vector
    # as context but downweighted so the gait-intrinsic components
    # dominate after normalization.
    direction_w = 0.3
    raw = np.array(
        [
            mean_v.mean() * direction_w,
            mean_v.std(),
            freq_m,
            strength_m,
            std_v.mean(),
            std_v.std(),
            freq_s,
            strength_s,
            extents.mean(),
            extents.std(),
            counts.mean() * 0.01,
            counts.std() * 0.01,
            speeds.mean(),
            speeds.std(),
            (mean_v.max() - mean_v.min()) * direction_w,
            np.abs(mean_v - mean_v.mean()).mean() * direction_w,
        ]
    )
    norm = np.linalg.norm(raw)
    if norm < 1e-12:
        raise IncompleteWindowError("degenerate window produced a zero feature vector")
    return raw / norm


def window_features(
    cluster_frames: dict[int, np.ndarray],
    delta: float = 1.0 / 15.0,
    stride: int = 5,
) -> list[tuple[int, np.ndarray]]:
    """All features extractable from a track's cluster buffer.

    A feature is emitted for each 45-frame run of consecutive frames ending
    every `stride` frames. Returns (end_frame, vector) pairs.
    """
    frames = sorted(cluster_frames)
    out = []
    for pos in range(WINDOW_FRAMES - 1, len(frames), stride):
        span = frames[pos - WINDOW_FRAMES + 1 : pos + 1]
        if span[-1] - span[0] != WINDOW_FRAMES - 1:
            continue  # gap inside the window
        window = [cluster_frames[f] for f in span]
        try:
            out.append((span[-1], extract_features(window, delta)))
        except IncompleteWindowError:
            continue
    return out


@dataclass
class FeatureStore:
    """Labeled gait features grouped by identity."""

    features: dict[int, list[np.ndarray]] = field(default_factory=dict)

    def add(self, label: int, vector: np.ndarray) -> None:
        vec = np.asarray(vector, dtype=float).reshape(-1)
        self.features.setdefault(int(label), []).append(vec)

    @property
    def labels(self) -> list[int]:
        return sorted(self.features)

    def __len__(self) -> int:
        return sum(len(v) for v in self.features.values())

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """All vectors as a matrix plus integer label per row."""
        rows, labels = [], []
        for label in self.labels:
            for vec in self.features[label]:
                rows.append(vec)
                labels.append(label)
        return np.array(rows), np.array(labels, dtype=int)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for label in self.labels:
                for vec in self.features[label]:
                    fh.write(
                        json.dumps({"label": int(label), "vector": [float(x) for x in vec]})
                        + "\n"
                    )

    @classmethod
    def load(cls, path: str | Path) -> "FeatureStore":
        store = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                store.add(int(rec["label"]), np.array(rec["vector"], dtype=float))
        return store


@dataclass
class WELMModel:
    """Weighted ELM: random ReLU hidden layer + closed-form output weights."""

    hidden_weights: np.ndarray
    hidden_biases: np.ndarray
    output_weights: np.ndarray
    classes: list[int]
    lam: float

    def hidden(self, vectors: np.ndarray) -> np.ndarray:
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        return np.maximum(v @ self.hidden_weights.T + self.hidden_biases, 0.0)


def _hidden_layer(
    dim: int, n_hidden: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    # N(0, 0.1): 0.1 is a variance.
    std = np.sqrt(0.1)
    w = rng.normal(0.0, std, size=(n_hidden, dim))
    b = rng.normal(0.0, std, size=n_hidden)
    return w, b


def _solve_output_weights(
    h: np.ndarray, y: np.ndarray, omega_diag: np.ndarray, lam: float, dual: bool
) -> np.ndarray:
    """Both closed forms of the class-weighted ridge solution.

    dual=True solves in sample space (preferred when samples <= hidden
    units), dual=False in hidden space. Either way the system is recast
    symmetrically so a positive-definite solver applies.
    """
    if dual:
        sqrt_w = np.sqrt(omega_diag)
        hw = h * sqrt_w[:, None]
        gram = hw @ hw.T
        gram[np.diag_indices_from(gram)] += lam
        z = sym_solve(gram, sqrt_w[:, None] * y, assume_a="pos")
        return h.T @ (sqrt_w[:, None] * z)
    gram = h.T @ (omega_diag[:, None] * h)
    gram[np.diag_indices_from(gram)] += lam
    return sym_solve(gram, h.T @ (omega_diag[:, None] * y), assume_a="pos")


def class_weights(labels: np.ndarray) -> np.ndarray:
    """Diagonal sample weights 1/|class|: every class gets equal total mass."""
    _, inverse, counts = np.unique(labels, return_inverse=True, return_counts=True)
    return 1.0 / counts[inverse]


def welm_train(
    store: FeatureStore,
    n_hidden: int = 1024,
    lam: float = 0.1,
    seed: int | np.random.Generator = 0,
    force_form: str | None = None,
) -> WELMModel:
    """Train the weighted ELM on the store's features.

    The output weights solve the class-weighted ridge problem in closed
    form, using the sample-space expression when |store| <= n_hidden and
    the hidden-space one otherwise (`force_form` in {"dual", "primal"}
    overrides, for equivalence checks).
    """
    if len(store) == 0:
        raise StoreError("empty feature store")
    if len(store.labels) < 2:
        raise StoreError("training requires at least 2 classes")
    vectors, labels = store.stacked()
    classes = store.labels
    y = np.zeros((vectors.shape[0], len(classes)))
    class_index = {c: i for i, c in enumerate(classes)}
    for row, label in enumerate(labels):
        y[row, class_index[label]] = 1.0

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    w, b = _hidden_layer(vectors.shape[1], n_hidden, rng)
    h = np.maximum(vectors @ w.T + b, 0.0)
    omega = class_weights(labels)
    if force_form is None:
        dual = vectors.shape[0] <= n_hidden
    else:
        dual = force_form == "dual"
    beta = _solve_output_weights(h, y, omega, lam, dual=dual)
    return WELMModel(
        hidden_weights=w,
        hidden_biases=b,
        output_weights=beta,
        classes=classes,
        lam=lam,
    )


def welm_score(model: WELMModel, vector: np.ndarray) -> np.ndarray:
    """Per-class scores h(v)^T B for one feature vector."""
    v = np.asarray(vector, dtype=float).reshape(-1)
    if v.shape[0] != model.hidden_weights.shape[1]:
        raise ValueError(
            f"feature dimension {v.shape[0]} does not match model "
            f"({model.hidden_weights.shape[1]})"
        )
    return model.hidden(v)[0] @ model.output_weights


def cumulative_scores(scores: list[np.ndarray]) -> np.ndarray:
    """Cumulative-average score sequence; row j is the mean of scores[:j+1]."""
    stacked = np.array(scores)
    out = np.empty_like(stacked)
    acc = np.zeros(stacked.shape[1])
    for j, row in enumerate(stacked):
        acc = (row + j * acc) / (j + 1)
        out[j] = acc
    return out


def _n_windows(window_s: float, delta: float, stride: int) -> int:
    return max(1, ceil(window_s / (stride * delta)))


def reidentify(
    model: WELMModel,
    features: list[np.ndarray],
    window_s: float,
    delta: float = 1.0 / 15.0,
    stride: int = 5,
) -> int:
    """Identity decision from a stream of feature vectors.

    Uses the first ceil(window_s / (stride * delta)) vectors (at least one),
    accumulating their scores through a cumulative average and returning
    the class with the highest final score.
    """
    needed = _n_windows(window_s, delta, stride)
    if len(features) < needed:
        raise NoFeaturesError(f"need {needed} feature windows, have {len(features)}")
    scores = [welm_score(model, v) for v in features[:needed]]
    final = cumulative_scores(scores)[-1]
    return model.classes[int(np.argmax(final))]


def class_centroids(store: FeatureStore) -> tuple[np.ndarray, list[int]]:
    if len(store) == 0:
        raise StoreError("empty feature store")
    labels = store.labels
    cents = np.array([np.mean(store.features[label], axis=0) for label in labels])
    return cents, labels


def cs_scores(store: FeatureStore, vector: np.ndarray) -> np.ndarray:
    """Cosine similarity of a vector to every class centroid."""
    cents, _ = class_centroids(store)
    v = np.asarray(vector, dtype=float).reshape(-1)
    norms = np.linalg.norm(cents, axis=1) * np.linalg.norm(v)
    return (cents @ v) / np.maximum(norms, 1e-12)


def cs_baseline(
    store: FeatureStore,
    features: list[np.ndarray] | np.ndarray,
    window_s: float = 0.0,
    delta: float = 1.0 / 15.0,
    stride: int = 5,
) -> int:
    """Centroid cosine-similarity classifier with the same score windowing
    as the WELM path."""
    single = isinstance(features, np.ndarray) and np.asarray(features).ndim == 1
    stream = [np.asarray(features)] if single else [np.asarray(f) for f in features]
    needed = _n_windows(window_s, delta, stride)
    if len(stream) < needed:
        raise NoFeaturesError(f"need {needed} feature windows, have {len(stream)}")
    _, labels = class_centroids(store)
    scores = [cs_scores(store, v) for v in stream[:needed]]
    final = cumulative_scores(scores)[-1]
    return labels[int(np.argmax(final))]
