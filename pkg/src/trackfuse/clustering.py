"""Point-cloud clustering: DBSCAN, Gaussian-mixture EM and the refinement
step that re-clusters merged point clouds of subjects walking close together.

DBSCAN alone separates subjects reliably until they come within roughly the
neighborhood radius of each other, at which point their returns merge into
one cluster. The refinement uses the tracker's predicted positions to find
groups of nearby subjects, collects the DBSCAN clusters that fall inside the
union of each group's gating regions, and re-clusters those points with a
Gaussian mixture of one component per group member.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import InsufficientDataError

NOISE = -1

_COV_REG = 1e-6


@dataclass
class ClusterLabeling:
    """Per-point labels plus per-cluster centroids and x-y covariances."""

    labels: np.ndarray
    centroids: dict[int, np.ndarray] = field(default_factory=dict)
    covariances: dict[int, np.ndarray] = field(default_factory=dict)

    @classmethod
    def from_labels(cls, points_xy: np.ndarray, labels: np.ndarray) -> "ClusterLabeling":
        labels = np.asarray(labels, dtype=int)
        out = cls(labels=labels)
        for cid in sorted(set(labels.tolist()) - {NOISE}):
            members = points_xy[labels == cid]
            out.centroids[cid] = members.mean(axis=0)
            out.covariances[cid] = np.cov(members.T, ddof=0).reshape(2, 2)
        return out

    @property
    def cluster_ids(self) -> list[int]:
        return sorted(self.centroids.keys())

    def members(self, cid: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cid)

    def partition(self) -> set[frozenset[int]]:
        """Cluster membership as a set of index sets (label-renumbering safe)."""
        return {frozenset(self.members(cid).tolist()) for cid in self.cluster_ids}


def dbscan(points_xy: np.ndarray, eps: float, m_pts: int) -> ClusterLabeling:
    """Density-based clustering on x-y coordinates.

    A point is core when at least `m_pts` other points lie within `eps`.
    Clusters are the connected components of core points under the eps
    relation; non-core points within eps of a core point join the cluster
    of their nearest core point, everything else is labeled NOISE.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if m_pts < 1:
        raise ValueError("m_pts must be at least 1")
    pts = np.asarray(points_xy, dtype=float).reshape(-1, 2)
    n = pts.shape[0]
    labels = np.full(n, NOISE, dtype=int)
    if n == 0:
        return ClusterLabeling.from_labels(pts, labels)

    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    neighbor = dist <= eps
    np.fill_diagonal(neighbor, False)
    core = neighbor.sum(axis=1) >= m_pts

    # Connected components over core points.
    next_id = 0
    for seed in np.flatnonzero(core):
        if labels[seed] != NOISE:
            continue
        stack = [seed]
        labels[seed] = next_id
        while stack:
            p = stack.pop()
            for q in np.flatnonzero(neighbor[p] & core):
                if labels[q] == NOISE:
                    labels[q] = next_id
                    stack.append(q)
        next_id += 1

    # Border points: attach to the cluster of the nearest core point.
    core_idx = np.flatnonzero(core)
    if core_idx.size:
        for p in np.flatnonzero(~core):
            reachable = core_idx[neighbor[p, core_idx]]
            if reachable.size:
                labels[p] = labels[reachable[np.argmin(dist[p, reachable])]]

    return ClusterLabeling.from_labels(pts, labels)


@dataclass
class GaussianMixtureResult:
    labels: np.ndarray
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    responsibilities: np.ndarray
    log_likelihood: float
    n_iter: int


def _gaussian_logpdf(pts: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    cov = cov + _COV_REG * np.eye(2)
    chol = np.linalg.cholesky(cov)
    diff = pts - mean
    sol = np.linalg.solve(chol, diff.T)
    maha = (sol**2).sum(axis=0)
    logdet = 2.0 * np.log(np.diag(chol)).sum()
    return -0.5 * (maha + logdet + 2.0 * np.log(2.0 * np.pi))


def gm_fit(
    points_xy: np.ndarray,
    n_components: int,
    seed: int | np.random.Generator | None = 0,
    means_init: np.ndarray | None = None,
    covs_init: np.ndarray | None = None,
    tol: float = 1e-6,
    max_iter: int = 100,
) -> GaussianMixtureResult:
    """EM fit of a 2-D Gaussian mixture; labels by maximum responsibility.

    With `means_init` given (one row per component) the fit is fully
    deterministic; otherwise `seed` selects distinct starting points.
    """
    pts = np.asarray(points_xy, dtype=float).reshape(-1, 2)
    n = pts.shape[0]
    if n_components < 1:
        raise ValueError("n_components must be at least 1")
    if n < n_components:
        raise InsufficientDataError(f"{n} points cannot support {n_components} components")

    if means_init is not None:
        means = np.asarray(means_init, dtype=float).reshape(n_components, 2).copy()
    else:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        means = pts[rng.choice(n, size=n_components, replace=False)].copy()
    base_cov = np.cov(pts.T, ddof=0).reshape(2, 2) + _COV_REG * np.eye(2)
    if covs_init is not None:
        covs = np.asarray(covs_init, dtype=float).reshape(n_components, 2, 2).copy()
    else:
        covs = np.broadcast_to(base_cov, (n_components, 2, 2)).copy()
    weights = np.full(n_components, 1.0 / n_components)

    prev_ll = -np.inf
    resp = np.full((n, n_components), 1.0 / n_components)
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        # E step
        log_prob = np.column_stack(
            [np.log(weights[q]) + _gaussian_logpdf(pts, means[q], covs[q]) for q in range(n_components)]
        )
        norm = logsumexp(log_prob, axis=1)
        resp = np.exp(log_prob - norm[:, None])
        ll = float(norm.sum())
        if ll - prev_ll < tol and np.isfinite(prev_ll):
            prev_ll = ll
            break
        prev_ll = ll
        # M step
        nk = resp.sum(axis=0) + 1e-300
        weights = nk / n
        means = (resp.T @ pts) / nk[:, None]
        for q in range(n_components):
            diff = pts - means[q]
            covs[q] = (resp[:, q, None] * diff).T @ diff / nk[q] + _COV_REG * np.eye(2)

    labels = resp.argmax(axis=1)
    return GaussianMixtureResult(
        labels=labels,
        weights=weights,
        means=means,
        covariances=covs,
        responsibilities=resp,
        log_likelihood=prev_ll,
        n_iter=n_iter,
    )


def nearby_groups(positions: dict[int, np.ndarray], d_th: float) -> list[set[int]]:
    """Partition track ids into groups via the transitive closure of
    pairwise distance <= d_th."""
    ids = sorted(positions.keys())
    pos = {t: np.asarray(positions[t], dtype=float).reshape(2) for t in ids}
    for t in ids:
        if not np.all(np.isfinite(pos[t])):
            raise ValueError(f"track {t} position is not finite")
    parent = {t: t for t in ids}

    def find(t: int) -> int:
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    for a_i, a in enumerate(ids):
        for b in ids[a_i + 1 :]:
            if np.linalg.norm(pos[a] - pos[b]) <= d_th:
                parent[find(a)] = find(b)

    groups: dict[int, set[int]] = {}
    for t in ids:
        groups.setdefault(find(t), set()).add(t)
    return sorted(groups.values(), key=lambda g: min(g))


@dataclass
class TrackPrior:
    """What the refinement needs to know about one maintained track."""

    position: np.ndarray
    cluster_cov: np.ndarray | None = None


def _region_mask(
    points: np.ndarray, prior: TrackPrior, d_th: float, gamma: float
) -> np.ndarray:
    """Which points fall inside R_c(t) intersect R_s(t) for one track."""
    delta = points - prior.position
    inside = (delta**2).sum(axis=1) < d_th**2
    if prior.cluster_cov is None:
        # No previous cluster shape: the Mahalanobis region degenerates to
        # the d_th disc (identity covariance scaled so the gamma contour
        # has radius d_th), which the disc check already enforced.
        return inside
    cov = prior.cluster_cov + _COV_REG * np.eye(2)
    maha = np.einsum("nj,nj->n", delta, np.linalg.solve(cov, delta.T).T)
    return inside & (maha < gamma)


def _cluster_selected(
    members: np.ndarray,
    centroid: np.ndarray,
    priors: list[TrackPrior],
    d_th: float,
    gamma: float,
    point_fraction: float = 0.1,
) -> bool:
    """Whether a cluster belongs to a group's refinement region.

    Selected when its centroid falls inside the union of the members'
    regions, or when at least `point_fraction` of its points do: a merged
    cluster straddling two subjects can have its centroid pulled outside
    every region by count imbalance while its points clearly overlap them.
    """
    region = np.zeros(members.shape[0] + 1, dtype=bool)
    augmented = np.vstack([members, centroid])
    for prior in priors:
        region |= _region_mask(augmented, prior, d_th, gamma)
        if region[-1] or region[:-1].mean() >= point_fraction:
            return True
    return bool(region[-1] or region[:-1].mean() >= point_fraction)


def refine_clusters(
    points_xy: np.ndarray,
    labeling: ClusterLabeling,
    tracks: dict[int, TrackPrior],
    d_th: float = 1.2,
    gamma: float = 9.21,
    pi_thr_scale: float = 0.1,
) -> ClusterLabeling:
    """Re-cluster the points of subjects predicted to be close together.

    For every group of tracks within d_th of each other (transitively),
    the points of all DBSCAN clusters whose centroid falls inside the
    union over group members of (d_th disc intersect Mahalanobis region)
    are pooled and re-clustered with a Gaussian mixture of one component
    per member, seeded at the predicted track positions. Components whose
    mixture weight falls below pi_thr_scale / n_group are labeled NOISE.
    Points outside the pooled set keep their original labels.
    """
    pts = np.asarray(points_xy, dtype=float).reshape(-1, 2)
    labels = labeling.labels.copy()
    if not tracks or pts.shape[0] == 0:
        return ClusterLabeling.from_labels(pts, labels)

    groups = nearby_groups({t: p.position for t, p in tracks.items()}, d_th)
    next_id = max(labeling.cluster_ids, default=-1) + 1

    for group in groups:
        if len(group) <= 1:
            continue
        member_ids = sorted(group)
        priors = [tracks[t] for t in member_ids]
        selected = [
            cid
            for cid in labeling.cluster_ids
            if _cluster_selected(
                pts[labeling.members(cid)], labeling.centroids[cid], priors, d_th, gamma
            )
        ]
        if not selected:
            continue
        pooled = np.concatenate([labeling.members(cid) for cid in selected])
        n_g = len(member_ids)
        if pooled.size < n_g:
            continue
        labels[pooled] = NOISE
        means_init = np.stack([tracks[t].position for t in member_ids])
        # Equal isotropic starting covariances: seeding from the tracks'
        # last cluster shapes lets a stale elongated component swallow the
        # whole pool before EM can rebalance.
        covs_init = np.broadcast_to(np.eye(2) * 0.04, (n_g, 2, 2)).copy()
        gm = gm_fit(
            pts[pooled],
            n_components=n_g,
            means_init=means_init,
            covs_init=covs_init,
        )
        pi_thr = pi_thr_scale / n_g
        for q in range(n_g):
            member_pts = pooled[gm.labels == q]
            if member_pts.size == 0 or gm.weights[q] < pi_thr:
                continue
            labels[member_pts] = next_id
            next_id += 1

    return ClusterLabeling.from_labels(pts, labels)
