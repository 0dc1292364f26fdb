"""Brute-force oracle suites for the core numerical kernels.

Each suite checks an implementation against an independent route: the
assignment solver against exhaustive permutation search, both closed forms
of the weighted ELM output weights against each other, the EKF Jacobians
against central finite differences, and DBSCAN labelings against a direct
verification of the density-connectivity axioms.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .assignment import assignment_cost, solve_assignment
from .clustering import NOISE, dbscan
from .reid import FeatureStore, welm_train
from .thermal import GModel, NOISE_DIM, STATE_DIM, noise_jacobian, state_jacobian, transition


@dataclass
class OracleResult:
    name: str
    passed: bool
    detail: str


def brute_force_assignment(cost: np.ndarray) -> float:
    """Exhaustive minimum over all one-to-one pairings of size min(n, m)."""
    c = np.asarray(cost, dtype=float)
    n, m = c.shape
    if n <= m:
        return min(
            sum(c[i, perm[i]] for i in range(n)) for perm in permutations(range(m), n)
        )
    return min(
        sum(c[perm[j], j] for j in range(m)) for perm in permutations(range(n), m)
    )


def check_assignment(n_cases: int = 500, max_dim: int = 7, seed: int = 0) -> OracleResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        n = int(rng.integers(1, max_dim + 1))
        m = int(rng.integers(1, max_dim + 1))
        cost = rng.uniform(-10.0, 10.0, size=(n, m))
        got = assignment_cost(cost, solve_assignment(cost))
        want = brute_force_assignment(cost)
        worst = max(worst, abs(got - want))
        if abs(got - want) > 1e-9:
            return OracleResult(
                "assignment", False, f"total {got} != brute force {want} on {n}x{m}"
            )
    return OracleResult("assignment", True, f"{n_cases} matrices, max deviation {worst:.2e}")


def check_welm_forms(
    sizes: tuple[int, ...] = (10, 500, 3000),
    n_cases: int = 12,
    n_hidden: int = 1024,
    lam: float = 0.1,
    seed: int = 0,
) -> OracleResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for case in range(n_cases):
        size = sizes[case % len(sizes)]
        store = FeatureStore()
        n_classes = int(rng.integers(2, 5))
        for i in range(size):
            label = int(rng.integers(0, n_classes)) if i >= n_classes else i
            store.add(label, rng.normal(size=16))
        welm_seed = int(rng.integers(0, 2**31))
        dual = welm_train(store, n_hidden, lam, seed=welm_seed, force_form="dual")
        primal = welm_train(store, n_hidden, lam, seed=welm_seed, force_form="primal")
        rel = np.linalg.norm(dual.output_weights - primal.output_weights) / np.linalg.norm(
            primal.output_weights
        )
        worst = max(worst, rel)
        if rel > 1e-8:
            return OracleResult(
                "welm-forms", False, f"|V|={size}: relative gap {rel:.2e} > 1e-8"
            )
    return OracleResult("welm-forms", True, f"{n_cases} stores, max relative gap {worst:.2e}")


def fd_state_jacobian(state: np.ndarray, g: GModel, delta: float, h: float = 1e-6) -> np.ndarray:
    jac = np.zeros((STATE_DIM, STATE_DIM))
    for i in range(STATE_DIM):
        hi, lo = state.copy(), state.copy()
        hi[i] += h
        lo[i] -= h
        jac[:, i] = (
            transition(hi, np.zeros(NOISE_DIM), g, delta)
            - transition(lo, np.zeros(NOISE_DIM), g, delta)
        ) / (2 * h)
    return jac


def fd_noise_jacobian(state: np.ndarray, g: GModel, delta: float, h: float = 1e-6) -> np.ndarray:
    jac = np.zeros((STATE_DIM, NOISE_DIM))
    for i in range(NOISE_DIM):
        hi, lo = np.zeros(NOISE_DIM), np.zeros(NOISE_DIM)
        hi[i] += h
        lo[i] -= h
        jac[:, i] = (transition(state, hi, g, delta) - transition(state, lo, g, delta)) / (2 * h)
    return jac


def random_ekf_state(rng: np.random.Generator) -> np.ndarray:
    return np.array(
        [
            rng.uniform(0, 640),
            rng.uniform(0, 512),
            rng.uniform(-30, 30),
            rng.uniform(-30, 30),
            rng.uniform(20, 120),
            rng.uniform(0.8, 4.5),
            rng.uniform(-1.0, 1.0),
        ]
    )


def check_ekf_jacobians(n_cases: int = 100, seed: int = 0) -> OracleResult:
    rng = np.random.default_rng(seed)
    g = GModel(b0=162.04, b1=0.61, b2=-14.79)
    delta = 1.0 / 15.0
    q = np.diag([5.0, 5.0, 5.148**2, 5.0])
    worst = 0.0
    for _ in range(n_cases):
        state = random_ekf_state(rng)
        f_ana = state_jacobian(state, g, delta)
        f_num = fd_state_jacobian(state, g, delta)
        l_ana = noise_jacobian(state, g, delta)
        l_num = fd_noise_jacobian(state, g, delta)
        rel_f = np.abs(f_ana - f_num).max() / max(np.abs(f_num).max(), 1.0)
        rel_l = np.abs(l_ana - l_num).max() / max(np.abs(l_num).max(), 1.0)
        worst = max(worst, rel_f, rel_l)
        if rel_f > 1e-4 or rel_l > 1e-4:
            return OracleResult(
                "ekf-jacobians", False, f"relative error F {rel_f:.2e} / L {rel_l:.2e}"
            )
        q_prime = l_ana @ q @ l_ana.T
        eig = np.linalg.eigvalsh((q_prime + q_prime.T) / 2)
        if eig.min() < -1e-10:
            return OracleResult(
                "ekf-jacobians", False, f"Q' not PSD (min eigenvalue {eig.min():.2e})"
            )
    return OracleResult("ekf-jacobians", True, f"{n_cases} states, max relative error {worst:.2e}")


def verify_dbscan_axioms(
    points: np.ndarray, labels: np.ndarray, eps: float, m_pts: int
) -> str | None:
    """Check a labeling against the DBSCAN definition; None when valid."""
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    neighbor = dist <= eps
    np.fill_diagonal(neighbor, False)
    core = neighbor.sum(axis=1) >= m_pts

    for p in range(n):
        if core[p] and labels[p] == NOISE:
            return f"core point {p} labeled noise"
        if not core[p] and labels[p] != NOISE:
            near = [q for q in range(n) if neighbor[p, q] and core[q]]
            if not near:
                return f"border point {p} has no core neighbor"
            if labels[p] not in {labels[q] for q in near}:
                return f"border point {p} not in any reachable cluster"
        if not core[p] and labels[p] == NOISE:
            if any(neighbor[p, q] and core[q] for q in range(n)):
                return f"noise point {p} is density-reachable"
    for p in range(n):
        for q in range(p + 1, n):
            if core[p] and core[q] and neighbor[p, q] and labels[p] != labels[q]:
                return f"core points {p},{q} within eps but in different clusters"
    return None


def check_dbscan(n_cases: int = 60, seed: int = 0) -> OracleResult:
    rng = np.random.default_rng(seed)
    for case in range(n_cases):
        n_blobs = int(rng.integers(1, 4))
        pts = []
        for _ in range(n_blobs):
            center = rng.uniform(-4, 4, size=2)
            pts.append(rng.normal(center, 0.08, size=(int(rng.integers(5, 30)), 2)))
        pts.append(rng.uniform(-5, 5, size=(int(rng.integers(0, 6)), 2)))
        points = np.concatenate(pts)
        eps = float(rng.uniform(0.2, 0.6))
        m_pts = int(rng.integers(2, 12))
        labeling = dbscan(points, eps, m_pts)
        problem = verify_dbscan_axioms(points, labeling.labels, eps, m_pts)
        if problem is not None:
            return OracleResult("dbscan", False, f"case {case}: {problem}")
    return OracleResult("dbscan", True, f"{n_cases} random point sets verified")


def run_all(seed: int = 0) -> list[OracleResult]:
    return [
        check_assignment(seed=seed),
        check_welm_forms(seed=seed),
        check_ekf_jacobians(seed=seed),
        check_dbscan(seed=seed),
    ]
