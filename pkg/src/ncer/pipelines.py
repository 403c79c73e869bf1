"""End-to-end clustering: NCER, NC, K-means, NMF, and ER/MER-based labels."""

from dataclasses import dataclass, field

import numpy as np

from ncer.config import DEFAULT_TOL
from ncer.embedding import spectral_embed
from ncer.errors import InputError
from ncer.graph import SimilarityConfig, build_graph, normalized_cut_value
from ncer.linalg import nnls
from ncer.mvee import mvee_origin
from ncer.separable import ErConfig, pick_representatives, run_er, select_active


@dataclass(frozen=True, eq=False)
class ClusterResult:
    labels: np.ndarray                 # 0-based cluster index per point
    representatives: np.ndarray        # J; empty for NC / K-means / NMF
    centers: np.ndarray | None = None
    objective: float = float("nan")
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class KmeansInit:
    """Either explicit initial centers (k x r) or a seed for picking r data points."""

    centers: np.ndarray | None = None
    seed: int | None = None

    def initial_centers(self, X, r):
        if self.centers is not None:
            C = np.array(self.centers, dtype=float)
            if C.shape != (X.shape[0], r):
                raise InputError(f"initial centers must be {X.shape[0]} x {r}")
            return C
        rng = np.random.default_rng(self.seed)
        return X[:, rng.choice(X.shape[1], size=r, replace=False)].copy()


def _sq_dists(X, C):
    return (np.einsum("ij,ij->j", X, X)[:, None]
            - 2.0 * X.T @ C
            + np.einsum("ij,ij->j", C, C)[None, :])


def kmeans(X, r, init=None, max_iter=300, history=None):
    """Lloyd's algorithm on the columns of ``X``.

    Stops when labels stop changing or after ``max_iter`` rounds. An empty
    cluster gets its center moved onto the point lying farthest from its own
    center. ``history``, if a list, receives the cost after every round.

    Returns ``(labels, centers, cost)``.
    """
    X = np.asarray(X, dtype=float)
    m = X.shape[1]
    r = int(r)
    if not 1 <= r <= m:
        raise InputError(f"r must lie in [1, {m}], got {r}")
    init = KmeansInit(seed=0) if init is None else init
    C = init.initial_centers(X, r)
    labels = None
    cost = np.inf
    for _ in range(max_iter):
        dist = np.maximum(_sq_dists(X, C), 0.0)
        new = np.argmin(dist, axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(r):
            members = labels == j
            if members.any():
                C[:, j] = X[:, members].mean(axis=1)
        for j in range(r):
            if not (labels == j).any():
                own = np.einsum("ij,ij->j", X - C[:, labels], X - C[:, labels])
                C[:, j] = X[:, int(np.argmax(own))]
        resid = X - C[:, labels]
        cost = float(np.einsum("ij,ij->", resid, resid))
        if history is not None:
            history.append(cost)
    return labels, C, cost


def assign_by_nls(P, J, tol=DEFAULT_TOL):
    """Label each column of ``P`` by its largest NNLS weight on ``P[:, J]``.

    Cluster ``j`` is the one represented by ``J[j]``; ties go to the lower j.
    """
    P = np.asarray(P, dtype=float)
    J = np.asarray(J, dtype=int)
    basis = P[:, J]
    labels = np.empty(P.shape[1], dtype=int)
    for i in range(P.shape[1]):
        labels[i] = int(np.argmax(nnls(basis, P[:, i], tol)))
    return labels


def _embed(A, r, cfg, tol):
    G = build_graph(A, cfg)
    return G, spectral_embed(G, r, tol)


def ncer(A, r, cfg=None, tol=DEFAULT_TOL):
    """Normalized-cut embedding, ellipsoidal rounding, NNLS assignment."""
    cfg = SimilarityConfig() if cfg is None else cfg
    G, emb = _embed(A, r, cfg, tol)
    P = emb.points
    ell = mvee_origin(P, tol=tol)
    active = select_active(P, ell, r, tol)
    J = pick_representatives(P, active, r, tol)
    labels = assign_by_nls(P, J, tol)
    return ClusterResult(
        labels=labels,
        representatives=J,
        centers=P[:, J],
        objective=normalized_cut_value(G, labels),
        diagnostics={
            "active": active.tolist(),
            "active_size": int(active.size),
            "mvee_iterations": ell.iterations,
            "mvee_gap": ell.gap,
            "eigenvalues": emb.eigenvalues.tolist(),
            "tau": emb.tau,
        },
    )


def nc(A, r, cfg=None, init=None, tol=DEFAULT_TOL, max_iter=300):
    """Normalized-cut embedding followed by K-means on the embedded points."""
    cfg = SimilarityConfig() if cfg is None else cfg
    G, emb = _embed(A, r, cfg, tol)
    labels, centers, cost = kmeans(emb.points, r, init, max_iter)
    return ClusterResult(
        labels=labels,
        representatives=np.array([], dtype=int),
        centers=centers,
        objective=cost,
        diagnostics={
            "eigenvalues": emb.eigenvalues.tolist(),
            "normalized_cut": normalized_cut_value(G, labels),
        },
    )


def _nmf_objective(A, F, W):
    R = F @ W - A
    return float(np.einsum("ij,ij->", R, R))


def nmf_baseline(A, r, init_F, max_iter=500, rel_tol=1e-6, history=None, tol=DEFAULT_TOL):
    """Alternating NNLS for ``min ||F W - A||_F^2`` with ``F, W >= 0``.

    Each sweep solves W column by column with F fixed, then F row by row
    with W fixed. Points are labeled by the largest entry of their column of
    W. Stops when the relative objective decrease drops below ``rel_tol``.
    """
    A = np.asarray(A, dtype=float)
    if (A < 0).any():
        raise InputError("NMF needs a nonnegative matrix")
    F = np.array(init_F, dtype=float)
    d, m = A.shape
    if F.shape != (d, int(r)) or (F < 0).any():
        raise InputError(f"init_F must be a nonnegative {d} x {r} matrix")
    W = np.zeros((int(r), m))
    prev = None
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        for i in range(m):
            W[:, i] = nnls(F, A[:, i], tol)
        for k in range(d):
            F[k] = nnls(W.T, A[k], tol)
        obj = _nmf_objective(A, F, W)
        if history is not None:
            history.append(obj)
        if prev is not None and prev - obj <= rel_tol * max(prev, np.finfo(float).tiny):
            break
        prev = obj
    labels = np.argmax(W, axis=0)
    return ClusterResult(
        labels=labels,
        representatives=np.array([], dtype=int),
        centers=F,
        objective=_nmf_objective(A, F, W),
        diagnostics={"iterations": sweeps, "weights": W},
    )


def degree_vector(A):
    """``d_i = a_i^T (a_1 + ... + a_m)``: degrees of the full inner-product graph."""
    A = np.asarray(A, dtype=float)
    return A.T @ A.sum(axis=1)


def er_cluster(A, r, variant="ER", tol=DEFAULT_TOL):
    """Cluster with ER or MER run on ``A D^{-1/2}`` with ``S = D^{-1/2}``.

    Points are then labeled from the scaled columns ``q_i`` exactly as NCER
    labels its embedded points.
    """
    A = np.asarray(A, dtype=float)
    d = degree_vector(A)
    if (d <= 0).any():
        raise InputError("degree scaling needs nonzero, nonnegative columns")
    res = run_er(A / np.sqrt(d), r, ErConfig(scaling_mode="degree", degrees=d), variant, tol)
    if res.zero_columns.size:
        raise InputError(f"reduced matrix has zero columns {res.zero_columns.tolist()}")
    labels = assign_by_nls(res.points, res.selected, tol)
    return ClusterResult(
        labels=labels,
        representatives=res.selected,
        centers=res.points[:, res.selected],
        diagnostics={
            "active": res.active.tolist(),
            "active_size": int(res.active.size),
            "mvee_iterations": res.ellipsoid.iterations,
            "mvee_gap": res.ellipsoid.gap,
        },
    )


def same_partition(a, b):
    """True when two labelings agree up to renaming clusters."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return False
    pairs = set(zip(a.tolist(), b.tolist()))
    return len(pairs) == len(set(a.tolist())) == len(set(b.tolist()))


def verify_bridge(A, r, tol=DEFAULT_TOL):
    """Compare NCER (inner-product kernel, p = m) with ER and MER on ``A D^{-1/2}``.

    Returns a dict of checks: equal active sets (NCER vs ER), equal
    representatives and equal partitions (NCER vs MER), the largest deviation
    of ``lambda_i`` from ``1 - sigma_i^2``, and the largest deviation of the
    embedded points' first coordinate from ``tau``.
    """
    A = np.asarray(A, dtype=float)
    if (A < 0).any() or (np.abs(A).sum(axis=0) == 0).any():
        raise InputError("data must be nonnegative with no zero columns")
    m = A.shape[1]
    cfg = SimilarityConfig(b=0.0, c=1, p=m)
    G, emb = _embed(A, r, cfg, tol)
    P = emb.points
    ell = mvee_origin(P, tol=tol)
    I1 = select_active(P, ell, r, tol)
    J1 = pick_representatives(P, I1, r, tol)
    labels1 = assign_by_nls(P, J1, tol)

    d = degree_vector(A)
    scaled = A / np.sqrt(d)
    er_cfg = ErConfig(scaling_mode="degree", degrees=d)
    er_res = run_er(scaled, r, er_cfg, "ER", tol)
    mer_res = run_er(scaled, r, er_cfg, "MER", tol)
    labels2 = assign_by_nls(mer_res.points, mer_res.selected, tol)

    sigma = np.linalg.svd(scaled, compute_uv=False)
    k = min(r, sigma.size)
    eig_dev = float(np.abs(emb.eigenvalues[:k] - (1.0 - sigma[:k] ** 2)).max())

    return {
        "ncer_active": I1.tolist(),
        "er_active": er_res.active.tolist(),
        "active_equal": bool(np.array_equal(I1, er_res.active)),
        "ncer_selected": J1.tolist(),
        "mer_selected": mer_res.selected.tolist(),
        "selected_equal": bool(np.array_equal(np.sort(J1), np.sort(mer_res.selected))),
        "labels_equal": same_partition(labels1, labels2),
        "degrees_match": bool(np.allclose(G.degrees, d, rtol=1e-12, atol=0)),
        "eigen_singular_dev": eig_dev,
        "hyperplane_dev": float(np.abs(P[0] - emb.tau).max()),
        "ncer_labels": labels1.tolist(),
        "mer_labels": labels2.tolist(),
    }
