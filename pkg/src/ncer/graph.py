"""p-nearest-neighbor similarity graphs and their Laplacians."""

from dataclasses import dataclass

import numpy as np

from ncer.errors import InputError, InvalidKernelError, IsolatedVertexError


@dataclass(frozen=True)
class SimilarityConfig:
    """Polynomial kernel ``(a_i . a_j + b)^c`` with ``p`` neighbors per point.

    ``p=None`` keeps every pair (the full kernel matrix).
    """

    b: float = 0.0
    c: int = 1
    p: int | None = 5

    def __post_init__(self):
        if self.b < 0:
            raise InputError(f"kernel offset b must be >= 0, got {self.b}")
        if int(self.c) != self.c or self.c < 1:
            raise InputError(f"kernel degree c must be a positive integer, got {self.c}")
        if self.p is not None and self.p < 1:
            raise InputError(f"neighbor number p must be >= 1, got {self.p}")


@dataclass(frozen=True, eq=False)
class SimilarityGraph:
    adjacency: np.ndarray
    degrees: np.ndarray

    @property
    def size(self):
        return self.adjacency.shape[0]


def polynomial_similarity(a_i, a_j, cfg):
    a_i = np.asarray(a_i, dtype=float)
    a_j = np.asarray(a_j, dtype=float)
    if a_i.shape != a_j.shape:
        raise InputError("vectors must have equal dimensions")
    value = (float(a_i @ a_j) + cfg.b) ** int(cfg.c)
    if value < 0:
        raise InvalidKernelError(f"negative similarity {value}")
    return value


def kernel_matrix(A, cfg):
    """Full m x m polynomial kernel over the columns of ``A``."""
    A = np.asarray(A, dtype=float)
    return (A.T @ A + cfg.b) ** int(cfg.c)


def neighbor_mask(S, p):
    """Boolean mask of the OR-symmetrized p-nearest-neighbor relation.

    A point is never its own neighbor. Ties in similarity go to the lower
    index, so the edge set for ``p`` is contained in the one for ``p + 1``.
    """
    m = S.shape[0]
    p = min(int(p), m - 1)
    mask = np.zeros((m, m), dtype=bool)
    if p <= 0:
        return mask
    ranked = S.astype(float, copy=True)
    np.fill_diagonal(ranked, -np.inf)
    order = np.argsort(-ranked, axis=1, kind="stable")[:, :p]
    rows = np.repeat(np.arange(m), p)
    mask[rows, order.ravel()] = True
    return mask | mask.T


def build_graph(A, cfg):
    """Build the weighted adjacency ``K`` and degrees of the data columns.

    ``k_ij`` is the kernel value when either point is among the other's
    ``p`` most similar points, zero otherwise. The diagonal ``k_ii`` is always
    kept, so with ``p=m, b=0, c=1`` the adjacency is exactly ``A^T A``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise InputError("data matrix must be 2-d (points as columns)")
    m = A.shape[1]
    if m < 2:
        raise InputError("need at least two data points")
    S = kernel_matrix(A, cfg)
    if cfg.p is None or cfg.p >= m:
        keep = np.ones((m, m), dtype=bool)
    else:
        keep = neighbor_mask(S, cfg.p)
        np.fill_diagonal(keep, True)
    K = np.where(keep, S, 0.0)
    K = 0.5 * (K + K.T)
    if (K < 0).any():
        bad = np.unique(np.nonzero(K < 0)[0])
        raise InvalidKernelError(
            f"kernel gives negative similarities for points {bad.tolist()[:10]}")
    degrees = K.sum(axis=1)
    isolated = np.flatnonzero(degrees <= 0)
    if isolated.size:
        raise IsolatedVertexError(isolated)
    return SimilarityGraph(K, degrees)


def graph_laplacian(G):
    return np.diag(G.degrees) - G.adjacency


def normalized_laplacian(G):
    """``D^{-1/2} (D - K) D^{-1/2}``, symmetric by construction."""
    if (G.degrees <= 0).any():
        raise IsolatedVertexError(np.flatnonzero(G.degrees <= 0))
    s = 1.0 / np.sqrt(G.degrees)
    Lbar = np.eye(G.size) - s[:, None] * G.adjacency * s[None, :]
    return 0.5 * (Lbar + Lbar.T)


def indicator_matrix(labels, degrees):
    """The m x r matrix with ``1/sqrt(vol(S_j))`` on members of cluster j."""
    labels = np.asarray(labels)
    classes = np.unique(labels)
    H = np.zeros((labels.size, classes.size))
    for j, c in enumerate(classes):
        members = labels == c
        H[members, j] = 1.0 / np.sqrt(degrees[members].sum())
    return H


def normalized_cut_value(G, labels, r=None):
    """Sum over clusters of ``cut(S, S^c) / vol(S)``.

    ``cut`` adds each crossing weight once per ordered pair (i in S, j not in
    S), which is what ``tr(H^T L H)`` evaluates to.
    """
    labels = np.asarray(labels)
    if labels.shape != (G.size,):
        raise InputError("need one label per vertex")
    if r is not None and np.unique(labels).size < r:
        raise InputError(f"partition has empty clusters: {np.unique(labels).size} of {r} used")
    total = 0.0
    for c in np.unique(labels):
        inside = labels == c
        vol = G.degrees[inside].sum()
        if vol <= 0:
            raise InputError(f"cluster {c} has zero volume")
        total += G.adjacency[np.ix_(inside, ~inside)].sum() / vol
    return total
