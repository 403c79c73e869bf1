"""Dense linear algebra used throughout: eigenpairs, thin SVD, NNLS."""

from typing import NamedTuple

import numpy as np
import scipy.linalg

from ncer.config import DEFAULT_TOL
from ncer.errors import ConvergenceError, InputError


class SymEigen(NamedTuple):
    values: np.ndarray   # ascending
    vectors: np.ndarray  # orthonormal columns


class ThinSvd(NamedTuple):
    left: np.ndarray       # d x k
    singulars: np.ndarray  # descending, >= 0
    right: np.ndarray      # m x k, so M ~ left @ diag(singulars) @ right.T


def _as_matrix(M, name="M"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise InputError(f"{name} must be a non-empty 2-d array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError(f"{name} has non-finite entries")
    return M


def sym_eigen(M, k=None, tol=DEFAULT_TOL):
    """Return the ``k`` smallest eigenpairs of a symmetric matrix.

    Backed by LAPACK's dense symmetric solver (Householder tridiagonalization
    followed by a tridiagonal eigensolver). Eigenvalues come back ascending.
    """
    M = _as_matrix(M)
    n = M.shape[0]
    if M.shape[1] != n:
        raise InputError(f"matrix must be square, got {M.shape}")
    k = n if k is None else int(k)
    if not 1 <= k <= n:
        raise InputError(f"k must lie in [1, {n}], got {k}")
    scale = max(np.abs(M).max(), np.finfo(float).tiny)
    if np.abs(M - M.T).max() > tol.symmetry * scale:
        raise InputError("matrix is not symmetric")
    M = 0.5 * (M + M.T)

    try:
        if k == n:
            values, vectors = scipy.linalg.eigh(M)
        else:
            values, vectors = scipy.linalg.eigh(M, subset_by_index=[0, k - 1])
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}") from exc

    # Frobenius norm bounds the spectral norm from above.
    norm = np.linalg.norm(M)
    resid = np.linalg.norm(M @ vectors - vectors * values, axis=0)
    if norm > 0 and resid.max() > tol.eig_residual * norm:
        raise ConvergenceError(
            f"eigenpair residual {resid.max():.3e} exceeds tolerance")
    return SymEigen(values, vectors)


def thin_svd(M, k=None, tol=DEFAULT_TOL):
    """Top-``k`` singular triples of ``M``."""
    M = _as_matrix(M)
    kmax = min(M.shape)
    k = kmax if k is None else int(k)
    if not 1 <= k <= kmax:
        raise InputError(f"k must lie in [1, {kmax}], got {k}")
    try:
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"SVD failed to converge: {exc}") from exc
    U, s, V = U[:, :k], s[:k], Vt[:k].T
    if s[0] > 0:
        resid = np.linalg.norm(M @ V - U * s, axis=0)
        if resid.max() > tol.eig_residual * s[0]:
            raise ConvergenceError(
                f"singular triple residual {resid.max():.3e} exceeds tolerance")
    return ThinSvd(U, s, V)


def nnls(M, b, tol=DEFAULT_TOL, max_iter=None):
    """Solve ``min ||M w - b||_2^2`` subject to ``w >= 0``.

    Lawson-Hanson active-set method. The entering variable is the one with
    the largest dual value, ties going to the lowest index, which makes the
    result deterministic on rank-deficient ``M``.

    Parameters
    ----------
    M : array_like, shape (n, k)
    b : array_like, shape (n,)
    max_iter : int, optional
        Cap on outer iterations (default ``3 * k + 10``). Hitting the cap
        returns the current feasible iterate.

    Returns
    -------
    w : numpy.ndarray, shape (k,)
    """
    M = _as_matrix(M)
    b = np.asarray(b, dtype=float).ravel()
    if b.shape[0] != M.shape[0]:
        raise InputError(f"shape mismatch: M is {M.shape}, b has {b.shape[0]} entries")
    n = M.shape[1]
    if max_iter is None:
        max_iter = 3 * n + 10
    kkt = tol.nnls_kkt * max(1.0, np.linalg.norm(M) * np.linalg.norm(b))

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    blocked = np.zeros(n, dtype=bool)
    dual = M.T @ b
    for _ in range(max_iter):
        cand = ~passive & ~blocked & (dual > kkt)
        if not cand.any():
            break
        j = int(np.argmax(np.where(cand, dual, -np.inf)))
        passive[j] = True
        x_prev = x.copy()
        while True:
            idx = np.flatnonzero(passive)
            z = np.zeros(n)
            z[idx] = np.linalg.lstsq(M[:, idx], b, rcond=None)[0]
            if np.all(z[idx] > 0):
                x = z
                break
            neg = idx[z[idx] <= 0]
            gap = x[neg] - z[neg]
            steps = np.divide(x[neg], gap, out=np.zeros_like(gap), where=gap > 0)
            alpha = steps.min()
            x = x + alpha * (z - x)
            x[neg[steps <= alpha]] = 0.0
            passive &= x > 0
            x[~passive] = 0.0
            if not passive.any():
                break
        if np.array_equal(x, x_prev):
            # rounding kept the entering variable at zero; skip it until x moves
            blocked[j] = True
        else:
            blocked[:] = False
        dual = M.T @ (b - M @ x)
        dual[passive] = 0.0
    return x
