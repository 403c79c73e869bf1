"""Spectral embedding ``P = V_r^T D^{-1/2}`` with the hyperplane realignment."""

from dataclasses import dataclass

import numpy as np

from ncer.config import DEFAULT_TOL
from ncer.errors import ConvergenceError, InputError, RankDeficientEmbedding
from ncer.graph import normalized_laplacian
from ncer.linalg import sym_eigen


@dataclass(frozen=True, eq=False)
class SpectralEmbedding:
    points: np.ndarray       # r x m, columns p_i
    eigenvalues: np.ndarray  # r smallest, ascending
    tau: float               # every column has first coordinate tau
    degrees: np.ndarray

    @property
    def r(self):
        return self.points.shape[0]


def eigenspace_dimension(values, gap_tol=DEFAULT_TOL.eig_gap):
    """Multiplicity of the smallest eigenvalue under an absolute gap tolerance."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0
    return int(np.count_nonzero(values - values[0] <= gap_tol))


def align_first_eigenvector(V_s, degrees, tol=DEFAULT_TOL):
    """Rotate an orthonormal eigenspace basis so its first column is
    ``tau * D^{1/2} e`` with ``tau = 1 / ||D^{1/2} e||``.

    Returns the rotated basis and ``tau``. The remaining columns complete an
    orthonormal basis of the same subspace.
    """
    V_s = np.asarray(V_s, dtype=float)
    if V_s.ndim == 1:
        V_s = V_s[:, None]
    target = np.sqrt(np.asarray(degrees, dtype=float))
    tau = 1.0 / np.linalg.norm(target)
    target = target * tau
    coef = V_s.T @ target
    resid = np.linalg.norm(V_s @ coef - target)
    if resid > tol.align_residual:
        raise ConvergenceError(
            f"D^(1/2)e is not in the supplied eigenspace (residual {resid:.2e})")
    coef /= np.linalg.norm(coef)
    s = V_s.shape[1]
    Q, _ = np.linalg.qr(np.column_stack([coef, np.eye(s)]))
    if Q[:, 0] @ coef < 0:
        Q[:, 0] = -Q[:, 0]
    aligned = V_s @ Q
    aligned[:, 0] = target
    return aligned, tau


def _bottom_eigenpairs(Lbar, r, tol):
    # ask for more than r pairs so a zero eigenspace wider than r is seen whole
    m = Lbar.shape[0]
    k = min(m, r + 1)
    while True:
        eig = sym_eigen(Lbar, k, tol)
        if k == m or eigenspace_dimension(eig.values, tol.eig_gap) < k:
            return eig
        k = min(m, 2 * k)


def check_rank(P, r, tol=DEFAULT_TOL):
    s = np.linalg.svd(P, compute_uv=False)
    if s.size < r or s[0] == 0 or s[r - 1] <= tol.rank * s[0]:
        raise RankDeficientEmbedding(
            f"embedded points span fewer than r={r} dimensions")


def spectral_embed(G, r, tol=DEFAULT_TOL):
    """Embed graph vertices as the columns of ``V_r^T D^{-1/2}``.

    ``V_r`` holds eigenvectors for the ``r`` smallest eigenvalues of the
    normalized Laplacian, with the first one chosen as ``tau D^{1/2} e`` so
    that all embedded points share first coordinate ``tau``.
    """
    m = G.size
    r = int(r)
    if not 2 <= r <= m:
        raise InputError(f"r must lie in [2, {m}], got {r}")
    Lbar = normalized_laplacian(G)
    eig = _bottom_eigenpairs(Lbar, r, tol)
    s = eigenspace_dimension(eig.values, tol.eig_gap)
    aligned, tau = align_first_eigenvector(eig.vectors[:, :s], G.degrees, tol)
    V = np.column_stack([aligned, eig.vectors[:, s:]])[:, :r]
    P = V.T / np.sqrt(G.degrees)[None, :]
    check_rank(P, r, tol)
    return SpectralEmbedding(P, eig.values[:r].copy(), float(tau), G.degrees.copy())
