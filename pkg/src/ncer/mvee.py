"""Origin-centered minimum-volume enclosing ellipsoid of ``{+-p_1, ..., +-p_m}``.

The primal problem is ``min -log det L`` subject to ``p_i^T L p_i <= 1``.
Its dual is the D-optimal design problem

    max_u  log det(sum_i u_i p_i p_i^T)   over the unit simplex,

which we solve with Frank-Wolfe: Khachiyan's toward step when the largest
level is the worst violation, otherwise a pairwise step moving weight from
the lowest-level support point straight to the highest-level point. Pairwise
steps empty near-duplicate support points in one move, where classic away
steps stall. For any design ``u`` with
``X(u) = P diag(u) P^T`` and ``g_i = p_i^T X(u)^{-1} p_i``, the matrix
``X(u)^{-1} / max_i g_i`` is primal feasible and its objective exceeds the
optimum by at most ``r log(max_i g_i / r)``. We stop once ``max_i g_i`` is
within a factor ``1 + eps`` of ``r`` and every support point has
``g_i >= (1 - eps) r``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ncer.config import DEFAULT_TOL
from ncer.errors import InputError, IterationCapExceeded, RankDeficientError

_REFRESH_EVERY = 64


@dataclass(frozen=True, eq=False)
class EllipsoidResult:
    shape: np.ndarray    # r x r positive definite L
    active: np.ndarray   # ascending indices with p_i^T L p_i >= 1 - active_tol
    gap: float           # max_i g_i / r - 1, the relative dual gap
    iterations: int
    weights: np.ndarray  # final design u

    def levels(self, P):
        """``p_i^T L p_i`` for every column of ``P``."""
        return _quad(P, self.shape)


def _quad(P, L):
    return np.einsum("ij,ij->j", P, L @ P)


def active_points(P, shape, active_tol=DEFAULT_TOL.mvee_active):
    """Indices of columns with ``p_i^T shape p_i >= 1 - active_tol``, ascending."""
    P = np.asarray(P, dtype=float)
    return np.flatnonzero(_quad(P, np.asarray(shape, dtype=float)) >= 1.0 - active_tol)


def _inverse_and_levels(P, u):
    """``X(u)^{-1}`` and the levels ``g``, via a QR factor of ``(P diag(sqrt u))^T``.

    Working with the factor instead of ``X`` itself keeps the error in ``g``
    proportional to the condition number of ``P``, not its square.
    """
    R = np.linalg.qr((P * np.sqrt(u)).T, mode="r")
    Z = scipy.linalg.solve_triangular(R, P, trans="T")
    R_inv = scipy.linalg.solve_triangular(R, np.eye(R.shape[0]))
    return R_inv @ R_inv.T, np.einsum("ij,ij->j", Z, Z)


def _result(P, M, g, u, iterations, active_tol):
    omega = g.max()
    L = M / omega
    r = P.shape[0]
    return EllipsoidResult(
        shape=0.5 * (L + L.T),
        active=np.flatnonzero(g / omega >= 1.0 - active_tol),
        gap=float(omega / r - 1.0),
        iterations=iterations,
        weights=u.copy(),
    )


def _face_newton(P, u, eps, max_steps=50):
    """Maximize ``log det X(u)`` over designs supported on ``u``'s support.

    Newton's method on the face of the simplex. A ratio test keeps the
    weights nonnegative and points hitting zero leave the support. Steps are
    accepted on slopes rather than objective values, since near the optimum
    the gain in ``log det`` drowns in rounding error long before the levels
    stop being informative.
    """
    u = u.copy()
    r = P.shape[0]
    for _ in range(max_steps):
        S = np.flatnonzero(u > 0)
        Ps = P[:, S]
        M, g = _inverse_and_levels(Ps, u[S])
        if np.abs(g / r - 1.0).max() <= 0.1 * eps:
            break
        # maximize g.du - du.(G o G).du / 2 subject to sum(du) = 0
        G = Ps.T @ M @ Ps
        k = S.size
        K = np.zeros((k + 1, k + 1))
        K[:k, :k] = G * G
        K[:k, k] = K[k, :k] = 1.0
        du = np.linalg.lstsq(K, np.append(g, 0.0), rcond=None)[0][:k]
        du -= du.mean()
        slope = g @ du
        if not slope > 0:
            break
        ratio = np.full(k, np.inf)
        ratio[du < 0] = u[S][du < 0] / -du[du < 0]
        t = min(1.0, ratio.min())
        for _ in range(40):
            trial = np.maximum(u[S] + t * du, 0.0)
            trial[ratio <= t] = 0.0
            with np.errstate(all="ignore"):
                _, g_t = _inverse_and_levels(Ps, trial)
            # trapezoid estimate of the gain, exact for a quadratic objective
            if np.all(np.isfinite(g_t)) and slope + g_t @ du >= 0:
                break
            t *= 0.5
        else:
            break
        u[S] = trial / trial.sum()
    return u


def mvee_origin(P, eps=None, tol=DEFAULT_TOL, max_iter=None):
    """Minimum-volume origin-centered ellipsoid enclosing ``+-`` the columns of ``P``.

    Parameters
    ----------
    P : array_like, shape (r, m)
        Points as columns; must have rank ``r``.
    eps : float, optional
        Relative dual gap target (default ``tol.mvee_eps``).
    max_iter : int, optional
        Iteration cap (default ``100 * m * r``).

    Returns
    -------
    EllipsoidResult

    Raises
    ------
    RankDeficientError
        If ``rank(P) < r``; the ellipsoid volume is then unbounded below.
    IterationCapExceeded
        With the last (feasible) iterate attached as ``.best``.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[1] < 1:
        raise InputError(f"P must be r x m, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise InputError("P has non-finite entries")
    r, m = P.shape
    eps = tol.mvee_eps if eps is None else float(eps)
    if eps <= 0:
        raise InputError("eps must be positive")
    if max_iter is None:
        max_iter = 100 * m * r
    s = np.linalg.svd(P, compute_uv=False)
    if m < r or s[0] == 0 or s[r - 1] <= tol.rank * s[0]:
        raise RankDeficientError(f"points span fewer than {r} dimensions")

    # an optimal design needs at most r (r + 1) / 2 support points
    newton_limit = r * (r + 1)
    u = np.full(m, 1.0 / m)
    M, g = _inverse_and_levels(P, u)
    for it in range(max_iter):
        j_up = int(np.argmax(g))
        w_up = g[j_up]
        support = u > 0
        j_dn = int(np.argmin(np.where(support, g, np.inf)))
        w_dn = g[j_dn]
        gap_up = w_up / r - 1.0
        gap_dn = 1.0 - w_dn / r
        if gap_up <= eps and gap_dn <= eps:
            M, g = _inverse_and_levels(P, u)
            return _result(P, M, g, u, it, tol.mvee_active)

        if gap_up < gap_dn and np.count_nonzero(support) <= newton_limit:
            polished = _face_newton(P, u, eps)
            if not np.array_equal(polished, u):
                u = polished
                M, g = _inverse_and_levels(P, u)
                continue

        if gap_up >= gap_dn:
            # toward step on the most violated point, exact line search
            step = (w_up - r) / (r * (w_up - 1.0))
            u *= 1.0 - step
            u[j_up] += step
            if (it + 1) % _REFRESH_EVERY == 0:
                u /= u.sum()
                M, g = _inverse_and_levels(P, u)
                continue
            Mx = M @ P[:, j_up]
            c = step / (1.0 - step + step * w_up)
            M = (M - c * np.outer(Mx, Mx)) / (1.0 - step)
            g = (g - c * (Mx @ P) ** 2) / (1.0 - step)
            continue

        # pairwise step: move mass t from j_dn to j_up. With G the 2x2 Gram
        # matrix of the pair under M, det X(t) / det X is the concave
        # quadratic 1 + t (g_up - g_dn) - t^2 det(G), maximized in closed form.
        j_up, j_dn = int(j_up), int(j_dn)
        Ma = M @ P[:, j_up]
        g_ab = Ma @ P[:, j_dn]
        curv = w_up * w_dn - g_ab * g_ab
        limit = u[j_dn]
        t = limit if curv <= 0 else min(limit, (w_up - w_dn) / (2.0 * curv))
        u[j_up] += t
        u[j_dn] -= t
        if t >= limit:
            u[j_dn] = 0.0
        if (it + 1) % _REFRESH_EVERY == 0:
            M, g = _inverse_and_levels(P, u)
            continue
        c = t / (1.0 + t * w_up)
        M = M - c * np.outer(Ma, Ma)
        g = g - c * (Ma @ P) ** 2
        Mb = M @ P[:, j_dn]
        c = t / (1.0 - t * (Mb @ P[:, j_dn]))
        M = M + c * np.outer(Mb, Mb)
        g = g + c * (Mb @ P) ** 2

    M, g = _inverse_and_levels(P, u)
    best = _result(P, M, g, u, max_iter, tol.mvee_active)
    raise IterationCapExceeded(
        f"MVEE did not reach gap {eps:g} in {max_iter} iterations "
        f"(gap {best.gap:.3e})", best=best)
