"""Separable NMF: SPA, ellipsoidal rounding (ER / MER) and test matrices."""

from dataclasses import dataclass

import numpy as np

from ncer.config import DEFAULT_TOL
from ncer.errors import HyperplaneDegenerate, InputError, RankDeficientError
from ncer.linalg import thin_svd
from ncer.mvee import EllipsoidResult, active_points, mvee_origin


def spa(M, r, tol=DEFAULT_TOL):
    """Successive projection: pick ``r`` columns of ``M`` greedily.

    Each round takes the column with the largest residual norm (lowest index
    on ties) and projects every column onto the orthogonal complement of it.
    Returns the chosen indices in ascending order.
    """
    R = np.array(M, dtype=float)
    if R.ndim != 2:
        raise InputError("M must be 2-d")
    r = int(r)
    if not 1 <= r <= R.shape[1]:
        raise InputError(f"r must lie in [1, {R.shape[1]}], got {r}")
    norms = np.einsum("ij,ij->j", R, R)
    floor = (tol.rank * np.sqrt(norms.max(initial=0.0))) ** 2
    picked = []
    for _ in range(r):
        j = int(np.argmax(norms))
        if norms[j] <= floor or norms[j] == 0:
            raise RankDeficientError(
                f"residual vanished after {len(picked)} of {r} selections")
        picked.append(j)
        u = R[:, j] / np.sqrt(norms[j])
        R -= np.outer(u, u @ R)
        norms = np.einsum("ij,ij->j", R, R)
        norms[picked] = 0.0
    return np.array(sorted(picked), dtype=int)


@dataclass(frozen=True, eq=False)
class ErConfig:
    """Hyperplane used by step 2 of ER.

    ``generic`` scales column ``b_i`` by ``z / (w^T b_i)``; ``w=None`` means
    the first coordinate axis. ``degree`` scales by ``d_i^{-1/2}``, which
    needs ``degrees``.
    """

    w: np.ndarray | None = None
    z: float = 1.0
    scaling_mode: str = "generic"
    degrees: np.ndarray | None = None

    def __post_init__(self):
        if self.scaling_mode not in ("generic", "degree"):
            raise InputError(f"unknown scaling mode {self.scaling_mode!r}")
        if self.z == 0:
            raise InputError("hyperplane offset z must be nonzero")
        if self.scaling_mode == "degree":
            if self.degrees is None:
                raise InputError("degree scaling needs a degree vector")
            if np.any(np.asarray(self.degrees) <= 0):
                raise InputError("degrees must be positive")
        if self.w is not None and not np.any(np.asarray(self.w, dtype=float)):
            raise InputError("hyperplane normal w must be nonzero")


def scale_to_hyperplane(B, cfg, tol=DEFAULT_TOL):
    """Return ``(B S, s)`` with the diagonal of ``S`` in ``s``."""
    B = np.asarray(B, dtype=float)
    if cfg.scaling_mode == "degree":
        d = np.asarray(cfg.degrees, dtype=float)
        if d.shape != (B.shape[1],):
            raise InputError("need one degree per column")
        s = 1.0 / np.sqrt(d)
        return B * s, s
    if cfg.w is None:
        w = np.zeros(B.shape[0])
        w[0] = 1.0
    else:
        w = np.asarray(cfg.w, dtype=float)
        if w.shape != (B.shape[0],):
            raise InputError(f"w must have length {B.shape[0]}")
    proj = w @ B
    small = np.abs(proj) <= tol.hyperplane * np.linalg.norm(w) * np.linalg.norm(B, axis=0)
    if small.any():
        raise HyperplaneDegenerate(np.flatnonzero(small))
    s = cfg.z / proj
    return B * s, s


def select_active(Q, ell, r, tol=DEFAULT_TOL):
    """Active set of an MVEE, widening the threshold once if it has < r points."""
    active = ell.active
    if active.size < r:
        active = active_points(Q, ell.shape, 10 * tol.mvee_active)
        if active.size < r:
            raise RankDeficientError(
                f"only {active.size} active points for r={r}")
    return active


def pick_representatives(Q, active, r, tol=DEFAULT_TOL):
    if active.size == r:
        return active.copy()
    return active[spa(Q[:, active], r, tol)]


@dataclass(frozen=True, eq=False)
class ErResult:
    selected: np.ndarray     # J, original column numbering
    active: np.ndarray       # I, original column numbering
    points: np.ndarray       # r x m hyperplane-scaled columns q_i (zero columns dropped)
    kept: np.ndarray         # original index of each column of ``points``
    zero_columns: np.ndarray
    ellipsoid: EllipsoidResult


def run_er(A, r, cfg=None, variant="ER", tol=DEFAULT_TOL):
    """Ellipsoidal rounding for separable NMF, with all intermediate products.

    ``variant="MER"`` reduces with ``V_r^T`` instead of ``Sigma_r V_r^T``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise InputError("A must be 2-d")
    if (A < 0).any():
        raise InputError("ER needs a nonnegative matrix")
    variant = variant.upper()
    if variant not in ("ER", "MER"):
        raise InputError(f"unknown variant {variant!r}")
    cfg = ErConfig() if cfg is None else cfg
    r = int(r)
    if not 1 <= r <= min(A.shape):
        raise InputError(f"r must lie in [1, {min(A.shape)}], got {r}")

    svd = thin_svd(A, r, tol)
    if svd.singulars[r - 1] <= tol.rank * svd.singulars[0]:
        raise RankDeficientError(f"r={r} exceeds the numerical rank of A")
    B = svd.right.T if variant == "MER" else svd.singulars[:, None] * svd.right.T

    col_norms = np.linalg.norm(B, axis=0)
    zero = col_norms <= tol.rank * col_norms.max()
    kept = np.flatnonzero(~zero)
    if cfg.scaling_mode == "degree":
        cfg = ErConfig(scaling_mode="degree",
                       degrees=np.asarray(cfg.degrees, dtype=float)[kept])
    Q, _ = scale_to_hyperplane(B[:, kept], cfg, tol)

    ell = mvee_origin(Q, tol=tol)
    active = select_active(Q, ell, r, tol)
    chosen = pick_representatives(Q, active, r, tol)
    return ErResult(
        selected=kept[chosen],
        active=kept[active],
        points=Q,
        kept=kept,
        zero_columns=np.flatnonzero(zero),
        ellipsoid=ell,
    )


def er(A, r, cfg=None, variant="ER", tol=DEFAULT_TOL):
    """Index set ``J`` with ``A(J)`` estimating the basis of a separable ``A``."""
    return run_er(A, r, cfg, variant, tol).selected


@dataclass(frozen=True, eq=False)
class SeparableSpec:
    """Parameters of ``A = F (I, K) Pi`` (+ noise).

    ``basis``, ``weights`` and ``permutation`` are drawn from the seed when
    left as ``None``. ``permutation[k]`` is the column of ``(I, K)`` placed
    at position ``k``.
    """

    d: int
    m: int
    r: int
    noise_level: float = 0.0
    basis: np.ndarray | None = None
    weights: np.ndarray | None = None
    permutation: np.ndarray | None = None


def make_separable(params, seed=0):
    """Draw a (near-)separable matrix.

    Returns ``(A, truth)`` where ``truth[j]`` is the column of ``A`` holding
    basis column ``j`` (before noise). Weight columns are uniform on the
    probability simplex.
    Noise is uniform in ``[-noise_level, noise_level]`` per entry and the
    result is clipped at zero.
    """
    d, m, r = int(params.d), int(params.m), int(params.r)
    if not 1 <= r <= min(d, m):
        raise InputError(f"need 1 <= r <= min(d, m), got r={r}, d={d}, m={m}")
    rng = np.random.default_rng(seed)
    F = rng.uniform(0.0, 1.0, (d, r)) if params.basis is None else np.asarray(params.basis, float)
    if params.weights is None:
        K = rng.dirichlet(np.ones(r), size=m - r).T
    else:
        K = np.asarray(params.weights, dtype=float).reshape(r, m - r)
    if F.shape != (d, r) or (F < 0).any() or (K < 0).any():
        raise InputError("basis must be d x r and basis/weights nonnegative")
    order = rng.permutation(m) if params.permutation is None else np.asarray(params.permutation)
    W = np.hstack([np.eye(r), K])[:, order]
    A = F @ W
    if params.noise_level > 0:
        A = np.maximum(A + rng.uniform(-params.noise_level, params.noise_level, A.shape), 0.0)
    where = np.empty(m, dtype=int)
    where[order] = np.arange(m)
    return A, where[:r].copy()
