"""Numerical tolerances shared across the package."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # symmetric check on eigen input, relative to max |entry|
    symmetry: float = 1e-10
    # eigenpair / singular triple residual, relative to the matrix norm
    eig_residual: float = 1e-8
    # KKT tolerance for nnls, scaled by max(1, ||M|| ||b||)
    nnls_kkt: float = 1e-8
    # absolute gap used to decide eigenvalue multiplicity
    eig_gap: float = 1e-8
    # D^{1/2} e must lie in the bottom eigenspace up to this residual
    align_residual: float = 1e-6
    # relative rank threshold on singular values
    rank: float = 1e-10
    # MVEE: relative dual gap, containment slack, activity threshold
    mvee_eps: float = 1e-7
    mvee_feas: float = 1e-6
    mvee_active: float = 1e-5
    # hyperplane scaling rejects |w^T b| below this
    hyperplane: float = 1e-12


DEFAULT_TOL = Tolerances()
