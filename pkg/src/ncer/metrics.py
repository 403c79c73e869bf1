"""Clustering accuracy (after optimal matching) and normalized mutual information."""

import numpy as np
from scipy.optimize import linear_sum_assignment

from ncer.errors import InputError


def _pair(truth, pred):
    truth = np.asarray(truth).ravel()
    pred = np.asarray(pred).ravel()
    if truth.shape != pred.shape:
        raise InputError(f"label length mismatch: {truth.size} vs {pred.size}")
    if truth.size == 0:
        raise InputError("need at least one labeled point")
    return truth, pred


def contingency(truth, pred):
    """Overlap counts ``|class_i & cluster_j|`` for sorted distinct labels."""
    truth, pred = _pair(truth, pred)
    _, ti = np.unique(truth, return_inverse=True)
    _, pi = np.unique(pred, return_inverse=True)
    table = np.zeros((ti.max() + 1, pi.max() + 1), dtype=np.int64)
    np.add.at(table, (ti, pi), 1)
    return table


def hungarian(weights):
    """Permutation ``perm`` maximizing ``sum_i weights[i, perm[i]]``."""
    W = np.asarray(weights, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise InputError(f"assignment needs a square matrix, got shape {W.shape}")
    if not np.all(np.isfinite(W)):
        raise InputError("assignment weights must be finite")
    rows, cols = linear_sum_assignment(W, maximize=True)
    perm = np.empty(W.shape[0], dtype=int)
    perm[rows] = cols
    return perm


def accuracy(truth, pred):
    """Fraction of points on matched class/cluster pairs.

    Unequal numbers of classes and clusters are handled by padding the
    overlap table with empty rows or columns.
    """
    table = contingency(truth, pred)
    k = max(table.shape)
    square = np.zeros((k, k))
    square[: table.shape[0], : table.shape[1]] = table
    perm = hungarian(square)
    return float(square[np.arange(k), perm].sum() / table.sum())


def _entropy(counts, n):
    p = np.sort(counts[counts > 0]) / n
    return float(-(p * np.log(p)).sum())


def nmi(truth, pred):
    """``I(truth, pred) / mean(H(truth), H(pred))``; 1 when both are constant."""
    table = contingency(truth, pred).astype(float)
    n = table.sum()
    h1 = _entropy(table.sum(axis=1), n)
    h2 = _entropy(table.sum(axis=0), n)
    if h1 == 0.0 and h2 == 0.0:
        return 1.0
    joint = table / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0)) / n**2
    nz = joint > 0
    # sorted summation makes the result exactly invariant to renaming labels
    mi = float(np.sort(joint[nz] * np.log(joint[nz] / outer[nz])).sum())
    return float(min(max(mi / (0.5 * (h1 + h2)), 0.0), 1.0))
