"""Seeded synthetic data sets and their on-disk form."""

import json
from pathlib import Path

import numpy as np

from ncer.errors import InputError
from ncer.io import save_dense_csv, save_labels
from ncer.separable import SeparableSpec, make_separable

KINDS = ("planted-clusters", "separable", "near-separable")


def make_planted(k=3, n=30, d=2, distance=10.0, sigma=0.5, seed=0):
    """``k`` Gaussian blobs of ``n`` points each in the nonnegative orthant.

    Centers sit on a quarter circle in the first two coordinates, spaced so
    neighboring centers are ``distance`` apart. Negative coordinates are
    clipped to zero. Returns ``(A, labels)`` with 0-based labels.
    """
    k, n, d = int(k), int(n), int(d)
    if k < 1 or n < 1 or d < 2:
        raise InputError("need k >= 1, n >= 1 and d >= 2")
    if distance <= 0 or sigma < 0:
        raise InputError("distance must be positive and sigma nonnegative")
    if k == 1:
        angles, radius = np.zeros(1), distance
    else:
        angles = np.linspace(0.0, np.pi / 2, k)
        radius = distance / (2.0 * np.sin(angles[1] / 2.0))
    centers = np.zeros((d, k))
    centers[0] = radius * np.cos(angles)
    centers[1] = radius * np.sin(angles)
    rng = np.random.default_rng(seed)
    A = np.hstack([centers[:, [j]] + sigma * rng.standard_normal((d, n)) for j in range(k)])
    return np.maximum(A, 0.0), np.repeat(np.arange(k), n)


def make_synthetic(kind, params, seed, out_dir):
    """Write ``data.csv``, ground truth and ``manifest.json`` into ``out_dir``.

    planted-clusters writes ``labels.txt`` (values 1..k); the separable kinds
    write ``basis.txt`` with the 0-based column index of each basis vector.
    Returns the manifest dict.
    """
    if kind not in KINDS:
        raise InputError(f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")
    params = dict(params)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {"data": "data.csv"}
    if kind == "planted-clusters":
        A, labels = make_planted(seed=seed, **params)
        save_labels(out / "labels.txt", labels + 1)
        files["labels"] = "labels.txt"
    else:
        if kind == "near-separable":
            params.setdefault("noise_level", 1e-3)
        elif params.get("noise_level", 0.0) != 0.0:
            raise InputError("separable data takes no noise; use near-separable")
        A, truth = make_separable(SeparableSpec(**params), seed)
        save_labels(out / "basis.txt", truth)
        files["basis"] = "basis.txt"
    save_dense_csv(out / "data.csv", A)
    manifest = {"kind": kind, "seed": int(seed), "params": params,
                "shape": list(A.shape), "files": files}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
