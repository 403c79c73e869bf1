"""Acceptance criteria 1-9. Each test prints one ``criterion N: PASS|FAIL`` line.

Criterion 8 needs the MNIST test files; point ``NCER_MNIST_DIR`` at a directory
holding ``t10k-images-idx3-ubyte`` and ``t10k-labels-idx1-ubyte``.
"""

import itertools
import os
import time
from pathlib import Path

import numpy as np
import pytest

from ncer import (KmeansInit, SeparableSpec, SimilarityConfig, accuracy, build_graph,
                  er, graph_laplacian, hungarian, kmeans,
                  make_separable, mvee_origin, nc, ncer, nmf_baseline, nmi,
                  normalized_cut_value)
from ncer.datasets import make_planted
from ncer.graph import indicator_matrix
from ncer.io import load_idx_images
from ncer.runner import bridge_passed, bridge_suite


@pytest.fixture
def verdict(capsys):
    def report(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail
    return report


def _rank_r_points(seed):
    rng = np.random.default_rng([seed, 1])
    r = (2, 3, 5)[seed % 3]
    m = int(rng.integers(r + 1, 201))
    return rng.standard_normal((r, r)) @ rng.standard_normal((r, m)), r


def test_mvee_certificates(verdict):
    start = time.perf_counter()
    failures = []
    for seed in range(100):
        P, r = _rank_r_points(seed)
        res = mvee_origin(P)
        if not (res.levels(P).max() <= 1 + 1e-6 and res.gap <= 1e-7 and res.active.size >= r):
            failures.append(seed)
    for r in (2, 3, 5):
        if np.abs(mvee_origin(np.eye(r)).shape - np.eye(r)).max() > 1e-6:
            failures.append(f"cross-polytope r={r}")
    elapsed = time.perf_counter() - start
    verdict(1, not failures and elapsed < 5.0,
            f"100 instances + cross-polytopes in {elapsed:.2f}s, failures {failures}")


def test_linear_invariance_of_active_set(verdict):
    mismatches = 0
    for seed in range(10):
        P, r = _rank_r_points(seed)
        rng = np.random.default_rng([seed, 2])
        base = mvee_origin(P).active
        for _ in range(50):
            T = rng.standard_normal((r, r))
            while abs(np.linalg.det(T)) < 0.1:
                T = rng.standard_normal((r, r))
            if not np.array_equal(mvee_origin(T @ P).active, base):
                mismatches += 1
    verdict(2, mismatches == 0, f"{mismatches} of 500 transformed active sets differ")


def _simplex_instance(rng, r, inside_ball):
    V = rng.uniform(0.5, 1.5, (r, r)) + 2 * np.eye(r)
    if inside_ball:
        K = rng.standard_normal((r, 50))
        K *= rng.uniform(0.05, 0.95, 50) / np.linalg.norm(K, axis=0)
    else:
        K = rng.dirichlet(np.ones(r), 50).T * rng.uniform(0.2, 0.95, 50)
    return np.hstack([V, V @ K])


def test_simplex_vertices_are_the_active_set(verdict):
    bad = []
    for r, inside_ball, seed in itertools.product((3, 5), (False, True), range(20)):
        P = _simplex_instance(np.random.default_rng([seed, r, inside_ball]), r, inside_ball)
        if not np.array_equal(mvee_origin(P).active, np.arange(r)):
            bad.append((r, inside_ball, seed))
    verdict(3, not bad, f"80 constructions, mismatches {bad}")


def _random_spec(seed, noise_level=0.0):
    rng = np.random.default_rng([seed, 4])
    r = int(rng.integers(2, 9))
    d = int(rng.integers(r, 31))
    m = int(rng.integers(r + 1, 201))
    return SeparableSpec(d=d, m=m, r=r, noise_level=noise_level)


def test_separable_recovery(verdict):
    exact_bad, noisy_bad = [], []
    for seed in range(100):
        spec = _random_spec(seed)
        A, truth = make_separable(spec, seed)
        if not np.array_equal(er(A, spec.r), np.sort(truth)):
            exact_bad.append(seed)

        noisy = _random_spec(seed, 1e-3)
        A, truth = make_separable(noisy, seed)
        F = make_separable(SeparableSpec(noisy.d, noisy.m, noisy.r), seed)[0][:, truth]
        J = er(A, noisy.r)
        dist = np.linalg.norm(A[:, J][:, :, None] - F[:, None, :], axis=0)
        match = hungarian(-dist)
        if dist[np.arange(noisy.r), match].max() > 10 * 1e-3 * np.linalg.norm(F):
            noisy_bad.append(seed)
    verdict(4, not exact_bad and not noisy_bad,
            f"exact failures {exact_bad}, near-separable failures {noisy_bad}")


def test_bridge_harness(verdict):
    results = bridge_suite(30, seed=0)
    failed = [res["seed"] for res in results if not bridge_passed(res)]
    worst_eig = max(res["eigen_singular_dev"] for res in results)
    worst_plane = max(res["hyperplane_dev"] for res in results)
    verdict(5, not failed,
            f"30 datasets, failed {failed}, max |lambda - (1 - sigma^2)| {worst_eig:.1e}, "
            f"max hyperplane deviation {worst_plane:.1e}")


def test_planted_clusters(verdict):
    worst_ac, worst_nmi = 1.0, 1.0
    for seed in range(20):
        A, y = make_planted(k=3, n=30, d=2, distance=10.0, sigma=0.5, seed=seed)
        labels = ncer(A, 3, SimilarityConfig(p=5)).labels
        worst_ac = min(worst_ac, accuracy(y, labels))
        worst_nmi = min(worst_nmi, nmi(y, labels))

    A, y = make_planted(k=3, n=30, d=2, distance=10.0, sigma=0.5, seed=0)
    scores = [accuracy(y, nc(A, 3, SimilarityConfig(p=5), KmeansInit(seed=s)).labels)
              for s in range(100)]
    spread = min(scores) < max(scores)
    verdict(6, worst_ac >= 0.99 and worst_nmi >= 0.95 and spread,
            f"NCER min AC {worst_ac:.3f}, min NMI {worst_nmi:.3f}; "
            f"NC over 100 seeds AC min {min(scores):.3f} max {max(scores):.3f}")


def _brute(W):
    n = W.shape[0]
    return max(sum(W[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def test_metrics(verdict):
    rng = np.random.default_rng(7)
    hung_bad = 0
    for k in range(200):
        n = k % 6 + 1
        W = rng.integers(0, 20, (n, n)).astype(float)
        if W[np.arange(n), hungarian(W)].sum() != _brute(W):
            hung_bad += 1

    examples = [
        accuracy([1, 2, 3], [1, 2, 3]) == 1.0,
        accuracy([1, 1, 2, 2], [2, 2, 1, 1]) == 1.0,
        accuracy([1, 1, 2, 2], [1, 2, 2, 2]) == 0.75,
        nmi([1, 1, 2, 2], [1, 1, 2, 2]) == 1.0,
        nmi([1, 1, 2, 2], [1, 2, 1, 2]) == 0.0,
    ]

    relabel_bad = 0
    for _ in range(100):
        truth = rng.integers(0, 4, 40)
        pred = rng.integers(0, 4, 40)
        renamed = rng.permutation(4)[pred]
        if accuracy(truth, pred) != accuracy(truth, renamed) or nmi(truth, pred) != nmi(truth, renamed):
            relabel_bad += 1
    verdict(7, hung_bad == 0 and all(examples) and relabel_bad == 0,
            f"assignment mismatches {hung_bad}/200, examples {sum(examples)}/5, "
            f"relabeling mismatches {relabel_bad}/100")


def _mnist_dir():
    root = os.environ.get("NCER_MNIST_DIR")
    if not root:
        return None
    root = Path(root)
    if not (root / "t10k-images-idx3-ubyte").is_file():
        return None
    return root


def test_digit_subset(verdict, capsys):
    root = _mnist_dir()
    if root is None:
        with capsys.disabled():
            print("\ncriterion 8: SKIP (set NCER_MNIST_DIR to the MNIST test files)")
        pytest.skip("MNIST test files not supplied")
    A = load_idx_images(root / "t10k-images-idx3-ubyte")
    # load_labels renumbers classes, so read the digit values directly
    raw = np.frombuffer((root / "t10k-labels-idx1-ubyte").read_bytes()[8:], dtype=np.uint8)
    keep = np.isin(raw, (4, 5, 6))
    A, y = A[:, keep], raw[keep]
    m = A.shape[1]
    sparse = ncer(A, 3, SimilarityConfig(b=0.0, c=1, p=5)).labels
    full = ncer(A, 3, SimilarityConfig(b=0.0, c=1, p=m)).labels
    ac5, nmi5, ac_full = accuracy(y, sparse), nmi(y, sparse), accuracy(y, full)
    ok = (m == 2832 and abs(ac5 - 0.987) <= 0.02 and abs(nmi5 - 0.934) <= 0.04
          and abs(ac_full - 0.799) <= 0.05)
    verdict(8, ok, f"m={m}, p=5 AC {ac5:.3f} NMI {nmi5:.3f}; p=m AC {ac_full:.3f}")


def test_identities(verdict):
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(50):
        m = int(rng.integers(6, 30))
        r = int(rng.integers(2, 5))
        G = build_graph(rng.uniform(0, 1, (4, m)), SimilarityConfig(p=int(rng.integers(1, m))))
        labels = np.arange(m) % r
        rng.shuffle(labels)
        H = indicator_matrix(labels, G.degrees)
        trace = np.trace(H.T @ graph_laplacian(G) @ H)
        worst = max(worst, abs(normalized_cut_value(G, labels) - trace))

    km_ok = True
    for seed in range(20):
        history = []
        kmeans(rng.standard_normal((3, 60)), 4, KmeansInit(seed=seed), history=history)
        km_ok &= bool(np.all(np.diff(history) <= 1e-12 * history[0]))

    nmf_ok = True
    for seed in range(5):
        A = rng.uniform(0, 1, (8, 25))
        history = []
        nmf_baseline(A, 3, rng.uniform(0, 1, (8, 3)), max_iter=60, history=history)
        nmf_ok &= bool(np.all(np.diff(history) <= 1e-12 * history[0]))
    verdict(9, worst <= 1e-10 and km_ok and nmf_ok,
            f"max |Ncut - tr(H'LH)| {worst:.1e}, K-means monotone {km_ok}, NMF monotone {nmf_ok}")
