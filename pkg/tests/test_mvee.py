import numpy as np
import pytest

from ncer import (EllipsoidResult, InputError, IterationCapExceeded, RankDeficientError,
                  active_points, mvee_origin)


def _check_certificate(P, res):
    r = P.shape[0]
    levels = res.levels(P)
    assert levels.max() <= 1 + 1e-6
    assert res.gap <= 1e-7
    assert res.active.size >= r
    np.testing.assert_array_equal(res.active, np.flatnonzero(levels >= 1 - 1e-5))
    assert np.all(np.linalg.eigvalsh(res.shape) > 0)


def simplex_with_interior(rng, r, n_inner):
    V = rng.uniform(0.5, 1.5, (r, r)) + 2 * np.eye(r)
    W = rng.dirichlet(np.ones(r), n_inner).T * rng.uniform(0.2, 0.95, n_inner)
    return np.hstack([V, V @ W])


class TestExamples:
    @pytest.mark.parametrize("r", [2, 3, 5])
    def test_cross_polytope(self, r):
        res = mvee_origin(np.eye(r))
        np.testing.assert_allclose(res.shape, np.eye(r), atol=1e-6)
        np.testing.assert_array_equal(res.active, np.arange(r))

    def test_axis_aligned(self):
        res = mvee_origin(np.diag([2.0, 1.0]))
        np.testing.assert_allclose(res.shape, np.diag([0.25, 1.0]), atol=1e-6)

    @pytest.mark.parametrize("r", [3, 5])
    def test_simplex_vertices_only(self, rng, r):
        P = simplex_with_interior(rng, r, 50)
        np.testing.assert_array_equal(mvee_origin(P).active, np.arange(r))

    def test_rank_deficient(self):
        with pytest.raises(RankDeficientError):
            mvee_origin(np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]))

    def test_bad_eps(self):
        with pytest.raises(InputError):
            mvee_origin(np.eye(2), eps=0)

    def test_iteration_cap_carries_best(self, rng):
        P = rng.standard_normal((3, 40))
        with pytest.raises(IterationCapExceeded) as err:
            mvee_origin(P, max_iter=2)
        best = err.value.best
        assert isinstance(best, EllipsoidResult)
        assert best.levels(P).max() <= 1 + 1e-12


class TestActivePoints:
    def test_unit_ball(self):
        P = np.array([[1.0, 0.5], [0.0, 0.0]])
        np.testing.assert_array_equal(active_points(P, np.eye(2)), [0])

    def test_circle(self):
        t = np.linspace(0, np.pi, 7)
        np.testing.assert_array_equal(active_points(np.vstack([np.cos(t), np.sin(t)]), np.eye(2)),
                                      np.arange(7))

    def test_small_coefficient_points(self, rng):
        r = 4
        V = rng.standard_normal((r, r)) + 3 * np.eye(r)
        K = rng.standard_normal((r, 30))
        K *= rng.uniform(0.1, 0.95, 30) / np.linalg.norm(K, axis=0)
        P = np.hstack([V, V @ K])
        np.testing.assert_array_equal(mvee_origin(P).active, np.arange(r))


class TestProperties:
    def test_random_certificates(self, rng):
        for _ in range(30):
            r = int(rng.choice([2, 3, 5]))
            P = rng.standard_normal((r, int(rng.integers(r, 120))))
            _check_certificate(P, mvee_origin(P))

    def test_linear_invariance(self, rng):
        for _ in range(10):
            r = int(rng.choice([2, 3, 5]))
            P = rng.standard_normal((r, 60))
            base = mvee_origin(P).active
            for _ in range(5):
                G = rng.standard_normal((r, r))
                np.testing.assert_array_equal(mvee_origin(G @ P).active, base)

    def test_sign_flips_irrelevant(self, rng):
        P = rng.standard_normal((3, 50))
        flips = rng.choice([-1.0, 1.0], 50)
        np.testing.assert_allclose(mvee_origin(P * flips).shape, mvee_origin(P).shape, atol=1e-9)

    def test_deterministic(self, rng):
        P = rng.standard_normal((4, 80))
        a, b = mvee_origin(P), mvee_origin(P)
        np.testing.assert_array_equal(a.active, b.active)
        np.testing.assert_array_equal(a.shape, b.shape)

    def test_near_duplicate_support(self, rng):
        # two almost identical extreme points stall plain away steps
        P = rng.standard_normal((3, 40))
        P = np.hstack([P, P[:, :5] * (1 + 1e-7)])
        res = mvee_origin(P)
        _check_certificate(P, res)

    def test_matches_convex_solver(self, rng):
        cp = pytest.importorskip("cvxpy")
        for _ in range(3):
            P = rng.standard_normal((3, 25))
            L = cp.Variable((3, 3), PSD=True)
            cons = [cp.quad_form(P[:, i], L) <= 1 for i in range(25)]
            cp.Problem(cp.Maximize(cp.log_det(L)), cons).solve()
            np.testing.assert_allclose(mvee_origin(P).shape, L.value, atol=1e-4)
