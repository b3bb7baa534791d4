import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from sphdki.harmonics import (
    QuadratureRule,
    gegenbauer,
    gegenbauer_all,
    harmonic_dim,
    harmonic_dims,
    quadrature_residual,
    quadrature_residuals,
    real_sph_harm,
    solve_weights,
    sphere_volume,
    verify_rule,
)
from sphdki.sphere import rotation_z, uniform_sample

E3 = np.array([0.0, 0.0, 1.0])


class TestHarmonicDim:
    def test_values(self):
        assert harmonic_dim(2, 0) == 1
        assert harmonic_dim(2, 3) == 7
        assert harmonic_dim(3, 1) == 4

    @pytest.mark.parametrize("k", range(40))
    def test_two_sphere(self, k):
        assert harmonic_dim(2, k) == 2 * k + 1

    def test_circle(self):
        assert [harmonic_dim(1, k) for k in range(5)] == [1, 2, 2, 2, 2]

    @pytest.mark.parametrize("d", range(1, 6))
    def test_telescoping(self, d):
        for s in range(31):
            assert sum(harmonic_dim(d, k) for k in range(s + 1)) == harmonic_dim(d + 1, s)

    def test_overflow(self):
        with pytest.raises(OverflowError):
            harmonic_dim(200, 200)

    def test_invalid(self):
        with pytest.raises(ValueError):
            harmonic_dim(0, 1)

    def test_sphere_volume(self):
        assert sphere_volume(2) == pytest.approx(4 * math.pi, rel=1e-15)
        assert sphere_volume(1) == pytest.approx(2 * math.pi, rel=1e-15)
        assert sphere_volume(3) == pytest.approx(2 * math.pi**2, rel=1e-15)


class TestGegenbauer:
    def test_normalized_at_one(self):
        for d in (1, 2, 3, 7):
            assert np.allclose(gegenbauer_all(d, 30, 1.0), 1.0, atol=1e-13)

    def test_legendre(self):
        assert gegenbauer(2, 1, 0.3) == pytest.approx(0.3)
        assert gegenbauer(2, 2, 0.0) == -0.5

    @pytest.mark.parametrize("d,k", [(2, 7), (3, 4), (4, 9), (6, 5)])
    def test_matches_scipy(self, d, k):
        t = np.linspace(-1, 1, 41)
        lam = (d - 1) / 2
        ref = special.eval_gegenbauer(k, lam, t) / special.eval_gegenbauer(k, lam, 1.0)
        assert np.allclose(gegenbauer(d, k, t), ref, atol=1e-12)

    def test_chebyshev(self):
        t = np.linspace(-1, 1, 17)
        assert np.allclose(gegenbauer(1, 6, t), np.cos(6 * np.arccos(t)), atol=1e-13)

    @pytest.mark.parametrize("d", [1, 2, 3, 5])
    def test_bounded(self, d):
        P = gegenbauer_all(d, 200, np.linspace(-1, 1, 2001))
        assert np.abs(P).max() <= 1 + 1e-12

    def test_clamped(self):
        assert gegenbauer(2, 5, 1 + 1e-13) == pytest.approx(1.0)


class TestRealHarmonics:
    def test_addition_formula(self):
        X = uniform_sample(2, 25, seed=1)
        Y = real_sph_harm(X, 20)
        for k in range(21):
            block = Y[:, k * k:(k + 1) ** 2]
            assert np.allclose((block**2).sum(axis=1), (2 * k + 1) / (4 * math.pi), atol=1e-10)

    def test_orthonormal_under_quadrature(self, design25):
        # the 25-design integrates products up to degree 12 exactly
        Y = real_sph_harm(design25, 12)
        G = 4 * math.pi * Y.T @ Y / design25.shape[0]
        assert np.abs(G - np.eye(G.shape[1])).max() <= 1e-10

    def test_addition_cross_terms(self):
        x, y = uniform_sample(2, 2, seed=7)
        Y = real_sph_harm(np.vstack([x, y]), 9)
        k = 9
        lhs = Y[0, k * k:] @ Y[1, k * k:]
        assert lhs == pytest.approx((2 * k + 1) / (4 * math.pi) * gegenbauer(2, k, x @ y), abs=1e-12)


class TestResidual:
    def test_single_point(self):
        rule = QuadratureRule(E3[None, :], [1.0], 1)
        assert quadrature_residual(rule, 1) == pytest.approx(3 / (4 * math.pi), rel=1e-14)

    def test_antipodal_pair(self):
        rule = QuadratureRule(np.vstack([E3, -E3]), [0.5, 0.5], 1)
        assert quadrature_residual(rule, 1) == pytest.approx(0.0, abs=1e-17)

    def test_design25(self, design25):
        rule = QuadratureRule.equal_weights(design25, 25)
        for k in range(1, 26):
            assert quadrature_residual(rule, k) <= 1e-10

    def test_degree_zero_rejected(self):
        with pytest.raises(ValueError):
            quadrature_residual(QuadratureRule(E3[None, :], [1.0], 0), 0)

    def test_matches_explicit_basis(self):
        X = uniform_sample(2, 30, seed=3)
        w = np.random.default_rng(0).random(30)
        Y = real_sph_harm(X, 6)
        r = quadrature_residuals(X, w, 6)
        for k in range(1, 7):
            moment = w @ Y[:, k * k:(k + 1) ** 2]
            assert r[k] == pytest.approx(moment @ moment, rel=1e-10, abs=1e-14)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(3, 60), st.integers(0, 20), st.integers(0, 10_000))
    def test_rotation_invariant(self, n, rot, seed):
        X = uniform_sample(2, n, seed=seed)
        w = np.full(n, 1.0 / n)
        r0 = quadrature_residuals(X, w, 10)
        r1 = quadrature_residuals(X @ rotation_z(rot).T, w, 10)
        assert np.abs(r0 - r1).max() <= 1e-12

    @pytest.mark.parametrize("d", [3, 4])
    def test_higher_dimension_nonnegative(self, d):
        X = uniform_sample(d, 40, seed=d)
        r = quadrature_residuals(X, np.full(40, 1 / 40), 8)
        assert np.all(r[1:] >= -1e-15)


class TestVerifyRule:
    def test_design_passes(self, design25):
        n = design25.shape[0]
        rep = verify_rule(design25, np.full(n, 1 / n), 25)
        assert rep.passed
        assert rep.worst_residual <= 1e-9

    def test_design_fails_above_order(self, design25):
        n = design25.shape[0]
        rep = verify_rule(design25, np.full(n, 1 / n), 27)
        assert not rep.passed
        assert rep.failed_degrees == [26]

    def test_negative_weight(self):
        X = uniform_sample(2, 5, seed=1)
        rep = verify_rule(X, [0.5, 0.3, 0.3, 0.1, -0.2], 0)
        assert not rep.positive and not rep.passed

    def test_normalization(self):
        X = uniform_sample(2, 4, seed=1)
        assert not verify_rule(X, [0.3] * 4, 0).normalized

    def test_csv(self, tmp_path, design25):
        n = design25.shape[0]
        rep = verify_rule(design25, np.full(n, 1 / n), 27)
        rep.to_csv(tmp_path / "r.csv")
        lines = (tmp_path / "r.csv").read_text().splitlines()
        assert lines[0] == "degree,residual,pass"
        assert len(lines) == 28
        assert lines[26].endswith("False")


class TestSolveWeights:
    def test_design_recovers_equal_weights(self, design25):
        sol = solve_weights(design25, 25)
        n = design25.shape[0]
        assert sol.feasible
        assert np.abs(sol.weights - 1 / n).max() <= 1e-8

    def test_single_point_order_zero(self):
        sol = solve_weights(E3[None, :], 0)
        assert sol.feasible
        assert sol.weights.tolist() == pytest.approx([1.0])

    def test_underdetermined_infeasible(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            sol = solve_weights(uniform_sample(2, 4, seed=2), 3)
        assert not sol.feasible
        assert sol.weights is None
        assert sol.best_order < 3

    def test_random_points_low_order(self):
        X = uniform_sample(2, 400, seed=3)
        sol = solve_weights(X, 6)
        assert sol.feasible
        assert verify_rule(X, sol.weights, 6).passed
        assert sol.max_scaled_weight >= 1.0

    def test_warns_on_high_order(self):
        with pytest.warns(UserWarning):
            solve_weights(uniform_sample(2, 9, seed=4), 8)

    def test_other_spheres_rejected(self):
        with pytest.raises(ValueError):
            solve_weights(uniform_sample(3, 20, seed=1), 2)
