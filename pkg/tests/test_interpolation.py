import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg

from sphdki.experiments import bounded_noise, gen_centers, target_f
from sphdki.interpolation import (
    DuplicatePointsError,
    Interpolant,
    condition_diagnostics,
    evaluate,
    ki_fit,
    krr_fit,
    native_norm_sq,
    noise_norm_lower_bound,
    power_function,
    uncertainty_ratio,
)
from sphdki.kernels import KernelSpec, kernel_matrix
from sphdki.sphere import spiral_points, uniform_sample

W = KernelSpec.wendland()
G = KernelSpec.gaussian(0.5)
E3 = np.array([0.0, 0.0, 1.0])


class TestKiFit:
    def test_single_point(self):
        f = ki_fit(E3[None, :], [3.0], W)
        assert f.coeffs.tolist() == [3.0]
        assert f(E3[None, :]).tolist() == [3.0]

    @pytest.mark.parametrize("kernel", [W, G])
    def test_interpolates(self, kernel):
        X = uniform_sample(2, 200, seed=1)
        y = np.sin(3 * X[:, 0]) + X[:, 2] ** 2
        f = ki_fit(X, y, kernel)
        assert f.diagnostics.method == "cholesky"
        assert np.abs(evaluate(f, X) - y).max() <= 1e-8 * (1 + np.abs(y).max())
        assert f.diagnostics.interpolation_residual <= 1e-8 * (1 + np.abs(y).max())

    def test_against_lu(self, design25):
        X = design25[:100]
        y = target_f(X, gen_centers(20), 1.0)
        f = ki_fit(X, y, W)
        ref = linalg.lu_solve(linalg.lu_factor(kernel_matrix(W, X)), y)
        assert np.abs(f.coeffs - ref).max() <= 1e-8 * np.abs(ref).max()

    def test_duplicates_rejected(self):
        X = uniform_sample(2, 10, seed=2)
        with pytest.raises(DuplicatePointsError):
            ki_fit(np.vstack([X, X[3]]), np.zeros(11), W)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            ki_fit(uniform_sample(2, 5, seed=1), np.zeros(4), W)

    def test_multiple_right_hand_sides(self):
        X = uniform_sample(2, 60, seed=3)
        Y = np.random.default_rng(0).standard_normal((60, 3))
        f = ki_fit(X, Y, W)
        for j in range(3):
            assert np.allclose(f.coeffs[:, j], ki_fit(X, Y[:, j], W).coeffs, atol=1e-12)

    def test_diagnostics(self):
        f = ki_fit(uniform_sample(2, 80, seed=4), np.ones(80), W)
        d = f.diagnostics
        assert d.sigma_min > 0 and d.cond >= 1
        assert d.cond == pytest.approx(d.sigma_max / d.sigma_min)

    def test_fallback_on_singular(self):
        # Gaussian with a huge width makes the matrix numerically singular
        X = uniform_sample(2, 60, seed=5)
        f = ki_fit(X, X[:, 0], KernelSpec.gaussian(50.0))
        assert f.diagnostics.method == "eig_pseudoinverse"
        assert np.all(np.isfinite(f.coeffs))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 60), st.integers(0, 10_000))
    def test_linear_in_y(self, n, seed):
        X = uniform_sample(2, n, seed=seed)
        rng = np.random.default_rng(seed)
        y1, y2 = rng.standard_normal((2, n))
        a = ki_fit(X, y1 + y2, W).coeffs
        b = ki_fit(X, y1, W).coeffs + ki_fit(X, y2, W).coeffs
        assert np.abs(a - b).max() <= 1e-10 * max(1.0, np.abs(a).max())


class TestEvaluate:
    def test_zero_coefficients(self):
        X = uniform_sample(2, 10, seed=1)
        f = Interpolant(X, np.zeros(10), W)
        assert np.all(evaluate(f, spiral_points(30)) == 0)

    def test_compact_support(self):
        X = np.array([[0, 0, 1.0], [0, 0.1, 0.995]])
        f = ki_fit(X, [1.0, 2.0], W)
        assert evaluate(f, [[0, 0, -1.0]]).tolist() == [0.0]

    def test_dimension_mismatch(self):
        f = ki_fit(E3[None, :], [1.0], W)
        with pytest.raises(ValueError):
            evaluate(f, [[1.0, 0, 0, 0]])


class TestKrr:
    def test_small_lambda_limit(self):
        X = spiral_points(20)
        y = np.cos(X[:, 1])
        a = ki_fit(X, y, W).coeffs
        b = krr_fit(X, y, W, 1e-12).coeffs
        assert np.abs(a - b).max() <= 1e-6 * np.abs(a).max()

    def test_large_lambda(self):
        X = uniform_sample(2, 10, seed=1)
        y = np.arange(1.0, 11.0)
        a = krr_fit(X, y, W, 1e6).coeffs
        assert np.allclose(a, y / 1e7, rtol=0.01)

    def test_single_point(self):
        assert krr_fit(E3[None, :], [4.0], W, 1.0).coeffs[0] == pytest.approx(2.0, rel=1e-15)

    def test_lambda_positive(self):
        with pytest.raises(ValueError):
            krr_fit(E3[None, :], [4.0], W, 0.0)

    def test_norm_shrinks_with_lambda(self):
        X = uniform_sample(2, 80, seed=2)
        y = np.random.default_rng(1).standard_normal(80)
        norms = [native_norm_sq(krr_fit(X, y, W, lam)) for lam in 2.0 ** -np.arange(0, 30, 3)]
        assert all(a <= b * (1 + 1e-9) for a, b in zip(norms, norms[1:]))


class TestPowerFunction:
    def test_zero_on_centers(self):
        X = uniform_sample(2, 40, seed=1)
        assert power_function(X, W, X[7]) <= 1e-6

    def test_antipodal_single_center(self):
        assert power_function(E3[None, :], W, -E3) == pytest.approx(1.0, abs=1e-15)

    def test_batch(self):
        X = uniform_sample(2, 40, seed=1)
        Q = uniform_sample(2, 5, seed=2)
        P = power_function(X, G, Q)
        assert P.shape == (5,)
        assert P[3] == pytest.approx(power_function(X, G, Q[3]), rel=1e-12)

    def test_uncertainty_relation(self):
        X = uniform_sample(2, 50, seed=3)
        x = uniform_sample(2, 1, seed=4)[0]
        assert uncertainty_ratio(X, W, x) >= 1 - 1e-6

    def test_point_shape_checked(self):
        with pytest.raises(ValueError):
            uncertainty_ratio(uniform_sample(2, 5, seed=1), W, [1.0, 0.0])


class TestNorms:
    def test_zero(self):
        assert native_norm_sq(Interpolant(E3[None, :], np.zeros(1), W)) == 0.0

    def test_single(self):
        assert native_norm_sq(Interpolant(E3[None, :], np.array([1.5]), W)) == 2.25

    def test_noise_bound(self):
        theta, M = 0.5, 1.0
        X = uniform_sample(2, 150, seed=8)
        for seed in range(10):
            eps = bounded_noise(150, theta, M, seed)
            f = ki_fit(X, eps, W)
            assert native_norm_sq(f) >= noise_norm_lower_bound(theta, M, W)

    def test_bound_value(self):
        assert noise_norm_lower_bound(0.5, 2.0, G) == pytest.approx(1.0)


class TestConditionDiagnostics:
    def test_identity(self):
        assert condition_diagnostics(np.eye(4)).cond == 1.0

    def test_diagonal(self):
        assert condition_diagnostics(np.diag([4.0, 1.0])).cond == pytest.approx(4.0)

    def test_grows_with_design_order(self):
        from sphdki.experiments import find_design

        c5 = condition_diagnostics(kernel_matrix(W, find_design(5))).cond
        c15 = condition_diagnostics(kernel_matrix(W, find_design(15))).cond
        assert c15 > c5

    def test_singular(self):
        assert math.isinf(condition_diagnostics(np.zeros((2, 2))).cond)
