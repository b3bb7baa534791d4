import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphdki.sphere import (
    DesignFormatError,
    as_point,
    geodesic_dist,
    load_design,
    mesh_norm_estimate,
    pairwise_geodesic,
    quality_metrics,
    rotation_z,
    save_design,
    separation_radius,
    spiral_points,
    uniform_sample,
)

E1, E2, E3 = np.eye(3)


class TestGeodesic:
    def test_identical(self):
        assert geodesic_dist(E1, E1) == 0.0

    def test_antipodal(self):
        assert geodesic_dist(E1, -E1) == pytest.approx(math.pi, abs=1e-15)

    def test_orthogonal(self):
        assert geodesic_dist(E1, E2) == pytest.approx(math.pi / 2, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            geodesic_dist(E1, np.array([1.0, 0.0]))

    def test_roundoff_beyond_one_is_clamped(self):
        x = np.array([1.0, 1e-9, 0.0])
        assert geodesic_dist(x, x) >= 0.0

    def test_metric_on_random_triples(self, rng):
        X = uniform_sample(2, 3000, seed=1).reshape(1000, 3, 3)
        for a, b, c in X:
            assert geodesic_dist(a, b) == geodesic_dist(b, a)
            assert geodesic_dist(a, c) <= geodesic_dist(a, b) + geodesic_dist(b, c) + 1e-12

    def test_pairwise_matches_scalar(self):
        X = uniform_sample(3, 40, seed=2)
        D = pairwise_geodesic(X)
        assert np.array_equal(D, D.T)
        assert np.all(np.diag(D) == 0)
        assert D[3, 17] == pytest.approx(geodesic_dist(X[3], X[17]), abs=1e-12)


class TestSeparation:
    def test_single_pair(self):
        theta = 0.7
        y = np.array([math.cos(theta), math.sin(theta), 0.0])
        assert separation_radius(np.vstack([E1, y])) == pytest.approx(theta / 2, abs=1e-14)

    def test_three_on_equator(self):
        a = 2 * math.pi / 3 * np.arange(3)
        X = np.column_stack([np.cos(a), np.sin(a), np.zeros(3)])
        assert separation_radius(X) == pytest.approx(math.pi / 3, abs=1e-14)

    def test_duplicate(self):
        assert separation_radius(np.vstack([E1, E2, E1])) == 0.0

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            separation_radius(E1[None, :])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 60), st.integers(0, 10_000))
    def test_insertion_never_increases(self, n, seed):
        X = uniform_sample(2, n + 1, seed=seed)
        assert separation_radius(X) <= separation_radius(X[:-1])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 40), st.integers(0, 10_000))
    def test_brute_force(self, n, seed):
        X = uniform_sample(2, n, seed=seed)
        best = min(geodesic_dist(X[i], X[j]) for i in range(n) for j in range(i + 1, n))
        assert separation_radius(X) == pytest.approx(best / 2, abs=1e-12)


class TestMeshNorm:
    def test_candidates_inside_set(self):
        X = uniform_sample(2, 30, seed=3)
        assert mesh_norm_estimate(X, X[:10]) == pytest.approx(0.0, abs=1e-7)

    def test_single_pole(self):
        assert mesh_norm_estimate(E3[None, :], np.vstack([E1, -E3])) == pytest.approx(math.pi)

    def test_two_poles_dense(self):
        h = mesh_norm_estimate(np.vstack([E3, -E3]), spiral_points(10_000))
        assert abs(h - math.pi / 2) <= 0.05

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 30), st.integers(1, 200), st.integers(0, 10_000))
    def test_monotone_in_candidates(self, n, nc, seed):
        X = uniform_sample(2, n, seed=seed)
        C = uniform_sample(2, nc + 20, seed=seed + 1)
        assert mesh_norm_estimate(X, C[:nc]) <= mesh_norm_estimate(X, C)


class TestQualityMetrics:
    def test_antipodal_pair(self):
        q = quality_metrics(np.vstack([E3, -E3]), spiral_points(10_000))
        assert q.separation_radius == pytest.approx(math.pi / 2)
        assert q.mesh_ratio == pytest.approx(1.0, abs=0.05)
        assert q.n_points == 2

    def test_design25_quasi_uniform(self, design25):
        q = quality_metrics(design25)
        # regression baseline of the bundled 25-design
        assert 1.0 <= q.mesh_ratio <= 3.0
        assert q.mesh_ratio == pytest.approx(q.mesh_norm / q.separation_radius)
        assert q.mesh_ratio == pytest.approx(1.66619, abs=1e-5)

    def test_ratio_at_least_one_dense(self):
        X = uniform_sample(2, 50, seed=4)
        assert quality_metrics(X).mesh_ratio >= 1.0


class TestGenerators:
    def test_spiral_first_angle(self):
        X = spiral_points(10_000)
        assert math.acos(X[0, 2]) == pytest.approx(math.acos(1 - 1 / 10_000), rel=1e-12)

    def test_spiral_single(self):
        X = spiral_points(1)
        assert math.acos(X[0, 2]) == pytest.approx(math.pi / 2)

    def test_spiral_unit_norm(self):
        assert np.allclose(np.linalg.norm(spiral_points(777), axis=1), 1.0, atol=1e-12, rtol=0)

    def test_spiral_azimuth(self):
        n = 50
        X = spiral_points(n)
        j = 7
        alpha = math.acos(1 - (2 * j - 1) / n)
        beta = math.fmod(1.8 * math.sqrt(n) * alpha, 2 * math.pi)
        ref = [math.sin(alpha) * math.cos(beta), math.sin(alpha) * math.sin(beta), math.cos(alpha)]
        assert np.allclose(X[j - 1], ref, atol=1e-14)

    def test_uniform_deterministic(self):
        assert np.array_equal(uniform_sample(4, 20, seed=9), uniform_sample(4, 20, seed=9))

    def test_uniform_high_dim_norms(self):
        X = uniform_sample(50, 1000, seed=0)
        assert X.shape == (1000, 51)
        assert np.allclose(np.linalg.norm(X, axis=1), 1.0, atol=1e-12, rtol=0)

    def test_uniform_mean(self):
        n = 100_000
        X = uniform_sample(2, n, seed=5)
        assert np.all(np.abs(X.mean(axis=0)) <= 5 / math.sqrt(n))

    def test_point_normalized(self):
        assert np.linalg.norm(as_point([3.0, 4.0, 0.0])) == pytest.approx(1.0, abs=1e-15)


class TestRotation:
    def test_identity(self):
        assert np.array_equal(rotation_z(0), np.eye(3))

    def test_half_turn(self):
        assert np.allclose(rotation_z(10) @ [1.0, 2.0, 3.0], [-1.0, -2.0, 3.0], atol=1e-15)

    def test_quarter_turn(self):
        assert np.allclose(rotation_z(5) @ [1.0, 2.0, 3.0], [-2.0, 1.0, 3.0], atol=1e-15)

    @pytest.mark.parametrize("k", range(-3, 25))
    def test_orthogonal(self, k):
        A = rotation_z(k)
        assert np.abs(A @ A.T - np.eye(3)).max() <= 1e-14
        assert np.linalg.det(A) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("k", [1, 3, 7, 13])
    def test_metrics_invariant(self, k):
        A = rotation_z(k)
        X = uniform_sample(2, 80, seed=k)
        C = spiral_points(2000)
        assert separation_radius(X @ A.T) == pytest.approx(separation_radius(X), abs=1e-12)
        assert mesh_norm_estimate(X @ A.T, C @ A.T) == pytest.approx(mesh_norm_estimate(X, C), abs=1e-12)


class TestDesignFiles:
    def test_two_lines(self, tmp_path):
        p = tmp_path / "d.txt"
        p.write_text("1 0 0\n\n# comment\n0 1 0\n")
        X = load_design(p)
        assert X.shape == (2, 3)

    def test_empty(self, tmp_path):
        p = tmp_path / "d.txt"
        p.write_text("")
        with pytest.raises(DesignFormatError):
            load_design(p)

    def test_parse_error_reports_line(self, tmp_path):
        p = tmp_path / "d.txt"
        p.write_text("1 0 0\n0 x 1\n")
        with pytest.raises(DesignFormatError, match=":2:"):
            load_design(p)

    def test_norm_check(self, tmp_path):
        p = tmp_path / "d.txt"
        p.write_text("1 0 0\n0 1.01 0\n")
        with pytest.raises(DesignFormatError, match="norm"):
            load_design(p)

    def test_ragged(self, tmp_path):
        p = tmp_path / "d.txt"
        p.write_text("1 0 0\n0 1\n")
        with pytest.raises(DesignFormatError):
            load_design(p)

    def test_round_trip(self, tmp_path):
        X = uniform_sample(2, 25, seed=6)
        save_design(tmp_path / "x.txt", X, header="test set")
        assert np.abs(load_design(tmp_path / "x.txt") - X).max() <= 1e-15

    def test_design25_size(self, design25):
        # t^2/2 + t/2 + O(1) = 325 + O(1)
        assert abs(design25.shape[0] - 325) <= 10
