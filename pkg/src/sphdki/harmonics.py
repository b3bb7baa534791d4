"""Spherical-harmonic bookkeeping and positive quadrature rules on S^d.

Quadrature exactness is checked without an explicit harmonic basis: for a
rule (x_i, w_i) and degree k >= 1 the addition formula gives

    r_k = sum_ij w_i w_j Z(d,k)/Omega_d P_k(x_i . x_j) = || sum_i w_i Y_k(x_i) ||^2,

which vanishes exactly when every degree-k harmonic integrates to zero under
the rule. An explicit real basis is only built on S^2, for
:func:`solve_weights`.
"""
import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .sphere import as_points

__all__ = [
    "harmonic_dim",
    "harmonic_dims",
    "sphere_volume",
    "gegenbauer",
    "gegenbauer_all",
    "real_sph_harm",
    "QuadratureRule",
    "quadrature_residual",
    "quadrature_residuals",
    "verify_rule",
    "RuleReport",
    "solve_weights",
    "WeightSolution",
]

_INT64_MAX = 2**63 - 1

# smallest weight solve_weights hands out, as a fraction of 1/n
WEIGHT_FLOOR = 1e-3


def harmonic_dim(d, k):
    """Dimension Z(d, k) of the degree-k spherical harmonics on S^d.

    Exact integer arithmetic; raises ``OverflowError`` when the value no
    longer fits a signed 64-bit integer.
    """
    d, k = int(d), int(k)
    if d < 1 or k < 0:
        raise ValueError(f"need d >= 1 and k >= 0, got d={d}, k={k}")
    if k == 0:
        return 1
    num = (2 * k + d - 1) * math.comb(k + d - 1, k)
    z, rem = divmod(num, k + d - 1)
    assert rem == 0
    if z > _INT64_MAX:
        raise OverflowError(f"Z({d},{k}) exceeds int64")
    return z


def harmonic_dims(d, kmax):
    """Array of Z(d, k) for k = 0..kmax."""
    return np.array([harmonic_dim(d, k) for k in range(kmax + 1)], dtype=np.int64)


def sphere_volume(d):
    """Surface area of S^d, 2 pi^((d+1)/2) / Gamma((d+1)/2)."""
    return 2.0 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


def gegenbauer_all(d, kmax, t):
    """P_k^{d+1}(t) for k = 0..kmax, normalized to P_k(1) = 1.

    Uses (k+d-1) P_{k+1} = (2k+d-1) t P_k - k P_{k-1}, which is the Legendre
    recurrence for d = 2 and the Chebyshev one for d = 1. Returns an array of
    shape ``(kmax + 1,) + t.shape``.
    """
    t = np.clip(np.asarray(t, dtype=np.float64), -1.0, 1.0)
    out = np.empty((kmax + 1,) + t.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = t
    for k in range(1, kmax):
        out[k + 1] = ((2 * k + d - 1) * t * out[k] - k * out[k - 1]) / (k + d - 1)
    return out


def gegenbauer(d, k, t):
    """Normalized Gegenbauer polynomial P_k^{d+1}(t); |t| is clamped to 1."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    val = gegenbauer_all(d, k, t)[k]
    return float(val) if val.ndim == 0 else val


def real_sph_harm(points, kmax):
    """Real orthonormal spherical harmonics on S^2 up to degree ``kmax``.

    Orthonormal with respect to surface measure, so that
    ``sum_m Y_km(x)^2 = (2k+1)/(4 pi)``. Columns are ordered by degree k and,
    within a degree, by order m = -k..k (sine terms for m < 0).

    Returns an array of shape ``(n, (kmax+1)**2)``.
    """
    X = as_points(points)
    if X.shape[1] != 3:
        raise ValueError("real_sph_harm is implemented for S^2 only")
    z = np.clip(X[:, 2], -1.0, 1.0)
    s = np.hypot(X[:, 0], X[:, 1])
    phi = np.arctan2(X[:, 1], X[:, 0])
    n = X.shape[0]
    # fully normalized associated Legendre functions bar P_k^m(z)
    P = np.zeros((kmax + 1, kmax + 1, n))
    P[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(1, kmax + 1):
        P[m, m] = math.sqrt((2 * m + 1) / (2 * m)) * s * P[m - 1, m - 1]
    for m in range(0, kmax):
        P[m + 1, m] = math.sqrt(2 * m + 3) * z * P[m, m]
    for m in range(0, kmax + 1):
        for k in range(m + 2, kmax + 1):
            a = math.sqrt((4 * k * k - 1) / (k * k - m * m))
            b = math.sqrt(((k - 1) ** 2 - m * m) / (4 * (k - 1) ** 2 - 1))
            P[k, m] = a * (z * P[k - 1, m] - b * P[k - 2, m])
    Y = np.empty((n, (kmax + 1) ** 2))
    sqrt2 = math.sqrt(2.0)
    for k in range(kmax + 1):
        base = k * k + k
        Y[:, base] = P[k, 0]
        for m in range(1, k + 1):
            Y[:, base + m] = sqrt2 * P[k, m] * np.cos(m * phi)
            Y[:, base - m] = sqrt2 * P[k, m] * np.sin(m * phi)
    return Y


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        object.__setattr__(self, "points", as_points(self.points))
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (self.points.shape[0],):
            raise ValueError("one weight per point required")
        object.__setattr__(self, "weights", w)

    @classmethod
    def equal_weights(cls, points, order):
        X = as_points(points)
        return cls(X, np.full(X.shape[0], 1.0 / X.shape[0]), order)

    @property
    def dim(self):
        return self.points.shape[1] - 1


def quadrature_residuals(points, weights, kmax):
    """r_k for k = 0..kmax (entry 0 is (sum w)^2 / Omega_d, not a residual)."""
    X = as_points(points)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    d = X.shape[1] - 1
    S = _kernels.zonal_sums(X, w, int(kmax), d)
    scale = harmonic_dims(d, kmax) / sphere_volume(d)
    return scale * S


def quadrature_residual(rule, k):
    """Squared norm of the weighted degree-k harmonic moment vector of ``rule``."""
    if k < 1:
        raise ValueError("residual is defined for degrees k >= 1")
    r = quadrature_residuals(rule.points, rule.weights, k)[k]
    # a Gram quadratic form; tiny negatives are roundoff
    return max(float(r), 0.0)


@dataclass
class RuleReport:
    positive: bool
    normalized: bool
    residuals: dict = field(default_factory=dict)
    tol: float = 1e-9
    weight_sum: float = 1.0

    @property
    def failed_degrees(self):
        return [k for k, r in self.residuals.items() if r > self.tol]

    @property
    def worst_residual(self):
        return max(self.residuals.values(), default=0.0)

    @property
    def exact(self):
        return not self.failed_degrees

    @property
    def passed(self):
        return self.positive and self.normalized and self.exact

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["degree", "residual", "pass"])
            for k, r in self.residuals.items():
                writer.writerow([k, f"{r:.17g}", r <= self.tol])


def verify_rule(points, weights, s, tol=1e-9):
    """Check positivity, normalization and exactness up to degree ``s``.

    ``tol`` bounds |sum w - 1| and each r_k relative to the scale
    Z(d,k)/Omega_d of a single-point residual.
    """
    X = as_points(points)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (X.shape[0],):
        raise ValueError("one weight per point required")
    d = X.shape[1] - 1
    residuals = {}
    if s >= 1:
        r = quadrature_residuals(X, w, s)
        scale = harmonic_dims(d, s) / sphere_volume(d)
        residuals = {k: max(float(r[k] / scale[k]), 0.0) for k in range(1, s + 1)}
    total = float(w.sum())
    return RuleReport(
        positive=bool(np.all(w > 0)),
        normalized=abs(total - 1.0) <= tol,
        residuals=residuals,
        tol=tol,
        weight_sum=total,
    )


@dataclass
class WeightSolution:
    weights: np.ndarray | None
    feasible: bool
    order: int
    best_order: int
    max_scaled_weight: float
    report: RuleReport | None = None


def _moment_weights(Y, w0, floor):
    # min-norm correction of w0 so that sum_i w_i Y(x_i) matches the integrals
    # against the probability measure: Y_00 for k = 0, zero otherwise.
    # Weights driven below ``floor`` are pinned there and the rest re-solved.
    b = np.zeros(Y.shape[1])
    b[0] = 1.0 / math.sqrt(4.0 * math.pi)
    free = np.ones(Y.shape[0], dtype=bool)
    while True:
        A = Y[free].T
        rhs = b - A @ w0[free] - floor * Y[~free].sum(axis=0)
        dw, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        w = np.full_like(w0, floor)
        w[free] = w0[free] + dw
        low = w < floor
        if not low.any() or low.all():
            return w
        free &= ~low
        if not free.any():
            return w


def solve_weights(points, s, tol=1e-9):
    """Positive quadrature weights of order ``s`` on a point set of S^2.

    Least-squares solve of the moment equations starting from equal weights;
    weights that fall below ``WEIGHT_FLOOR / n`` are pinned there and the
    remaining ones re-solved until none does, then the rule is re-verified. When the requested order fails
    the result is marked infeasible and ``best_order`` is the highest order
    that does verify.
    """
    X = as_points(points)
    if X.shape[1] != 3:
        raise ValueError("solve_weights supports S^2 only")
    n = X.shape[0]
    if s > 2 * math.sqrt(n):
        warnings.warn(f"order {s} is high for {n} points; expect infeasibility", stacklevel=2)

    def attempt(order):
        Y = real_sph_harm(X, order)
        w = _moment_weights(Y, np.full(n, 1.0 / n), WEIGHT_FLOOR / n)
        report = verify_rule(X, w, order, tol)
        return w, report

    w, report = attempt(s)
    if report.passed:
        return WeightSolution(w, True, s, s, float(w.max() * n), report)
    best = -1
    for order in range(s - 1, -1, -1):
        if attempt(order)[1].passed:
            best = order
            break
    return WeightSolution(None, False, s, best, float("nan"), report)
