"""Minimal-norm kernel interpolation and its stability diagnostics."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import _kernels
from .kernels import kernel_cross, kernel_matrix
from .sphere import as_points

__all__ = [
    "DuplicatePointsError",
    "SolveDiagnostics",
    "Interpolant",
    "ki_fit",
    "krr_fit",
    "evaluate",
    "power_function",
    "native_norm_sq",
    "condition_diagnostics",
    "uncertainty_ratio",
    "noise_norm_lower_bound",
]

EIG_RTOL = 1e-12


class DuplicatePointsError(ValueError):
    pass


@dataclass(frozen=True)
class SolveDiagnostics:
    sigma_min: float
    sigma_max: float
    method: str
    interpolation_residual: float = float("nan")

    @property
    def cond(self):
        if not self.sigma_min > 0:
            return math.inf
        return self.sigma_max / self.sigma_min


@dataclass(frozen=True)
class Interpolant:
    centers: np.ndarray
    coeffs: np.ndarray
    kernel: object
    diagnostics: SolveDiagnostics = field(default=None)

    def __call__(self, X):
        return evaluate(self, X)


def _check_targets(X, y):
    y = np.asarray(y, dtype=np.float64)
    if y.ndim not in (1, 2) or y.shape[0] != X.shape[0]:
        raise ValueError(f"{X.shape[0]} points but outputs of shape {y.shape}")
    return y


def _reject_duplicates(X):
    if X.shape[0] > 1 and _kernels.max_offdiag_dot(X) >= 1.0 - 4 * np.finfo(float).eps:
        raise DuplicatePointsError("input points are not distinct")


def _eig_bounds(K):
    ev = linalg.eigvalsh(K)
    return float(ev[0]), float(ev[-1])


def _solve_spd(K, y, eig):
    """Cholesky solve with an eigendecomposition pseudo-inverse fallback."""
    try:
        factor = linalg.cho_factor(K, lower=True, check_finite=False)
    except linalg.LinAlgError:
        ev, V = linalg.eigh(K)
        keep = ev > EIG_RTOL * ev[-1]
        a = V[:, keep] @ ((V[:, keep].T @ y) / (ev[keep] if y.ndim == 1 else ev[keep, None]))
        return a, float(ev[0]), float(ev[-1]), "eig_pseudoinverse"
    a = linalg.cho_solve(factor, y, check_finite=False)
    if eig:
        lo, hi = _eig_bounds(K)
    else:
        lo = hi = float("nan")
    return a, lo, hi, "cholesky"


def ki_fit(X, y, kernel, eig=True):
    """Minimal-norm interpolant: coefficients a = Phi^{-1} y.

    ``y`` may hold several right-hand sides as columns. With ``eig=False`` the
    extreme eigenvalues are skipped (reported as nan) on the Cholesky path.
    """
    X = as_points(X)
    y = _check_targets(X, y)
    _reject_duplicates(X)
    K = kernel_matrix(kernel, X)
    a, lo, hi, method = _solve_spd(K, y, eig)
    resid = float(np.max(np.abs(K @ a - y))) if y.size else 0.0
    return Interpolant(X, a, kernel, SolveDiagnostics(lo, hi, method, resid))


def krr_fit(X, y, kernel, lam, eig=True):
    """Tikhonov-regularized fit, a = (Phi + lam |D| I)^{-1} y."""
    if not lam > 0:
        raise ValueError("regularization parameter must be positive")
    X = as_points(X)
    y = _check_targets(X, y)
    _reject_duplicates(X)
    K = kernel_matrix(kernel, X)
    K[np.diag_indices_from(K)] += lam * X.shape[0]
    a, lo, hi, method = _solve_spd(K, y, eig)
    resid = float(np.max(np.abs(K @ a - y))) if y.size else 0.0
    return Interpolant(X, a, kernel, SolveDiagnostics(lo, hi, method, resid))


def evaluate(f, X):
    """sum_i a_i phi(x_i . x) at each row of ``X``."""
    X = as_points(X)
    if X.shape[1] != f.centers.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {f.centers.shape[1]}")
    return kernel_cross(f.kernel, X, f.centers) @ f.coeffs


def native_norm_sq(f):
    """a^T Phi a, the squared native-space norm of an interpolant."""
    K = kernel_matrix(f.kernel, f.centers)
    a = f.coeffs
    if a.ndim == 1:
        return float(a @ K @ a)
    return np.einsum("ir,ij,jr->r", a, K, a)


def condition_diagnostics(K):
    """Extreme eigenvalues and 2-norm condition number of a symmetric matrix."""
    K = np.asarray(K, dtype=np.float64)
    lo, hi = _eig_bounds(K)
    return SolveDiagnostics(lo, hi, "eigh")


def power_function(X, kernel, x):
    """P(x) = sqrt(phi(1) - k_x^T Phi^{-1} k_x) for one point or a batch of points."""
    X = as_points(X)
    _reject_duplicates(X)
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    Q = as_points(x)
    K = kernel_matrix(kernel, X)
    factor = linalg.cho_factor(K, lower=True)
    kx = kernel_cross(kernel, X, Q)
    quad = np.einsum("ij,ij->j", kx, linalg.cho_solve(factor, kx))
    P = np.sqrt(np.maximum(kernel.diag - quad, 0.0))
    return float(P[0]) if single else P


def uncertainty_ratio(X, kernel, x):
    """P(x)^2 / sigma_min of the kernel matrix on {x} + X; at least 1 in exact arithmetic."""
    X = as_points(X)
    x = _as_point(x, X.shape[1])
    P = power_function(X, kernel, x)
    lo, _ = _eig_bounds(kernel_matrix(kernel, np.vstack([x, X])))
    return P * P / lo


def _as_point(x, width):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (width,):
        raise ValueError(f"expected a point of shape ({width},), got {x.shape}")
    return x / np.linalg.norm(x)


def noise_norm_lower_bound(theta, M, kernel):
    """theta^2 M^2 / phi(1): the native-norm floor for interpolated bounded noise."""
    return theta * theta * M * M / kernel.diag
