"""Zonal positive-definite kernels on S^d.

Wendland and Gaussian kernels are radial in the chord distance
``||x - y|| = sqrt(2 - 2 x.y)``; the coefficient kernel is the Gegenbauer
series ``sum_k c_k Z(d,k)/Omega_d P_k(x.y)``.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .harmonics import gegenbauer_all, harmonic_dims, sphere_volume
from .sphere import as_points

__all__ = ["KernelSpec", "wendland", "kernel_eval", "kernel_matrix", "kernel_cross"]

DEFAULT_KMAX = 200


def wendland(u):
    """(1-u)_+^8 (32u^3 + 25u^2 + 8u + 1); scalar in, scalar out."""
    u = np.asarray(u, dtype=np.float64)
    if np.any(u < 0):
        raise ValueError("wendland is defined for u >= 0")
    out = _kernels.np_wendland(u)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class KernelSpec:
    """A zonal kernel: ``"wendland"``, ``"gaussian"`` (width ``sigma``) or ``"coefficients"``.

    For ``"coefficients"`` the series weights ``coeffs[k]``, k = 0..kmax, must
    all be positive and ``dim`` fixes the sphere S^d.
    """

    kind: str = "wendland"
    sigma: float | None = None
    coeffs: tuple | None = None
    dim: int | None = None

    def __post_init__(self):
        if self.kind == "wendland":
            pass
        elif self.kind == "gaussian":
            if self.sigma is None or not self.sigma > 0:
                raise ValueError("gaussian kernel needs sigma > 0")
        elif self.kind == "coefficients":
            if self.dim is None or self.dim < 1:
                raise ValueError("coefficient kernel needs the sphere dimension")
            c = np.asarray(self.coeffs, dtype=np.float64)
            if c.ndim != 1 or c.size == 0 or np.any(~(c > 0)):
                raise ValueError("series coefficients must all be positive")
            object.__setattr__(self, "coeffs", tuple(float(v) for v in c))
        else:
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def wendland(cls):
        return cls("wendland")

    @classmethod
    def gaussian(cls, sigma):
        return cls("gaussian", sigma=float(sigma))

    @classmethod
    def from_coefficients(cls, coeffs, dim, kmax=DEFAULT_KMAX):
        """Build from an array of weights or from a callable ``k -> weight``."""
        if callable(coeffs):
            coeffs = [coeffs(k) for k in range(kmax + 1)]
        return cls("coefficients", coeffs=tuple(coeffs), dim=int(dim))

    @property
    def kmax(self):
        return None if self.coeffs is None else len(self.coeffs) - 1

    def _series_weights(self):
        c = np.asarray(self.coeffs)
        return c * harmonic_dims(self.dim, self.kmax) / sphere_volume(self.dim)

    def profile(self, t):
        """Kernel value as a function of the inner product ``t = x.y``."""
        t = np.clip(np.asarray(t, dtype=np.float64), -1.0, 1.0)
        if self.kind == "coefficients":
            P = gegenbauer_all(self.dim, self.kmax, t)
            return np.tensordot(self._series_weights(), P, axes=1)
        chord_sq = np.maximum(2.0 - 2.0 * t, 0.0)
        return _kernels.np_profile(chord_sq, self._code, self._param)

    @property
    def diag(self):
        """phi(x.x), the constant diagonal of every kernel matrix."""
        return float(self.profile(1.0))

    @property
    def _code(self):
        return _kernels.WENDLAND if self.kind == "wendland" else _kernels.GAUSSIAN

    @property
    def _param(self):
        return float(self.sigma) if self.sigma is not None else 0.0

    def tail_bound(self, coeff_fn, factor=8):
        """Estimate of the truncation error sup_t |phi(t) - phi_kmax(t)|.

        Sums ``coeff_fn(k) Z(d,k)/Omega_d`` over ``kmax < k <= factor * kmax``,
        which bounds the dropped terms since |P_k| <= 1.
        """
        if self.kind != "coefficients":
            return 0.0
        ks = range(self.kmax + 1, factor * (self.kmax + 1))
        Z = harmonic_dims(self.dim, factor * (self.kmax + 1))
        return float(sum(coeff_fn(k) * Z[k] for k in ks) / sphere_volume(self.dim))


def _check_dim(kernel, X):
    if kernel.kind == "coefficients" and X.shape[-1] != kernel.dim + 1:
        raise ValueError(f"kernel is defined on S^{kernel.dim}, points live in R^{X.shape[-1]}")


def kernel_eval(kernel, x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    _check_dim(kernel, x)
    return float(kernel.profile(x @ y))


def kernel_cross(kernel, X, Y):
    """Matrix of kernel values between the rows of ``X`` and the rows of ``Y``."""
    X = as_points(X)
    Y = as_points(Y)
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    _check_dim(kernel, X)
    if kernel.kind == "coefficients":
        return kernel.profile(X @ Y.T)
    return _kernels.kernel_cross(X, Y, kernel._code, kernel._param)


def kernel_matrix(kernel, X):
    """Symmetric kernel matrix (phi(x_i . x_j)) over the rows of ``X``."""
    X = as_points(X)
    _check_dim(kernel, X)
    if kernel.kind == "coefficients":
        G = X @ X.T
        G = np.triu(G, 1)
        G = G + G.T
        np.fill_diagonal(G, 1.0)
        return kernel.profile(G)
    return _kernels.kernel_gram(X, kernel._code, kernel._param)
