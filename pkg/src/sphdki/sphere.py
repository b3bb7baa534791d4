"""Points on the unit sphere S^d and point-set quality measures.

Point sets are plain ``(n, d+1)`` float64 arrays of unit rows; a single point
is a 1-D array. :func:`as_points` is the gatekeeper that validates shape and
renormalizes.
"""
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels

__all__ = [
    "as_point",
    "as_points",
    "geodesic_dist",
    "pairwise_geodesic",
    "separation_radius",
    "mesh_norm_estimate",
    "default_candidates",
    "QualityMetrics",
    "quality_metrics",
    "spiral_points",
    "uniform_sample",
    "rotation_z",
    "load_design",
    "save_design",
    "DesignFormatError",
]


_UNIT_TOL = 4 * np.finfo(np.float64).eps


class DesignFormatError(ValueError):
    """A design file could not be parsed or failed validation."""


def as_point(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError(f"a sphere point needs shape (d+1,) with d >= 1, got {x.shape}")
    nrm = np.linalg.norm(x)
    if not nrm > 0:
        raise ValueError("cannot normalize the zero vector")
    return x / nrm


def as_points(X, dim=None):
    """Validate an ``(n, d+1)`` array and return a C-contiguous, row-normalized copy."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] < 2:
        raise ValueError(f"point sets need shape (n, d+1) with d >= 1, got {X.shape}")
    if dim is not None and X.shape[1] != dim + 1:
        raise ValueError(f"expected points on S^{dim}, got ambient dimension {X.shape[1]}")
    nrm = np.linalg.norm(X, axis=1)
    if np.any(~(nrm > 0)):
        raise ValueError("point set contains a zero (or nan) vector")
    # rows already unit to roundoff are kept bit for bit, so repeated calls are idempotent
    nrm[np.abs(nrm - 1.0) <= _UNIT_TOL] = 1.0
    return np.ascontiguousarray(X / nrm[:, None])


def _check_same_dim(X, Y):
    if X.shape[-1] != Y.shape[-1]:
        raise ValueError(f"dimension mismatch: {X.shape[-1]} vs {Y.shape[-1]}")


def geodesic_dist(x, y):
    """Great-circle distance, ``arccos(clamp(x.y, -1, 1))``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_same_dim(x, y)
    return float(np.arccos(np.clip(x @ y, -1.0, 1.0)))


def pairwise_geodesic(X, Y=None):
    X = as_points(X)
    Y = X if Y is None else as_points(Y)
    _check_same_dim(X, Y)
    D = X @ Y.T
    np.clip(D, -1.0, 1.0, out=D)
    np.arccos(D, out=D)
    if Y is X:
        _kernels.mirror_upper(D)
        np.fill_diagonal(D, 0.0)
    return D


def separation_radius(X):
    """Half the smallest pairwise geodesic distance (exact, all pairs)."""
    X = as_points(X)
    if X.shape[0] < 2:
        raise ValueError("separation radius needs at least two points")
    g = _kernels.max_offdiag_dot(X)
    return 0.5 * math.acos(min(max(g, -1.0), 1.0))


def mesh_norm_estimate(X, candidates):
    """Largest distance from a candidate point to its nearest point of ``X``.

    A lower bound on the true mesh norm; its quality depends on how densely
    ``candidates`` cover the sphere.
    """
    X = as_points(X)
    C = as_points(candidates)
    _check_same_dim(X, C)
    g = _kernels.min_max_dot(C, X)
    return math.acos(min(max(g, -1.0), 1.0))


def default_candidates(n_points, d, seed=0):
    """Spiral points on S^2, uniform samples elsewhere, ten per data point."""
    n = max(10 * n_points, 1000)
    if d == 2:
        return spiral_points(n)
    return uniform_sample(d, n, seed)


@dataclass(frozen=True)
class QualityMetrics:
    mesh_norm: float
    separation_radius: float
    mesh_ratio: float
    n_points: int


def quality_metrics(X, candidates=None):
    X = as_points(X)
    if candidates is None:
        candidates = default_candidates(X.shape[0], X.shape[1] - 1)
    h = mesh_norm_estimate(X, candidates)
    q = separation_radius(X)
    rho = h / q if q > 0 else math.inf
    return QualityMetrics(h, q, rho, X.shape[0])


def spiral_points(n):
    """``n`` spiral points on S^2 with polar angles arccos(1 - (2j-1)/n).

    The azimuth is ``mod(1.8 sqrt(n) alpha_j, 2 pi)`` with the polar angle
    ``alpha_j`` as the spiral parameter.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    j = np.arange(1, n + 1)
    alpha = np.arccos(1.0 - (2.0 * j - 1.0) / n)
    beta = np.mod(1.8 * math.sqrt(n) * alpha, 2.0 * math.pi)
    sa = np.sin(alpha)
    return np.column_stack([sa * np.cos(beta), sa * np.sin(beta), np.cos(alpha)])


def uniform_sample(d, n, seed=None):
    """``n`` i.i.d. uniform points on S^d from normalized Gaussian draws."""
    if d < 1 or n < 1:
        raise ValueError("need d >= 1 and n >= 1")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, d + 1))
    return G / np.linalg.norm(G, axis=1, keepdims=True)


def rotation_z(k):
    """Rotation by k*pi/10 about the z-axis."""
    a = k * math.pi / 10.0
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def load_design(path, norm_tol=1e-3):
    """Read a point file: one point per line, whitespace-separated coordinates.

    Blank lines and ``#`` comments are skipped. Rows are renormalized; a row
    whose norm is off by more than ``norm_tol`` is rejected.
    """
    path = Path(path)
    rows = []
    width = None
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                row = [float(tok) for tok in text.split()]
            except ValueError:
                raise DesignFormatError(f"{path}:{lineno}: cannot parse {text!r}") from None
            if width is None:
                width = len(row)
                if width < 2:
                    raise DesignFormatError(f"{path}:{lineno}: need at least 2 coordinates")
            elif len(row) != width:
                raise DesignFormatError(
                    f"{path}:{lineno}: expected {width} coordinates, found {len(row)}"
                )
            nrm = math.sqrt(sum(v * v for v in row))
            if abs(nrm - 1.0) > norm_tol:
                raise DesignFormatError(f"{path}:{lineno}: norm {nrm:.6g} is not 1")
            rows.append(row)
    if not rows:
        raise DesignFormatError(f"{path}: no points")
    return as_points(np.array(rows))


def save_design(path, X, header=None):
    X = as_points(X)
    with open(path, "w") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for row in X:
            fh.write(" ".join(f"{v: .17e}" for v in row) + "\n")
