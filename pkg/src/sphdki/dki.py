"""Distributed kernel interpolation: one interpolant per block, size-weighted average."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .interpolation import evaluate, ki_fit
from .sphere import as_points

__all__ = ["BlockFitError", "DkiEstimator", "dki_fit", "dki_evaluate"]


class BlockFitError(RuntimeError):
    def __init__(self, block, cause):
        super().__init__(f"fit failed on block {block}: {cause}")
        self.block = block


@dataclass(frozen=True)
class DkiEstimator:
    interpolets: tuple
    block_sizes: np.ndarray
    total_size: int
    kernel: object

    @property
    def weights(self):
        return self.block_sizes / self.total_size

    @property
    def block_conds(self):
        return np.array([f.diagnostics.cond for f in self.interpolets])

    def __call__(self, X):
        return dki_evaluate(self, X)


def dki_fit(X, y, partition, kernel, eig=True, workers=None):
    """Fit one minimal-norm interpolant per block of ``partition``.

    ``workers > 1`` fits blocks on a thread pool (LAPACK releases the GIL);
    results do not depend on the worker count.
    """
    X = as_points(X)
    y = np.asarray(y, dtype=np.float64)
    if partition.parent_size != X.shape[0] or y.shape[0] != X.shape[0]:
        raise ValueError("partition, points and outputs disagree in size")

    def fit(j):
        idx = partition.blocks[j]
        try:
            return ki_fit(X[idx], y[idx], kernel, eig=eig)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise BlockFitError(j, exc) from exc

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            fits = list(pool.map(fit, range(partition.m)))
    else:
        fits = [fit(j) for j in range(partition.m)]
    return DkiEstimator(tuple(fits), partition.sizes, X.shape[0], kernel)


def dki_evaluate(est, X):
    """sum_j |D_j|/|D| f_j(X), accumulated in block order."""
    X = as_points(X)
    out = None
    for f, size in zip(est.interpolets, est.block_sizes):
        term = (size / est.total_size) * evaluate(f, X)
        out = term if out is None else out + term
    return out
