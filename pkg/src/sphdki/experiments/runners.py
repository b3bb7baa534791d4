"""The simulation drivers.

Every driver batches repetitions and noise levels as columns of one
right-hand-side matrix, so each geometry (point set, partition, kernel) is
factorized once per grid point. Repetition ``r`` at noise level ``i`` of
data set ``j`` draws its noise from the stream ``(seed, tag, j, i, r)``;
partitions draw from ``(seed, tag, grid index)`` and are shared by all
repetitions of that grid point.
"""
import csv
import math
import time
from collections import defaultdict

import numpy as np
from scipy import linalg

from ..interpolation import _solve_spd
from ..kernels import KernelSpec, kernel_cross, kernel_matrix
from ..partition import random_division, rotation_division, saj
from ..sphere import pairwise_geodesic, spiral_points, uniform_sample
from .config import ExperimentConfig
from .data import find_design, gen_centers, noise_stream, rmse, rotated_copies, target_f

__all__ = [
    "COLUMNS",
    "SUBSAMPLE_KI",
    "ResultTable",
    "run",
    "run_sim1_ki",
    "run_sim1_dki",
    "run_sim2",
    "run_sim3",
    "run_sim4",
    "run_appendix_b",
    "summarize",
]

COLUMNS = (
    "experiment", "method", "sweep", "repetition", "delta", "t", "k", "m", "c0",
    "lam", "s", "sigma", "n_train", "rmse", "mean_block_cond", "full_cond",
    "fallback_blocks", "wall_time",
)

# nearest training points to an s-design stand in for design-based sketching
SUBSAMPLE_KI = "subsample-ki (simplified)"

_TAG = {"sim1_ki": 1, "sim1_dki": 2, "sim2": 3, "sim3": 3, "sim4": 3, "appendix_b": 4}


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "" if math.isnan(v) else repr(v)
    return str(v)


class ResultTable:
    """Rows keyed by :data:`COLUMNS`; missing values are written as empty fields."""

    def __init__(self, rows=None):
        self.rows = list(rows or [])

    def add(self, **row):
        unknown = set(row) - set(COLUMNS)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def column(self, name, **where):
        return np.array([r.get(name) for r in self.select(**where)], dtype=object)

    def select(self, **where):
        return [r for r in self.rows if all(r.get(k) == v for k, v in where.items())]

    def mean_rmse(self, by, **where):
        """Mean RMSE over repetitions, keyed by the tuple of ``by`` columns."""
        acc = defaultdict(list)
        for r in self.select(**where):
            acc[tuple(r.get(k) for k in by)].append(r["rmse"])
        return {k: float(np.mean(v)) for k, v in acc.items()}

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(COLUMNS)
            for r in self.rows:
                w.writerow([_fmt(r.get(c)) for c in COLUMNS])

    @classmethod
    def read_csv(cls, path):
        ints = {"repetition", "t", "k", "m", "s", "n_train", "fallback_blocks"}
        text = {"experiment", "method", "sweep"}
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                row = {}
                for k, v in rec.items():
                    if v == "":
                        continue
                    row[k] = v if k in text else int(v) if k in ints else float(v)
                rows.append(row)
        return cls(rows)


def _kernel(cfg, sigma=None):
    if cfg.kernel == "gaussian":
        return KernelSpec.gaussian(sigma if sigma is not None else cfg.sigma)
    return KernelSpec.wendland()


def _cond(K):
    ev = linalg.eigvalsh(K)
    return float(ev[-1] / ev[0]) if ev[0] > 0 else math.inf


class _Workspace:
    """Test-point kernel columns of one training set, shared by all its partitions.

    Block kernel matrices are assembled on demand; the full matrix only when
    its condition number is asked for.
    """

    def __init__(self, kernel, X, T):
        self.kernel = kernel
        self.X = X
        self.C = kernel_cross(kernel, T, X)
        self._full_cond = None

    @property
    def full_cond(self):
        if self._full_cond is None:
            self._full_cond = _cond(kernel_matrix(self.kernel, self.X))
        return self._full_cond

    def fit_predict(self, blocks, Y, lam=None, cond=True):
        """Size-weighted average of per-block fits evaluated at the test points.

        Returns predictions, seconds spent assembling and solving the block
        systems, the mean block condition number and the number of blocks
        that needed the pseudo-inverse fallback.
        """
        total = sum(len(b) for b in blocks)
        pred = np.zeros((self.C.shape[0], Y.shape[1]))
        elapsed, fallback, conds = 0.0, 0, []
        for b in blocks:
            t0 = time.perf_counter()
            Kb = kernel_matrix(self.kernel, self.X[b])
            if lam is not None:
                Kb[np.diag_indices_from(Kb)] += lam * len(b)
            a, *_, method = _solve_spd(Kb, Y[b], eig=False)
            elapsed += time.perf_counter() - t0
            fallback += method != "cholesky"
            pred += (len(b) / total) * (self.C[:, b] @ a)
            if cond:
                conds.append(_cond(Kb))
        mean_cond = float(np.mean(conds)) if conds else float("nan")
        return pred, elapsed, mean_cond, fallback


def _noisy(fX, cfg, *data_key):
    """Columns of noisy outputs, one per (delta, repetition), with their labels."""
    cols, labels = [], []
    for i, delta in enumerate(cfg.deltas):
        for r in range(cfg.repetitions):
            rng = noise_stream(cfg.seed, _TAG[cfg.experiment], *data_key, i, r)
            cols.append(fX + delta * rng.standard_normal(fX.shape[0]))
            labels.append((float(delta), r))
    return np.column_stack(cols), labels


def _emit(table, cfg, labels, errors, wall, **fixed):
    for (delta, rep), e in zip(labels, errors):
        table.add(
            experiment=cfg.experiment, repetition=rep, delta=delta, rmse=float(e),
            wall_time=wall if cfg.timing else None, **fixed,
        )


def _test_set(cfg):
    T = spiral_points(cfg.n_test)
    Z = gen_centers(cfg.kappa, cfg.centers)
    return T, Z, target_f(T, Z, cfg.c)


def _grid_seed(cfg, index):
    return [cfg.seed, _TAG[cfg.experiment], 99, index]


def run_sim1_ki(cfg):
    """Kernel interpolation on each t-design of the grid: RMSE against N."""
    table = ResultTable()
    kernel = _kernel(cfg)
    T, Z, fT = _test_set(cfg)
    for t in cfg.t_grid:
        X = find_design(t, cfg.design_dir)
        Y, labels = _noisy(target_f(X, Z, cfg.c), cfg, t)
        ws = _Workspace(kernel, X, T)
        pred, wall, cond, fb = ws.fit_predict([np.arange(X.shape[0])], Y)
        _emit(table, cfg, labels, rmse(pred, fT), wall, method="ki", t=t, m=1,
              n_train=X.shape[0], mean_block_cond=cond, full_cond=cond, fallback_blocks=fb)
    return table


def run_sim1_dki(cfg):
    """DKI over k rotated copies of one design, one block per copy.

    Copy j always carries the same noise, so the estimator for k copies is
    the running mean of the first k per-copy interpolants.
    """
    table = ResultTable()
    kernel = _kernel(cfg)
    T, Z, fT = _test_set(cfg)
    X0 = find_design(cfg.base_t, cfg.design_dir)
    n0 = X0.shape[0]
    # rotations preserve inner products, so every copy has the kernel matrix of X0
    block_cond = _cond(kernel_matrix(kernel, X0))
    wanted = set(cfg.k_grid)
    acc = None
    wall = 0.0
    fallback = 0
    for j in range(1, max(cfg.k_grid) + 1):
        X = rotated_copies(X0, [j])
        Y, labels = _noisy(target_f(X, Z, cfg.c), cfg, j)
        ws = _Workspace(kernel, X, T)
        pred, w, _, fb = ws.fit_predict([np.arange(n0)], Y, cond=False)
        wall += w
        fallback += fb
        acc = pred if acc is None else acc + pred
        if j in wanted:
            _emit(table, cfg, labels, rmse(acc / j, fT), wall, method="dki", k=j, m=j,
                  t=cfg.base_t, n_train=n0 * j, mean_block_cond=block_cond,
                  fallback_blocks=fallback)
    return table


def _copies_data(cfg):
    X0 = find_design(cfg.base_t, cfg.design_dir)
    X = rotated_copies(X0, range(1, cfg.n_copies + 1))
    return X, [X0.shape[0]] * cfg.n_copies


def _division(cfg, sizes, m, index):
    if cfg.division == "rotation":
        return rotation_division(sizes, m, seed=_grid_seed(cfg, index))
    return random_division(sum(sizes), m, seed=_grid_seed(cfg, index))


def run_sim2(cfg):
    """DKI on a fixed training set while the number of blocks m varies."""
    table = ResultTable()
    kernel = _kernel(cfg)
    T, Z, fT = _test_set(cfg)
    X, sizes = _copies_data(cfg)
    Y, labels = _noisy(target_f(X, Z, cfg.c), cfg, 0)
    ws = _Workspace(kernel, X, T)
    for i, m in enumerate(cfg.m_grid):
        p = _division(cfg, sizes, m, i)
        pred, wall, cond, fb = ws.fit_predict(p.blocks, Y)
        _emit(table, cfg, labels, rmse(pred, fT), wall, method="dki", m=p.m,
              t=cfg.base_t, n_train=X.shape[0], mean_block_cond=cond,
              full_cond=ws.full_cond, fallback_blocks=fb)
    return table


def run_sim3(cfg):
    """Rotation-copy division against SAJ on ten rotated copies of a design."""
    table = ResultTable()
    kernel = _kernel(cfg)
    T, Z, fT = _test_set(cfg)
    X, sizes = _copies_data(cfg)
    Y, labels = _noisy(target_f(X, Z, cfg.c), cfg, 0)
    ws = _Workspace(kernel, X, T)
    n = X.shape[0]
    for i, m in enumerate(cfg.m_grid):
        p = rotation_division(sizes, m, seed=_grid_seed(cfg, i))
        pred, wall, cond, fb = ws.fit_predict(p.blocks, Y)
        _emit(table, cfg, labels, rmse(pred, fT), wall, method="rotation", m=p.m,
              t=cfg.base_t, n_train=n, mean_block_cond=cond, fallback_blocks=fb)
    dist = pairwise_geodesic(X)
    for i, c0 in enumerate(cfg.c0_grid):
        p = saj(X, c0, seed=_grid_seed(cfg, 1000 + i), cap_factor=cfg.cap_factor, dist=dist)
        pred, wall, cond, fb = ws.fit_predict(p.blocks, Y)
        _emit(table, cfg, labels, rmse(pred, fT), wall, method="saj", m=p.m, c0=c0,
              t=cfg.base_t, n_train=n, mean_block_cond=cond, fallback_blocks=fb)
    return table


def nearest_subset(X, design):
    """Indices of the training points nearest to each design point, deduplicated."""
    return np.unique(np.argmax(design @ X.T, axis=1))


def run_sim4(cfg):
    """DKI against DKRR (one block per copy), subsampled KI and full KI."""
    table = ResultTable()
    kernel = _kernel(cfg)
    T, Z, fT = _test_set(cfg)
    X, sizes = _copies_data(cfg)
    n = X.shape[0]
    Y, labels = _noisy(target_f(X, Z, cfg.c), cfg, 0)
    ws = _Workspace(kernel, X, T)
    common = dict(t=cfg.base_t, n_train=n)

    pred, wall, cond, fb = ws.fit_predict([np.arange(n)], Y)
    _emit(table, cfg, labels, rmse(pred, fT), wall, method="ki", m=1,
          mean_block_cond=cond, full_cond=cond, fallback_blocks=fb, **common)
    for i, m in enumerate(cfg.m_grid):
        p = rotation_division(sizes, m, seed=_grid_seed(cfg, i))
        pred, wall, cond, fb = ws.fit_predict(p.blocks, Y)
        _emit(table, cfg, labels, rmse(pred, fT), wall, method="dki", m=p.m,
              mean_block_cond=cond, fallback_blocks=fb, **common)
    per_copy = rotation_division(sizes, len(sizes), seed=_grid_seed(cfg, 0)).blocks
    for lam in cfg.lambda_grid:
        pred, wall, cond, fb = ws.fit_predict(per_copy, Y, lam=lam)
        _emit(table, cfg, labels, rmse(pred, fT), wall, method="dkrr", m=len(per_copy),
              lam=lam, mean_block_cond=cond, fallback_blocks=fb, **common)
    for s in cfg.s_grid:
        idx = nearest_subset(X, find_design(s, cfg.design_dir))
        pred, wall, cond, fb = ws.fit_predict([idx], Y)
        _emit(table, cfg, labels, rmse(pred, fT), wall, method=SUBSAMPLE_KI, m=1, s=s,
              mean_block_cond=cond, fallback_blocks=fb, t=cfg.base_t, n_train=idx.size)
    return table


def run_appendix_b(cfg):
    """Gaussian-kernel KI/DKI on uniform samples of S^dim.

    Two sweeps per kernel width: ``samples`` grows the training set with KI
    and DKI at ``m_fixed`` blocks, ``machines`` varies m on the full set.
    """
    table = ResultTable()
    d = cfg.dim
    X = uniform_sample(d, cfg.n_train, noise_stream(cfg.seed, 4, 1))
    T = uniform_sample(d, cfg.n_test, noise_stream(cfg.seed, 4, 2))
    Z = gen_centers(cfg.kappa, cfg.centers, d=d, seed=cfg.seed)
    fT = target_f(T, Z, cfg.c)
    Y, labels = _noisy(target_f(X, Z, cfg.c), cfg, 0)
    for si, sigma in enumerate(cfg.sigma_grid):
        ws = _Workspace(_kernel(cfg, sigma), X, T)
        for i, n in enumerate(cfg.n_grid):
            if n > cfg.n_train:
                raise ValueError(f"n_grid value {n} exceeds n_train={cfg.n_train}")
            full = np.arange(n)
            pred, wall, cond, fb = ws.fit_predict([full], Y)
            _emit(table, cfg, labels, rmse(pred, fT), wall, method="ki", sweep="samples",
                  m=1, sigma=sigma, n_train=n, mean_block_cond=cond, full_cond=cond,
                  fallback_blocks=fb)
            if cfg.m_fixed <= n:
                p = random_division(n, cfg.m_fixed, seed=_grid_seed(cfg, i))
                pred, wall, cond, fb = ws.fit_predict(p.blocks, Y)
                _emit(table, cfg, labels, rmse(pred, fT), wall, method="dki",
                      sweep="samples", m=p.m, sigma=sigma, n_train=n,
                      mean_block_cond=cond, fallback_blocks=fb)
        for i, m in enumerate(cfg.m_grid):
            p = random_division(cfg.n_train, m, seed=_grid_seed(cfg, 1000 + i))
            pred, wall, cond, fb = ws.fit_predict(p.blocks, Y)
            _emit(table, cfg, labels, rmse(pred, fT), wall, method="dki", sweep="machines",
                  m=p.m, sigma=sigma, n_train=cfg.n_train, mean_block_cond=cond,
                  fallback_blocks=fb)
    return table


_RUNNERS = {
    "sim1_ki": run_sim1_ki,
    "sim1_dki": run_sim1_dki,
    "sim2": run_sim2,
    "sim3": run_sim3,
    "sim4": run_sim4,
    "appendix_b": run_appendix_b,
}


def run(cfg):
    if not isinstance(cfg, ExperimentConfig):
        raise TypeError("run() takes an ExperimentConfig")
    return _RUNNERS[cfg.experiment](cfg)


_PARAMS = ("t", "k", "m", "c0", "lam", "s", "sigma", "n_train")


def summarize(table):
    """Best grid point per (method, sweep, delta): lowest repetition-averaged RMSE.

    Returns a list of dicts with the winning parameters and its mean RMSE.
    """
    means = table.mean_rmse(by=("method", "sweep", "delta") + _PARAMS)
    best = {}
    for key, value in means.items():
        head = key[:3]
        if head not in best or value < best[head][1]:
            best[head] = (key, value)
    out = []
    for head, (key, value) in sorted(best.items(), key=lambda kv: tuple(map(str, kv[0]))):
        row = {"method": head[0], "sweep": head[1], "delta": head[2], "rmse": value}
        row.update({p: v for p, v in zip(_PARAMS, key[3:]) if v is not None})
        out.append(row)
    return out
