"""Splitting a point set into disjoint blocks.

Three strategies: select-and-judge (SAJ), which guarantees a separation
radius per block and then balances block sizes; division of rotated design
copies into equal pieces; and plain random division. Partitions are index
lists into the parent set, so labels never need re-association.
"""
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .sphere import as_points, default_candidates, mesh_norm_estimate, pairwise_geodesic, separation_radius

__all__ = [
    "Partition",
    "saj_stage1",
    "saj_stage2",
    "saj",
    "rotation_division",
    "random_division",
    "BlockReport",
    "block_report",
]


@dataclass
class Partition:
    blocks: list
    parent_size: int
    method: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.blocks = [np.asarray(b, dtype=np.int64) for b in self.blocks]
        seen = np.zeros(self.parent_size, dtype=np.int64)
        for j, b in enumerate(self.blocks):
            if b.size == 0:
                raise ValueError(f"block {j} is empty")
            if b.min() < 0 or b.max() >= self.parent_size:
                raise ValueError(f"block {j} indexes outside 0..{self.parent_size - 1}")
            np.add.at(seen, b, 1)
        if np.any(seen != 1):
            raise ValueError("blocks must be disjoint and cover every index exactly once")

    @property
    def m(self):
        return len(self.blocks)

    @property
    def sizes(self):
        return np.array([b.size for b in self.blocks], dtype=np.int64)

    @property
    def spread(self):
        s = self.sizes
        return int(s.max() - s.min())

    def to_text(self):
        head = json.dumps({"method": self.method, "parent_size": self.parent_size, "params": self.params})
        lines = [f"# {head}"] + [" ".join(map(str, b.tolist())) for b in self.blocks]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        meta = {}
        blocks = []
        for line in text.splitlines():
            line = line.strip()
            if line.startswith("#"):
                try:
                    meta = json.loads(line[1:])
                except json.JSONDecodeError:
                    pass
                continue
            if line:
                blocks.append([int(tok) for tok in line.split()])
        n = meta.get("parent_size", sum(len(b) for b in blocks))
        return cls(blocks, n, meta.get("method", "custom"), meta.get("params", {}))

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_text(fh.read())


def _seeds(seed):
    return np.random.SeedSequence(seed).spawn(2)


def _check_c0(c0, cap_factor):
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    if cap_factor not in (1, 2):
        raise ValueError("cap_factor must be 1 or 2")
    if c0 >= math.pi:
        warnings.warn("c0 >= pi: every block will be a single point", stacklevel=3)


def _stage1(dist, c0, seed, cap_factor):
    n = dist.shape[0]
    order = np.random.default_rng(_seeds(seed)[0]).permutation(n).astype(np.int64)
    labels = _kernels.saj_stage1_labels(dist, float(cap_factor * c0), order)
    m = int(labels.max()) + 1
    blocks = [np.flatnonzero(labels == j) for j in range(m)]
    return Partition(blocks, n, "saj", {"c0": c0, "seed": seed, "cap_factor": cap_factor, "stage": 1})


def saj_stage1(X, c0, seed=0, cap_factor=2):
    """Greedy division into blocks whose points are pairwise farther than ``cap_factor * c0``.

    Blocks are grown by repeatedly taking a random remaining point and
    discarding every point inside the cap of radius ``cap_factor * c0``
    around it; the leftovers seed the next block. With ``cap_factor=2`` each
    block has separation radius > c0; ``cap_factor=1`` removes caps of
    radius c0 only, giving separation radius > c0/2.
    """
    _check_c0(c0, cap_factor)
    return _stage1(pairwise_geodesic(X), c0, seed, cap_factor)


def _stage2(p, dist, c0, seed, cap_factor):
    cap = float(cap_factor * c0)
    n, m = p.parent_size, p.m
    target = n // m
    rng = np.random.default_rng(_seeds(seed)[1])
    blocks = [b.copy() for b in p.blocks]
    big = [j for j in range(m) if blocks[j].size > target]
    small = [j for j in range(m) if blocks[j].size <= target]
    pool = []  # (point, origin block)
    for j in big:
        perm = rng.permutation(blocks[j])
        blocks[j] = np.sort(perm[:target])
        pool.extend((int(x), j) for x in perm[target:])
    pool = [pool[i] for i in rng.permutation(len(pool))]
    members = {j: list(blocks[j]) for j in small}
    moved = True
    while moved and pool:
        moved = False
        remaining = []
        for x, origin in pool:
            placed = False
            for j in sorted(small, key=lambda j: (len(members[j]), j)):
                if len(members[j]) >= target:
                    continue
                if _kernels.fits_block(dist, np.asarray(members[j], dtype=np.int64), x, cap):
                    members[j].append(x)
                    placed = moved = True
                    break
            if not placed:
                remaining.append((x, origin))
        pool = remaining
    for j in small:
        blocks[j] = np.sort(np.asarray(members[j], dtype=np.int64))
    for x, origin in pool:
        blocks[origin] = np.append(blocks[origin], x)
    blocks = [np.sort(b) for b in blocks]
    params = dict(p.params, stage=2, seed=seed)
    return Partition(blocks, n, "saj", params)


def saj_stage2(p, X, c0, seed=0, cap_factor=2):
    """Balance the sizes of a stage-1 partition without breaking separation.

    Oversized blocks keep a random subset of ``floor(N/m)`` points; the
    surplus is moved one point at a time into the currently smallest
    undersized block that can take it, until no surplus point fits anywhere.
    Whatever is left returns to its original block.
    """
    _check_c0(c0, cap_factor)
    if p.method != "saj" or p.params.get("c0") != c0 or p.params.get("cap_factor") != cap_factor:
        raise ValueError("stage 2 needs a stage-1 SAJ partition built with the same c0 and cap_factor")
    X = as_points(X)
    if X.shape[0] != p.parent_size:
        raise ValueError("partition and point set sizes differ")
    return _stage2(p, pairwise_geodesic(X), c0, seed, cap_factor)


def saj(X, c0, seed=0, cap_factor=2, dist=None):
    """Both SAJ stages, sharing one distance matrix.

    ``dist`` may pass a precomputed :func:`pairwise_geodesic` of ``X`` when
    several radii are tried on the same set.
    """
    _check_c0(c0, cap_factor)
    if dist is None:
        dist = pairwise_geodesic(X)
    elif dist.shape != (len(X), len(X)):
        raise ValueError("dist must be the square distance matrix of X")
    return _stage2(_stage1(dist, c0, seed, cap_factor), dist, c0, seed, cap_factor)


def _equal_split(indices, k, rng):
    return [np.sort(part) for part in np.array_split(rng.permutation(indices), k)]


def rotation_division(set_sizes, m, seed=0):
    """Split each of several point-set copies into equal random pieces, m pieces in total.

    ``set_sizes`` lists the copy sizes (or the copies themselves); parent
    indices run through the copies in order. With S copies and
    r = m mod S, r randomly chosen copies get ceil(m/S) pieces and the
    others floor(m/S).
    """
    sizes = [s if isinstance(s, (int, np.integer)) else len(s) for s in set_sizes]
    n_sets = len(sizes)
    if m < n_sets:
        raise ValueError(f"need at least one block per copy (m >= {n_sets}), got m={m}")
    rng = np.random.default_rng(seed)
    r = m % n_sets
    pieces = np.full(n_sets, m // n_sets)
    if r:
        pieces[rng.choice(n_sets, size=r, replace=False)] += 1
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    blocks = []
    for s in range(n_sets):
        if pieces[s] > sizes[s]:
            raise ValueError(f"copy {s} has {sizes[s]} points, cannot make {pieces[s]} blocks")
        blocks.extend(_equal_split(np.arange(offsets[s], offsets[s + 1]), int(pieces[s]), rng))
    return Partition(blocks, int(offsets[-1]), "rotation", {"m": m, "seed": seed})


def random_division(n, m, seed=0):
    """Random permutation cut into ``m`` blocks whose sizes differ by at most one."""
    n = n if isinstance(n, (int, np.integer)) else len(n)
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= {n}, got m={m}")
    rng = np.random.default_rng(seed)
    return Partition(_equal_split(np.arange(n), m, rng), int(n), "random", {"m": m, "seed": seed})


@dataclass
class BlockReport:
    sizes: np.ndarray
    separation: np.ndarray  # nan for singleton blocks
    mesh_norm: np.ndarray
    mesh_ratio: np.ndarray
    violations: list

    @property
    def min_separation(self):
        sep = self.separation[~np.isnan(self.separation)]
        return float(sep.min()) if sep.size else float("nan")

    @property
    def size_stats(self):
        return int(self.sizes.min()), int(self.sizes.max()), float(self.sizes.mean())


def block_report(p, X, candidates=None, c0=None, tau=None):
    """Per-block separation radius, mesh norm estimate and mesh ratio.

    Blocks whose separation radius is not above ``c0`` or whose mesh ratio
    exceeds ``tau`` are listed in ``violations`` as ``(block, reason)``.
    """
    X = as_points(X)
    if candidates is None:
        candidates = default_candidates(X.shape[0], X.shape[1] - 1)
    m = p.m
    sep = np.full(m, np.nan)
    mesh = np.empty(m)
    ratio = np.full(m, np.nan)
    violations = []
    for j, b in enumerate(p.blocks):
        pts = X[b]
        mesh[j] = mesh_norm_estimate(pts, candidates)
        if b.size >= 2:
            sep[j] = separation_radius(pts)
            ratio[j] = mesh[j] / sep[j] if sep[j] > 0 else math.inf
            if c0 is not None and not sep[j] > c0:
                violations.append((j, "separation"))
            if tau is not None and ratio[j] > tau:
                violations.append((j, "mesh_ratio"))
    return BlockReport(p.sizes, sep, mesh, ratio, violations)
