"""Synthetic data for the simulations: designs, target function, noise, scoring."""
import os
import re
from importlib import resources
from pathlib import Path

import numpy as np

from ..kernels import wendland
from ..sphere import as_points, load_design, rotation_z, spiral_points, uniform_sample

__all__ = [
    "DESIGN_DIR_ENV",
    "design_dirs",
    "find_design",
    "available_designs",
    "rotated_copies",
    "target_f",
    "gen_centers",
    "add_noise",
    "bounded_noise",
    "rmse",
    "noise_stream",
]

DESIGN_DIR_ENV = "SPHDKI_DESIGN_DIR"
_DESIGN_RE = re.compile(r"^(ss|sf)(\d{3})\.(\d+)$")


def design_dirs(extra=None):
    """Search order: explicit directory, $SPHDKI_DESIGN_DIR, bundled designs."""
    dirs = []
    if extra:
        dirs.append(Path(extra))
    if os.environ.get(DESIGN_DIR_ENV):
        dirs.append(Path(os.environ[DESIGN_DIR_ENV]))
    dirs.append(Path(str(resources.files("sphdki") / "data" / "designs")))
    return dirs


def available_designs(design_dir=None):
    """Map t -> path for every design file found, first directory wins.

    Symmetric (``ss``) files are preferred over non-symmetric (``sf``) ones.
    """
    found = {}
    for d in reversed(design_dirs(design_dir)):
        if not d.is_dir():
            continue
        for p in sorted(d.iterdir(), key=lambda p: p.name, reverse=True):
            m = _DESIGN_RE.match(p.name)
            if m:
                found[int(m.group(2))] = p
    return dict(sorted(found.items()))


def find_design(t, design_dir=None):
    """Load the t-design from the design search path."""
    designs = available_designs(design_dir)
    if t not in designs:
        raise FileNotFoundError(
            f"no {t}-design (ss{t:03d}.* or sf{t:03d}.*) in {[str(d) for d in design_dirs(design_dir)]}"
        )
    return load_design(designs[t])


def rotated_copies(X, ks):
    """Copies A_k X for each k in ``ks``, stacked in order."""
    X = as_points(X, dim=2)
    return np.vstack([X @ rotation_z(k).T for k in ks])


def target_f(X, centers, c):
    """sum_i psi(||x - z_i|| / c) with the Wendland function psi."""
    if not c > 0:
        raise ValueError("c must be positive")
    X = as_points(X)
    Z = as_points(centers)
    if Z.shape[0] == 0:
        raise ValueError("need at least one center")
    chord = np.sqrt(np.maximum(2.0 - 2.0 * (X @ Z.T), 0.0))
    return wendland(chord / c).sum(axis=1)


def gen_centers(kappa, source="spiral", d=2, seed=0):
    """Centers of the target function.

    ``source="spiral"`` stands in for equal-area region centers with
    ``spiral_points(kappa)`` on S^2 (uniform samples on other spheres);
    any other value is read as a point file.
    """
    if source == "spiral":
        if d == 2:
            return spiral_points(kappa)
        return uniform_sample(d, kappa, seed)
    path = Path(source)
    if not path.exists():
        raise FileNotFoundError(f"centers file {path} not found")
    return load_design(path)


def noise_stream(seed, *keys):
    """Independent generator for one (seed, keys...) combination."""
    return np.random.default_rng([int(seed), *[int(k) for k in keys]])


def add_noise(y, delta, seed):
    """y + N(0, delta^2) noise; ``seed`` may be an int or a Generator."""
    if delta < 0:
        raise ValueError("noise level must be nonnegative")
    y = np.asarray(y, dtype=np.float64)
    if delta == 0:
        return y.copy()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return y + delta * rng.standard_normal(y.shape)


def bounded_noise(n, theta, M, seed):
    """Random signs times magnitudes uniform on [theta M, M]."""
    if not 0 < theta <= 1 or not M > 0:
        raise ValueError("need 0 < theta <= 1 and M > 0")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    mag = rng.uniform(theta * M, M, size=n)
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return sign * mag


def rmse(pred, truth, axis=0):
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.ndim > truth.ndim:
        truth = truth.reshape(truth.shape + (1,) * (pred.ndim - truth.ndim))
    return np.sqrt(np.mean((pred - truth) ** 2, axis=axis))
