"""Experiment configuration: a flat TOML table with per-experiment defaults."""
import dataclasses
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = ["EXPERIMENTS", "ExperimentConfig", "load_config", "default_config", "lambda_grid"]

EXPERIMENTS = ("sim1_ki", "sim1_dki", "sim2", "sim3", "sim4", "appendix_b")


def _odd(lo, hi):
    return list(range(lo, hi + 1, 2))


def lambda_grid(floor=1e-10):
    """1/2^q for q = 0, 1, ... while 1/2^q > floor."""
    out, q = [], 0
    while 2.0**-q > floor:
        out.append(2.0**-q)
        q += 1
    return out


# published grids, shrunk where noted so each run fits a desktop
_DEFAULTS = {
    "sim1_ki": {"t_grid": _odd(1, 45)},
    "sim1_dki": {"base_t": 45, "k_grid": list(range(2, 41, 2))},  # full scale: k up to 200
    "sim2": {
        "base_t": 21,  # 10 copies of 234 points; full scale: N = 10014
        "division": "rotation",
        "m_grid": list(range(10, 201, 10)),
    },
    "sim3": {
        "base_t": 45,  # 10 copies, N = 10380 (full scale)
        "m_grid": list(range(10, 101, 2)),
        "c0_grid": [round(0.05 * i, 2) for i in range(1, 21)],
    },
    "sim4": {
        "base_t": 21,
        "m_grid": list(range(10, 101, 2)),
        "lambda_grid": lambda_grid(),
        "s_grid": _odd(1, 45),  # full scale: s up to 121
    },
    "appendix_b": {
        "kernel": "gaussian",
        "sigma_grid": np.logspace(-1, 2, 20).tolist(),
        "m_grid": list(range(2, 201, 2)),
        "n_grid": list(range(100, 1001, 100)),
        "m_fixed": 10,
        "c": 3.0,
    },
}


@dataclass
class ExperimentConfig:
    experiment: str
    kernel: str = "wendland"
    sigma: float = 1.0
    sigma_grid: list = field(default_factory=list)
    deltas: list = field(default_factory=lambda: [0.001, 0.01, 0.1, 0.3, 0.5])
    t_grid: list = field(default_factory=list)
    base_t: int = 45
    k_grid: list = field(default_factory=list)
    n_copies: int = 10
    division: str = "rotation"
    m_grid: list = field(default_factory=list)
    m_fixed: int = 10
    c0_grid: list = field(default_factory=list)
    cap_factor: int = 2
    lambda_grid: list = field(default_factory=list)
    s_grid: list = field(default_factory=list)
    kappa: int = 20
    c: float = 1.0
    centers: str = "spiral"
    n_test: int = 10000
    dim: int = 50
    n_train: int = 1000
    n_grid: list = field(default_factory=list)
    seed: int = 0
    repetitions: int = 30
    timing: bool = True
    design_dir: str | None = None
    output: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.kernel not in ("wendland", "gaussian"):
            raise ValueError("kernel must be 'wendland' or 'gaussian'")
        if self.division not in ("rotation", "random"):
            raise ValueError("division must be 'rotation' or 'random'")
        if not self.deltas or any(d < 0 for d in self.deltas):
            raise ValueError("deltas must be a nonempty list of nonnegative noise levels")
        for name in self._grids():
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty for {self.experiment}")

    def _grids(self):
        return {
            "sim1_ki": ["t_grid"],
            "sim1_dki": ["k_grid"],
            "sim2": ["m_grid"],
            "sim3": ["m_grid", "c0_grid"],
            "sim4": ["m_grid", "lambda_grid", "s_grid"],
            "appendix_b": ["sigma_grid", "m_grid", "n_grid"],
        }[self.experiment]

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def default_config(experiment, **overrides):
    """Config for ``experiment`` with its default grids, then ``overrides``."""
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
    unknown = set(overrides) - _FIELDS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    values = dict(_DEFAULTS[experiment])
    values.update(overrides)
    values["experiment"] = experiment
    return ExperimentConfig(**values)


def load_config(path):
    """Read a TOML config; every key must be an :class:`ExperimentConfig` field."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    if "experiment" not in data:
        raise ValueError(f"{path}: missing 'experiment'")
    data = dict(data)
    return default_config(data.pop("experiment"), **data)
