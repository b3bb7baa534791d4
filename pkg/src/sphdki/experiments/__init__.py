"""Seeded simulations comparing kernel interpolation with its distributed variant."""
from .config import EXPERIMENTS, ExperimentConfig, default_config, lambda_grid, load_config
from .data import (
    add_noise,
    available_designs,
    bounded_noise,
    find_design,
    gen_centers,
    rmse,
    rotated_copies,
    target_f,
)
from .runners import (
    COLUMNS,
    SUBSAMPLE_KI,
    ResultTable,
    run,
    run_appendix_b,
    run_sim1_dki,
    run_sim1_ki,
    run_sim2,
    run_sim3,
    run_sim4,
    summarize,
)
