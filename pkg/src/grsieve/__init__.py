"""Granular sieving: deterministic Lipschitz global minimization on boxes."""

from .benchmarks import REGISTRY, BenchmarkEntry, eval_benchmark, list_corpus, lookup
from .config import ConfigError, GrsConfig
from .geometry import Box, GeometryError, boxes_adjacent, center, diameter, subdivide
from .oracle import OracleResult, estimate_lipschitz, grid_search
from .pseudo_m import (
    GrsResult,
    GrsStatus,
    MinimizerCluster,
    cluster_minimizers,
    confirmation_bound,
    estimate_m1,
    m_schedule,
    run_grs,
)
from .sieve import (
    BoxBudgetExceeded,
    Classification,
    EnclosureInterval,
    Frontier,
    ObjectiveError,
    ObjectiveSpec,
    RunStatus,
    SingleRunResult,
    classify,
    enclosure_interval,
    evaluate_level,
    finesse_bounds,
    run_single_m,
    sieve_step,
)

__version__ = "0.1.0"
