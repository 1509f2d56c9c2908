"""Optimal number of active elements and phases for an RIS-assisted link."""
from .channel import CascadedChannel, ChannelRealization, cascade, load_realization, sample, save_realization
from .estimator import RISElementOptimizer, check_channel
from .exceptions import (
    ConfigError,
    DegenerateChannelError,
    DomainError,
    InfeasibleInstanceError,
    InfeasibleRunError,
    OracleCapError,
    RISError,
    StaleOptimaError,
    ValidationError,
)
from .model import (
    DerivedConstants,
    SystemParams,
    compute_beta,
    derive_constants,
    feedback_slot_time,
    from_config,
    load_config,
    reference_config,
)
from .objectives import (
    Objective,
    ObjectiveValue,
    PhaseConfig,
    energy_efficiency,
    optimal_phases,
    rate,
    scalarized_tradeoff,
    spectral_gain,
    total_power,
)
from .optimizer import OptimizationResult, ParetoPoint, brute_force, check_assumption, greedy, pareto_sweep

__version__ = "0.1.0"
