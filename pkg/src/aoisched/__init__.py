"""Freshness-aware scheduling for a two-device wireless-powered IoT link.

Builds the discretised (AoI, battery) decision process of the link, solves
it by policy iteration, and evaluates optimal and scheme-restricted policies
by Monte Carlo simulation.
"""

__version__ = "0.1.0"

from .config import (
    DEFAULTS,
    ConfigError,
    DerivedParams,
    SystemParams,
    derive,
    load_config,
    read_config,
)
from .link import (
    NOMA,
    OMA,
    WET,
    WET_OMA,
    McOutage,
    OutagePair,
    Scheme,
    SlotOutcome,
    mc_outage_estimate,
    mean_harvest,
    outage_noma,
    outage_oma,
    outage_wet_oma,
    sample_slot_outcome,
)
from .mdp import (
    Action,
    ActionTable,
    InfeasibleActionError,
    State,
    StateSpace,
    TransitionKernel,
    build_kernel,
    cost,
    cost_table,
    enumerate_states,
)
from .solver import (
    PolicyIterationResult,
    SolveLog,
    SolverError,
    TabularKernel,
    bellman_residual,
    policy_iteration,
    value_iteration,
)
from .baselines import (
    PRESETS,
    RestrictionError,
    restrict_actions,
    scheme_set,
    solve_restricted,
)
from .simulate import (
    EpisodeTrace,
    MetricReport,
    SimConfig,
    estimate_ewsaoi,
    run_episode,
    snr_sweep,
)
