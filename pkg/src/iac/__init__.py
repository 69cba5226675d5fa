"""Closed-form interference alignment and cancellation for interfering MACs.

Decide feasibility of a DoF tuple, build an alignment plan whose graph is
a pseudoforest, solve precoders and receivers in closed form, certify them
numerically and run the Monte Carlo upper-bound experiments.
"""

from .exceptions import *  # noqa: F401,F403
from .experiments import GapPoint, MonteCarloResult, gap_ratio, run_upper_bound_mc, sweep
from .feasibility import (
    FeasibilityReport,
    InequalityCheck,
    SubsetIndex,
    check_feasibility,
    check_theorem1,
    check_theorem3,
    ia_baselines,
    make_max_dof_config,
    phi_count,
    screen_infeasible,
    upsilon,
)
from .graph import IacGraph, PseudoforestState, build_graph, check_proposition1, components
from .model import (
    ChannelSet,
    SystemConfig,
    UserId,
    compute_k_iac,
    config_from_dict,
    config_to_dict,
    load_config,
    make_config,
    sample_channels,
    sample_dof_tuple,
    total_dof,
)
from .planner import AlignmentPlan, StreamId, build_alignment_plan, validate_plan
from .solver import TransceiverSet, solve_all
from .tolerances import DEFAULT_TOLERANCES, Tolerances
from .verify import VerificationReport, verify

__version__ = "0.1.0"
