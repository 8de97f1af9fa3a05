"""Scheduling and power allocation for two-hop relaying with an energy-harvesting source."""

from .baselines import BaselineKind, BaselineResult, run_baseline
from .dwf import DwfDecomposition, compute_dwf, dwf_eh_profile
from .exceptions import InfeasibleProblem, InvalidProfile
from .policy import Stage, TransmissionPolicy
from .profile import ArrivalGenConfig, EhProfile, cumulative_energy, generate_poisson, validate
from .rate_model import DEFAULT_MODEL, RateFunction, RateModel
from .oracle import FeasibilityReport, brute_force_rmax, check_feasibility, evaluate
from .rmax import IntervalSolution, RelayConstraints, RmaxResult, realize_policy, rmax, rmax_throughput
from .sweep import SweepConfig, run_sweep
from .tmin import TminResult, tmin

__all__ = [
    "ArrivalGenConfig",
    "BaselineKind",
    "BaselineResult",
    "FeasibilityReport",
    "SweepConfig",
    "TminResult",
    "brute_force_rmax",
    "check_feasibility",
    "evaluate",
    "rmax_throughput",
    "run_baseline",
    "run_sweep",
    "tmin",
    "DEFAULT_MODEL",
    "DwfDecomposition",
    "EhProfile",
    "InfeasibleProblem",
    "IntervalSolution",
    "InvalidProfile",
    "RateFunction",
    "RateModel",
    "RelayConstraints",
    "RmaxResult",
    "Stage",
    "TransmissionPolicy",
    "compute_dwf",
    "cumulative_energy",
    "dwf_eh_profile",
    "generate_poisson",
    "realize_policy",
    "rmax",
    "validate",
]
