"""mprlab package

Throughput analysis, backoff optimization, slot simulation and multiuser
detection for WLANs whose receivers decode several packets at once.
"""
from . import backoff, blind, config, errors, optimize, params, phy, progress, scenarios, simulator, success, throughput
from .backoff import (
    FixedPoint,
    asymptotic_attempt_rate,
    asymptotic_throughput_of_r,
    beb_efficiency,
    optimal_backoff_factor,
    pc_from_pt,
    pt_from_pc,
    solve_fixed_point,
)
from .blind import align_ambiguity, blind_detect_exhaustive, blind_detect_ilsp, canonicalize
from .config import Scenario, default_table1
from .errors import DomainError, MprLabError
from .params import (
    AccessMode,
    BackoffParams,
    Binomial,
    FrameTiming,
    MacTimingParams,
    NetworkParams,
    Poisson,
    SlotDurations,
)
from .phy import BPSK, QPSK, Alphabet, DetectionResult, SignalBlock, estimate_source_count, mmse_detect, synthesize, zf_detect
from .scenarios import run_scenario
from .simulator import SimConfig, SimStats, StationState, run, sweep
from .success import IDEAL, FixedErrorSuccess, LoadDependentSuccess, SuccessModel
from .throughput import (
    attempt_pmf,
    optimal_attempt_rate,
    optimal_pt_finite,
    scaling_curve,
    simo_throughput,
    slot_durations,
    throughput_asymptotic,
    throughput_finite,
)

__version__ = "0.1.0"

__all__ = [
    "backoff",
    "blind",
    "config",
    "errors",
    "optimize",
    "params",
    "phy",
    "progress",
    "scenarios",
    "simulator",
    "success",
    "throughput",
    "AccessMode",
    "NetworkParams",
    "MacTimingParams",
    "SlotDurations",
    "BackoffParams",
    "Binomial",
    "Poisson",
    "FrameTiming",
    "SuccessModel",
    "FixedErrorSuccess",
    "LoadDependentSuccess",
    "IDEAL",
    "attempt_pmf",
    "slot_durations",
    "throughput_finite",
    "throughput_asymptotic",
    "optimal_attempt_rate",
    "optimal_pt_finite",
    "scaling_curve",
    "simo_throughput",
    "FixedPoint",
    "pt_from_pc",
    "pc_from_pt",
    "solve_fixed_point",
    "asymptotic_attempt_rate",
    "asymptotic_throughput_of_r",
    "optimal_backoff_factor",
    "beb_efficiency",
    "SimConfig",
    "SimStats",
    "StationState",
    "run",
    "sweep",
    "Alphabet",
    "BPSK",
    "QPSK",
    "SignalBlock",
    "DetectionResult",
    "synthesize",
    "zf_detect",
    "mmse_detect",
    "estimate_source_count",
    "blind_detect_exhaustive",
    "blind_detect_ilsp",
    "align_ambiguity",
    "canonicalize",
    "Scenario",
    "default_table1",
    "run_scenario",
    "DomainError",
    "MprLabError",
]
