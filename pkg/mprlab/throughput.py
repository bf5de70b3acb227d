"""Throughput of saturated random-access WLANs with multipacket reception.

Throughput is the mean payload delivered per backoff slot divided by the mean
slot length::

    S = L * sum_{k=1..M} k Pr{X=k} P_M(k) / (P_idle T_i + P_coll T_c + P_succ T_s)

with X ~ Bin(N, p_t) for a finite population and X ~ Poisson(lambda) in the
large-N limit. Every function here is pure.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy.stats import binom, poisson

from .errors import DomainError
from .optimize import maximize_scalar
from .params import (
    AccessMode,
    AttemptModel,
    Binomial,
    MacTimingParams,
    NetworkParams,
    Poisson,
    SlotDurations,
)
from .success import IDEAL, SuccessModel

log = logging.getLogger(__name__)

POISSON_TAIL_MASS = 1e-12
RATE_SEARCH_FLOOR = 1e-6
PT_SEARCH_FLOOR = 1e-9

DurationsLike = Union[SlotDurations, Callable[[int], SlotDurations]]


@dataclass(frozen=True)
class AttemptOptimum:
    """Optimal attempt rate and the throughput it achieves; unpacks as ``(rate, throughput)``."""

    rate: float
    throughput: float

    def __iter__(self):
        return iter((self.rate, self.throughput))


@dataclass(frozen=True)
class FiniteOptimum:
    """Optimal per-station transmission probability; unpacks as ``(p_t, throughput)``.

    ``degenerate`` is set when M >= N: collisions cannot happen and the optimum
    sits at p_t = 1.
    """

    p_t: float
    throughput: float
    degenerate: bool = False

    def __iter__(self):
        return iter((self.p_t, self.throughput))


@dataclass(frozen=True)
class ScalingPoint:
    M: int
    attempt: float
    throughput: float
    per_M: float
    normalized: float


# ---------------------------------------------------------------------------
# Attempt distributions
# ---------------------------------------------------------------------------

def attempt_pmf(model: AttemptModel, k: int) -> float:
    """Pr{X = k}; zero for k outside the support."""
    if k < 0 or int(k) != k:
        return 0.0
    if isinstance(model, Binomial):
        if k > model.N:
            return 0.0
        return float(binom.pmf(k, model.N, model.p_t))
    if isinstance(model, Poisson):
        return float(poisson.pmf(k, model.rate))
    raise TypeError(f"unknown attempt model {model!r}")


def attempt_support(model: AttemptModel) -> np.ndarray:
    """Values of k carrying the mass; Poisson is cut where the cdf passes 1 - 1e-12."""
    if isinstance(model, Binomial):
        return np.arange(model.N + 1)
    if isinstance(model, Poisson):
        top = int(poisson.ppf(1.0 - POISSON_TAIL_MASS, model.rate)) if model.rate > 0 else 0
        return np.arange(top + 1)
    raise TypeError(f"unknown attempt model {model!r}")


def _binomial_terms(N: int, p_t: float, M: int) -> Tuple[np.ndarray, np.ndarray]:
    k = np.arange(M + 1)
    pmf = binom.pmf(k, N, p_t)
    # d/dp Bin_N(k) = N (Bin_{N-1}(k-1) - Bin_{N-1}(k))
    if N >= 1:
        dpmf = N * (binom.pmf(k - 1, N - 1, p_t) - binom.pmf(k, N - 1, p_t))
    else:
        dpmf = np.zeros_like(pmf)
    return pmf, dpmf


def _poisson_terms(rate: float, M: int) -> Tuple[np.ndarray, np.ndarray]:
    k = np.arange(M + 1)
    pmf = poisson.pmf(k, rate)
    # d/dlambda Pois(k) = Pois(k-1) - Pois(k)
    dpmf = poisson.pmf(k - 1, rate) - pmf
    return pmf, dpmf


def _success_weights(M: int, success: SuccessModel) -> np.ndarray:
    return np.array([0.0] + [k * success.p_success(k, M) for k in range(1, M + 1)])


def _slot_ratio(
    pmf: np.ndarray, dpmf: np.ndarray, M: int, L: float, dur: SlotDurations, success: SuccessModel
) -> Tuple[float, float]:
    """Return (S, dS/dx) of the slot-ratio formula for pmf values over k = 0..M."""
    w = _success_weights(M, success)
    num = L * float(np.dot(w, pmf))
    dnum = L * float(np.dot(w, dpmf))

    p_idle = float(pmf[0])
    p_succ = float(pmf[1:].sum())
    p_coll = max(0.0, 1.0 - p_idle - p_succ)
    d_idle = float(dpmf[0])
    d_succ = float(dpmf[1:].sum())
    d_coll = -(d_idle + d_succ)

    den = p_idle * dur.t_idle + p_coll * dur.t_coll + p_succ * dur.t_succ
    dden = d_idle * dur.t_idle + d_coll * dur.t_coll + d_succ * dur.t_succ
    return num / den, (dnum * den - num * dden) / (den * den)


# ---------------------------------------------------------------------------
# Slot durations
# ---------------------------------------------------------------------------

def slot_durations(
    mode: AccessMode, net: NetworkParams, timing: Optional[MacTimingParams] = None
) -> SlotDurations:
    """Idle/collision/success slot lengths for an access mode."""
    payload = net.L / net.R
    if mode is AccessMode.NON_CARRIER_SENSING:
        return SlotDurations.equal(payload)
    if timing is None:
        raise DomainError("timing given for carrier-sensing modes", f"mode = {mode.value}")
    if not timing.sigma < timing.header + payload:
        raise DomainError("sigma < header + L/R", f"sigma = {timing.sigma:g}")

    t = timing
    data = t.header + payload + t.sifs + t.delta + t.ack + t.difs + t.delta
    if mode is AccessMode.BASIC:
        return SlotDurations(
            t_idle=t.sigma,
            t_coll=t.header + payload + t.difs + t.delta,
            t_succ=data,
        )
    if mode is AccessMode.RTS_CTS:
        handshake = t.rts + t.sifs + t.delta + t.cts + t.sifs + t.delta
        return SlotDurations(
            t_idle=t.sigma,
            t_coll=t.rts + t.difs + t.delta,
            t_succ=handshake + data,
        )
    raise DomainError("known access mode", f"mode = {mode!r}")


def _durations_for(dur: DurationsLike, M: int) -> SlotDurations:
    return dur(M) if callable(dur) else dur


# ---------------------------------------------------------------------------
# Throughput
# ---------------------------------------------------------------------------

def _check_pt(p_t: float) -> None:
    if not 0.0 <= p_t <= 1.0:
        raise DomainError("0 <= p_t <= 1", f"p_t = {p_t}")


def throughput_finite(
    net: NetworkParams, p_t: float, dur: SlotDurations, success: SuccessModel = IDEAL
) -> float:
    """S_N(M, p_t) in bits/second for N stations each attempting with probability p_t."""
    _check_pt(p_t)
    pmf, dpmf = _binomial_terms(net.N, p_t, net.M)
    return _slot_ratio(pmf, dpmf, net.M, net.L, dur, success)[0]


def throughput_finite_slope(
    net: NetworkParams, p_t: float, dur: SlotDurations, success: SuccessModel = IDEAL
) -> float:
    """dS_N/dp_t."""
    _check_pt(p_t)
    pmf, dpmf = _binomial_terms(net.N, p_t, net.M)
    return _slot_ratio(pmf, dpmf, net.M, net.L, dur, success)[1]


def throughput_asymptotic(
    M: int, rate: float, dur: SlotDurations, L: float, success: SuccessModel = IDEAL
) -> float:
    """S_inf(M, lambda) in bits/second with Poisson(lambda) attempts per slot."""
    if not rate >= 0:
        raise DomainError("lambda >= 0", f"lambda = {rate}")
    pmf, dpmf = _poisson_terms(rate, M)
    return _slot_ratio(pmf, dpmf, M, L, dur, success)[0]


def throughput_asymptotic_slope(
    M: int, rate: float, dur: SlotDurations, L: float, success: SuccessModel = IDEAL
) -> float:
    """dS_inf/dlambda."""
    if not rate >= 0:
        raise DomainError("lambda >= 0", f"lambda = {rate}")
    pmf, dpmf = _poisson_terms(rate, M)
    return _slot_ratio(pmf, dpmf, M, L, dur, success)[1]


def delivery_ratio(M: int, rate: float) -> float:
    """S_inf / (lambda R) for equal slots and an ideal channel: Pr{X <= M-1}."""
    return float(poisson.cdf(M - 1, rate))


def stationarity_residual(M: int, rate: float) -> float:
    """Pr{X <= M-1} - M Pr{X = M}; zero at the equal-slot optimum."""
    return float(poisson.cdf(M - 1, rate) - M * poisson.pmf(M, rate))


def finite_stationarity_residual(net: NetworkParams, p_t: float) -> float:
    """Relative gap between S_N(M, p_t) and R M (M+1) Pr{X = M+1} (equal slots, ideal channel)."""
    s = throughput_finite(net, p_t, SlotDurations.equal(net.L / net.R))
    target = net.R * net.M * (net.M + 1) * float(binom.pmf(net.M + 1, net.N, p_t))
    return abs(s - target) / max(abs(s), 1e-300)


# ---------------------------------------------------------------------------
# Optimal operating points
# ---------------------------------------------------------------------------

def optimal_attempt_rate(
    M: int, dur: SlotDurations, L: float, success: SuccessModel = IDEAL
) -> AttemptOptimum:
    """Maximize S_inf(M, lambda) over lambda in (0, 2M]."""
    if M < 1:
        raise DomainError("M >= 1", f"M = {M}")
    best = maximize_scalar(
        lambda x: throughput_asymptotic(M, x, dur, L, success),
        RATE_SEARCH_FLOOR,
        2.0 * M,
        geometric=True,
        slope=lambda x: throughput_asymptotic_slope(M, x, dur, L, success),
    )
    if best.at_upper:
        log.warning("optimal attempt rate for M=%d sits at the search edge 2M", M)
    return AttemptOptimum(rate=best.x, throughput=best.value)


def optimal_pt_finite(
    net: NetworkParams, dur: SlotDurations, success: SuccessModel = IDEAL
) -> FiniteOptimum:
    """Maximize S_N(M, p_t) over p_t in (0, 1)."""
    if net.M >= net.N:
        log.info("M=%d >= N=%d: no collisions, optimum is p_t = 1", net.M, net.N)
        return FiniteOptimum(1.0, throughput_finite(net, 1.0, dur, success), degenerate=True)
    best = maximize_scalar(
        lambda p: throughput_finite(net, p, dur, success),
        PT_SEARCH_FLOOR,
        1.0 - PT_SEARCH_FLOOR,
        geometric=True,
        slope=lambda p: throughput_finite_slope(net, p, dur, success),
    )
    return FiniteOptimum(p_t=best.x, throughput=best.value)


def scaling_curve(
    M_max: int,
    dur: DurationsLike,
    net: NetworkParams,
    finite_N: Optional[int] = None,
    success: SuccessModel = IDEAL,
) -> List[ScalingPoint]:
    """Optimal throughput for M = 1..M_max.

    ``dur`` is either fixed or a function of M (frame lengths may grow with M).
    ``net`` supplies L and R; with ``finite_N`` the finite-population optimum is used.
    """
    if M_max < 2:
        raise DomainError("M_max >= 2", f"M_max = {M_max}")
    if finite_N is not None and M_max > finite_N:
        raise DomainError("M_max <= N", f"M_max = {M_max}, N = {finite_N}")

    points = []
    for M in range(1, M_max + 1):
        d = _durations_for(dur, M)
        if finite_N is None:
            attempt, s = optimal_attempt_rate(M, d, net.L, success)
        else:
            fin = NetworkParams(N=finite_N, M=M, R=net.R, L=net.L)
            attempt, s = optimal_pt_finite(fin, d, success)
        points.append(ScalingPoint(M=M, attempt=attempt, throughput=s, per_M=s / M, normalized=s / (M * net.R)))
    return points


# ---------------------------------------------------------------------------
# SIMO baseline
# ---------------------------------------------------------------------------

def simo_rate(R: float, antennas: int, log_base: float = 2.0, bandwidth: float = 1.0) -> float:
    """Per-link rate R + bandwidth * log_base(antennas)."""
    if not log_base > 1:
        raise DomainError("log_base > 1", f"log_base = {log_base}")
    if antennas < 1:
        raise DomainError("M >= 1", f"M = {antennas}")
    return R + bandwidth * math.log(antennas, log_base)


def _simo_network(net: NetworkParams, log_base: float, bandwidth: float) -> NetworkParams:
    return NetworkParams(N=net.N, M=1, R=simo_rate(net.R, net.M, log_base, bandwidth), L=net.L)


def simo_throughput(
    net: NetworkParams,
    p_t: float,
    mode: AccessMode,
    timing: Optional[MacTimingParams] = None,
    log_base: float = 2.0,
    bandwidth: float = 1.0,
) -> float:
    """Single-packet-reception throughput with the rate boosted by net.M antennas."""
    simo = _simo_network(net, log_base, bandwidth)
    return throughput_finite(simo, p_t, slot_durations(mode, simo, timing))


def simo_optimum(
    net: NetworkParams,
    mode: AccessMode,
    timing: Optional[MacTimingParams] = None,
    log_base: float = 2.0,
    bandwidth: float = 1.0,
) -> AttemptOptimum:
    """Large-N optimum of the SIMO baseline; (R + log M) / e for equal slots."""
    simo = _simo_network(net, log_base, bandwidth)
    return optimal_attempt_rate(1, slot_durations(mode, simo, timing), simo.L)


__all__ = [
    "AttemptOptimum",
    "FiniteOptimum",
    "ScalingPoint",
    "attempt_pmf",
    "attempt_support",
    "slot_durations",
    "throughput_finite",
    "throughput_finite_slope",
    "throughput_asymptotic",
    "throughput_asymptotic_slope",
    "delivery_ratio",
    "stationarity_residual",
    "finite_stationarity_residual",
    "optimal_attempt_rate",
    "optimal_pt_finite",
    "scaling_curve",
    "simo_rate",
    "simo_throughput",
    "simo_optimum",
]
