"""Exponential backoff: fixed point, asymptotic attempt rate and optimal backoff factor.

A saturated station whose packet fails doubles (more generally multiplies by
``r``) its contention window. For a finite population the per-slot
transmission probability p_t and the conditional collision probability p_c
solve::

    p_t = 2 (1 - r p_c) / (W0 (1 - p_c) + 1 - r p_c)
    p_c = Pr{at least M of the other N-1 stations transmit}

For large N, N p_t tends to lambda with Pr{Poisson(lambda) <= M-1} = 1 - 1/r.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np
from scipy.stats import binom, poisson

from .errors import DomainError, NoSteadyStateError
from .optimize import bisect_root, maximize_scalar
from .params import BackoffParams, NetworkParams, SlotDurations
from .success import IDEAL, SuccessModel
from .throughput import throughput_asymptotic, throughput_asymptotic_slope, throughput_finite

log = logging.getLogger(__name__)

R_MAX = 64.0
BEB_FACTOR = 2.0
RESIDUAL_TOL = 1e-10
_R_FLOOR = 1e-6


@dataclass(frozen=True)
class FixedPoint:
    p_t: float
    p_c: float
    residual: float


@dataclass(frozen=True)
class BackoffOptimum:
    """Optimal backoff factor; unpacks as ``(r, throughput)``."""

    r: float
    throughput: float
    rate: float
    at_r_max: bool = False

    def __iter__(self):
        return iter((self.r, self.throughput))


@dataclass(frozen=True)
class RPoint:
    r: float
    rate: float
    throughput: float


def pt_from_pc(p_c: float, b: BackoffParams) -> float:
    """Transmission probability implied by a collision probability."""
    if not 0.0 <= p_c <= 1.0:
        raise DomainError("0 <= p_c <= 1", f"p_c = {p_c}")
    if b.r * p_c >= 1.0:
        raise NoSteadyStateError("r * p_c < 1", f"r = {b.r:g}, p_c = {p_c:g}")
    q = 1.0 - b.r * p_c
    return 2.0 * q / (b.w0 * (1.0 - p_c) + q)


def pc_from_pt(p_t: float, N: int, M: int) -> float:
    """Probability that M or more of the other N-1 stations transmit."""
    if not 0.0 <= p_t <= 1.0:
        raise DomainError("0 <= p_t <= 1", f"p_t = {p_t}")
    if N < 1 or M < 1:
        raise DomainError("N >= 1 and M >= 1", f"N = {N}, M = {M}")
    if M >= N:
        return 0.0
    return float(binom.sf(M - 1, N - 1, p_t))


def _pt_clamped(p_c: float, b: BackoffParams) -> float:
    # The closed form has a pole past r p_c = 1; the chain has no mass there.
    if b.r * p_c >= 1.0:
        return 0.0
    return pt_from_pc(p_c, b)


def fixed_point_gap(p_t: float, N: int, M: int, b: BackoffParams) -> float:
    """g(p_t) = pt_from_pc(pc_from_pt(p_t)) - p_t, clamped at the steady-state boundary."""
    return _pt_clamped(pc_from_pt(p_t, N, M), b) - p_t


def solve_fixed_point(N: int, M: int, b: BackoffParams) -> FixedPoint:
    """Unique (p_t, p_c) solving both backoff equations, found by bisection on p_t."""
    if N < 2:
        raise DomainError("N >= 2", f"N = {N}")
    if M < 1:
        raise DomainError("M >= 1", f"M = {M}")

    if M >= N:
        p_t = pt_from_pc(0.0, b)
        return FixedPoint(p_t=p_t, p_c=0.0, residual=0.0)

    p_t = bisect_root(lambda p: fixed_point_gap(p, N, M, b), 0.0, 1.0)
    p_c = pc_from_pt(p_t, N, M)
    if b.r * p_c >= 1.0:
        raise NoSteadyStateError("r * p_c < 1", f"fixed point p_c = {p_c:g} for r = {b.r:g}")

    pt_back = pt_from_pc(p_c, b)
    residual = max(abs(pt_back - p_t), abs(pc_from_pt(pt_back, N, M) - p_c))
    log.debug("fixed point N=%d M=%d r=%g w0=%d: p_t=%.12g p_c=%.12g res=%.2e", N, M, b.r, b.w0, p_t, p_c, residual)
    if residual > RESIDUAL_TOL:
        log.warning("fixed point residual %.2e above %.0e (N=%d, M=%d)", residual, RESIDUAL_TOL, N, M)
    return FixedPoint(p_t=p_t, p_c=p_c, residual=residual)


def asymptotic_attempt_rate(M: int, r: float) -> float:
    """lambda solving Pr{Poisson(lambda) <= M-1} = 1 - 1/r."""
    if not r > 1:
        raise DomainError("r > 1", f"r = {r}")
    if M < 1:
        raise DomainError("M >= 1", f"M = {M}")
    target = 1.0 - 1.0 / r

    def g(lam: float) -> float:
        return float(poisson.cdf(M - 1, lam)) - target

    hi = float(max(M, 1))
    while g(hi) > 0:
        hi *= 2.0
        if hi > 1e12:
            raise DomainError("r > 1 + machine epsilon", f"r = {r!r}")
    return bisect_root(g, 0.0, hi)


def _rate_slope_in_r(M: int, r: float, lam: float) -> float:
    # Implicit derivative of the rate equation: -Pois(M-1; lam) dlam = dr / r^2
    return -1.0 / (r * r * max(float(poisson.pmf(M - 1, lam)), 1e-300))


def asymptotic_throughput_of_r(
    M: int, r: float, dur: SlotDurations, L: float, success: SuccessModel = IDEAL
) -> float:
    """Large-N throughput under exponential backoff with factor r."""
    lam = asymptotic_attempt_rate(M, r)
    return throughput_asymptotic(M, lam, dur, L, success)


def throughput_vs_r(
    M: int, dur: SlotDurations, L: float, r_values: Iterable[float], success: SuccessModel = IDEAL
) -> List[RPoint]:
    points = []
    for r in r_values:
        lam = asymptotic_attempt_rate(M, r)
        points.append(RPoint(r=float(r), rate=lam, throughput=throughput_asymptotic(M, lam, dur, L, success)))
    return points


def optimal_backoff_factor(
    M: int,
    dur: SlotDurations,
    L: float,
    *,
    r_max: float = R_MAX,
    success: SuccessModel = IDEAL,
) -> BackoffOptimum:
    """Maximize the large-N throughput over r in (1, r_max]."""
    if M < 1:
        raise DomainError("M >= 1", f"M = {M}")
    if not r_max > 1:
        raise DomainError("r_max > 1", f"r_max = {r_max}")

    # Searched over u = r - 1 so the steep side near r = 1 gets grid points.
    def f(u: float) -> float:
        return asymptotic_throughput_of_r(M, 1.0 + u, dur, L, success)

    def slope(u: float) -> float:
        r = 1.0 + u
        lam = asymptotic_attempt_rate(M, r)
        return throughput_asymptotic_slope(M, lam, dur, L, success) * _rate_slope_in_r(M, r, lam)

    u_max = r_max - 1.0
    best = maximize_scalar(f, min(_R_FLOOR, u_max / 2), u_max, xtol=1e-9, geometric=True, slope=slope)
    r_star = 1.0 + best.x
    if best.at_upper:
        log.warning("optimal r for M=%d sits at r_max=%g; widen the bracket", M, r_max)
    return BackoffOptimum(
        r=r_star,
        throughput=best.value,
        rate=asymptotic_attempt_rate(M, r_star),
        at_r_max=best.at_upper,
    )


def beb_efficiency(
    M: int,
    dur: SlotDurations,
    L: float,
    *,
    r_max: float = R_MAX,
    success: SuccessModel = IDEAL,
) -> float:
    """Throughput of binary exponential backoff (r = 2) relative to the optimal r."""
    best = optimal_backoff_factor(M, dur, L, r_max=r_max, success=success)
    beb = asymptotic_throughput_of_r(M, BEB_FACTOR, dur, L, success)
    return float(np.clip(beb / best.throughput, 0.0, 1.0))


def fixed_point_throughput(
    net: NetworkParams, b: BackoffParams, dur: SlotDurations, success: SuccessModel = IDEAL
) -> Tuple[FixedPoint, float]:
    """Finite-population throughput at the backoff fixed point."""
    fp = solve_fixed_point(net.N, net.M, b)
    return fp, throughput_finite(net, fp.p_t, dur, success)


__all__ = [
    "FixedPoint",
    "BackoffOptimum",
    "RPoint",
    "R_MAX",
    "BEB_FACTOR",
    "pt_from_pc",
    "pc_from_pt",
    "fixed_point_gap",
    "solve_fixed_point",
    "asymptotic_attempt_rate",
    "asymptotic_throughput_of_r",
    "throughput_vs_r",
    "optimal_backoff_factor",
    "beb_efficiency",
    "fixed_point_throughput",
]
