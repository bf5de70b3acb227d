"""Slot-indexed Monte-Carlo simulation of saturated stations under exponential backoff.

Every backoff slot, stations whose counter is zero transmit. With k
transmitters the slot is idle (k = 0), a success slot (1 <= k <= M; each packet
survives with the success model's probability) or a collision slot (k > M).
Failed transmitters move up one backoff stage, successful ones return to stage
zero, and every transmitter redraws its counter uniformly from its window.

Only the time pricing of slots depends on the access mode, so one run can be
re-priced for another mode with :meth:`SimStats.priced`.

Random numbers come from numpy's PCG64 generator seeded with ``SimConfig.seed``.
"""
from __future__ import annotations

import heapq
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, SweepError
from .params import AccessMode, BackoffParams, FrameTiming, MacTimingParams, NetworkParams, SlotDurations
from .success import IDEAL, SuccessModel
from .throughput import slot_durations

log = logging.getLogger(__name__)

DEFAULT_WARMUP = 100_000
DEFAULT_MEASURE = 1_000_000
STAGE_CAP = 64
WINDOW_CAP = 2 ** 52
BATCHES = 32
_UNIFORM_BLOCK = 65536


@dataclass(frozen=True)
class SimConfig:
    """One simulation run. ``timing`` defaults to the standard 802.11g airtimes for net.M."""

    net: NetworkParams
    backoff: BackoffParams
    mode: AccessMode = AccessMode.NON_CARRIER_SENSING
    timing: Optional[MacTimingParams] = None
    warmup_slots: int = DEFAULT_WARMUP
    measure_slots: int = DEFAULT_MEASURE
    seed: int = 0
    success: SuccessModel = IDEAL

    def __post_init__(self):
        if self.warmup_slots < 0:
            raise DomainError("warmup_slots >= 0", f"warmup_slots = {self.warmup_slots}")
        if self.measure_slots < 1:
            raise DomainError("measure_slots >= 1", f"measure_slots = {self.measure_slots}")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("0 <= seed < 2**64", f"seed = {self.seed}")

    @property
    def durations(self) -> SlotDurations:
        timing = self.timing if self.timing is not None else FrameTiming().mac_timing(self.net.M)
        return slot_durations(self.mode, self.net, timing)


@dataclass(frozen=True)
class StationState:
    stage: int
    counter: int


@dataclass(frozen=True)
class SimStats:
    """Measured quantities of one run (immutable and picklable)."""

    pt_hat: float
    pc_hat: float
    throughput: float
    slot_counts: Tuple[int, int, int]
    attempts_histogram: Tuple[int, ...]
    attempts: int = 0
    collided: int = 0
    failed: int = 0
    delivered: int = 0
    batch_attempts: Tuple[int, ...] = field(default=(), repr=False)
    batch_slots: Tuple[int, ...] = field(default=(), repr=False)

    @property
    def N(self) -> int:
        return len(self.attempts_histogram) - 1

    @property
    def measure_slots(self) -> int:
        return sum(self.slot_counts)

    @property
    def pf_hat(self) -> float:
        """Failed attempts (collisions and channel losses) over attempts."""
        return self.failed / self.attempts if self.attempts else 0.0

    @property
    def pt_stderr(self) -> float:
        """Standard error of pt_hat by batch means; i.i.d. slots from the histogram as fallback."""
        if len(self.batch_attempts) >= 2:
            pts = np.asarray(self.batch_attempts, float) / (self.N * np.asarray(self.batch_slots, float))
            return float(np.std(pts, ddof=1) / math.sqrt(len(pts)))
        hist = np.asarray(self.attempts_histogram, float)
        k = np.arange(len(hist))
        slots = hist.sum()
        mean = float(np.dot(k, hist) / slots)
        var = float(np.dot((k - mean) ** 2, hist) / slots)
        return math.sqrt(var / slots) / self.N

    def priced(self, dur: SlotDurations, L: float) -> float:
        """Throughput in bits/second with the measured slots priced by ``dur``."""
        idle, succ, coll = self.slot_counts
        elapsed = idle * dur.t_idle + succ * dur.t_succ + coll * dur.t_coll
        return self.delivered * L / elapsed


class SlotSimulator:
    """Event-heap engine: stations are keyed by the slot of their next transmission."""

    def __init__(self, config: SimConfig):
        self.config = config
        self._rng = np.random.default_rng(config.seed)
        self._uniforms: List[float] = []
        self._pos = 0
        self._windows = _stage_windows(config.backoff)
        self._cap_hit = False

        n = config.net.N
        self._stage = [0] * n
        self._heap = [(self._draw(0), i) for i in range(n)]
        heapq.heapify(self._heap)
        self._now = 0

    def _uniform(self) -> float:
        if self._pos == len(self._uniforms):
            self._uniforms = self._rng.random(_UNIFORM_BLOCK).tolist()
            self._pos = 0
        u = self._uniforms[self._pos]
        self._pos += 1
        return u

    def _draw(self, stage: int) -> int:
        return int(self._uniform() * self._windows[stage])

    def snapshot(self) -> List[StationState]:
        """Per-station (stage, counter) at the next unprocessed slot."""
        counters = [0] * len(self._stage)
        for slot, i in self._heap:
            counters[i] = slot - self._now
        return [StationState(stage=s, counter=c) for s, c in zip(self._stage, counters)]

    def _fail(self, i: int) -> None:
        if self._stage[i] < STAGE_CAP:
            self._stage[i] += 1
        elif not self._cap_hit:
            self._cap_hit = True
            log.warning("station %d reached the stage cap %d; window frozen at %d", i, STAGE_CAP, self._windows[-1])

    def run(self) -> SimStats:
        cfg = self.config
        N, M = cfg.net.N, cfg.net.M
        warmup = self._now + cfg.warmup_slots
        total = warmup + cfg.measure_slots
        measure = cfg.measure_slots
        batches = min(BATCHES, measure)
        ideal = cfg.success.is_ideal
        p_success = cfg.success.p_success

        hist = [0] * (N + 1)
        idle = succ = coll = 0
        attempts = collided = failed = delivered = 0
        batch_attempts = [0] * batches
        heap = self._heap

        while heap and heap[0][0] < total:
            t = heap[0][0]
            gap = max(0, t - max(self._now, warmup))
            idle += gap
            hist[0] += gap

            tx = []
            while heap and heap[0][0] == t:
                tx.append(heapq.heappop(heap)[1])
            k = len(tx)
            measured = t >= warmup

            if k <= M:
                lost = 0
                for i in tx:
                    if ideal or self._uniform() < p_success(k, M):
                        self._stage[i] = 0
                    else:
                        lost += 1
                        self._fail(i)
                if measured:
                    succ += 1
                    delivered += k - lost
                    failed += lost
            else:
                for i in tx:
                    self._fail(i)
                if measured:
                    coll += 1
                    collided += k
                    failed += k

            if measured:
                hist[k] += 1
                attempts += k
                batch_attempts[((t - warmup + 1) * batches + measure - 1) // measure - 1] += k

            for i in tx:
                heapq.heappush(heap, (t + 1 + self._draw(self._stage[i]), i))
            self._now = t + 1

        gap = max(0, total - max(self._now, warmup))
        idle += gap
        hist[0] += gap
        self._now = total

        bounds = [j * measure // batches for j in range(batches + 1)]
        stats = SimStats(
            pt_hat=attempts / (N * measure),
            pc_hat=collided / attempts if attempts else 0.0,
            throughput=0.0,
            slot_counts=(idle, succ, coll),
            attempts_histogram=tuple(hist),
            attempts=attempts,
            collided=collided,
            failed=failed,
            delivered=delivered,
            batch_attempts=tuple(batch_attempts),
            batch_slots=tuple(b - a for a, b in zip(bounds, bounds[1:])),
        )
        stats = replace(stats, throughput=stats.priced(cfg.durations, cfg.net.L))
        log.info(
            "sim N=%d M=%d r=%g w0=%d seed=%d: pt=%.6f pc=%.6f S=%.6g bit/s",
            N, M, cfg.backoff.r, cfg.backoff.w0, cfg.seed, stats.pt_hat, stats.pc_hat, stats.throughput,
        )
        return stats


def _stage_windows(b: BackoffParams) -> List[int]:
    windows = []
    for i in range(STAGE_CAP + 1):
        if i * math.log(b.r) + math.log(b.w0) >= 52 * math.log(2):
            windows.append(WINDOW_CAP)
        else:
            windows.append(min(max(1, round(b.r ** i * b.w0)), WINDOW_CAP))
    return windows


def run(config: SimConfig) -> SimStats:
    """Simulate one configuration; deterministic given its seed."""
    return SlotSimulator(config).run()


def _worker_count(max_workers: Optional[int]) -> int:
    if max_workers is not None:
        return max(1, max_workers)
    env = os.environ.get("MPRLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring MPRLAB_THREADS=%r", env)
    return os.cpu_count() or 1


def sweep(
    configs: Sequence[SimConfig],
    *,
    max_workers: Optional[int] = None,
    on_progress: Optional[Callable[[int, int], None]] = None,
) -> List[SimStats]:
    """Run a batch; run i is seeded with ``configs[i].seed ^ i``.

    Runs go to a process pool (the slot loop holds the GIL); with one worker
    they run in this process. Results keep the input order. Failed runs do
    not stop the batch; a :class:`SweepError` carrying the partial results is
    raised at the end. ``on_progress`` is called here, in input order.
    """
    if not configs:
        raise DomainError("configs non-empty")
    seeded = [replace(c, seed=c.seed ^ i) for i, c in enumerate(configs)]
    results: List[Optional[SimStats]] = [None] * len(seeded)
    errors = {}

    def record(i: int, fetch: Callable[[], SimStats]) -> None:
        try:
            results[i] = fetch()
        except Exception as exc:
            log.error("sweep run %d failed: %s", i, exc)
            errors[i] = exc
        if on_progress is not None:
            on_progress(i + 1, len(seeded))

    workers = min(_worker_count(max_workers), len(seeded))
    if workers == 1:
        for i, c in enumerate(seeded):
            record(i, partial(run, c))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run, c) for c in seeded]
            for i, fut in enumerate(futures):
                record(i, fut.result)

    if errors:
        raise SweepError(results, errors)
    return results  # type: ignore[return-value]


__all__ = [
    "SimConfig",
    "StationState",
    "SimStats",
    "SlotSimulator",
    "run",
    "sweep",
    "DEFAULT_WARMUP",
    "DEFAULT_MEASURE",
    "STAGE_CAP",
    "WINDOW_CAP",
]
