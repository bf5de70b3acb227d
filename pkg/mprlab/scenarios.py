"""Scenario runners: each kind evaluates its grid and yields one CSV table.

Every CSV starts with a ``#`` comment line holding the resolved scenario as
JSON (sorted keys, no timestamp), so re-running a config reproduces the file
byte for byte.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Sequence, TextIO

from .backoff import (
    BEB_FACTOR,
    asymptotic_attempt_rate,
    asymptotic_throughput_of_r,
    fixed_point_throughput,
    optimal_backoff_factor,
)
from .blind import blind_detect_exhaustive, blind_detect_ilsp
from .config import Scenario, make_scenario
from .errors import RankDeficiencyError
from .params import AccessMode, BackoffParams, NetworkParams, SlotDurations
from .phy import ALPHABETS, mmse_detect, synthesize, zf_detect
from .progress import SweepProgress
from .simulator import SimConfig, sweep
from .success import SuccessModel, success_model
from .throughput import (
    optimal_attempt_rate,
    scaling_curve,
    simo_optimum,
    slot_durations,
)
from .utils import format_prob, format_sig

log = logging.getLogger(__name__)

HEADERS: Dict[str, Sequence[str]] = {
    "scaling": ("M", "lambda_star", "S_star_bps", "S_per_M_norm"),
    "fixed-point": (
        "N", "M", "r", "W0", "pt_analytic", "pc_analytic", "pt_sim", "pc_sim", "thr_analytic_bps", "thr_sim_bps",
    ),
    "optimal-r": ("M", "mode", "r_star", "S_star_bps", "S_beb_bps", "beb_ratio"),
    "beb-efficiency": ("M", "mode", "r_star", "S_star_bps", "S_beb_bps", "beb_ratio"),
    "simulate": (
        "N", "M", "r", "W0", "mode", "seed", "pt_hat", "pc_hat", "thr_bps",
        "idle_slots", "success_slots", "collision_slots",
    ),
    "simo-compare": ("M", "S_simo_bps", "S_simo_per_M", "S_mpr_bps", "S_mpr_per_M"),
    "phy-demo": ("detector", "K", "M_ant", "snr_db", "N_sym", "trials", "symbol_error_rate", "recovery_rate"),
    "r-sweep": ("M", "mode", "r", "lambda", "S_bps", "S_norm"),
    "throughput-vs-n": ("N", "M", "r", "W0", "mode", "pt_analytic", "Npt_analytic", "thr_analytic_bps", "thr_norm"),
    "table1": ("name", "value"),
}

Progress = Callable[[int, int], None]


@dataclass
class Table:
    header: Sequence[str]
    rows: List[List[str]]


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _success(s: Scenario) -> SuccessModel:
    p = s.params
    return success_model(p["success"], p["epsilon"], p["spread"])


def _network(s: Scenario, N: int = 1, M: int = 1) -> NetworkParams:
    return s.timing.network(N=N, M=M)


def _durations(s: Scenario, mode: AccessMode, M: int, net: NetworkParams) -> SlotDurations:
    timing = s.timing.mac_timing(M, bool(s.params.get("mpr_frames", False)))
    return slot_durations(mode, net, timing)


def _noop(done: int, total: int) -> None:
    pass


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------

def run_scaling(s: Scenario, progress: Progress = _noop) -> Table:
    p = s.params
    N = p["finite_n"] or None
    net = _network(s, N=N or 1)
    wanted = set(p["m"])
    points = scaling_curve(
        max(p["m"]), lambda M: _durations(s, p["mode"], M, net), net, finite_N=N, success=_success(s)
    )
    rows = []
    for pt in points:
        if pt.M in wanted:
            attempt = pt.attempt * N if N else pt.attempt
            rows.append([str(pt.M), format_prob(attempt), format_sig(pt.throughput), format_prob(pt.normalized)])
        progress(pt.M, len(points))
    return Table(HEADERS["scaling"], rows)


def run_fixed_point(s: Scenario, progress: Progress = _noop) -> Table:
    p = s.params
    success = _success(s)
    grid = list(itertools.product(p["n"], p["m"], p["r"], p["w0"]))
    analytic = []
    configs = []
    for N, M, r, w0 in grid:
        net = _network(s, N=N, M=M)
        b = BackoffParams(r=r, w0=w0)
        dur = _durations(s, p["mode"], M, net)
        fp, thr = fixed_point_throughput(net, b, dur, success)
        analytic.append((fp, thr))
        configs.append(
            SimConfig(
                net=net,
                backoff=b,
                mode=p["mode"],
                timing=s.timing.mac_timing(M),
                warmup_slots=p["warmup"],
                measure_slots=p["measure"],
                seed=s.seed,
                success=success,
            )
        )

    sims = sweep(configs, on_progress=progress) if p["simulate"] else [None] * len(grid)
    rows = []
    for (N, M, r, w0), (fp, thr), sim in zip(grid, analytic, sims):
        rows.append([
            str(N), str(M), format_sig(r), str(w0),
            format_prob(fp.p_t), format_prob(fp.p_c),
            format_prob(sim.pt_hat) if sim else "",
            format_prob(sim.pc_hat) if sim else "",
            format_sig(thr),
            format_sig(sim.throughput) if sim else "",
        ])
    return Table(HEADERS["fixed-point"], rows)


def run_optimal_r(s: Scenario, progress: Progress = _noop) -> Table:
    p = s.params
    success = _success(s)
    grid = list(itertools.product(p["mode"], p["m"]))
    rows = []
    for i, (mode, M) in enumerate(grid, 1):
        net = _network(s, M=M)
        dur = _durations(s, mode, M, net)
        best = optimal_backoff_factor(M, dur, net.L, r_max=p["r_max"], success=success)
        beb = asymptotic_throughput_of_r(M, BEB_FACTOR, dur, net.L, success)
        rows.append([
            str(M), mode.value, format_prob(best.r), format_sig(best.throughput), format_sig(beb),
            format_prob(min(1.0, beb / best.throughput)),
        ])
        progress(i, len(grid))
    return Table(HEADERS[s.kind], rows)


def run_simulate(s: Scenario, progress: Progress = _noop) -> Table:
    p = s.params
    success = _success(s)
    grid = list(itertools.product(p["n"], p["m"], p["r"], p["w0"]))
    configs = [
        SimConfig(
            net=_network(s, N=N, M=M),
            backoff=BackoffParams(r=r, w0=w0),
            mode=p["mode"][0],
            timing=s.timing.mac_timing(M),
            warmup_slots=p["warmup"],
            measure_slots=p["measure"],
            seed=s.seed,
            success=success,
        )
        for N, M, r, w0 in grid
    ]
    stats = sweep(configs, on_progress=progress)
    rows = []
    for i, ((N, M, r, w0), cfg, st) in enumerate(zip(grid, configs, stats)):
        idle, succ, coll = st.slot_counts
        for mode in p["mode"]:
            thr = st.priced(_durations(s, mode, M, cfg.net), cfg.net.L)
            rows.append([
                str(N), str(M), format_sig(r), str(w0), mode.value, str(cfg.seed ^ i),
                format_prob(st.pt_hat), format_prob(st.pc_hat), format_sig(thr),
                str(idle), str(succ), str(coll),
            ])
    return Table(HEADERS["simulate"], rows)


def run_simo_compare(s: Scenario, progress: Progress = _noop) -> Table:
    p = s.params
    rows = []
    for i, M in enumerate(p["m"], 1):
        net = _network(s, M=M)
        simo = simo_optimum(net, p["mode"], s.timing.mac_timing(1), p["log_base"], p["bandwidth"])
        mpr = optimal_attempt_rate(M, _durations(s, p["mode"], M, net), net.L)
        rows.append([
            str(M), format_sig(simo.throughput), format_sig(simo.throughput / M),
            format_sig(mpr.throughput), format_sig(mpr.throughput / M),
        ])
        progress(i, len(p["m"]))
    return Table(HEADERS["simo-compare"], rows)


def _phy_trial(det: str, block, p: Dict, init_seed: List[int]) -> int:
    alph = block.alphabet
    if det == "zf":
        return zf_detect(block).symbol_errors
    if det == "mmse":
        return mmse_detect(block).symbol_errors
    if det == "exhaustive":
        return blind_detect_exhaustive(block.Y, block.K, alph, truth=block.X).symbol_errors
    return blind_detect_ilsp(
        block.Y, block.K, alph, p["max_iter"], init_seed, restarts=p["restarts"], truth=block.X
    ).symbol_errors


def run_phy_demo(s: Scenario, progress: Progress = _noop) -> Table:
    p = s.params
    alph = ALPHABETS[p["alphabet"]]
    grid = list(itertools.product(p["detector"], p["k"], p["m_ant"], enumerate(p["snr_db"])))
    rows = []
    for i, (det, K, M_ant, (j, snr)) in enumerate(grid, 1):
        errors = recovered = 0
        for t in range(p["trials"]):
            # Same blocks for every detector so the comparison is paired.
            block = synthesize(M_ant, K, p["n_sym"], alph, snr, seed=[s.seed, K, M_ant, j, t])
            try:
                e = _phy_trial(det, block, p, [s.seed, t])
            except RankDeficiencyError as exc:
                log.warning("%s trial %d: %s", det, t, exc)
                e = K * p["n_sym"]
            errors += e
            recovered += e == 0
        total = p["trials"] * K * p["n_sym"]
        rows.append([
            det, str(K), str(M_ant), format_sig(snr), str(p["n_sym"]), str(p["trials"]),
            format_prob(errors / total), format_prob(recovered / p["trials"]),
        ])
        progress(i, len(grid))
    return Table(HEADERS["phy-demo"], rows)


def run_r_sweep(s: Scenario, progress: Progress = _noop) -> Table:
    p = s.params
    success = _success(s)
    grid = list(itertools.product(p["mode"], p["m"], p["r"]))
    rows = []
    for i, (mode, M, r) in enumerate(grid, 1):
        net = _network(s, M=M)
        lam = asymptotic_attempt_rate(M, r)
        thr = asymptotic_throughput_of_r(M, r, _durations(s, mode, M, net), net.L, success)
        rows.append([str(M), mode.value, format_sig(r), format_prob(lam), format_sig(thr), format_prob(thr / net.R)])
        progress(i, len(grid))
    return Table(HEADERS["r-sweep"], rows)


def run_throughput_vs_n(s: Scenario, progress: Progress = _noop) -> Table:
    p = s.params
    success = _success(s)
    grid = list(itertools.product(p["mode"], p["m"], p["r"], p["w0"], p["n"]))
    rows = []
    for i, (mode, M, r, w0, N) in enumerate(grid, 1):
        net = _network(s, N=N, M=M)
        fp, thr = fixed_point_throughput(net, BackoffParams(r=r, w0=w0), _durations(s, mode, M, net), success)
        rows.append([
            str(N), str(M), format_sig(r), str(w0), mode.value,
            format_prob(fp.p_t), format_prob(N * fp.p_t), format_sig(thr), format_prob(thr / net.R),
        ])
        progress(i, len(grid))
    return Table(HEADERS["throughput-vs-n"], rows)


def table1(s: Optional[Scenario] = None) -> Table:
    """Resolved frame timing as name/value pairs (seconds and bits)."""
    timing = s.timing if s is not None else Scenario(kind="table1", params={}).timing
    mac = timing.mac_timing()
    values = [
        ("payload_bits", timing.payload_bits),
        ("mac_header_bits", timing.mac_header_bits),
        ("phy_overhead_s", timing.phy_overhead),
        ("ack_bits", timing.ack_bits),
        ("rts_bits", timing.rts_bits),
        ("cts_bits", timing.cts_bits),
        ("basic_rate_bps", timing.basic_rate),
        ("data_rate_bps", timing.data_rate),
        ("slot_time_s", mac.sigma),
        ("sifs_s", mac.sifs),
        ("difs_s", mac.difs),
        ("delta_s", mac.delta),
        ("header_s", mac.header),
        ("ack_s", mac.ack),
        ("rts_s", mac.rts),
        ("cts_s", mac.cts),
    ]
    return Table(HEADERS["table1"], [[name, format_sig(value)] for name, value in values])


RUNNERS: Dict[str, Callable[[Scenario, Progress], Table]] = {
    "scaling": run_scaling,
    "fixed-point": run_fixed_point,
    "optimal-r": run_optimal_r,
    "beb-efficiency": run_optimal_r,
    "simulate": run_simulate,
    "simo-compare": run_simo_compare,
    "phy-demo": run_phy_demo,
    "r-sweep": run_r_sweep,
    "throughput-vs-n": run_throughput_vs_n,
}


# ---------------------------------------------------------------------------
# Figure presets
# ---------------------------------------------------------------------------

PRESETS: Dict[str, tuple] = {
    "fig1": ("scaling", {"mode": "aloha", "M": "1..20"}),
    "fig2": ("scaling", {"mode": "basic", "M": "1..20"}),
    "fig3": ("scaling", {"mode": "rts-cts", "M": "1..20"}),
    "fig5": ("throughput-vs-n", {"mode": "aloha", "M": "1,2,4", "W0": "16", "N": "10,20,50,100,200,500,1000,2000"}),
    "fig6": ("throughput-vs-n", {"mode": "aloha", "M": "1,2,4", "W0": "16,32"}),
    "fig7": ("throughput-vs-n", {"mode": "basic", "M": "1,2,4", "W0": "16,32"}),
    "fig8": ("r-sweep", {"mode": "aloha", "M": "1,2,4,8"}),
    "fig9": ("r-sweep", {"mode": "basic", "M": "1,2,4,8"}),
    "fig10": ("beb-efficiency", {"mode": "aloha,basic,rts-cts", "M": "1..15"}),
    "fig11": ("optimal-r", {"mode": "aloha,basic,rts-cts", "M": "1..15"}),
}
FIGURE_IDS = tuple(PRESETS) + ("table1",)


def preset(figure_id: str, *, seed: int, out: Optional[str]) -> Scenario:
    kind, raw = PRESETS[figure_id]
    return make_scenario(kind, raw, name=figure_id, seed=seed, out=out)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def compute(s: Scenario, progress: Progress = _noop) -> Table:
    log.info("scenario %s (%s) started", s.label, s.kind)
    table = table1(s) if s.kind == "table1" else RUNNERS[s.kind](s, progress)
    log.info("scenario %s finished: %d rows", s.label, len(table.rows))
    return table


def write_csv(s: Scenario, table: Table, fh: TextIO) -> None:
    resolved = s.resolved()
    fh.write("# config: " + json.dumps(resolved, sort_keys=True) + f" seed={s.seed}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(table.header)
    writer.writerows(table.rows)


def render_csv(s: Scenario, table: Table) -> str:
    buf = io.StringIO()
    write_csv(s, table, buf)
    return buf.getvalue()


def run_scenario(s: Scenario, *, show_progress: bool = True) -> Optional[Path]:
    """Compute a scenario and write its CSV (stdout when it has no output path)."""
    if show_progress:
        with SweepProgress(s.label, 1) as bar:
            table = compute(s, bar.update)
    else:
        table = compute(s)
    if s.output_path is None:
        write_csv(s, table, sys.stdout)
        return None
    s.output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(s.output_path, "w", encoding="utf-8", newline="") as fh:
        write_csv(s, table, fh)
    log.info("wrote %s", s.output_path)
    return s.output_path


def iter_rows(s: Scenario) -> Iterator[Dict[str, str]]:
    """Computed rows as dicts keyed by header name."""
    table = compute(s)
    for row in table.rows:
        yield dict(zip(table.header, row))


__all__ = [
    "HEADERS",
    "PRESETS",
    "FIGURE_IDS",
    "Table",
    "RUNNERS",
    "compute",
    "preset",
    "render_csv",
    "run_scenario",
    "table1",
    "write_csv",
    "iter_rows",
]
