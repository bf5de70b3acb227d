import csv
import io
import math

import pytest

import mprlab.scenarios as scenarios

from mprlab.config import make_scenario
from mprlab.scenarios import HEADERS, FIGURE_IDS, compute, iter_rows, preset, render_csv, run_scenario, table1


def body(text):
    lines = text.splitlines()
    assert lines[0].startswith("# config: ")
    return list(csv.reader(io.StringIO("\n".join(lines[1:]))))


def test_scaling_rows():
    s = make_scenario("scaling", {"M": "1..3"}, out="-")
    rows = list(iter_rows(s))
    assert [r["M"] for r in rows] == ["1", "2", "3"]
    assert float(rows[0]["lambda_star"]) == pytest.approx(1.0, abs=1e-6)
    assert float(rows[0]["S_per_M_norm"]) == pytest.approx(math.exp(-1.0), abs=1e-6)
    assert float(rows[0]["S_star_bps"]) == pytest.approx(54e6 * math.exp(-1.0), rel=1e-5)


def test_scaling_finite_population_column():
    s = make_scenario("scaling", {"M": "1..2", "finite_N": "10"}, out="-")
    rows = list(iter_rows(s))
    assert float(rows[0]["lambda_star"]) == pytest.approx(1.0, abs=1e-5)


def test_csv_header_and_determinism():
    s = make_scenario("scaling", {"M": "1..2"}, seed=4, out="-")
    first = render_csv(s, compute(s))
    second = render_csv(s, compute(s))
    assert first == second
    assert body(first)[0] == ["M", "lambda_star", "S_star_bps", "S_per_M_norm"]
    assert '"seed": 4' in first.splitlines()[0]


def test_fixed_point_with_simulation():
    s = make_scenario(
        "fixed-point", {"N": "20", "M": "2", "warmup": "20000", "measure": "200000"}, out="-"
    )
    (row,) = iter_rows(s)
    assert list(row) == list(HEADERS["fixed-point"])
    assert float(row["pt_sim"]) == pytest.approx(float(row["pt_analytic"]), rel=0.03)
    assert float(row["thr_sim_bps"]) == pytest.approx(float(row["thr_analytic_bps"]), rel=0.03)


def test_fixed_point_analytic_only():
    s = make_scenario("fixed-point", {"N": "50", "simulate": "no"}, out="-")
    (row,) = iter_rows(s)
    assert row["pt_sim"] == ""
    assert 0 < float(row["pt_analytic"]) < 2 / 17


def test_simulate_prices_every_mode():
    s = make_scenario("simulate", {"N": "10", "warmup": "1000", "measure": "20000"}, seed=3, out="-")
    rows = list(iter_rows(s))
    assert [r["mode"] for r in rows] == ["aloha", "basic", "rts-cts"]
    assert len({r["pt_hat"] for r in rows}) == 1
    assert rows[0]["seed"] == "3"
    assert all(float(r["thr_bps"]) > 0 for r in rows)
    assert len({r["thr_bps"] for r in rows}) == 3


def test_beb_efficiency_rows():
    s = make_scenario("beb-efficiency", {"M": "1", "mode": "aloha"}, out="-")
    (row,) = iter_rows(s)
    assert float(row["beb_ratio"]) == pytest.approx(0.9421, abs=1e-4)
    assert float(row["r_star"]) == pytest.approx(math.e / (math.e - 1), abs=1e-6)


def test_r_sweep_normalization():
    s = make_scenario("r-sweep", {"M": "1", "r": "2"}, out="-")
    (row,) = iter_rows(s)
    assert float(row["lambda"]) == pytest.approx(math.log(2), abs=1e-8)
    assert float(row["S_norm"]) == pytest.approx(math.log(2) / 2, abs=1e-8)


def test_throughput_vs_n_rows():
    s = make_scenario("throughput-vs-n", {"N": "10,100", "W0": "16"}, out="-")
    rows = list(iter_rows(s))
    assert [r["N"] for r in rows] == ["10", "100"]
    assert float(rows[1]["Npt_analytic"]) > float(rows[0]["Npt_analytic"])


def test_simo_compare_single_antenna():
    s = make_scenario("simo-compare", {"M": "1..3"}, out="-")
    rows = list(iter_rows(s))
    assert rows[0]["S_simo_bps"] == rows[0]["S_mpr_bps"]
    assert float(rows[2]["S_mpr_per_M"]) > float(rows[2]["S_simo_per_M"])


def test_phy_demo_rows():
    s = make_scenario(
        "phy-demo", {"detector": "zf,mmse,exhaustive,ilsp", "N_sym": "6", "trials": "4", "snr_db": "30"}, out="-"
    )
    rows = list(iter_rows(s))
    assert [r["detector"] for r in rows] == ["zf", "mmse", "exhaustive", "ilsp"]
    for r in rows:
        assert 0.0 <= float(r["symbol_error_rate"]) <= 1.0
        assert 0.0 <= float(r["recovery_rate"]) <= 1.0


def test_table1():
    values = {name: value for name, value in table1().rows}
    assert values["payload_bits"] == "8184"
    assert values["slot_time_s"] == "9e-06"
    assert values["difs_s"] == "2.8e-05"


def test_presets():
    assert "fig1" in FIGURE_IDS and "table1" in FIGURE_IDS
    s = preset("fig1", seed=1, out="out")
    assert s.kind == "scaling"
    assert s.params["m"] == list(range(1, 21))
    assert str(s.output_path).endswith("scaling-fig1.csv")
    assert preset("fig10", seed=1, out="-").kind == "beb-efficiency"


def test_run_scenario_to_file(tmp_path):
    s = make_scenario("r-sweep", {"M": "1,2", "r": "2,4"}, out=str(tmp_path))
    path = run_scenario(s, show_progress=False)
    assert path == tmp_path / "r-sweep.csv"
    rows = body(path.read_text(encoding="utf-8"))
    assert rows[0] == list(HEADERS["r-sweep"])
    assert len(rows) == 5


def test_run_scenario_to_stdout(capsys):
    s = make_scenario("scaling", {"M": "1..2"}, out="-")
    assert run_scenario(s, show_progress=False) is None
    out = capsys.readouterr().out
    assert "M,lambda_star,S_star_bps,S_per_M_norm" in out


class RecordingProgress:
    opened = []

    def __init__(self, label, total):
        self.opened.append(label)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return None

    def update(self, done, total=None):
        pass


@pytest.mark.parametrize("show, expected", [(False, []), (True, ["scaling"])])
def test_progress_display_follows_flag(monkeypatch, capsys, show, expected):
    monkeypatch.setattr(RecordingProgress, "opened", [])
    monkeypatch.setattr(scenarios, "SweepProgress", RecordingProgress)
    run_scenario(make_scenario("scaling", {"M": "1..2"}, out="-"), show_progress=show)
    assert RecordingProgress.opened == expected
    assert "S_star_bps" in capsys.readouterr().out
