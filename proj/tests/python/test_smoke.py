import math
import os
import pathlib

import pytest

import sfqsim

DATA = pathlib.Path(os.environ.get("SFQSIM_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))


def read(rel):
    return (DATA / rel).read_text()


def test_suffix_values():
    assert sfqsim.parse_value("2.28p") == 2.28e-12
    assert sfqsim.parse_value("bogus") is None


def test_lint_shipped_netlist_is_clean():
    assert sfqsim.lint(read("netlists/mcg.cir")) == []
    diags = sfqsim.lint("R1 1 0 1\nL1 1 2 1p\n.tran 1p 10p\n")
    assert ("error", "dangling-node") in [(d[0], d[1]) for d in diags]


def test_parse_error_is_value_error():
    with pytest.raises(ValueError):
        sfqsim.lint("")


def test_single_junction_pulse_area():
    r = sfqsim.run_transient(read("netlists/jj_single.cir"))
    slips = [t for (j, t, k) in r["events"] if j == "B1"]
    assert len(slips) > 10
    area = r["pulse_areas"]("B1", slips[0], slips[1])
    assert area == pytest.approx(sfqsim.FLUX_QUANTUM, rel=0.01)
    assert len(r["times"]) == len(r["phases"]["B1"])


def test_jtl_output_count():
    r = sfqsim.run_transient(read("netlists/jtl5.cir"), tstop=250e-12)
    counts = {}
    for j, _, _ in r["events"]:
        counts[j] = counts.get(j, 0) + 1
    assert counts == {"B1": 1, "B2": 1, "B3": 1, "B4": 1, "B5": 1}


def test_behavioral_readout_matches_golden():
    out = sfqsim.simulate("ndro", read("schedules/ndro_readout.sched"))
    text = "".join(f"pulse {p} {t:.3f}\n" for p, t in out)
    assert text == read("schedules/ndro_readout.golden")
    assert sfqsim.check_trace("ndro", read("schedules/ndro_readout.sched"), text) == "PASS"


def test_mndro_counts_and_construction_error():
    out = sfqsim.simulate("mndro-rst", "port set\nport clk\npulse set 20\npulse set 60\npulse set 100\npulse clk 200\n")
    assert len(out) == 3
    with pytest.raises(sfqsim.CompositionError):
        sfqsim.simulate("mndro-rst", "port clk\npulse clk 10\n", timings={"mcg": 8.0})


def test_oracle_and_feedback():
    assert sfqsim.run_oracle("ndro", "scrc") == [1, 0]
    assert sfqsim.run_oracle("mndro-dec", "ssssc r c") == [3, 2]
    cells, delay, jj = sfqsim.feedback_path("ndro")
    assert (delay, jj) == (10.5, 12)


def test_margin_sweep_with_python_callback():
    rep = sfqsim.margin_sweep([("a", 2.0), ("b", 1.0)], lambda v: 1.4 <= v[0] <= 3.0 and v[1] < 1.6, threads=2)
    rows = {r["name"]: r for r in rep["parameters"]}
    assert abs(rows["a"]["low"] - 0.7) <= 0.005
    assert abs(rows["a"]["high"] - 1.5) <= 0.005
    assert abs(rows["b"]["high"] - 1.6) <= 0.005
    assert rows["b"]["low_saturated"]
    with pytest.raises(sfqsim.MarginError):
        sfqsim.margin_sweep([("a", 1.0)], lambda v: False)


def test_behavioral_margins():
    rep = sfqsim.behavioral_margins("ndro", [read("schedules/ndro_margin.sched")], keys=["mem"])
    assert rep["parameters"][0]["high"] == pytest.approx(1.9, abs=0.006)


def test_capacity():
    assert round(sfqsim.storage_capacity(7.36e-12 + 3.91e-12, 158e-6), 3) == 0.861
    assert math.isclose(sfqsim.storage_capacity(3 * sfqsim.FLUX_QUANTUM / 1e-4, 1e-4), 3.0)
