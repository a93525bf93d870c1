"""Tests for the qpolar command line."""

import csv
import io
import json
import os
import tempfile

import pytest

from operators import OperatorGraph, graph_to_json
from qpolar import (
    MalformedInput, Settings, build_parser, get_command, commands, load_operator,
    parse_params, parse_point, parse_range, run_cli, save_operator,
)
from scalar_lp import EXACT, DimensionMismatch
from scenarios import generate_scenario


def run(argv):
    out = io.StringIO()
    code = run_cli(argv, out)
    text = out.getvalue()
    return code, json.loads(text) if text else None


def write_operator(tmpdir, T, name="op.json"):
    path = os.path.join(tmpdir, name)
    save_operator(T, path)
    return path


# --- Settings ---

def test_settings_from_env(monkeypatch):
    """Verify QPOLAR_* variables are read."""
    monkeypatch.setenv("QPOLAR_MODE", "float")
    monkeypatch.setenv("QPOLAR_EPS", "1e-6")
    monkeypatch.setenv("QPOLAR_LOG_LEVEL", "debug")
    monkeypatch.delenv("QPOLAR_MAX_DENOMINATOR", raising=False)
    s = Settings.from_env()
    assert s.mode == "float"
    assert s.eps == 1e-6
    assert s.log_level == "DEBUG"
    assert s.field.eps == 1e-6


def test_settings_reject_bad_env(monkeypatch):
    """Verify unparsable settings raise MalformedInput."""
    monkeypatch.setenv("QPOLAR_EPS", "tiny")
    with pytest.raises(MalformedInput):
        Settings.from_env()
    monkeypatch.setenv("QPOLAR_EPS", "1e-9")
    monkeypatch.setenv("QPOLAR_LOG_LEVEL", "chatty")
    with pytest.raises(MalformedInput):
        Settings.from_env()


def test_max_denominator_forces_exact_mode():
    """Verify a denominator bound overrides a float mode."""
    args = build_parser().parse_args(["--mode", "float", "--max-denominator", "10", "check", "--scenario", "x0"])
    s = Settings().apply_args(args)
    assert s.mode == "exact"
    assert s.max_denominator == 10


# --- Parsing helpers ---

def test_parse_point():
    """Verify comma separated points with rational entries."""
    assert parse_point("1/2,3", EXACT) == (EXACT.coerce("1/2"), 3)
    with pytest.raises(DimensionMismatch):
        parse_point("1,2", EXACT, 1)
    with pytest.raises(MalformedInput):
        parse_point("a", EXACT)


def test_parse_range():
    """Verify lo:hi:step expands to a product grid."""
    assert parse_range("0:1:0.5", EXACT, 1) == [(0,), (EXACT.coerce("1/2"),), (1,)]
    assert len(parse_range("0:1:1", EXACT, 2)) == 4
    with pytest.raises(MalformedInput):
        parse_range("1:0:1", EXACT, 1)
    with pytest.raises(MalformedInput):
        parse_range("0:1", EXACT, 1)


def test_parse_params():
    """Verify values are read as JSON when possible."""
    assert parse_params(["m=3", "radii=[0.5, 1]", "x=1/2"]) == {"m": 3, "radii": [0.5, 1], "x": "1/2"}


def test_get_command():
    """Verify commands are found by name."""
    assert get_command(commands, "mvip").name == "mvip"
    assert get_command(commands, "nonexistent") is None


# --- Operator files ---

def test_operator_json_round_trip_is_byte_identical():
    """Verify save, load and save again reproduces the same bytes."""
    T = generate_scenario("step").graph
    with tempfile.TemporaryDirectory() as tmpdir:
        first = write_operator(tmpdir, T, "a.json")
        again = load_operator(first, Settings())
        second = write_operator(tmpdir, again, "b.json")
        with open(first, "rb") as a, open(second, "rb") as b:
            assert a.read() == b.read()
    assert again.pairs == T.pairs


def test_max_denominator_snaps_float_input():
    """Verify float entries are snapped to nearby rationals."""
    with tempfile.TemporaryDirectory() as tmpdir:
        path = os.path.join(tmpdir, "op.json")
        with open(path, "w") as f:
            json.dump({"dim": 1, "pairs": [{"x": [0.333333], "xstar": [1]}]}, f)
        code, result = run(["--max-denominator", "10", "polar", "--operator", path, "--at", "1"])
    assert code == 0
    assert result["v_set"] == [["1/3"]]


# --- Commands ---

def test_scenario_verify_exits_zero():
    """Verify the integer slice claims all hold from the command line."""
    code, result = run(["scenario", "z-slice", "--verify"])
    assert code == 0
    assert result["ok"] is True
    assert all(o["ok"] for o in result["outcomes"])


def test_scenario_emits_operator():
    """Verify the scenario JSON carries the operator and grid."""
    code, result = run(["scenario", "z-slice", "--param", "m=1"])
    assert code == 0
    assert result["params"] == {"m": 1}
    assert result["operator"]["pairs"][0] == {"x": ["-1"], "xstar": ["1"]}
    assert result["constraints"] is None


def test_check_reports_witness():
    """Verify the check command names the violating pairs."""
    T = OperatorGraph(1, [((0,), (1,)), ((1,), (-1,))])
    with tempfile.TemporaryDirectory() as tmpdir:
        code, result = run(["check", "--operator", write_operator(tmpdir, T)])
    assert code == 0
    assert result["quasimonotone"] is False
    assert result["quasimonotone_witness"] == [{"x": ["0"], "xstar": ["1"]}, {"x": ["1"], "xstar": ["-1"]}]


def test_polar_at_half():
    """Verify the fibre of the integer slice at 1/2 is the ray through 1."""
    code, result = run(["polar", "--scenario", "z-slice", "--at", "1/2"])
    assert code == 0
    assert result["extreme_rays"] == [["1"]]


def test_e_set_command():
    """Verify E_T of the integer slice is a halfline."""
    code, result = run(["e-set", "--scenario", "z-slice"])
    assert code == 0
    assert result["classification"]["kind"] == "larger"


def test_certify_command_replays():
    """Verify certificates from the command line carry a replay flag."""
    code, result = run(["certify", "maximal", "--scenario", "z-slice"])
    assert code == 0
    assert result["verdict"] == "exactly_false"
    assert result["witness"] == [{"x": ["1/2"], "xstar": ["1"]}]
    assert result["replayed"] is True
    code, result = run(["certify", "bipolar", "--scenario", "z-slice", "--pair", "0;-1"])
    assert result["verdict"] == "refuted_with_witness"
    assert result["replayed"] is True


def test_mvip_step_command():
    """Verify the step sample over [1, 2] gives all of K and {1} for the polar."""
    with tempfile.TemporaryDirectory() as tmpdir:
        table = os.path.join(tmpdir, "minty.csv")
        code, result = run(["mvip", "--scenario", "step", "--k-grid", "1:2:0.25", "--csv", table])
        with open(table, newline="") as f:
            rows = list(csv.DictReader(f))
    assert code == 0
    assert result["minty"] == [["1"], ["5/4"], ["3/2"], ["7/4"], ["2"]]
    assert result["minty_polar"] == [["1"]]
    assert result["strict"] is True
    assert "inclusion_witness" not in result
    assert [r["minty_polar"] for r in rows] == ["1", "0", "0", "0", "0"]


def test_plot_step_polar_region():
    """Verify the step polar raster matches {x x* >= 0} on at least 99% of cells."""
    with tempfile.TemporaryDirectory() as tmpdir:
        svg = os.path.join(tmpdir, "step.svg")
        code, result = run(["plot", "--scenario", "step", "--out", svg, "--resolution", "40"])
        assert code == 0
        assert os.path.getsize(svg) > 0
        with open(result["csv"], newline="") as f:
            rows = list(csv.DictReader(f))
    assert len(rows) == 1600
    agree = sum(int(r["member"]) == int(float(r["x"]) * float(r["xstar"]) >= 0) for r in rows)
    assert agree >= 0.99 * len(rows)


# --- Exit codes ---

def test_bad_input_exits_two():
    """Verify malformed input, unknown scenarios and dimension errors exit 2."""
    assert run(["polar", "--scenario", "z-slice", "--at", "1,2"])[0] == 2
    assert run(["scenario", "bowtie"])[0] == 2
    assert run(["check", "--operator", "/nonexistent/op.json"])[0] == 2
    assert run(["check"])[0] == 2
    assert run(["certify"])[0] == 2


def test_malformed_documents_exit_two():
    """Verify bad operator, grid and constraint documents exit 2 without a traceback."""
    with tempfile.TemporaryDirectory() as tmpdir:
        documents = {
            "op.json": {"dim": "one", "pairs": []},
            "grid.json": {"dim": 1, "base_points": []},
            "k.json": {"dim": 1, "points": []},
            "pairs.json": {"dim": 1, "pairs": [{"x": ["1"]}]},
        }
        paths = {}
        for name, data in documents.items():
            paths[name] = os.path.join(tmpdir, name)
            with open(paths[name], "w") as f:
                json.dump(data, f)
        assert run(["check", "--operator", paths["op.json"]])[0] == 2
        assert run(["check", "--operator", paths["pairs.json"]])[0] == 2
        assert run(["certify", "maximal", "--scenario", "z-slice", "--grid", paths["grid.json"]])[0] == 2
        assert run(["mvip", "--scenario", "step", "--constraints", paths["k.json"]])[0] == 2


def test_mode_mismatch_exits_two():
    """Verify a float operator file is refused in an exact session."""
    T = generate_scenario("identity", n=4, radii=(1.0,)).graph
    with tempfile.TemporaryDirectory() as tmpdir:
        path = write_operator(tmpdir, T)
        assert run(["check", "--operator", path])[0] == 2
        assert run(["--mode", "float", "check", "--operator", path])[0] == 0


def test_plot_needs_dim_one():
    """Verify plotting a dim 2 operator exits 2."""
    with tempfile.TemporaryDirectory() as tmpdir:
        out = os.path.join(tmpdir, "x.svg")
        assert run(["plot", "--scenario", "identity", "--out", out])[0] == 2


def test_non_quasimonotone_certify_exits_one():
    """Verify certifying a violating operator exits 1."""
    T = OperatorGraph(1, [((0,), (1,)), ((1,), (-1,))])
    with tempfile.TemporaryDirectory() as tmpdir:
        assert run(["certify", "maximal", "--operator", write_operator(tmpdir, T)])[0] == 1


def test_dimension_guard_exits_three():
    """Verify extreme rays above the guard dimension exit 3."""
    T = OperatorGraph(5, [((0, 0, 0, 0, 0), (1, 0, 0, 0, 0))])
    with tempfile.TemporaryDirectory() as tmpdir:
        assert run(["certify", "ae", "--operator", write_operator(tmpdir, T)])[0] == 3


def test_graph_json_declares_mode():
    """Verify operator documents record the session mode."""
    assert graph_to_json(generate_scenario("x0").graph)["mode"] == "exact"
