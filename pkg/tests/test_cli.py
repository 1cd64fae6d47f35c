import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from torus_paircorr import __version__
from torus_paircorr.cli import RunConfig, cli
from torus_paircorr.core import InvalidArgumentError, read_point_file
from torus_paircorr.diagnostics import ConvergenceSweep, KroneckerWitness
from torus_paircorr.generators import gen_halton
from torus_paircorr.paircorr import PairCorrResult

PAIRCORR_ARGS = ["paircorr", "--dim", "2", "--n", "1000", "--seed", "1", "--gen", "uniform",
                 "--s", "0.5,1,2"]


@pytest.fixture
def runner():
    return CliRunner()


def _invoke(runner, args, out=None):
    argv = list(args) + (["--out", str(out)] if out is not None else [])
    return runner.invoke(cli, argv)


def test_paircorr_example(runner, tmp_path):
    out = tmp_path / "f.csv"
    result = _invoke(runner, PAIRCORR_ARGS, out)
    assert result.exit_code == 0, result.output
    text = out.read_text()
    lines = text.splitlines()
    assert lines[1] == "s,count,F,poisson_ref"
    assert len(lines) == 5
    parsed = PairCorrResult.from_csv(text)
    for s, f in zip(parsed.s_values.values, parsed.f_values):
        expected = 0.999 * (2 * s) ** 2
        assert abs(f - expected) <= 0.25 * expected
    meta = json.loads(lines[0][1:])
    assert meta["N"] == 1000
    config = meta["config"]
    assert config["command"] == "paircorr" and config["seed"] == 1 and config["s"] == [0.5, 1.0, 2.0]


def test_reruns_are_byte_identical(runner, tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert _invoke(runner, PAIRCORR_ARGS, first).exit_code == 0
    assert _invoke(runner, PAIRCORR_ARGS, second).exit_code == 0
    assert first.read_bytes() == second.read_bytes()


def test_paircorr_json_and_input_file(runner, tmp_path):
    pts_path = tmp_path / "pts.csv"
    assert _invoke(runner, ["generate", "--gen", "halton", "--dim", "2", "--n", "300"], pts_path).exit_code == 0
    out = tmp_path / "f.json"
    result = _invoke(runner, ["paircorr", "--in", str(pts_path), "--s", "1", "--format", "json"], out)
    assert result.exit_code == 0, result.output
    parsed = PairCorrResult.from_json(out.read_text())
    assert parsed.N == 300 and parsed.dim == 2


def test_generate_round_trip(runner, tmp_path):
    out = tmp_path / "pts.csv"
    assert _invoke(runner, ["generate", "--gen", "halton", "--dim", "2", "--n", "50"], out).exit_code == 0
    assert np.array_equal(read_point_file(out).points, gen_halton(2, 50).points)


def test_moments_with_trials(runner, tmp_path):
    out = tmp_path / "m.csv"
    result = _invoke(runner, ["paircorr", "--dim", "1", "--n", "200", "--trials", "5",
                              "--s", "0.5,1"], out)
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines[1] == "s,mean,variance,expectation"
    assert len(lines) == 4
    s, mean, variance, expectation = (float(v) for v in lines[2].split(','))
    assert s == 0.5 and variance >= 0.0
    assert expectation == pytest.approx(199 / 200)


def test_moments_need_uniform(runner):
    result = _invoke(runner, ["paircorr", "--gen", "halton", "--trials", "3"])
    assert result.exit_code == 1
    assert "Error:" in result.output


def test_energy_squares(runner, tmp_path):
    out = tmp_path / "e.json"
    result = _invoke(runner, ["energy", "--family", "squares", "--n", "100"], out)
    assert result.exit_code == 0, result.output
    data = json.loads(out.read_text())
    assert 100 ** 2 <= data["energy"] <= 100 ** 3
    assert data["config"]["family"] == "squares"
    assert data["thresholds"] == {"tau_max": 0.1, "kappa": 1.0, "c": 1.0}


def test_energy_overflow_is_runtime_error(runner):
    result = _invoke(runner, ["energy", "--family", "lacunary_base2", "--n", "63"])
    assert result.exit_code == 2
    assert "Error:" in result.output


def test_witness(runner, tmp_path):
    out = tmp_path / "w.json"
    result = _invoke(runner, ["witness", "--alpha", "sqrt2,sqrt3", "--qmax", "2000"], out)
    assert result.exit_code == 0, result.output
    w = KroneckerWitness.from_json(out.read_text())
    assert w.sandwich_ok
    assert w.pair_count_at_lag >= w.N - w.lag
    assert json.loads(out.read_text())["config"]["alpha"] == [math.sqrt(2.0), math.sqrt(3.0)]


def test_witness_needs_two_entries(runner):
    result = _invoke(runner, ["witness", "--alpha", "sqrt2"])
    assert result.exit_code == 1


def test_approx_csv(runner, tmp_path):
    out = tmp_path / "q.csv"
    result = _invoke(runner, ["approx", "--alpha", "sqrt2,sqrt3", "--qmax", "500"], out)
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines[1] == "q,theta"
    rows = [line.split(',') for line in lines[2:]]
    assert rows and all(0.0 < float(theta) < 1.0 for _, theta in rows)
    assert [int(q) for q, _ in rows] == sorted(int(q) for q, _ in rows)


def test_discrepancy_one_dimension(runner, tmp_path):
    out = tmp_path / "d.json"
    result = _invoke(runner, ["discrepancy", "--gen", "halton", "--dim", "1", "--n", "100"], out)
    assert result.exit_code == 0, result.output
    data = json.loads(out.read_text())
    assert data["estimate"] == data["exact"]
    assert 0.0 < data["exact"] < 0.1


def test_converge_json(runner, tmp_path):
    out = tmp_path / "c.json"
    result = _invoke(runner, ["converge", "--gen", "kronecker", "--alpha", "sqrt2,sqrt3",
                              "--n", "2000", "--s", "0.5,1", "--format", "json"], out)
    assert result.exit_code == 0, result.output
    data = json.loads(out.read_text())
    assert data["n_values"][-1] <= 2000
    assert len(data["table"]) == len(data["n_values"])


def test_converge_csv_parses(runner, tmp_path):
    out = tmp_path / "c.csv"
    result = _invoke(runner, ["converge", "--gen", "halton", "--dim", "2", "--n", "1000"], out)
    assert result.exit_code == 0, result.output
    assert ConvergenceSweep.from_csv(out.read_text()).dim == 2


def test_metric(runner, tmp_path):
    out = tmp_path / "m.json"
    result = _invoke(runner, ["metric", "--family", "squares", "--dim", "1", "--n", "200",
                              "--samples", "3", "--s", "1"], out)
    assert result.exit_code == 0, result.output
    data = json.loads(out.read_text())
    assert len(data["alphas"]) == 3
    assert data["energy"]["N"] == 200


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


@pytest.mark.parametrize("args", [
    ["paircorr", "--s", "2,1"],
    ["paircorr", "--dim", "0"],
    ["paircorr", "--frobnicate"],
    ["batch"],
    ["discrepancy", "--grid-k", "1"],
    ["generate", "--gen", "kronecker", "--dim", "2"],
])
def test_invalid_arguments_exit_one(runner, args):
    result = runner.invoke(cli, args)
    assert result.exit_code == 1
    assert "Error:" in result.output


def test_bad_point_file_names_line(runner, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("0.1,0.2\n0.3\n")
    result = runner.invoke(cli, ["paircorr", "--in", str(bad)])
    assert result.exit_code == 1
    assert "bad.csv:2" in result.output


def test_missing_input_file(runner, tmp_path):
    result = runner.invoke(cli, ["paircorr", "--in", str(tmp_path / "nope.csv")])
    assert result.exit_code == 1


def test_run_config_resolved_excludes_out():
    config = RunConfig("paircorr", out="x.csv", s="0.5,1")
    resolved = config.resolved()
    assert "out" not in resolved
    assert resolved["dim"] == 2 and resolved["s"] == [0.5, 1.0]
    with pytest.raises(InvalidArgumentError):
        RunConfig("paircorr", family="fibonacci").validate()
