"""Command-line interface: subcommand chaining, exit codes, output files."""
import json

import pytest

from acspin.cli import main
from acspin.experiments import read_csv, read_params


def test_generate_analytic_writes_params(tmp_path, capsys):
    out = tmp_path / "cat.json"
    code = main(["generate", "--j", "2", "--t", "2", "--analytic",
                 "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "method=analytic" in text
    assert "1-A_2" in text
    report = read_params(out)
    assert report["two_j"] == 4
    assert report["converged"] is True


def test_generate_fraction_spin(capsys):
    code = main(["generate", "--j", "5/2", "--t", "1", "--analytic"])
    assert code == 0
    assert "j=2.5" in capsys.readouterr().out


def test_generate_unconverged_exit_code(tmp_path, capsys):
    # one cycle cannot reach order 2, so the optimizer must report failure
    out = tmp_path / "bad.json"
    code = main(["generate", "--j", "2", "--t", "2", "--nc", "1",
                 "--seed", "0", "--restarts", "2", "--maxfev", "200",
                 "--out", str(out)])
    assert code == 1
    assert "NOT CONVERGED" in capsys.readouterr().out
    # the best attempt is still written, flagged as unconverged
    report = read_params(out)
    assert report["converged"] is False


def test_generate_requires_spin():
    with pytest.raises(SystemExit):
        main(["generate", "--t", "1"])


def test_powerlaw_chain(tmp_path, capsys):
    out = tmp_path / "pl.csv"
    code = main(["powerlaw", "--j-min", "20", "--j-max", "40",
                 "--count", "3", "--out", str(out)])
    assert code == 0
    assert "expect -0.5" in capsys.readouterr().out
    cols, rows, config = read_csv(out)
    assert cols == ["j", "eta2", "eta3", "deviation"]
    assert len(rows) == 3
    assert -0.7 < config["slopes"]["eta2"] < -0.3


def test_trace_chain(tmp_path, capsys):
    params = tmp_path / "p.json"
    trace = tmp_path / "trace.csv"
    assert main(["generate", "--j", "2", "--t", "2", "--analytic",
                 "--out", str(params)]) == 0
    capsys.readouterr()
    assert main(["multipole-trace", "--params", str(params),
                 "--out", str(trace)]) == 0
    cols, rows, config = read_csv(trace)
    assert cols == ["step", "label", "L", "M", "power"]
    assert config["command"] == "multipole-trace"
    assert rows[0]["label"] == "initial"


def test_trace_rejects_foreign_json(tmp_path):
    bogus = tmp_path / "x.json"
    bogus.write_text(json.dumps({"hello": 1}))
    with pytest.raises(ValueError):
        main(["multipole-trace", "--params", str(bogus),
              "--out", str(tmp_path / "t.csv")])


def test_noise_grid_chain(tmp_path, capsys):
    out = tmp_path / "grid.csv"
    code = main(["noise-grid", "--n", "2", "--t", "1",
                 "--grid-min", "1e-3", "--grid-max", "1e-2",
                 "--grid-points", "2", "--instances", "1",
                 "--out", str(out)])
    assert code == 0
    cols, rows, config = read_csv(out)
    assert len(rows) == 2 * 2 * 3
    assert config["command"] == "noise-grid"
    assert config["grid"] == [1e-3, 1e-2, 2]
    assert len(config["rotation_sequence_sha256"]) == 64


def test_control_grid_chain(tmp_path):
    out = tmp_path / "ctrl.csv"
    code = main(["control-error-grid", "--n", "2", "--t", "1",
                 "--error-type", "bp_type2",
                 "--h-min", "1e-3", "--h-max", "1e-2", "--h-points", "2",
                 "--eps-min", "1e-2", "--eps-max", "1e-1", "--eps-points", "2",
                 "--instances", "1", "--out", str(out)])
    assert code == 0
    cols, rows, config = read_csv(out)
    assert len(rows) == 2 * 2 * 3
    assert config["error_type"] == "bp_type2"
    assert config["regime"] == "disorder"


def test_control_grid_rejects_unknown_error_type(tmp_path):
    with pytest.raises(SystemExit):
        main(["control-error-grid", "--n", "2", "--error-type", "axis",
              "--out", str(tmp_path / "x.csv")])


def test_unknown_subcommand():
    with pytest.raises(SystemExit):
        main(["histogram"])
