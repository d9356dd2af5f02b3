import json

import numpy as np
import pytest

from shortprimes import cli, config, identities
from shortprimes.experiments import ConfigError
from shortprimes.reports import Report


def run_json(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = cli.run(args + ["--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_parse_config_values_and_aliases():
    cfg = config.parse_config("x = 1e6\ntheta = 0.5  # comment\nQ = 20\nt = 0, 2.5\nexact = yes\n")
    assert cfg["x"] == 1e6 and cfg["q_max"] == 20 and cfg["t"] == (0.0, 2.5) and cfg["exact"] is True
    assert cfg["samples"] == 200
    out = cfg.resolved(("x", "theta"))
    assert out["length"] == pytest.approx(1000) and out["alpha"] == pytest.approx(1 / 6)


def test_unknown_keys_all_listed():
    with pytest.raises(ConfigError, match="bogus, other"):
        config.parse_config("x = 1\nbogus = 2\nother = 3\n")


@pytest.mark.parametrize("text", ["x = 1e6\nh = 10\ntheta = 0.5\n", "Q = 2.5\n", "just words\n", "x = inf\n"])
def test_bad_config(text):
    with pytest.raises(ConfigError):
        config.parse_config(text)


def test_no_arguments_is_usage_error(capsys):
    assert cli.run([]) == cli.EXIT_CONFIG
    assert "usage" in capsys.readouterr().err


def test_hb_verify_runs(tmp_path):
    code, body = run_json(["hb-verify", "--nmax", "2000", "--k0", "2"], tmp_path)
    assert code == 0
    assert body["command"] == "hb-verify" and body["config"]["seed"] == 0
    assert body["aggregate"]["max_residual"] <= 1e-9
    assert set(body) == {"command", "config", "columns", "data", "aggregate", "metadata"}


def test_missing_zero_file_is_data_error(tmp_path):
    assert cli.run(["zeros-count", "--file", str(tmp_path / "missing.txt")]) == cli.EXIT_DATA


def test_unknown_key_in_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("x = 1e4\nnonsense = 1\n")
    assert cli.run(["e-average", "--config", str(path)]) == cli.EXIT_CONFIG


def test_h_and_theta_conflict(tmp_path):
    assert cli.run(["e-average", "--x", "1e4", "--h", "100", "--theta", "0.5"]) == cli.EXIT_CONFIG


def test_flag_overrides_file_length(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("x = 2e4\ntheta = 0.5\nQ = 2\nsamples = 4\n")
    code, body = run_json(["e-average", "--config", str(path), "--h", "300", "--seed", "7"], tmp_path)
    assert code == 0
    assert body["config"]["h"] == 300 and body["config"]["theta"] is None and body["config"]["seed"] == 7


def test_e_average_derives_alpha(tmp_path):
    code, body = run_json(["e-average", "--x", "2e4", "--theta", "0.5", "--q-max", "2", "--samples", "4"], tmp_path)
    assert code == 0
    assert body["config"]["alpha"] == pytest.approx(1 / 6)
    assert body["config"]["eta"] > 0


def test_outputs_are_deterministic(tmp_path):
    args = ["e-average", "--x", "2e4", "--h", "200", "--q-max", "3", "--samples", "6", "--seed", "4"]
    _, a = run_json(args, tmp_path, "a.json")
    _, b = run_json(args, tmp_path, "b.json")
    a.pop("metadata"), b.pop("metadata")
    assert a == b
    csv_a, csv_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.run(args + ["--format", "csv", "--out", str(csv_a)]) == 0
    assert cli.run(args + ["--format", "csv", "--out", str(csv_b)]) == 0
    assert csv_a.read_text() == csv_b.read_text()
    assert "# config seed=4" in csv_a.read_text()


def test_bad_format(tmp_path):
    assert cli.run(["hb-verify", "--nmax", "100", "--format", "xml"]) == cli.EXIT_CONFIG


def test_invariant_failure_exit_code(monkeypatch):
    monkeypatch.setattr(identities, "heath_brown_table", lambda nmax, k: np.ones(nmax + 1) * 7)
    assert cli.run(["hb-verify", "--nmax", "100", "--k0", "1"]) == cli.EXIT_INVARIANT


def test_report_cleans_values():
    rep = Report("x", {"a": float("nan")}, ["v"])
    rep.add(complex(1, 2))
    body = json.loads(rep.to_json(timestamp=0))
    assert body["config"]["a"] is None and body["data"] == [[[1.0, 2.0]]]
    with pytest.raises(ValueError):
        rep.render("yaml")


@pytest.mark.parametrize(
    "args",
    [
        ["sieve", "--y", "1000", "--h", "100", "--q", "3", "--a", "1"],
        ["characters", "--q", "12"],
        ["partition-check", "--points", "200"],
        ["funceq-check", "--q-max", "5", "--t-max", "2"],
        ["meanvalue", "--n-len", "200", "--q-max", "3", "--t-height", "10", "--trials", "3"],
        ["zeros-count", "--sigma", "0.5", "--t-height", "30"],
        ["explicit-formula", "--y", "100", "--eta", "0.5", "--t0", "30"],
        ["dyadic-check", "--x", "1e5", "--trials", "20"],
        ["thm3-count", "--x", "5000", "--theta", "0.4", "--q-max", "2", "--c", "0.1,0.5"],
        ["smk", "--m-max", "5", "--k-max", "50"],
    ],
)
def test_subcommands_succeed(args, tmp_path):
    code, body = run_json(args, tmp_path)
    assert code == 0 and body["command"] == args[0]
