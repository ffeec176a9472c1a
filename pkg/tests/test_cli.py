import io
import math
import subprocess
import sys

import pytest

from catsense.analytic import ProtocolConfig, ramsey_pg_damped, snr_at_bias
from catsense.cli import main, parse_config
from catsense.output import read_csv
from catsense.sweep import Axis


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def value(text, key):
    for line in text.splitlines():
        if line.startswith(key + " = "):
            return float(line.split("=", 1)[1])
    raise KeyError(key)


def test_pg():
    code, text = run("pg", "--D", "50", "--theta", "0.0314159")
    assert code == 0
    assert value(text, "pg_exact") == ramsey_pg_damped(ProtocolConfig.from_angles(D=50, theta=0.0314159))


def test_pg_oracle_and_literal():
    code, text = run("pg", "--D", "9", "--theta", "0.2", "--kappaT", "0.05", "--oracle")
    assert code == 0
    assert value(text, "pg_oracle") == pytest.approx(value(text, "pg_exact"), abs=1e-6)
    code, text = run("pg", "--D", "9", "--theta", "0.2", "--mode", "paper_literal")
    assert code == 0 and "pg_paper_literal" in text


def test_snr_defaults_to_bias():
    code, text = run("snr", "--D", "100", "--kappaT", "0.02")
    assert code == 0
    assert value(text, "snr") == snr_at_bias(100.0, 0.02)
    code, text = run("snr", "--D", "100", "--kappaT", "0.02", "--derivative", "central_difference")
    assert value(text, "snr") == pytest.approx(snr_at_bias(100.0, 0.02), rel=1e-6)


def test_sweep_stdout():
    code, text = run("sweep", "--d", "10:200:96", "--theta", "bias", "--kappaT", "0.02", "--no-metadata")
    assert code == 0
    lines = text.splitlines()
    assert lines[0].startswith("D,theta,kappaT")
    assert len(lines) == 97


def test_sweep_files(tmp_path):
    code, _ = run("sweep", "--d", "1:20:5", "--theta", "0:0.3:4", "--quantities", "pg_exact",
                  "--out", str(tmp_path / "s.csv"), "--format", "both")
    assert code == 0
    rows = read_csv(tmp_path / "s.csv")
    assert len(rows) == 20 and rows[0]["snr"] is None
    assert (tmp_path / "s.svg").read_text().startswith("<svg")


def test_optimum():
    code, text = run("optimum", "--kappaT", "0.02")
    assert code == 0
    assert abs(value(text, "d_star") - 100) <= 2
    assert 35.5 <= value(text, "r_star") <= 37.0


def test_optimum_edge_is_error():
    code, _ = run("optimum", "--kappaT", "1e-6", "--d", "10:200:191")
    assert code == 1


def test_validate_small(tmp_path):
    code, text = run("validate", "--d", "4,9", "--kappaT", "0,0.05", "--out", str(tmp_path / "v.txt"))
    assert code == 0
    assert "PASS" in text and "phase-form gap" in text
    assert (tmp_path / "v.txt").read_text().strip() == text.strip()


@pytest.mark.parametrize("group,names", [("fig1", ("fig1a", "fig1b", "fig1c")), ("fig2", ("fig2a", "fig2b", "fig2c"))])
def test_figures(tmp_path, group, names):
    code, _ = run(group, "--out", str(tmp_path), "--format", "both")
    assert code == 0
    for n in names:
        assert (tmp_path / f"{n}.csv").exists() and (tmp_path / f"{n}.svg").exists()


def test_output_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run("fig2", "--out", str(a))
    run("fig2", "--out", str(b))
    for n in ("fig2a", "fig2b", "fig2c"):
        assert (a / f"{n}.csv").read_bytes() == (b / f"{n}.csv").read_bytes()


class TestConfig:
    def test_precedence(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# run\nD = 30\ntheta = 0.1  # rad\nkappaT = 0.05\n")
        rc = parse_config(["pg", "--config", str(cfg), "--theta", "0.2"])
        assert rc.parameters["D"] == 30 and rc.parameters["theta"] == 0.2 and rc.parameters["kappaT"] == 0.05
        assert parse_config(["pg", "--D", "3"]).parameters["kappaT"] == 0.0

    def test_flag_spelling_in_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("d = 10:20:3\ntheta = bias\nno-metadata = yes\n")
        rc = parse_config(["sweep", "--config", str(cfg)])
        assert rc.parameters["d"] == Axis(10.0, 20.0, 3)
        assert rc.parameters["theta_range"] == "bias" and rc.parameters["no_metadata"] is True

    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("D = 3\ncolour = blue\n")
        assert main(["pg", "--config", str(cfg)]) == 2
        assert "'colour'" in capsys.readouterr().err

    def test_malformed_line(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("D 3\n")
        assert main(["pg", "--config", str(cfg)]) == 2


@pytest.mark.parametrize(
    "argv,token",
    [
        (["pg", "--D", "5", "--bogus"], "--bogus"),
        (["pg", "--D", "abc"], "abc"),
        (["pg", "--D", "5", "--mode", "sloppy"], "sloppy"),
        (["pg"], "--D"),
        (["sweep", "--d", "1:2"], "1:2"),
        (["sweep", "--d", "1:2:2", "--quantities", "fisher"], "fisher"),
        (["frobnicate"], "frobnicate"),
    ],
)
def test_usage_errors(argv, token, capsys):
    assert main(argv) == 2
    assert token in capsys.readouterr().err


def test_degenerate_bias_exit_status(capsys):
    assert main(["snr", "--D", "10", "--theta", "0"]) == 1
    assert "R undefined" in capsys.readouterr().err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "catsense.cli", "pg", "--D", "4", "--theta", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert abs(value(proc.stdout, "pg_exact")) <= 1e-13
