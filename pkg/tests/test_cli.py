import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from fracmax.cli import main
from fracmax.io import read_field_binary, read_plot_data


def scenario(tmp_path, kind, name="s", **params):
    body = "\n".join(f"{k} = {v}" for k, v in params.items())
    path = tmp_path / f"{name}.ini"
    path.write_text(f"[scenario]\nkind = {kind}\nname = {name}\n\n[parameters]\n{body}\n")
    return path


def run_cli(*argv):
    return main([str(a) for a in argv])


def tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


SMALL_DIFFUSION = dict(n_x=24, n_t=24, F="1")


class TestExitCodes:
    def test_pass(self, tmp_path, capsys):
        sc = scenario(tmp_path, "diffusion", **SMALL_DIFFUSION)
        assert run_cli("solve-diffusion", "--scenario", sc, "--out", tmp_path / "o") == 0
        out = capsys.readouterr()
        lines = [json.loads(line) for line in out.out.splitlines()]
        assert lines and all("group" in d and "pass" in d for d in lines)
        assert "passed" in out.err
        summary = json.loads((tmp_path / "o" / "s" / "summary.json").read_text())
        assert summary["exit_code"] == 0 and summary["counts"]["failed"] == 0 and not summary["partial"]
        for name in ("solution.csv", "solution.bin", "solution.dat", "solution.dat.json", "solution.png", "reports.jsonl"):
            assert name in summary["artifacts"]
            assert (tmp_path / "o" / "s" / name).exists()

    def test_fail(self, tmp_path, capsys):
        sc = scenario(tmp_path, "ode", n=128, q="-1", f="1")
        assert run_cli("solve-ode", "--scenario", sc, "--out", tmp_path / "o", "--quiet") == 1
        assert capsys.readouterr().out == ""
        rep = json.loads((tmp_path / "o" / "s" / "reports.jsonl").read_text().splitlines()[0])
        assert rep["principle"] == "ode_sign" and rep["pass"] is False

    def test_validation_error(self, tmp_path, capsys):
        sc = scenario(tmp_path, "diffusion", alpha=1.5, beta1=0.2, bogus=3)
        assert run_cli("solve-diffusion", "--scenario", sc, "--out", tmp_path / "o") == 2
        err = capsys.readouterr().err
        assert "alpha" in err and "bogus" in err and "line" in err
        assert not (tmp_path / "o").exists()

    @pytest.mark.parametrize(
        "argv",
        [
            ["nonsense"],
            ["verify", "op"],
            ["op"],
            ["solve-ode", "--tol-scale", "0"],
            ["solve-ode", "--seed", "-3"],
            ["solve-ode", "--scenario", "/nonexistent.ini"],
        ],
    )
    def test_usage_errors(self, argv, tmp_path, capsys):
        assert run_cli(*argv, "--out", tmp_path) == 2

    def test_kind_mismatch(self, tmp_path):
        sc = scenario(tmp_path, "ode")
        assert run_cli("solve-diffusion", "--scenario", sc, "--out", tmp_path) == 2
        assert run_cli("verify", "diffusion", "--scenario", sc, "--out", tmp_path) == 2

    def test_domain_error_during_run(self, tmp_path, capsys):
        sc = scenario(tmp_path, "op", operation="rl_derivative", alpha=1.0, n=64)
        assert run_cli("op", "--scenario", sc, "--out", tmp_path / "o", "--quiet") == 2
        summary = json.loads((tmp_path / "o" / "s" / "summary.json").read_text())
        assert summary["partial"] and "DomainError" in summary["error"]

    def test_help(self, capsys):
        assert run_cli("--help") == 0


class TestBehaviour:
    def test_informational_only(self, tmp_path):
        sc = scenario(tmp_path, "elliptic", dims=1, n=32, coef_c="1")
        assert run_cli("solve-elliptic", "--scenario", sc, "--out", tmp_path / "o", "--quiet") == 0
        reps = [json.loads(line) for line in (tmp_path / "o" / "s" / "reports.jsonl").read_text().splitlines()]
        assert any(r["status"] == "informational" for r in reps)

    def test_tol_scale(self, tmp_path):
        sc = scenario(tmp_path, "ode", n=128, q="-1", f="1")
        assert run_cli("solve-ode", "--scenario", sc, "--out", tmp_path / "o", "--quiet", "--tol-scale", "1e7") == 0
        summary = json.loads((tmp_path / "o" / "s" / "summary.json").read_text())
        assert summary["tol_scale"] == 1e7

    def test_seed_override_changes_batch(self, tmp_path):
        sc = scenario(tmp_path, "elliptic", mode="batch", n=8, count=1, cylinders=1)
        run_cli("verify", "--scenario", sc, "--out", tmp_path / "a", "--quiet", "--seed", "1")
        run_cli("verify", "--scenario", sc, "--out", tmp_path / "b", "--quiet", "--seed", "0x2")
        a = (tmp_path / "a" / "s" / "reports.jsonl").read_bytes()
        assert a != (tmp_path / "b" / "s" / "reports.jsonl").read_bytes()
        assert json.loads((tmp_path / "b" / "s" / "summary.json").read_text())["seed"] == 2

    @pytest.mark.parametrize(
        "cmd, kind, params",
        [
            ("solve-diffusion", "diffusion", SMALL_DIFFUSION),
            ("solve-pseudo", "pseudo", dict(n_x=16, n_t=16, F="1", phi="sin(pi*x)")),
            ("solve-elliptic", "elliptic", dict(dims=2, n=12)),
            ("solve-laplace", "laplace", dict(n_x=12, n_y=12)),
            ("verify", "ode", dict(n=64, signs=2, pairs=2, sandwiches=1)),
            ("op", "op", dict(operation="sequential_caputo", function="sin(t)", n=64, alpha=0.6, beta=0.7)),
            ("verify", "extremum", dict(count=1, n=256)),
        ],
    )
    def test_reruns_bit_identical(self, tmp_path, cmd, kind, params):
        sc = scenario(tmp_path, kind, **params)
        run_cli(cmd, "--scenario", sc, "--out", tmp_path / "a", "--quiet")
        run_cli(cmd, "--scenario", sc, "--out", tmp_path / "b", "--quiet")
        a, b = tree(tmp_path / "a"), tree(tmp_path / "b")
        assert a.keys() == b.keys() and a == b

    def test_op_reads_input_relative_to_scenario(self, tmp_path):
        (tmp_path / "data").mkdir()
        t = np.linspace(0, 1, 65)
        (tmp_path / "data" / "f.csv").write_text("t,value\n" + "".join(f"{a!r},{a * a!r}\n" for a in t.tolist()))
        sc = scenario(tmp_path, "op", operation="caputo", input="data/f.csv", alpha=0.5)
        assert run_cli("op", "--scenario", sc, "--out", tmp_path / "o", "--quiet") == 0
        rows = (tmp_path / "o" / "s" / "output.csv").read_text().splitlines()
        assert rows[0] == "t,value" and len(rows) == 66

    def test_witness(self, tmp_path):
        sc = scenario(tmp_path, "extremum", mode="witness", function="sin(t)", alpha=0.6, beta=0.6, n=512)
        assert run_cli("verify", "extremum", "--scenario", sc, "--out", tmp_path / "o", "--quiet") == 0
        w = json.loads((tmp_path / "o" / "s" / "witness.json").read_text())
        assert w["gap_sup"] > 0.1 and w["function"] == "sin(t)"

    def test_env_out_and_plot_data(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FRACMAX_OUT", str(tmp_path / "env"))
        sc = scenario(tmp_path, "diffusion", **SMALL_DIFFUSION)
        assert run_cli("solve-diffusion", "--scenario", sc, "--quiet") == 0
        binary = tmp_path / "env" / "s" / "solution.bin"
        assert binary.exists()
        assert run_cli("plot-data", binary, "--out", tmp_path / "pd", "--quiet") == 0
        rows = read_plot_data(tmp_path / "pd" / "solution.dat")
        _, values = read_field_binary(binary)
        assert rows.shape == (25 * 25, 3)
        assert np.array_equal(rows[:, 2], values.ravel())
        assert (tmp_path / "pd" / "solution.dat").read_text() == (tmp_path / "env" / "s" / "solution.dat").read_text()

    def test_scenario_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.delenv("FRACMAX_OUT", raising=False)
        path = tmp_path / "x.ini"
        path.write_text("[scenario]\nkind = laplace\noutput_dir = runs\n[parameters]\nn_x = 8\nn_y = 8\n")
        assert run_cli("solve-laplace", "--scenario", path, "--quiet") == 0
        assert (tmp_path / "runs" / "x" / "summary.json").exists()


@pytest.mark.skipif(shutil.which("fracmax") is None, reason="console script not installed")
def test_console_script(tmp_path):
    sc = scenario(tmp_path, "diffusion", **SMALL_DIFFUSION)
    proc = subprocess.run(["fracmax", "solve-diffusion", "--scenario", str(sc), "--out", str(tmp_path), "--quiet"], capture_output=True)
    assert proc.returncode == 0
    proc = subprocess.run([sys.executable, "-m", "fracmax.cli", "bogus"], capture_output=True)
    assert proc.returncode == 2
