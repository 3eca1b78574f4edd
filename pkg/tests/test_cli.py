"""End-to-end command-line behaviour, exit codes and format stability."""

import json

import numpy as np
import pytest

from wzfbm.cli import main, _parse_deltas


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestDeltaParsing:
    def test_dyadic_range(self):
        assert _parse_deltas("2^-3..2^-5") == (0.125, 0.0625, 0.03125)

    def test_comma_list(self):
        assert _parse_deltas("0.5,0.25") == (0.5, 0.25)

    def test_garbage(self):
        with pytest.raises(ValueError):
            _parse_deltas("every other tuesday")


class TestTheta:
    def test_brownian_value(self, capsys):
        code, out, _ = run_cli(capsys, "theta", "--H", "0.5", "--x", "2")
        assert code == 0
        assert float(out.strip()) == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_seventeen_digits(self, capsys):
        code, out, _ = run_cli(capsys, "theta", "--H", "0.75", "--x", "1.5")
        assert code == 0
        mantissa = out.strip().lstrip("-0.").replace(".", "").rstrip("0")
        assert len(mantissa) >= 15

    def test_bad_domain_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "theta", "--H", "0.5", "--x", "-1")
        assert code == 2
        assert "error" in err


class TestGenerateAndConsume:
    def test_generate_roundtrip_norms(self, capsys, tmp_path):
        out_csv = tmp_path / "path.csv"
        code, _, _ = run_cli(
            capsys,
            "generate",
            "--H", "0.75", "--T", "1", "--n", "256", "--m", "2",
            "--seed", "7", "--out", str(out_csv),
        )
        assert code == 0
        header = out_csv.read_text().splitlines()[0]
        assert header == "t,component_1,component_2"
        assert len(out_csv.read_text().splitlines()) == 258

        code, out, _ = run_cli(
            capsys, "norms", "--in", str(out_csv), "--beta", "0.4", "--alpha", "0.5"
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("norm_1_1mb,")
        vals = [float(v) for v in lines[1].split(",")]
        assert all(v >= 0 for v in vals)

    def test_generate_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for dest in (a, b):
            run_cli(capsys, "generate", "--H", "0.5", "--n", "64", "--seed", "3",
                    "--out", str(dest))
        assert a.read_text() == b.read_text()

    def test_integrate_young(self, capsys, tmp_path):
        f_csv, g_csv = tmp_path / "f.csv", tmp_path / "g.csv"
        t = np.linspace(0, 1, 1025)
        f_csv.write_text("t,component_1\n" + "\n".join(f"{x},{x}" for x in t) + "\n")
        g_csv.write_text("t,component_1\n" + "\n".join(f"{x},{x*x}" for x in t) + "\n")
        code, out, _ = run_cli(capsys, "integrate", "--f", str(f_csv), "--g", str(g_csv))
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "t,integral"
        final = float(lines[-1].split(",")[1])
        assert final == pytest.approx(2.0 / 3.0, abs=2.0 / 1024)

    def test_integrate_gls(self, capsys, tmp_path):
        f_csv, g_csv = tmp_path / "f.csv", tmp_path / "g.csv"
        t = np.linspace(0, 1, 513)
        f_csv.write_text("t,component_1\n" + "\n".join(f"{x},{x}" for x in t) + "\n")
        g_csv.write_text("t,component_1\n" + "\n".join(f"{x},{x*x}" for x in t) + "\n")
        code, out, _ = run_cli(
            capsys, "integrate", "--f", str(f_csv), "--g", str(g_csv),
            "--method", "gls", "--alpha", "0.45",
        )
        assert code == 0
        final = float(out.strip().splitlines()[-1].split(",")[2])
        assert final == pytest.approx(2.0 / 3.0, rel=2e-2)


class TestWzError:
    def test_csv_row(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "wz-error", "--H", "0.5", "--delta", "0.25", "--t", "1",
            "--p", "2", "--paths", "400", "--seed", "1", "--n", "64",
            "--workers", "1",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "exact,mc_estimate,std_error"
        exact, mc, se = (float(v) for v in lines[1].split(","))
        assert exact == pytest.approx(2.0 / 3.0 * 0.25)
        assert abs(mc - exact) <= 4 * se


class TestRate:
    @staticmethod
    def parse_summary(out):
        line = [l for l in out.splitlines() if l.startswith("#")][0]
        parts = dict(tok.split("=") for tok in line[1:].split())
        return {k: float(v) for k, v in parts.items()}

    def test_inject_power_law(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "rate", "--kind", "besov_rate", "--H", "0.75", "--beta", "0.4",
            "--deltas", "2^-2..2^-5", "--inject", "e=d^0.5",
        )
        assert code == 0
        summary = self.parse_summary(out)
        assert summary["slope"] == pytest.approx(0.5, abs=1e-12)
        assert summary["r2"] == pytest.approx(1.0, abs=1e-12)

    def test_inject_with_coefficient(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "rate", "--kind", "besov_rate", "--H", "0.75", "--beta", "0.4",
            "--deltas", "0.5,0.25,0.125", "--inject", "e=3*d^0.15",
        )
        assert code == 0
        summary = self.parse_summary(out)
        assert summary["slope"] == pytest.approx(0.15, abs=1e-12)
        assert summary["intercept"] == pytest.approx(np.log(3.0), abs=1e-12)

    def test_dump_config_roundtrip(self, capsys, tmp_path):
        code, out, _ = run_cli(
            capsys,
            "rate", "--kind", "pointwise_lp", "--H", "0.6", "--deltas", "0.25,0.125",
            "--paths", "50", "--seed", "9", "--dump-config",
        )
        assert code == 0
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(out)
        code2, out2, _ = run_cli(capsys, "rate", "--config", str(cfg_file), "--dump-config")
        assert code2 == 0
        assert json.loads(out) == json.loads(out2)

    def test_small_pointwise_run(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "rate", "--kind", "pointwise_lp", "--H", "0.5", "--n", "128",
            "--deltas", "0.25,0.125", "--paths", "64", "--seed", "2",
            "--workers", "1",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "delta,mean_error,std_error,exact,n_paths"
        assert lines[-1].startswith("# slope=")

    def test_config_error_exit_2(self, capsys):
        code, _, err = run_cli(
            capsys,
            "rate", "--kind", "besov_rate", "--H", "0.75", "--beta", "0.1",
            "--deltas", "0.25,0.125",
        )
        assert code == 2
        assert "admissible window" in err


class TestSdeConverge:
    def test_tiny_run(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "sde-converge", "--problem", "additive", "--H", "0.75", "--beta", "0.4",
            "--deltas", "0.25,0.125", "--n", "128", "--paths", "6", "--seed", "3",
            "--workers", "1",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "delta,mean_error,std_error,ratio,n_paths"
        assert len(lines) == 4


class TestUsageErrors:
    def test_missing_required_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["theta", "--x", "1"])
        assert exc.value.code == 2
        assert "--H" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_unknown_flag_rejected(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["theta", "--H", "0.5", "--x", "1", "--frob", "3"])
        assert exc.value.code == 2
