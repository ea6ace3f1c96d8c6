"""Tests for the command-line driver: exit codes, config files, artifacts."""
from __future__ import annotations

import glob
import json
import math
import re

import numpy as np
import pytest

from evoscalar import kernels
from evoscalar.cli import load_config, run
from evoscalar.errors import ValidationError
from evoscalar.evolve import field_from_text


def _num(text: str, label: str) -> float:
    m = re.search(rf"{label} = ([^;\s]+)", text)
    assert m, f"no '{label} = ...' in {text!r}"
    return float(m.group(1))


class TestLoadConfig:
    def test_round_trip_with_comments(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# a comment\n\nalpha = 0.5\nt-max = 10\n"
                       "model = torus:2\n")
        out = load_config(str(cfg))
        assert out == {"alpha": "0.5", "t_max": "10", "model": "torus:2"}

    def test_parse_error_names_line(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("alpha = 0.5\n\nnot a pair\n")
        with pytest.raises(ValidationError, match=":3"):
            load_config(str(cfg))

    def test_unknown_key_names_key_and_line(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("alpha = 0.5\nbogus = 1\n")
        with pytest.raises(ValidationError, match=r":2: unknown key 'bogus'"):
            load_config(str(cfg), known_keys={"alpha"})

    def test_duplicate_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("a = 1\na = 2\n")
        with pytest.raises(ValidationError, match="duplicate"):
            load_config(str(cfg))

    def test_empty_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("= 5\n")
        with pytest.raises(ValidationError, match="empty key"):
            load_config(str(cfg))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError, match="cannot read"):
            load_config(str(tmp_path / "absent.cfg"))


class TestExitCodes:
    def test_no_subcommand(self, capsys):
        assert run([]) == 1
        assert "subcommand" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert run(["frobnicate"]) == 1
        assert "invalid choice" in capsys.readouterr().err

    def test_missing_required_option(self, capsys):
        assert run(["ml", "--z", "1"]) == 1
        assert "--alpha" in capsys.readouterr().err

    def test_unparsable_value(self, capsys):
        assert run(["ml", "--alpha", "abc", "--z", "1"]) == 1
        assert "alpha" in capsys.readouterr().err

    def test_validation_error_from_library(self, capsys):
        assert run(["ml", "--alpha", "-1", "--z", "1"]) == 1
        assert "alpha" in capsys.readouterr().err

    def test_help_exits_zero(self, capsys):
        assert run(["--help"]) == 0
        assert "subcommand" in capsys.readouterr().out or True
        assert run(["ml", "--help"]) == 0

    def test_picard_divergence_exits_two(self, capsys):
        code = run(["picard", "--kind", "heat", "--eta", "3",
                    "--norm-w0", "1e3", "--grid-n", "32",
                    "--t-end", "0.2", "--dt", "5e-3"])
        assert code == 2
        err = capsys.readouterr().err
        assert "numerical failure" in err

    def test_accuracy_failure_exits_two(self, capsys):
        code = run(["sonine", "--kernel", "powerlaw:0.5", "--t-end", "1",
                    "--dt", "1e-2", "--tol", "1e-16"])
        assert code == 2
        assert "numerical failure" in capsys.readouterr().err


class TestMlCommand:
    def test_exponential_value(self, capsys):
        assert run(["ml", "--alpha", "1", "--delta", "1", "--z", "1"]) == 0
        assert "2.718281828" in capsys.readouterr().out

    def test_complex_argument(self, capsys):
        assert run(["ml", "--alpha", "0.5", "--z", "2j"]) == 0
        out = capsys.readouterr().out
        assert "0.34002621706606" in out

    def test_csv_artifact(self, tmp_path, capsys):
        out_path = tmp_path / "ml.csv"
        assert run(["ml", "--alpha", "1", "--z", "1",
                    "--output", str(out_path)]) == 0
        lines = out_path.read_text().splitlines()
        assert lines[0] == "z,value"
        assert float(lines[1].split(",")[1]) == pytest.approx(math.e)
        capsys.readouterr()


class TestConfigMerge:
    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "ml.cfg"
        cfg.write_text("alpha = 2\nz = 1\n")
        assert run(["ml", "--config", str(cfg), "--alpha", "1"]) == 0
        assert "2.718281828" in capsys.readouterr().out

    def test_config_supplies_required(self, tmp_path, capsys):
        cfg = tmp_path / "ml.cfg"
        cfg.write_text("alpha = 1\nz = 1\n")
        assert run(["ml", "--config", str(cfg)]) == 0
        assert "2.718281828" in capsys.readouterr().out

    def test_unknown_config_key_exits_one(self, tmp_path, capsys):
        cfg = tmp_path / "ml.cfg"
        cfg.write_text("alpha = 1\nwavelength = 3\n")
        assert run(["ml", "--config", str(cfg), "--z", "1"]) == 1
        err = capsys.readouterr().err
        assert "wavelength" in err and ":2" in err


class TestRegionCommand:
    def test_empty_region_summary_and_csv(self, tmp_path, capsys):
        out_path = tmp_path / "region.csv"
        assert run(["region", "--kind", "heat", "--p0", "1.5",
                    "--lambda", "6", "--resolution", "12",
                    "--output", str(out_path)]) == 0
        assert "region empty" in capsys.readouterr().out
        lines = out_path.read_text().splitlines()
        assert lines[0] == "inv_q,inv_r,admissible"
        assert len(lines) == 1 + 12 * 12
        assert all(line.endswith(",0") for line in lines[1:])

    def test_nonempty_region(self, tmp_path, capsys):
        out_path = tmp_path / "region.csv"
        assert run(["region", "--kind", "heat", "--p0", "2",
                    "--lambda", "10", "--resolution", "12",
                    "--output", str(out_path)]) == 0
        assert "admissible" in capsys.readouterr().out
        flags = [line.rsplit(",", 1)[1]
                 for line in out_path.read_text().splitlines()[1:]]
        assert "1" in flags


class TestDeterminismAndSidecar:
    def test_identical_config_gives_identical_bytes(self, tmp_path, capsys):
        cfg = tmp_path / "decay.cfg"
        cfg.write_text("kind = heat\np = 4/3\nq = 4\nt-min = 0.02\n"
                       "t-max = 0.5\ngrid-n = 32\nn-times = 6\nseed = 5\n")
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(["decay", "--config", str(cfg),
                    "--output", str(a)]) == 0
        assert run(["decay", "--config", str(cfg),
                    "--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        capsys.readouterr()
        # no stray temp files from the atomic writes
        assert not glob.glob(str(tmp_path / ".evoscalar-*"))

    def test_sidecar_shape(self, tmp_path, capsys):
        out_path = tmp_path / "region.csv"
        assert run(["region", "--p0", "1.5", "--lambda", "2",
                    "--resolution", "8", "--output", str(out_path)]) == 0
        capsys.readouterr()
        meta = json.loads((tmp_path / "region.csv.meta.json").read_text())
        assert set(meta) == {"command", "config", "summary"}
        assert meta["command"] == "region"
        assert meta["config"]["p0"] == 1.5
        assert "admissible" in meta["summary"]

    def test_trajectory_schema(self, tmp_path, capsys):
        out_path = tmp_path / "decay.csv"
        assert run(["decay", "--p", "2", "--q", "2", "--grid-n", "16",
                    "--t-min", "0.05", "--t-max", "0.2", "--n-times", "4",
                    "--output", str(out_path)]) == 0
        capsys.readouterr()
        lines = out_path.read_text().splitlines()
        assert lines[0] == "t,Lq_norm,bound_B,ratio"
        assert len(lines) == 5


class TestComputeCommands:
    def test_mlbound_constant(self, capsys):
        assert run(["mlbound", "--alpha", "0.5", "--t-max", "100",
                    "--n-samples", "400"]) == 0
        out = capsys.readouterr().out
        c = _num(out, r"sup \(1\+t\)\|E_\{0\.5\}\(-t\)\|")
        assert c == pytest.approx(1.0, rel=1e-6)

    def test_fracderiv_caputo(self, capsys):
        assert run(["fracderiv", "--order", "0.5", "--power", "1"]) == 0
        out = capsys.readouterr().out
        assert _num(out, r"max \|error\| vs closed form") < 1e-3

    def test_fracderiv_integral(self, capsys):
        assert run(["fracderiv", "--order", "0.5", "--power", "0",
                    "--mode", "integral"]) == 0
        assert _num(capsys.readouterr().out,
                    r"max \|error\| vs closed form") < 1e-10

    def test_fracderiv_rejects_bad_mode(self, capsys):
        assert run(["fracderiv", "--order", "0.5", "--mode", "spectral"]) == 1
        capsys.readouterr()

    def test_fracderiv_rejects_small_power_for_caputo(self, capsys):
        assert run(["fracderiv", "--order", "0.5", "--power", "0.25"]) == 1
        capsys.readouterr()

    def test_sonine_solve_method(self, capsys):
        assert run(["sonine", "--kernel", "rayleighstokes:0.5,1.0",
                    "--method", "solve", "--t-end", "1",
                    "--dt", "1e-2", "--tol", "1e-3"]) == 0
        assert "max |(K*k)(t) - 1|" in capsys.readouterr().out

    def test_resolvent_values(self, tmp_path, capsys):
        out_path = tmp_path / "res.csv"
        assert run(["resolvent", "--kernel", "constant:1", "--lambda", "1",
                    "--t-end", "2", "--dt", "1e-3",
                    "--output", str(out_path)]) == 0
        capsys.readouterr()
        lines = out_path.read_text().splitlines()
        assert lines[0] == "t,s,upper_bound"
        t_last, s_last, _ = lines[-1].split(",")
        assert float(t_last) == pytest.approx(2.0)
        assert float(s_last) == pytest.approx(math.exp(-2.0), abs=1e-3)

    def test_catalog_lists_every_kernel(self, tmp_path, capsys):
        out_path = tmp_path / "cat.csv"
        assert run(["catalog", "--output", str(out_path)]) == 0
        capsys.readouterr()
        lines = out_path.read_text().splitlines()
        assert len(lines) == 1 + len(kernels.pc_catalog())
        assert all(line.endswith(",1") for line in lines[1:])

    def test_countfit_torus(self, capsys):
        assert run(["countfit", "--model", "torus:1", "--s-min", "1e2",
                    "--s-max", "1e4"]) == 0
        out = capsys.readouterr().out
        assert abs(_num(out, "lambda_hat") - 0.5) < 0.05
        assert "nominal = 0.5" in out

    def test_bound_slope_matches_reference(self, capsys):
        assert run(["bound", "--model", "prescribed:1", "--kind", "heat",
                    "--p", "4/3", "--q", "4", "--t-min", "1e-2",
                    "--t-max", "1e2", "--n-times", "17"]) == 0
        out = capsys.readouterr().out
        slope = _num(out, "log-log slope")
        ref = _num(out, r"reference -eff\*\(1/p-1/q\)")
        assert ref == pytest.approx(-0.5)
        assert slope == pytest.approx(ref, rel=0.01)

    def test_picard_field_artifact(self, tmp_path, capsys):
        out_path = tmp_path / "field.txt"
        assert run(["picard", "--eta", "3", "--mu", "-1",
                    "--norm-w0", "1e-2", "--grid-n", "32",
                    "--t-end", "0.1", "--dt", "5e-3",
                    "--output", str(out_path)]) == 0
        assert "converged in" in capsys.readouterr().out
        text = out_path.read_text()
        assert text.splitlines()[0] == "1,32"
        field = field_from_text(text)
        assert field.n == 1 and field.N == 32
        assert np.all(np.isfinite(field.values))


class TestSelftests:
    @pytest.mark.parametrize("cmd", [
        "ml", "fracderiv", "sonine", "resolvent", "catalog", "region",
    ])
    def test_quick_selftests_pass(self, cmd, capsys):
        assert run([cmd, "--selftest"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out and "passed" in out

    def test_selftest_ignores_missing_required(self, capsys):
        # --selftest must not demand the subcommand's required options
        assert run(["ml", "--selftest"]) == 0
        capsys.readouterr()
