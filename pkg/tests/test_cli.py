"""Command line interface: config handling and subcommand smoke runs."""

import json

import numpy as np
import pytest

from sparseland import __version__
from sparseland.cli import main, parse_config_file
from sparseland.errors import ParameterError
from sparseland.gridio import read_grid, read_trace_csv, write_grid
from sparseland.transforms import WaveletSpec, idwt_array


class TestConfigFile:
    def test_parse_key_values(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment\n\n p = 1.5 \nmu=0.01\n")
        assert parse_config_file(cfg) == {"p": "1.5", "mu": "0.01"}

    def test_bad_line_reports_location(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("p=1\njust words\n")
        with pytest.raises(ParameterError, match="2"):
            parse_config_file(cfg)

    def test_unknown_keys_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("epsilonn=0.1\n")
        code = main(["bounds", "--config", str(cfg), "--epsilon", "0.1",
                     "--rho", "1.0"])
        assert code == 2
        assert "unknown config keys" in capsys.readouterr().err

    def test_flag_beats_config_beats_default(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("epsilon=0.25\nrho=1.0\n")
        assert main(["bounds", "--config", str(cfg)]) == 0
        out = capsys.readouterr().out
        assert "epsilon=0.25" in out
        assert "p=1" in out  # built-in default survives
        assert main(["bounds", "--config", str(cfg), "--epsilon", "0.5"]) == 0
        assert "epsilon=0.5" in capsys.readouterr().out


class TestBounds:
    def test_balanced_schedule_report(self, capsys, tmp_path):
        report_path = tmp_path / "report.txt"
        code = main(["bounds", "--epsilon", "0.1", "--rho", "2.0",
                     "--p", "1.0", "--output", str(report_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "mu=0.005" in out
        assert f"eps_primed={np.sqrt(2.0) * 0.1:.12g}" in out
        assert "rho_primed=4" in out
        assert report_path.read_text().strip() == out.strip()

    def test_envelope_and_rate_sections(self, capsys, tmp_path):
        env = tmp_path / "env.txt"
        np.savetxt(env, np.column_stack([[0.25], [0.25], [1.0]]))
        code = main(["bounds", "--epsilon", "0.1", "--rho", "2.0",
                     "--envelope-file", str(env),
                     "--alpha", "1.0", "--sigma", "1.0",
                     "--a-lower", "1.0", "--a-upper", "1.0"])
        assert code == 0
        out = capsys.readouterr().out
        assert "modulus_lower=0.2" in out
        assert "modulus_upper=0.2" in out
        assert "rate_lower=" in out and "rate_upper=" in out

    def test_partial_rate_options_rejected(self, capsys):
        code = main(["bounds", "--epsilon", "0.1", "--rho", "1.0",
                     "--alpha", "1.0"])
        assert code == 2
        assert "--sigma" in capsys.readouterr().err

    def test_missing_required_options(self, capsys):
        assert main(["bounds", "--epsilon", "0.1"]) == 2
        assert "--rho" in capsys.readouterr().err


class TestSolve:
    def _write_inputs(self, tmp_path, entries="0.9 0.5"):
        op = tmp_path / "op.txt"
        op.write_text(entries + "\n")
        data = tmp_path / "data.txt"
        data.write_text("1.0 1.0\n")
        return op, data

    def test_diagonal_solve_reaches_the_minimizer(self, tmp_path, capsys):
        op, data = self._write_inputs(tmp_path)
        out = tmp_path / "out"
        code = main(["solve", "--operator", "diagonal",
                     "--operator-file", str(op), "--data", str(data),
                     "--p", "1.0", "--mu", "0.1",
                     "--iterations", "400", "--step-tolerance", "0",
                     "--output-dir", str(out)])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["status"] in ("converged_step", "max_iterations")
        assert summary["renormalization_scale"] == 1.0
        solution = read_grid(out / "solution.grid")[0]
        # per-component stationarity: f = (sigma g - mu/2) / sigma^2
        expected = [(0.9 - 0.05) / 0.81, (0.5 - 0.05) / 0.25]
        np.testing.assert_allclose(solution, expected, atol=1e-8)
        trace = read_trace_csv(out / "trace.csv")
        assert trace["objective"].size == summary["iterations"] + 1
        assert np.all(np.diff(trace["objective"]) <= 1e-12)

    def test_oversized_operator_is_renormalized(self, tmp_path, capsys):
        op, data = self._write_inputs(tmp_path, entries="1.5 0.5")
        out = tmp_path / "out"
        code = main(["solve", "--operator", "diagonal",
                     "--operator-file", str(op), "--data", str(data),
                     "--p", "1.0", "--mu", "0.1",
                     "--iterations", "400", "--step-tolerance", "0",
                     "--output-dir", str(out)])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["renormalization_scale"] > 1.0
        # rescaling double-adjusts the multiplier, so the minimizer is the
        # one for the original problem
        solution = read_grid(out / "solution.grid")[0]
        expected = [(1.5 - 0.05) / 2.25, (0.5 - 0.05) / 0.25]
        np.testing.assert_allclose(solution, expected, atol=1e-8)

    def test_projection_from_config_file(self, tmp_path):
        op, _ = self._write_inputs(tmp_path)
        data = tmp_path / "neg.txt"
        data.write_text("-1.0 1.0\n")
        cfg = tmp_path / "run.cfg"
        cfg.write_text("project_nonnegative=yes\nmu=0.1\n")
        out = tmp_path / "out"
        code = main(["solve", "--config", str(cfg), "--operator", "diagonal",
                     "--operator-file", str(op), "--data", str(data),
                     "--iterations", "100", "--output-dir", str(out)])
        assert code == 0
        assert read_grid(out / "solution.grid").min() >= 0.0

    def test_wavelet_mode_writes_both_grids(self, tmp_path, capsys):
        op = tmp_path / "op.txt"
        op.write_text(" ".join(["0.8"] * 8) + "\n")
        data = tmp_path / "data.txt"
        data.write_text("0 0 1 1 1 1 0 0\n")
        out = tmp_path / "out"
        code = main(["solve", "--operator", "diagonal",
                     "--operator-file", str(op), "--data", str(data),
                     "--wavelet", "haar:2", "--besov-s", "0.5",
                     "--p", "1.5", "--mu", "0.01",
                     "--iterations", "300", "--output-dir", str(out)])
        assert code == 0
        coeffs = read_grid(out / "solution_coefficients.grid")[0]
        pixels = read_grid(out / "solution.grid")[0]
        rebuilt = idwt_array(coeffs, WaveletSpec("haar", 2), (8,))
        np.testing.assert_allclose(pixels, rebuilt, atol=1e-12)

    def test_convolution_operator_on_grid_data(self, tmp_path, capsys):
        data_path = tmp_path / "data.grid"
        rng = np.random.default_rng(3)
        write_grid(data_path, np.abs(rng.normal(size=(8, 8))))
        out = tmp_path / "out"
        code = main(["solve", "--operator", "convolution",
                     "--data", str(data_path), "--mu", "0.001",
                     "--iterations", "50", "--output-dir", str(out)])
        assert code == 0
        assert read_grid(out / "solution.grid").shape == (8, 8)

    def test_bad_wavelet_spec(self, tmp_path, capsys):
        op, data = self._write_inputs(tmp_path)
        code = main(["solve", "--operator", "diagonal",
                     "--operator-file", str(op), "--data", str(data),
                     "--mu", "0.1", "--wavelet", "db2",
                     "--output-dir", str(tmp_path / "o")])
        assert code == 2
        assert "family:levels" in capsys.readouterr().err

    def test_missing_operator_file(self, tmp_path, capsys):
        _, data = self._write_inputs(tmp_path)
        code = main(["solve", "--operator", "diagonal", "--data", str(data),
                     "--mu", "0.1", "--output-dir", str(tmp_path / "o")])
        assert code == 2
        assert "--operator-file" in capsys.readouterr().err


class TestExperimentCommand:
    def test_small_run_with_selected_cases(self, tmp_path, capsys):
        out = tmp_path / "exp"
        code = main(["experiment", "--grid", "64", "--pad", "128",
                     "--iterations", "5", "--cases", "l1,l2",
                     "--output-dir", str(out)])
        assert code == 0
        printed = capsys.readouterr().out
        assert "l1:" in printed and "l2:" in printed
        assert "max expected pixel count" in printed
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest["cases"]) == {"l1", "l2"}

    def test_custom_case(self, tmp_path, capsys):
        out = tmp_path / "exp"
        code = main(["experiment", "--grid", "64", "--pad", "128",
                     "--iterations", "5", "--p", "1.5", "--mu", "0.01",
                     "--project-nonnegative", "--output-dir", str(out)])
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert list(manifest["cases"]) == ["custom"]
        assert manifest["cases"]["custom"]["project"] is True

    def test_unknown_case_name(self, tmp_path, capsys):
        code = main(["experiment", "--cases", "l1,bogus",
                     "--output-dir", str(tmp_path / "o")])
        assert code == 2
        assert "bogus" in capsys.readouterr().err

    def test_output_dir_required(self, capsys):
        assert main(["experiment", "--grid", "64"]) == 2
        assert "--output-dir" in capsys.readouterr().err


class TestTopLevel:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out.strip() == __version__

    def test_subcommand_required(self, capsys):
        with pytest.raises(SystemExit):
            main([])
