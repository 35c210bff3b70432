"""CLI and CSV contract tests.

Each subcommand is exercised in-process through main() so exit codes
and diagnostics are checked exactly as the console script sees them;
two subprocess tests confirm the installed entry point.
"""
import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from backflow.analytic import resummed_nonmarkovianity, weak_coupling_params
from backflow.cli import main, parse_config
from backflow.csvio import (
    format_float,
    read_distance,
    read_trajectory,
    write_sweep,
    write_trajectory,
)
from backflow.errors import ConfigError, SchemaError
from backflow.measure import BlochTrajectory

# frozen from the analytic-module oracles
RESUMMED_01_20 = 0.0962431779345551
OMEGA_C_SIGN_ROOT = 36.873708327254609


def run_cli(capsys, argv):
    try:
        rc = main(argv)
    except SystemExit as exc:  # argparse's own exits
        rc = exc.code
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def read_rows(path):
    """Parse a CSV written by this package: (meta_lines, header, rows)."""
    meta, header, rows = [], None, []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                meta.append(line)
            elif header is None:
                header = line
            elif line:
                rows.append(line.split(","))
    return meta, header, rows


@pytest.fixture(scope="module")
def analytic_traj_csv(tmp_path_factory):
    """One shared analytic (0.1, 20) trajectory file."""
    path = tmp_path_factory.mktemp("cli") / "traj.csv"
    rc = main([
        "simulate", "--solver", "analytic", "--alpha", "0.1",
        "--omega-c", "20", "--out", str(path),
    ])
    assert rc == 0
    return path


class TestParseConfig:
    def test_flag_overrides_file(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("solver = analytic\nalpha = 0.1\nomega_c = 20\n")
        cfg = parse_config(str(cfg_file), {"alpha": 0.2})
        assert cfg.alpha == 0.2
        assert cfg.omega_c == 20.0

    def test_comment_only_file_plus_flags(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("# nothing but comments\n\n   # more\n")
        cfg = parse_config(
            str(cfg_file), {"solver": "tcl2", "alpha": 0.1, "omega_c": 20.0}
        )
        assert cfg.solver == "tcl2"

    def test_missing_solver_names_all_three(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("alpha = 0.1\nomega_c = 20\n")
        with pytest.raises(ConfigError) as err:
            parse_config(str(cfg_file), {})
        for name in ("exact", "tcl2", "analytic"):
            assert name in str(err.value)

    def test_unknown_key_reports_line_and_valid_keys(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("solver = analytic\nn_bogus = 3\n")
        with pytest.raises(ConfigError) as err:
            parse_config(str(cfg_file), {})
        msg = str(err.value)
        assert ":2:" in msg and "n_bogus" in msg
        for key in ("alpha", "omega_c", "n_exc", "krylov_dim", "out"):
            assert key in msg

    def test_malformed_line_reports_line_number(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("solver = analytic\njust words\n")
        with pytest.raises(ConfigError, match=":2:"):
            parse_config(str(cfg_file), {})

    def test_non_numeric_value_reports_line_number(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("alpha = fast\n")
        with pytest.raises(ConfigError) as err:
            parse_config(str(cfg_file), {})
        assert ":1:" in str(err.value) and "float" in str(err.value)

    def test_solver_grid_defaults(self):
        base = {"alpha": 0.1, "omega_c": 20.0}
        cfg = parse_config(None, {"solver": "analytic", **base})
        assert (cfg.t_max, cfg.dt) == (30.0, 0.01)
        cfg = parse_config(None, {"solver": "tcl2", **base})
        assert (cfg.t_max, cfg.dt) == (30.0, 1e-3)
        cfg = parse_config(None, {"solver": "exact", **base})
        assert (cfg.t_max, cfg.dt) == (10.0, 0.1)

    @pytest.mark.parametrize(
        "bad",
        [
            {"alpha": -0.1},
            {"omega_c": 0.0},
            {"delta": -1.0},
            {"dt": 0.5, "t_max": 0.1},
            {"krylov_dim": 1},
            {"n_modes": 0},
            {"solver": "magic"},
        ],
    )
    def test_out_of_range_fields_rejected(self, bad):
        values = {"solver": "analytic", "alpha": 0.1, "omega_c": 20.0}
        values.update(bad)
        with pytest.raises(ConfigError):
            parse_config(None, values)

    def test_exact_only_fields_warn_for_other_solvers(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        rc, _, err = run_cli(capsys, [
            "simulate", "--solver", "analytic", "--alpha", "0.1",
            "--omega-c", "20", "--n-exc", "4", "--t-max", "1",
            "--out", str(out),
        ])
        assert rc == 0
        assert "warning" in err and "n_exc" in err and "analytic" in err

    def test_exact_solver_reads_its_fields_silently(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        rc, _, err = run_cli(capsys, [
            "simulate", "--solver", "exact", "--alpha", "0.0",
            "--omega-c", "5", "--modes", "3", "--n-exc", "1",
            "--t-max", "1", "--dt", "0.1", "--out", str(out),
        ])
        assert rc == 0
        assert "warning" not in err


class TestSimulate:
    def test_analytic_sz_starts_at_one_in_file(self, analytic_traj_csv):
        _, header, rows = read_rows(analytic_traj_csv)
        assert header == "time,sx,sy,sz"
        assert float(rows[0][0]) == 0.0
        assert rows[0][3] == "1.00000000e+00"

    def test_exact_alpha_zero_free_spin(self, tmp_path, capsys):
        out = tmp_path / "free.csv"
        rc, _, _ = run_cli(capsys, [
            "simulate", "--solver", "exact", "--alpha", "0",
            "--omega-c", "5", "--modes", "4", "--n-exc", "1",
            "--t-max", "5", "--dt", "0.05", "--out", str(out),
        ])
        assert rc == 0
        traj = read_trajectory(str(out))
        assert np.max(np.abs(traj.sz - np.cos(2.0 * traj.t))) < 1e-8

    def test_tcl2_breakdown_sz_exceeds_one(self, tmp_path, capsys):
        out = tmp_path / "tcl.csv"
        rc, _, _ = run_cli(capsys, [
            "simulate", "--solver", "tcl2", "--alpha", "0.3",
            "--omega-c", "20", "--out", str(out),
        ])
        assert rc == 0
        traj = read_trajectory(str(out))
        assert np.max(traj.sz) > 1.0

    def test_identical_configs_are_byte_identical(self, tmp_path, capsys):
        args = [
            "simulate", "--solver", "analytic", "--alpha", "0.2",
            "--omega-c", "10", "--t-max", "5", "--out",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(capsys, args + [str(a)])[0] == 0
        assert run_cli(capsys, args + [str(b)])[0] == 0
        assert a.read_bytes() == b.read_bytes()
        assert b"\r" not in a.read_bytes()

    def test_metadata_has_version_and_no_timestamps(self, analytic_traj_csv):
        meta, _, _ = read_rows(analytic_traj_csv)
        joined = "\n".join(meta)
        assert "# version = " in joined
        for word in ("time_", "date", "stamp"):
            assert word not in joined

    def test_missing_out_is_config_error(self, capsys):
        rc, _, err = run_cli(capsys, [
            "simulate", "--solver", "analytic", "--alpha", "0.1",
            "--omega-c", "20",
        ])
        assert rc == 2
        assert "out" in err


class TestMeasure:
    def test_analytic_n_value_near_reference(self, analytic_traj_csv,
                                             tmp_path, capsys):
        out = tmp_path / "dist.csv"
        rc, stdout, _ = run_cli(capsys, [
            "measure", str(analytic_traj_csv), "--out", str(out),
        ])
        assert rc == 0
        summary = json.loads(stdout)
        assert 0.093 < summary["n_value"] < 0.097
        assert summary["converged"] is True
        assert summary["n_intervals"] >= 10
        series, meta = read_distance(str(out))
        assert meta["eps_sigma"] == 1e-4
        assert abs(series.d[0] - 1.0) < 1e-12

    def test_roundtrip_reproduces_resummed_value(self, analytic_traj_csv,
                                                 tmp_path, capsys):
        out = tmp_path / "dist.csv"
        rc, stdout, _ = run_cli(capsys, [
            "measure", str(analytic_traj_csv), "--out", str(out),
        ])
        assert rc == 0
        summary = json.loads(stdout)
        p = weak_coupling_params(0.1, 20.0)
        resummed, _ = resummed_nonmarkovianity(p)
        assert abs(resummed - RESUMMED_01_20) < 1e-12
        # horizon truncation is covered by the geometric tail estimate;
        # the remainder is boundary interpolation error, O(dt^2) per
        # detected interval on the dt = 0.01 grid
        assert abs(summary["n_value"] - resummed) < (
            summary["tail_estimate"] + 2e-4
        )

    def test_monotone_synthetic_gives_zero(self, tmp_path, capsys):
        t = np.linspace(0.0, 10.0, 201)
        traj = BlochTrajectory(
            t=t, sx=np.zeros_like(t), sy=np.zeros_like(t),
            sz=np.exp(-0.3 * t), meta={"solver": "synthetic", "delta": 1.0},
        )
        src = tmp_path / "mono.csv"
        write_trajectory(str(src), traj)
        rc, stdout, _ = run_cli(capsys, [
            "measure", str(src), "--out", str(tmp_path / "d.csv"),
        ])
        assert rc == 0
        summary = json.loads(stdout)
        assert summary["n_value"] == 0.0
        assert summary["n_intervals"] == 0

    def test_explicit_tail_flags_match_inferred(self, analytic_traj_csv,
                                                tmp_path, capsys):
        p = weak_coupling_params(0.1, 20.0)
        rc, auto_out, _ = run_cli(capsys, [
            "measure", str(analytic_traj_csv),
            "--out", str(tmp_path / "a.csv"),
        ])
        assert rc == 0
        rc, flag_out, _ = run_cli(capsys, [
            "measure", str(analytic_traj_csv),
            "--out", str(tmp_path / "b.csv"),
            "--tail-gamma", repr(p.gamma),
            "--tail-delta-tilde", repr(p.delta_tilde),
        ])
        assert rc == 0
        assert json.loads(auto_out) == json.loads(flag_out)

    def test_half_tail_model_rejected(self, analytic_traj_csv, tmp_path,
                                      capsys):
        rc, _, err = run_cli(capsys, [
            "measure", str(analytic_traj_csv),
            "--out", str(tmp_path / "d.csv"), "--tail-gamma", "0.2",
        ])
        assert rc == 2
        assert "tail" in err

    def test_missing_delta_needs_flag(self, tmp_path, capsys):
        t = np.linspace(0.0, 1.0, 11)
        traj = BlochTrajectory(
            t=t, sx=np.zeros_like(t), sy=np.zeros_like(t),
            sz=np.cos(2 * t), meta={"solver": "synthetic"},
        )
        src = tmp_path / "nodelta.csv"
        write_trajectory(str(src), traj)
        dest = str(tmp_path / "d.csv")
        rc, _, err = run_cli(capsys, ["measure", str(src), "--out", dest])
        assert rc == 2 and "delta" in err
        rc, _, _ = run_cli(capsys, [
            "measure", str(src), "--out", dest, "--delta", "1.0",
        ])
        assert rc == 0

    def test_schema_violation_names_column_and_row(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text(
            "time,sx,sy,sz\n0.0,0.0,0.0,1.0\n0.1,0.0,0.0,oops\n"
        )
        rc, _, err = run_cli(capsys, [
            "measure", str(bad), "--out", str(tmp_path / "d.csv"),
        ])
        assert rc == 4
        assert "sz" in err and "row 2" in err

    def test_wrong_header_is_schema_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("time,a,b\n0.0,1.0,2.0\n")
        rc, _, err = run_cli(capsys, [
            "measure", str(bad), "--out", str(tmp_path / "d.csv"),
        ])
        assert rc == 4
        assert "time,sx,sy,sz" in err


class TestSweep:
    def test_analytic_sweep_strictly_decreasing(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        alphas = "0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45"
        rc, _, _ = run_cli(capsys, [
            "sweep", "--solver", "analytic", "--alphas", alphas,
            "--omega-cs", "20", "--out", str(out),
        ])
        assert rc == 0
        _, header, rows = read_rows(out)
        assert header == (
            "alpha,omega_c,solver,n_value,n_intervals,horizon,"
            "converged,status"
        )
        n_values = [float(r[3]) for r in rows]
        assert len(n_values) == 8
        assert all(a > b for a, b in zip(n_values, n_values[1:]))
        assert all(r[7] == "ok" for r in rows)

    def test_rows_enumerate_omega_c_outer_alpha_inner(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        rc, _, _ = run_cli(capsys, [
            "sweep", "--solver", "analytic", "--alphas", "0.1,0.2",
            "--omega-cs", "10,20", "--t-max", "5", "--out", str(out),
        ])
        assert rc == 0
        _, _, rows = read_rows(out)
        grid = [(float(r[0]), float(r[1])) for r in rows]
        assert grid == [(0.1, 10.0), (0.2, 10.0), (0.1, 20.0), (0.2, 20.0)]

    def test_point_failure_lands_in_status_column(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        rc, _, _ = run_cli(capsys, [
            "sweep", "--solver", "analytic", "--alphas", "0.1,0.6",
            "--omega-cs", "20", "--t-max", "5", "--out", str(out),
        ])
        assert rc == 0
        _, _, rows = read_rows(out)
        assert rows[0][7] == "ok"
        assert math.isnan(float(rows[1][3]))
        assert rows[1][4] == "nan"
        assert "DomainError" in rows[1][7]
        assert "," not in rows[1][7]

    def test_empty_alphas_is_config_error(self, tmp_path, capsys):
        rc, _, err = run_cli(capsys, [
            "sweep", "--solver", "analytic", "--alphas", "",
            "--omega-cs", "20", "--out", str(tmp_path / "s.csv"),
        ])
        assert rc == 2
        assert "alphas" in err

    def test_jobs_output_matches_serial(self, tmp_path, capsys):
        args = [
            "sweep", "--solver", "analytic", "--alphas", "0.1,0.2,0.3",
            "--omega-cs", "20", "--t-max", "5", "--out",
        ]
        serial, parallel = tmp_path / "s1.csv", tmp_path / "s2.csv"
        assert run_cli(capsys, args + [str(serial)])[0] == 0
        assert run_cli(capsys, args + [str(parallel), "--jobs", "2"])[0] == 0
        assert serial.read_bytes() == parallel.read_bytes()


class TestLimit:
    def test_prints_both_values(self, capsys):
        rc, out, _ = run_cli(capsys, ["limit", "--omega-c", "20"])
        assert rc == 0
        lines = out.splitlines()
        assert lines[0].startswith("alpha_zero_limit = ")
        assert lines[1].startswith("resummed_alpha_1e-4 = ")
        limit = float(lines[0].split("=")[1])
        assert abs(limit - (-0.113595836799)) < 1e-9

    def test_scale_invariance_is_byte_identical(self, capsys):
        rc, out_a, _ = run_cli(capsys, ["limit", "--omega-c", "40"])
        assert rc == 0
        rc, out_b, _ = run_cli(
            capsys, ["limit", "--omega-c", "80", "--delta", "2"]
        )
        assert rc == 0
        assert out_a == out_b

    def test_limit_magnitude_small_at_sign_change_root(self, capsys):
        rc, out, _ = run_cli(
            capsys, ["limit", "--omega-c", repr(OMEGA_C_SIGN_ROOT)]
        )
        assert rc == 0
        limit = float(out.splitlines()[0].split("=")[1])
        assert abs(limit) < 1e-3


class TestCsvIO:
    def test_format_float_normalizes_negative_zero(self):
        assert format_float(0.0) == "0.00000000e+00"
        assert format_float(-0.0) == "0.00000000e+00"
        assert format_float(1.0 / 3.0) == "3.33333333e-01"
        assert format_float(-1.5e-7) == "-1.50000000e-07"

    def test_trajectory_roundtrip_preserves_meta_types(self, tmp_path):
        t = np.linspace(0.0, 1.0, 11)
        meta = {
            "solver": "exact", "alpha": 0.1, "n_modes": 200,
            "per_mode_cap": None, "spin_up": True, "mirrored": False,
        }
        traj = BlochTrajectory(
            t=t, sx=np.sin(t), sy=np.cos(t) * 0.1, sz=np.cos(t), meta=meta
        )
        path = tmp_path / "r.csv"
        write_trajectory(str(path), traj)
        back = read_trajectory(str(path))
        assert back.meta["solver"] == "exact"
        assert back.meta["alpha"] == 0.1
        assert back.meta["n_modes"] == 200
        assert back.meta["per_mode_cap"] is None
        assert back.meta["spin_up"] is True
        assert back.meta["mirrored"] is False
        assert np.max(np.abs(back.sz - traj.sz)) < 1e-8

    def test_missing_header_raises(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("# solver = x\n")
        with pytest.raises(SchemaError, match="header"):
            read_trajectory(str(path))

    def test_wrong_column_count_raises_with_line(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("time,sx,sy,sz\n0.0,1.0\n")
        with pytest.raises(SchemaError, match="columns"):
            read_trajectory(str(path))

    def test_single_row_trajectory_rejected(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("time,sx,sy,sz\n0.0,0.0,0.0,1.0\n")
        with pytest.raises(SchemaError, match="2 rows"):
            read_trajectory(str(path))

    def test_sweep_writer_handles_nan_interval_count(self, tmp_path):
        path = tmp_path / "s.csv"
        rows = [{
            "alpha": 0.1, "omega_c": 20.0, "solver": "analytic",
            "n_value": math.nan, "n_intervals": math.nan,
            "horizon": math.nan, "converged": False,
            "status": "boom, with commas\nand newline",
        }]
        write_sweep(str(path), rows, {"solver": "analytic"})
        _, _, parsed = read_rows(path)
        assert parsed[0][4] == "nan"
        assert parsed[0][7] == "boom; with commas and newline"


@pytest.mark.skipif(
    shutil.which("backflow") is None, reason="entry point not installed"
)
class TestConsoleScript:
    def test_limit_runs_from_shell(self):
        proc = subprocess.run(
            ["backflow", "limit", "--omega-c", "20"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "alpha_zero_limit" in proc.stdout

    def test_unknown_flag_exits_two(self):
        proc = subprocess.run(
            ["backflow", "simulate", "--nope"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 2
