import json
import subprocess
import sys

import pytest


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "cascade_lab", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


GRID = [
    "--t-min", "0.5", "--t-max", "1.5", "--x-min", "0.5", "--x-max", "1.5",
    "--nt", "3", "--nx", "3",
]


class TestInvariants:
    def test_stdout_json_values(self):
        res = run_cli("invariants", "--kappa", "0.5", *GRID)
        assert res.returncode == 0
        data = json.loads(res.stdout)
        assert data["P"] == 1.0
        assert data["Q"] == 1.0
        assert data["pass"] is True
        assert data["max_pq_deviation"] <= 1e-9
        assert len(data["samples"]) == 9

    def test_fd_path_flag(self):
        res = run_cli("invariants", "--kappa", "2", "--fd", *GRID)
        assert res.returncode == 0
        data = json.loads(res.stdout)
        assert data["path"] == "fd"
        assert data["P"] == pytest.approx(-2.0, abs=1e-5)

    def test_output_file_and_determinism(self, tmp_path):
        out = tmp_path / "inv.json"
        args = ["invariants", "--kappa", "0.5", *GRID, "--output", str(out)]
        assert run_cli(*args).returncode == 0
        first = out.read_bytes()
        assert run_cli(*args).returncode == 0
        assert out.read_bytes() == first

    def test_failing_tolerance_exits_one(self):
        res = run_cli("invariants", "--kappa", "0.5", *GRID, "--tol", "1e-30")
        assert res.returncode == 1


class TestSolveEp:
    def test_fixture_row_and_report(self, tmp_path):
        out = tmp_path / "u.csv"
        res = run_cli(
            "solve-ep", "--kappa", "0.5", "--S", "0", "--R", "1",
            "--mode", "natural", *GRID, "--output", str(out),
        )
        assert res.returncode == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "t,x,u"
        assert len(lines) == 10  # header + 3x3
        assert "1,1,2.666666666666667" in lines
        report = json.loads((tmp_path / "u.verify.json").read_text())
        assert report["pass"] is True
        assert sorted(report) == [
            "equation", "grid", "h", "kappa", "max_abs_residual",
            "order_estimate", "pass",
        ]

    def test_two_by_two_grid_has_five_lines(self, tmp_path):
        out = tmp_path / "u.csv"
        res = run_cli(
            "solve-ep", "--kappa", "0.5", "--S", "0", "--R", "1", "--mode", "natural",
            "--t-min", "0.5", "--t-max", "1.5", "--x-min", "0.5", "--x-max", "1.5",
            "--nt", "2", "--nx", "2", "--output", str(out),
        )
        assert res.returncode == 0
        assert len(out.read_text().splitlines()) == 5

    def test_byte_determinism(self, tmp_path):
        out = tmp_path / "u.csv"
        args = [
            "solve-ep", "--kappa", "2", "--S", "sin(t)", "--R", "1+x^2/10",
            "--mode", "base-point", "--x0", "0.25", *GRID, "--output", str(out),
        ]
        assert run_cli(*args).returncode == 0
        first = out.read_bytes()
        rep_first = (tmp_path / "u.verify.json").read_bytes()
        assert run_cli(*args).returncode == 0
        assert out.read_bytes() == first
        assert (tmp_path / "u.verify.json").read_bytes() == rep_first

    def test_impossible_tolerance_exits_one(self, tmp_path):
        out = tmp_path / "u.csv"
        res = run_cli(
            "solve-ep", "--kappa", "0.5", "--S", "0", "--R", "1", "--mode", "natural",
            *GRID, "--output", str(out), "--tol", "1e-30",
        )
        assert res.returncode == 1

    def test_missing_output_is_config_error(self):
        res = run_cli("solve-ep", "--kappa", "0.5", *GRID)
        assert res.returncode == 2

    def test_plot_writes_png(self, tmp_path):
        out = tmp_path / "u.csv"
        res = run_cli(
            "solve-ep", "--kappa", "0.5", "--S", "0", "--R", "1", "--mode", "natural",
            *GRID, "--output", str(out), "--plot",
        )
        assert res.returncode == 0
        png = tmp_path / "u.png"
        assert png.exists()
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


class TestSolveHs:
    def test_fixture_grid(self, tmp_path):
        out = tmp_path / "hs.csv"
        res = run_cli(
            "solve-hs", "--kappa", "0.5", "--S", "0", "--R", "1", "--mode", "natural",
            "--t-min", "1.8", "--t-max", "2.2", "--x-min", "-8", "--x-max", "-1",
            "--nt", "3", "--nx", "4", "--output", str(out),
        )
        assert res.returncode == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "t_tilde,x_tilde,u_tilde"
        # closed form u~ = (-6 x~)^(2/3)/4, t~-independent
        row = lines[1].split(",")
        assert float(row[2]) == pytest.approx((6 * 8) ** (2 / 3) / 4, abs=1e-8)
        report = json.loads((tmp_path / "hs.verify.json").read_text())
        assert report["pass"] is True
        assert report["equation"] == "hs"

    def test_unattainable_rectangle_is_config_error(self, tmp_path):
        out = tmp_path / "hs.csv"
        res = run_cli(
            "solve-hs", "--kappa", "0.5", "--S", "0", "--R", "1", "--mode", "natural",
            "--t-min", "1.8", "--t-max", "2.2", "--x-min", "1", "--x-max", "2",
            "--nt", "2", "--nx", "2", "--output", str(out),
        )
        assert res.returncode == 2
        assert "attainable" in res.stderr


class TestTransform:
    def test_fixture_jet(self):
        res = run_cli(
            "transform", "--kappa", "0.5",
            "--jet", "1,1,2.6666667,5.3333333,5.3333333",
        )
        assert res.returncode == 0
        data = json.loads(res.stdout)
        image = data["image"]
        printed = [round(v, 7) for v in image]
        assert printed == [2.0, -1.3333333, 1.0, 0.0, -0.5]
        assert data["round_trip_max_abs_error"] <= 1e-12

    def test_byte_determinism(self):
        args = ["transform", "--kappa", "0.5", "--jet", "1,1,2.6666667,5.3333333,5.3333333"]
        a = run_cli(*args)
        b = run_cli(*args)
        assert a.stdout == b.stdout

    def test_malformed_jet(self):
        res = run_cli("transform", "--kappa", "0.5", "--jet", "1,2,3")
        assert res.returncode == 2

    def test_singular_jet_is_config_error(self):
        res = run_cli("transform", "--kappa", "0.5", "--jet", "1,-1,0,0,0")
        assert res.returncode == 2


class TestVerifyCascade:
    def test_chain_passes(self):
        res = run_cli(
            "verify-cascade", "--kappa", "2", "--S", "t^2/4", "--R", "1",
            "--mode", "natural", *GRID,
        )
        assert res.returncode == 0
        data = json.loads(res.stdout)
        assert data["pass"] is True
        for key in ("b1_max_abs", "b2_max_abs", "b3b4_max_abs", "antiderivative_max_abs"):
            assert data[key] <= 1e-8

    def test_failing_tolerance_exits_one(self):
        res = run_cli(
            "verify-cascade", "--kappa", "2", "--S", "0", "--R", "1",
            "--mode", "natural", *GRID, "--tol", "1e-300",
        )
        assert res.returncode == 1


class TestConfigAndErrors:
    def test_config_file_with_flag_override(self, tmp_path):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text(
            "# fixture run\n"
            "kappa=0.5\nS=0\nR=1\nmode=natural\n"
            "t_min=0.5\nt_max=1.5\nx_min=0.5\nx_max=1.5\nnt=3\nnx=3\n"
        )
        out = tmp_path / "u.csv"
        res = run_cli(
            "solve-ep", "--config", str(cfgfile), "--kappa", "2.0",
            "--output", str(out),
        )
        assert res.returncode == 0
        report = json.loads((tmp_path / "u.verify.json").read_text())
        assert report["kappa"] == 2.0  # flag wins over file

    def test_config_file_alone(self, tmp_path):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("kappa=0.5\nnt=3\nnx=3\n")
        res = run_cli("invariants", "--config", str(cfgfile))
        assert res.returncode == 0
        assert json.loads(res.stdout)["kappa"] == 0.5

    def test_zero_kappa(self):
        res = run_cli("invariants", "--kappa", "0", *GRID)
        assert res.returncode == 2
        assert "kappa" in res.stderr

    def test_bad_expression_offset_reported(self):
        res = run_cli(
            "solve-ep", "--kappa", "0.5", "--S", "t +", "--R", "1", *GRID,
            "--output", "/tmp/never-written.csv",
        )
        assert res.returncode == 2
        assert "offset 3" in res.stderr

    def test_rectangle_crossing_singular_line(self):
        res = run_cli(
            "invariants", "--kappa", "0.5",
            "--t-min", "-2", "--t-max", "1", "--x-min", "0", "--x-max", "1",
            "--nt", "3", "--nx", "3",
        )
        assert res.returncode == 2

    def test_counts_below_two(self):
        res = run_cli("invariants", "--kappa", "0.5", "--nt", "1", "--nx", "3")
        assert res.returncode == 2

    def test_unwritable_output_names_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        target = blocker / "report.json"  # parent is a file
        res = run_cli("invariants", "--kappa", "0.5", *GRID, "--output", str(target))
        assert res.returncode == 2
        assert "report.json" in res.stderr

    def test_missing_config_file(self):
        res = run_cli("invariants", "--kappa", "0.5", "--config", "/nonexistent.cfg")
        assert res.returncode == 2

    def test_no_command_shows_help(self):
        res = run_cli()
        assert res.returncode == 2

    def test_natural_mode_with_non_constant_r(self, tmp_path):
        res = run_cli(
            "solve-ep", "--kappa", "0.5", "--S", "0", "--R", "1+x",
            "--mode", "natural", *GRID, "--output", str(tmp_path / "u.csv"),
        )
        assert res.returncode == 2
