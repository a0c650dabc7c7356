"""End-to-end tests of the command-line interface."""

from __future__ import annotations

import json
import shutil
import subprocess
import sys

import pytest

from rxchain.cli import run
from rxchain.model import reference_chain_path

CHAIN = str(reference_chain_path())


def _plan_doc():
    return {
        "rf_band_hz": [3.1e9, 3.5e9],
        "lo1_mode": "high-side",
        "lo2_hz": 540e6,
        "if2_hz": 60e6,
        "passband_hz": 5e6,
    }


class TestArgumentErrors:
    def test_no_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as err:
            run([])
        assert err.value.code == 2

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as err:
            run(["defragment"])
        assert err.value.code == 2

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as err:
            run(["analyze", "--chain", CHAIN, "--bogus", "1"])
        assert err.value.code == 2


class TestValidate:
    def test_reference_chain_is_valid(self, capsys):
        assert run(["validate", "--chain", CHAIN]) == 0
        out = capsys.readouterr().out
        assert "valid (14 stages)" in out

    def test_invalid_chain_lists_all_problems(self, tmp_path, capsys):
        doc = {
            "name": "bad",
            "plan": _plan_doc(),
            "stages": [
                {"label": "f1", "kind": "filter", "gain_db": 2.0},
                {"label": "f1", "kind": "filter", "gain_db": -1.0},
            ],
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        assert run(["validate", "--chain", str(path)]) == 1
        out = capsys.readouterr().out
        assert "INVALID" in out
        assert out.count(" - ") >= 2

    def test_malformed_json(self, tmp_path, capsys):
        path = tmp_path / "mangled.json"
        path.write_text("{not json")
        assert run(["validate", "--chain", str(path)]) == 1
        assert "not valid JSON" in capsys.readouterr().out

    def test_missing_file(self, capsys):
        assert run(["validate", "--chain", "/nonexistent/x.json"]) == 1
        assert "not found" in capsys.readouterr().err


class TestAnalyze:
    def test_reference_totals(self, capsys):
        assert run(["analyze", "--chain", CHAIN]) == 0
        out = capsys.readouterr().out
        assert "chain sband-receiver: 14 stages" in out
        assert "total_gain_db" in out
        assert "42.000000" in out
        assert "lna" in out

    def test_repeated_runs_are_identical(self, capsys):
        run(["analyze", "--chain", CHAIN])
        first = capsys.readouterr().out
        run(["analyze", "--chain", CHAIN])
        assert capsys.readouterr().out == first

    def test_band_edge_frequency(self, capsys):
        assert run(["analyze", "--chain", CHAIN, "--freq", "3.1e9"]) == 0
        assert "40.000000" in capsys.readouterr().out

    def test_attenuator_override(self, capsys):
        assert run(["analyze", "--chain", CHAIN, "--atten", "2.0"]) == 0
        assert "40.000000" in capsys.readouterr().out

    def test_out_of_band_frequency_fails(self, capsys):
        assert run(["analyze", "--chain", CHAIN, "--freq", "2.9e9"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_csv_output_file(self, tmp_path, capsys):
        out = tmp_path / "result.csv"
        assert run(["analyze", "--chain", CHAIN, "--out", str(out)]) == 0
        assert f"wrote csv to {out}" in capsys.readouterr().out
        lines = out.read_text().strip().split("\n")
        assert lines[0].startswith("label,")
        assert len(lines) == 1 + 14  # header plus one row per stage

    def test_json_output_file(self, tmp_path):
        out = tmp_path / "result.json"
        assert run(
            ["analyze", "--chain", CHAIN, "--out", str(out), "--format", "json"]
        ) == 0
        doc = json.loads(out.read_text())
        assert doc["total_gain_db"] == pytest.approx(42.0, abs=1e-9)
        assert len(doc["rows"]) == 14


class TestBudget:
    def test_shares_ranked_largest_first(self, capsys):
        assert run(["budget", "--chain", CHAIN]) == 0
        out = capsys.readouterr().out
        assert "intercept budget shares (largest first):" in out
        share_lines = [
            ln for ln in out.split("\n") if ln.startswith("  ") and "." in ln
        ]
        assert share_lines[0].split()[0] == "mixer2"
        shares = [float(ln.split()[1]) for ln in share_lines]
        assert shares == sorted(shares, reverse=True)
        assert sum(shares) == pytest.approx(1.0, abs=5e-4)

    def test_linear_chain_has_no_shares(self, tmp_path, capsys):
        doc = {"name": "wire", "plan": _plan_doc(), "stages": [], "identity": True}
        path = tmp_path / "wire.json"
        path.write_text(json.dumps(doc))
        assert run(["budget", "--chain", str(path)]) == 0
        assert "no nonlinear stages" in capsys.readouterr().out


class TestSweep:
    def test_stdout_csv_with_default_interferer(self, capsys):
        assert run(
            ["sweep", "--chain", CHAIN, "--freqs", "3.3e9", "--temps", "25",
             "--powers=-40"]
        ) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0].startswith("rf_hz,temp_degc,p_in_dbm,interferer_dbm")
        assert len(lines) == 1 + 3  # three default interferer levels

    def test_no_interferer_flag(self, capsys):
        assert run(
            ["sweep", "--chain", CHAIN, "--freqs", "3.3e9", "--temps", "25",
             "--powers=-40", "--no-interferer"]
        ) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 2

    def test_custom_interferer_levels(self, capsys):
        assert run(
            ["sweep", "--chain", CHAIN, "--freqs", "3.3e9", "--temps", "25",
             "--powers=-40", "--interferer-levels=-90,-80"]
        ) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 3

    def test_output_files(self, tmp_path, capsys):
        rows_out = tmp_path / "rows.csv"
        plot_out = tmp_path / "plot.csv"
        assert run(
            ["sweep", "--chain", CHAIN, "--freqs", "3.1e9,3.5e9", "--temps", "25",
             "--powers=-40", "--out", str(rows_out), "--plot-out", str(plot_out)]
        ) == 0
        out = capsys.readouterr().out
        assert "wrote 6 rows" in out
        assert "wrote plot data" in out
        assert len(rows_out.read_text().strip().split("\n")) == 7
        assert plot_out.read_text().startswith("series,rf_hz,metric,value")


class TestSpurs:
    def test_chain_mode_prints_plan_and_table(self, capsys):
        assert run(["spurs", "--chain", CHAIN]) == 0
        out = capsys.readouterr().out
        assert "rf        3300000000 Hz" in out
        assert "lo1       3900000000 Hz" in out
        assert "if1       600000000 Hz" in out
        assert "image2    480000000 Hz" in out
        assert "m,n,freq_hz,order,in_band,desired" in out
        assert ",true,true" in out

    def test_second_mixer(self, capsys):
        assert run(["spurs", "--chain", CHAIN, "--mixer", "2"]) == 0
        out = capsys.readouterr().out
        assert "lo2       540000000 Hz" in out
        assert ",true,true" in out

    def test_standalone_mode(self, capsys):
        assert run(
            ["spurs", "--sig", "600e6", "--lo", "540e6", "--if-center", "60e6"]
        ) == 0
        out = capsys.readouterr().out
        assert "lo1" not in out
        assert out.startswith("m,n,freq_hz,order,in_band,desired")

    def test_standalone_needs_if_center(self, capsys):
        assert run(["spurs", "--sig", "600e6", "--lo", "540e6"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_needs_chain_or_tones(self, capsys):
        assert run(["spurs"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_spur_csv_file(self, tmp_path, capsys):
        out = tmp_path / "spurs.csv"
        assert run(["spurs", "--chain", CHAIN, "--out", str(out)]) == 0
        assert "spur rows" in capsys.readouterr().out
        assert out.read_text().startswith("m,n,freq_hz,order,in_band,desired")


class TestCalibrate:
    def test_reference_chain_flattening(self, capsys):
        assert run(
            ["calibrate", "--chain", CHAIN, "--freqs", "3.1e9,3.3e9,3.5e9"]
        ) == 0
        out = capsys.readouterr().out
        assert "target gain 40.000000 dB" in out
        assert "3100000000 0.0 40.000000" in out
        assert "3300000000 2.0 40.000000" in out
        assert "3500000000 4.0 40.000000" in out

    def test_calibration_csv_file(self, tmp_path):
        out = tmp_path / "cal.csv"
        assert run(
            ["calibrate", "--chain", CHAIN, "--freqs", "3.3e9", "--out", str(out)]
        ) == 0
        assert out.read_text().startswith("rf_hz,setting_db,achieved_gain_db,error_db")

    def test_unreachable_target(self, capsys):
        assert run(
            ["calibrate", "--chain", CHAIN, "--freqs", "3.3e9", "--target", "99"]
        ) == 1
        assert "error:" in capsys.readouterr().err


class TestVerifyIm3:
    def test_pass_with_defaults(self, capsys):
        assert run(
            ["verify-im3", "--gain", "0", "--oip3", "10", "--drive=-40,-30"]
        ) == 0
        out = capsys.readouterr().out
        assert "PASS" in out
        assert "extracted iip3" in out
        assert "slopes:" in out

    def test_pass_with_small_record(self, capsys):
        assert run(
            ["verify-im3", "--gain", "12", "--oip3", "30", "--drive=-45,-35",
             "--samples", "65536", "--backend", "numpy"]
        ) == 0
        assert "PASS" in capsys.readouterr().out

    def test_overdriven_device_fails(self, capsys):
        assert run(
            ["verify-im3", "--gain", "0", "--oip3", "10", "--drive=-20,-10"]
        ) == 1
        assert "error:" in capsys.readouterr().err

    def test_drive_needs_two_levels(self, capsys):
        assert run(
            ["verify-im3", "--gain", "0", "--oip3", "10", "--drive=-40"]
        ) == 1
        assert "error:" in capsys.readouterr().err


class TestWorstCase:
    def test_corner_table(self, capsys):
        assert run(["worst-case", "--chain", CHAIN]) == 0
        out = capsys.readouterr().out
        assert "tolerance sum 3.100000 dB" in out
        assert "min_gain" in out and "nominal" in out and "max_gain" in out
        assert "45.100000" in out
        assert "38.900000" in out


class TestMonteCarlo:
    def test_summary_table(self, capsys):
        assert run(
            ["monte-carlo", "--chain", CHAIN, "--trials", "30", "--seed", "9"]
        ) == 0
        out = capsys.readouterr().out
        assert "trials 30, seed 9" in out
        assert "gain_db" in out and "sfdr_db" in out

    def test_deterministic_across_runs(self, capsys):
        args = ["monte-carlo", "--chain", CHAIN, "--trials", "25", "--seed", "4"]
        run(args)
        first = capsys.readouterr().out
        run(args)
        assert capsys.readouterr().out == first


class TestConsoleScript:
    @pytest.mark.skipif(shutil.which("rxchain") is None, reason="script not installed")
    def test_installed_entry_point(self):
        proc = subprocess.run(
            ["rxchain", "analyze", "--chain", CHAIN],
            capture_output=True, text=True, timeout=60,
        )
        assert proc.returncode == 0
        assert "total_gain_db" in proc.stdout

    def test_module_not_required_for_exit_codes(self):
        proc = subprocess.run(
            [sys.executable, "-c",
             "import sys; from rxchain.cli import run; sys.exit(run(sys.argv[1:]))",
             "validate", "--chain", CHAIN],
            capture_output=True, text=True, timeout=60,
        )
        assert proc.returncode == 0
        assert "valid" in proc.stdout
