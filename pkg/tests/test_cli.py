"""End-to-end command-line behavior: exit codes, files, determinism."""

import math

import pytest

from blindssr.cli import main
from blindssr.report import read_results_csv

SEED = 90125


@pytest.fixture()
def cfg_file(tmp_path):
    path = tmp_path / "grid.cfg"
    path.write_text(
        "n_stage1 = 15\n"
        "n_min_ratios = 1.2\n"
        "n_max_ratios = 2\n"
        "delta0 = 0.8,0.95\n"
        "replications = 5000\n"
        f"master_seed = {SEED}\n")
    return str(path)


class TestExitCodes:

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_no_subcommand(self, capsys):
        assert main([]) == 2

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "grid" in capsys.readouterr().out

    def test_missing_config_file(self, capsys):
        assert main(["grid", "--config", "/no/such/file.cfg"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_domain_error_is_reported(self, capsys):
        code = main(["scenario", "--n-stage1", "15", "--n-min", "10",
                     "--n-max", "30", "--delta0", "0.95",
                     "--reps", "100", "--seed", "1"])
        assert code == 2
        assert "n_min" in capsys.readouterr().err

    def test_seed_is_required(self, capsys):
        code = main(["scenario", "--n-stage1", "15", "--n-min", "18",
                     "--delta0", "0.95", "--reps", "100"])
        assert code == 2


class TestGrid:

    def test_writes_csv_and_heatmap(self, cfg_file, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["grid", "--config", cfg_file, "--out", str(out)]) == 0
        records = read_results_csv(str(out / "results.csv"))
        assert len(records) == 2
        assert (out / "heatmap.svg").exists()
        assert "2 cells" in capsys.readouterr().out

    def test_flags_override_file(self, cfg_file, tmp_path):
        out = tmp_path / "out"
        assert main(["grid", "--config", cfg_file, "--out", str(out),
                     "--reps", "2000", "--seed", "77"]) == 0
        records = read_results_csv(str(out / "results.csv"))
        assert all(r.replications == 2000 for r in records)
        assert all(r.master_seed == 77 for r in records)

    def test_byte_identical_reruns(self, cfg_file, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["grid", "--config", cfg_file, "--out", str(out1)]) == 0
        assert main(["grid", "--config", cfg_file, "--out", str(out2)]) == 0
        assert (out1 / "results.csv").read_bytes() == \
               (out2 / "results.csv").read_bytes()
        assert (out1 / "heatmap.svg").read_bytes() == \
               (out2 / "heatmap.svg").read_bytes()

    def test_curves_per_family(self, cfg_file, tmp_path):
        out = tmp_path / "out"
        assert main(["grid", "--config", cfg_file, "--out", str(out),
                     "--curves"]) == 0
        curve_files = list(out.glob("curves_*.svg"))
        assert len(curve_files) == 1    # single family in this config

    def test_missing_seed_everywhere(self, tmp_path, capsys):
        cfg = tmp_path / "noseed.cfg"
        cfg.write_text("n_stage1 = 15\nn_min_ratios = 1\nn_max_ratios = 2\n"
                       "delta0 = 0.95\nreplications = 100\n")
        assert main(["grid", "--config", str(cfg)]) == 2
        assert "master_seed" in capsys.readouterr().err


class TestScenario:

    def test_prints_summary_and_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["scenario", "--n-stage1", "15", "--n-min", "18",
                     "--n-max", "30", "--delta0", "0.95",
                     "--reps", "20000", "--seed", str(SEED),
                     "--out", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "ni_rejection=" in text
        records = read_results_csv(str(out / "results.csv"))
        assert records[0].n_stage1 == 15
        assert records[0].n_max == 30

    def test_fixed_design_is_level(self, capsys):
        code = main(["scenario", "--n-stage1", "15", "--n-min", "15",
                     "--n-max", "15", "--delta0", "0.95",
                     "--reps", "100000", "--seed", str(SEED)])
        assert code == 0
        text = capsys.readouterr().out
        pct = float(text.split("ni_rejection=")[1].split("%")[0])
        se = 100 * math.sqrt(0.05 * 0.95 / 100000)
        assert abs(pct - 5.0) <= 3 * se

    def test_inf_n_max_accepted(self, capsys):
        code = main(["scenario", "--n-stage1", "10", "--n-min", "10",
                     "--n-max", "inf", "--delta0", "1.2",
                     "--reps", "5000", "--seed", "3"])
        assert code == 0
        assert "bounds=[10, inf]" in capsys.readouterr().out


class TestBinned:

    def test_prints_threshold_and_bins(self, capsys):
        code = main(["binned", "--n-stage1", "15", "--delta0", "1",
                     "--reps", "30000", "--seed", str(SEED)])
        assert code == 0
        text = capsys.readouterr().out
        assert "0.6930" in text
        assert text.count("\n") >= 14    # header + 10 bins + summary

    def test_optional_csv(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["binned", "--reps", "20000", "--seed", str(SEED),
                     "--out", str(out)])
        assert code == 0
        lines = (out / "binned.csv").read_text().splitlines()
        assert lines[0] == "# schema_version=1"
        assert len(lines) == 12


class TestPeaks:

    def test_scan_and_csv(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["peaks", "--n-stage1", "15",
                     "--delta0-grid", "0.9,0.95,1.0",
                     "--reps", "20000", "--seed", str(SEED),
                     "--out", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "peak case1" in text
        records = read_results_csv(str(out / "results.csv"))
        assert len(records) == 3


class TestExact:

    def test_published_setting_row(self, capsys):
        assert main(["exact", "--n1", "12,24,40", "--alpha", "0.05",
                     "--delta-up", "0.5"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 4
        row12 = lines[1].split()
        # joint stop-and-reject probabilities for the three stage-1 sizes
        assert row12[0] == "12" and row12[2] == "0.0401"
        assert lines[2].split()[2] == "0.0395"
        assert lines[3].split()[2] == "0.0393"
        # both-null joint column
        assert row12[5] == "0.0009"
        assert lines[2].split()[5] == "0.0193"
        assert lines[3].split()[5] == "0.0379"

    def test_no_simulation_flags_needed(self, capsys):
        assert main(["exact", "--n1", "12", "--delta-up", "0.25",
                     "--delta", "0.1", "--c", "30"]) == 0

    def test_invalid_setting(self, capsys):
        assert main(["exact", "--n1", "1", "--delta-up", "0.5"]) == 2
        assert "error:" in capsys.readouterr().err


class TestValidate:

    def test_passes_with_default_checks(self, capsys):
        assert main(["validate", "--reps", "40000"]) == 0
        text = capsys.readouterr().out
        assert text.count("PASS") == 5
        assert "FAIL" not in text
