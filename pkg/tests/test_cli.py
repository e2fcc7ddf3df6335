import json

import pytest

from cogbench.cli import EXIT_AXIS, EXIT_CONFIG, EXIT_OK, main
from cogbench.config import RunConfig, load_config, with_overrides
from cogbench.errors import ConfigurationError

FAST = ["--slots", "120", "--reps", "2", "--policies", "ucb1,random"]


def run_fast_pipeline(out_dir):
    assert main(["simulate", "--out", str(out_dir), "--seed", "77"] + FAST) == EXIT_OK
    assert main(["analyze", "--out", str(out_dir)]) == EXIT_OK
    assert main(["report", "--out", str(out_dir)]) == EXIT_OK


class TestConfig:
    def test_defaults_validate(self):
        config = RunConfig()
        assert len(config.policies) == 6
        assert config.reps == 200

    def test_hash_is_stable_and_sensitive(self):
        assert RunConfig().config_hash() == RunConfig().config_hash()
        assert RunConfig().config_hash() != RunConfig(master_seed=1).config_hash()

    def test_file_roundtrip(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"master_seed": 5, "reps": 3,
                                    "policies": ["exp3", "random"]}))
        config = load_config(path)
        assert config.master_seed == 5
        assert config.policies == ("exp3", "random")

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"master_sed": 5}))
        with pytest.raises(ConfigurationError, match="master_sed"):
            load_config(path)

    def test_bad_policy_rejected(self):
        with pytest.raises(ConfigurationError, match="ucb2"):
            RunConfig(policies=("ucb2",))

    def test_overrides_skip_none(self):
        config = with_overrides(RunConfig(), reps=None, master_seed=9)
        assert config.reps == 200
        assert config.master_seed == 9


class TestSimulate:
    def test_default_config_dry_run_declares_full_grid(self, tmp_path):
        code = main(["simulate", "--out", str(tmp_path), "--dry-run"])
        assert code == EXIT_OK
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["n_radios"] == 144
        assert manifest["n_scenarios"] == 18

    def test_dry_run_writes_manifest_only(self, tmp_path):
        code = main(["simulate", "--out", str(tmp_path), "--dry-run"] + FAST)
        assert code == EXIT_OK
        assert (tmp_path / "manifest.json").exists()
        assert not (tmp_path / "performance.csv").exists()
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["n_radios"] == 36  # ucb1 full sub-grid 27 + random 9
        assert manifest["n_scenarios"] == 18

    def test_small_grid_runs(self, tmp_path):
        code = main(["simulate", "--out", str(tmp_path), "--seed", "3"] + FAST)
        assert code == EXIT_OK
        lines = (tmp_path / "performance.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + 36  # header + 27 ucb1 + 9 random
        assert len(lines[0].split(",")) == 5 + 54

    def test_invalid_scenario_file_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "scen.json"
        bad.write_text("[{\"scenario_id\": 1}]")
        code = main(["--json-errors", "simulate", "--out", str(tmp_path),
                     "--scenarios", str(bad)] + FAST)
        assert code == EXIT_CONFIG
        err = capsys.readouterr().err
        diag = json.loads(err.strip().splitlines()[-1])
        assert diag["error"] == "configuration"
        assert "channels" in diag["detail"]

    def test_json_syntax_error_reports_line(self, tmp_path, capsys):
        bad = tmp_path / "scen.json"
        s = "[" + chr(10) + "{]"
        bad.write_text(s)
        code = main(["simulate", "--out", str(tmp_path),
                     "--scenarios", str(bad)] + FAST)
        assert code == EXIT_CONFIG
        assert "line" in capsys.readouterr().err

    def test_oversized_sensor_count_rejected(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"m_set": [1, 40]}))
        code = main(["simulate", "--config", str(config), "--out", str(tmp_path)])
        assert code == EXIT_CONFIG


class TestAnalyzeReport:
    def test_pipeline_produces_expected_files(self, tmp_path):
        run_fast_pipeline(tmp_path)
        for name in ("performance.csv", "manifest.json", "loadings.csv",
                     "eigenvalues.csv", "scores.csv", "residuals.csv",
                     "fa_report.json", "clusters.csv", "scree.csv"):
            assert (tmp_path / name).exists(), name

    def test_analyze_without_simulation_exits_2(self, tmp_path):
        assert main(["analyze", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_report_axis_beyond_retained_exits_3(self, tmp_path, capsys):
        run_fast_pipeline(tmp_path)
        report = json.loads((tmp_path / "fa_report.json").read_text())
        too_far = report["retained_I"] + 1
        code = main(["report", "--out", str(tmp_path),
                     "--axes", f"1,2,{too_far}"])
        assert code == EXIT_AXIS

    def test_explicit_axes_produce_named_files(self, tmp_path):
        run_fast_pipeline(tmp_path)
        report = json.loads((tmp_path / "fa_report.json").read_text())
        if report["retained_I"] >= 2:
            assert main(["report", "--out", str(tmp_path), "--axes", "1,2"]) == EXIT_OK
            assert (tmp_path / "components_1_2.csv").exists()

    def test_validate_ok(self):
        assert main(["validate"]) == EXIT_OK

    def test_default_axis_selection_rules(self):
        from cogbench.reporting import default_axis_triples

        assert default_axis_triples(0) == []
        assert default_axis_triples(1) == []
        assert default_axis_triples(2) == [(1, 2)]
        assert default_axis_triples(5) == [(1, 2, 3), (1, 2, 4), (1, 2, 5)]


class TestDeterminism:
    def test_identical_runs_produce_identical_trees(self, tmp_path):
        d1, d2 = tmp_path / "one", tmp_path / "two"
        run_fast_pipeline(d1)
        run_fast_pipeline(d2)
        files1 = sorted(p.name for p in d1.iterdir())
        files2 = sorted(p.name for p in d2.iterdir())
        assert files1 == files2
        for name in files1:
            if name == "manifest.json":  # carries wall time
                continue
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes(), name
