import math

import pytest

import seadiag
from seadiag import (ConfigurationError, FaultSpec, ScenarioError,
                     bundled_scenario, export_csv, load_scenario, run,
                     save_scenario)
from seadiag.cli import main as cli_main
from seadiag.harness import RESIDUALS_HEADER, TELEMETRY_HEADER
from conftest import make_scenario


class TestLoadScenario:
    def test_bundled_nominal_parses(self):
        sc = load_scenario(bundled_scenario("nominal"))
        assert sc.label == "nominal"
        assert sc.params.k1 == 100.0
        assert sc.params.k2 == 0.02
        assert sc.params.g1 == 105.05
        assert sc.params.gr == 105.0
        assert sc.params.k_eq == 80.0
        assert sc.cutoff_hz == 5.0
        assert sc.thresholds.torsional == 12.0
        assert sc.duration == 10.0
        assert sc.faults == ()

    def test_bundled_fault_scenarios_parse(self):
        bias = load_scenario(bundled_scenario("bias"))
        assert bias.faults == (FaultSpec(channel="tau_sea", kind="bias",
                                         onset=5.0, bias_magnitude=20.0),)
        stuck = load_scenario(bundled_scenario("stuck"))
        assert stuck.faults[0].kind == "stuck"
        assert stuck.faults[0].onset == 3.1

    def test_round_trip(self, tmp_path):
        original = load_scenario(bundled_scenario("bias"))
        target = tmp_path / "copy.scenario"
        save_scenario(original, target)
        assert load_scenario(target) == original

    def test_round_trip_preserves_derived_stiffness(self, tmp_path):
        sc = make_scenario(k_sea=None, k_gear=None)
        target = tmp_path / "derived.scenario"
        save_scenario(sc, target)
        loaded = load_scenario(target)
        assert loaded.params.k_sea == sc.params.k_sea
        assert loaded.params.k_gear == sc.params.k_gear

    def test_negative_k_eq_names_the_field(self, tmp_path):
        text = bundled_scenario("nominal").read_text()
        target = tmp_path / "bad.scenario"
        target.write_text(text.replace("k_eq = 80.0", "k_eq = -80.0"))
        with pytest.raises(ScenarioError, match="k_eq"):
            load_scenario(target)

    def test_unknown_key_rejected_with_line(self, tmp_path):
        text = bundled_scenario("nominal").read_text()
        target = tmp_path / "extra.scenario"
        target.write_text(text.replace("[excitation]",
                                       "[excitation]\nripple = 3.0"))
        with pytest.raises(ScenarioError, match=r"ripple.*line \d+"):
            load_scenario(target)

    def test_unknown_section_rejected(self, tmp_path):
        target = tmp_path / "section.scenario"
        target.write_text(bundled_scenario("nominal").read_text()
                          + "\n[plotting]\ncolor = red\n")
        with pytest.raises(ScenarioError, match="plotting"):
            load_scenario(target)

    def test_missing_required_key_rejected(self, tmp_path):
        text = bundled_scenario("nominal").read_text()
        target = tmp_path / "missing.scenario"
        target.write_text(text.replace("duration = 10.0\n", ""))
        with pytest.raises(ScenarioError, match="duration"):
            load_scenario(target)

    def test_unparseable_value_reports_line(self, tmp_path):
        text = bundled_scenario("nominal").read_text()
        target = tmp_path / "badvalue.scenario"
        target.write_text(text.replace("amplitude = 20.0", "amplitude = loud"))
        with pytest.raises(ScenarioError, match=r"amplitude.*line \d+"):
            load_scenario(target)

    def test_text_before_first_section_reports_line(self, tmp_path):
        target = tmp_path / "header.scenario"
        target.write_text("duration = 10\n" + bundled_scenario("nominal").read_text())
        with pytest.raises(ScenarioError, match="line 1"):
            load_scenario(target)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError, match="cannot read"):
            load_scenario(tmp_path / "nope.scenario")

    def test_overrides_apply_before_validation(self):
        sc = load_scenario(bundled_scenario("nominal"),
                           overrides=["excitation.amplitude=5.0",
                                      "scenario.seed=7"])
        assert sc.excitation.amplitude == 5.0
        assert sc.seed == 7

    def test_malformed_override_rejected(self):
        with pytest.raises(ScenarioError, match="override"):
            load_scenario(bundled_scenario("nominal"), overrides=["amplitude"])


class TestScenarioValidation:
    def test_sensor_rate_above_integration_rate(self):
        with pytest.raises(ConfigurationError, match="sensor_rate"):
            make_scenario(sensor_rate=4000.0)  # 1/dt = 2000

    def test_sensor_rate_must_divide_integration_rate(self):
        with pytest.raises(ConfigurationError, match="divide"):
            make_scenario(sensor_rate=1500.0)

    def test_duplicate_fault_channel_rejected(self):
        faults = (FaultSpec(channel="tau_sea", kind="bias", onset=1.0,
                            bias_magnitude=1.0),
                  FaultSpec(channel="tau_sea", kind="stuck", onset=2.0))
        with pytest.raises(ConfigurationError, match="tau_sea"):
            make_scenario(faults=faults)

    def test_duration_must_exceed_settling(self):
        with pytest.raises(ConfigurationError, match="settling"):
            make_scenario(duration=0.1)

    def test_cutoff_above_nyquist_rejected(self):
        with pytest.raises(ConfigurationError, match="cutoff"):
            make_scenario(cutoff_hz=600.0)

    def test_noise_bandwidth_above_nyquist_rejected(self, quiet_noise):
        quiet_noise.bandwidth = 800.0
        with pytest.raises(ConfigurationError, match="bandwidth"):
            make_scenario(noise=quiet_noise)


class TestRunAndExport:
    def test_row_count(self, tmp_path):
        sc = make_scenario(duration=2.0)
        result = run(sc, out_dir=tmp_path)
        expected = math.floor(sc.duration * sc.sensor_rate) + 1
        assert len(result.telemetry) == expected
        assert len(result.residuals) == expected
        lines = (tmp_path / "telemetry.csv").read_text().splitlines()
        assert len(lines) == expected + 1

    def test_csv_headers_exact(self, tmp_path):
        run(make_scenario(duration=0.5), out_dir=tmp_path)
        tel = (tmp_path / "telemetry.csv").read_text().splitlines()
        res = (tmp_path / "residuals.csv").read_text().splitlines()
        assert tel[0] == TELEMETRY_HEADER
        assert res[0] == RESIDUALS_HEADER

    def test_numbers_carry_twelve_significant_digits(self, tmp_path):
        result = run(make_scenario(duration=0.5), out_dir=tmp_path)
        lines = (tmp_path / "telemetry.csv").read_text().splitlines()
        row = lines[400].split(",")
        stored = float(row[5])  # theta_l column
        exact = result.telemetry.theta_l[399]
        assert stored == pytest.approx(exact, rel=1e-11)

    def test_repeated_runs_are_byte_identical(self, tmp_path):
        sc = make_scenario(duration=1.0)
        run(sc, out_dir=tmp_path / "a")
        run(sc, out_dir=tmp_path / "b")
        for name in ("telemetry.csv", "residuals.csv", "report.json"):
            assert (tmp_path / "a" / name).read_bytes() == \
                   (tmp_path / "b" / name).read_bytes()

    def test_different_seed_changes_outputs(self, tmp_path):
        run(make_scenario(duration=0.5, seed=0), out_dir=tmp_path / "a")
        run(make_scenario(duration=0.5, seed=1), out_dir=tmp_path / "b")
        assert (tmp_path / "a" / "telemetry.csv").read_bytes() != \
               (tmp_path / "b" / "telemetry.csv").read_bytes()

    def test_report_json_fields(self, tmp_path):
        import json
        run(make_scenario(duration=0.5), out_dir=tmp_path)
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["verdict"] in ("nominal", "fault-detected")
        for c in ("torsional", "dynamics", "electrical"):
            entry = report["constraints"][c]
            assert set(entry) == {"triggered", "first_crossing",
                                  "peak_filtered", "margin"}

    def test_export_csv_standalone(self, tmp_path):
        result = run(make_scenario(duration=0.5))
        paths = export_csv(result.telemetry, result.residuals, result.report,
                           tmp_path / "deep" / "dir")
        for path in paths.values():
            assert path.exists()


class TestCli:
    def test_run_nominal_exit_zero(self, capsys):
        code = cli_main(["run", "--scenario", str(bundled_scenario("nominal"))])
        out = capsys.readouterr().out
        assert code == 0
        assert "verdict: nominal" in out

    def test_run_fault_exit_two(self, capsys):
        code = cli_main(["run", "--scenario", str(bundled_scenario("bias"))])
        out = capsys.readouterr().out
        assert code == 2
        assert "verdict: fault-detected" in out
        assert "TRIGGERED" in out

    def test_run_writes_outputs(self, tmp_path):
        code = cli_main(["run", "--scenario", str(bundled_scenario("nominal")),
                         "--out", str(tmp_path / "results")])
        assert code == 0
        assert (tmp_path / "results" / "telemetry.csv").exists()

    def test_out_dir_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SEADIAG_OUT_DIR", str(tmp_path / "envout"))
        code = cli_main(["run", "--scenario", str(bundled_scenario("nominal"))])
        assert code == 0
        assert (tmp_path / "envout" / "report.json").exists()

    def test_seed_flag_overrides(self, tmp_path):
        cli_main(["run", "--scenario", str(bundled_scenario("nominal")),
                  "--seed", "3", "--out", str(tmp_path / "a")])
        cli_main(["run", "--scenario", str(bundled_scenario("nominal")),
                  "--seed", "4", "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "telemetry.csv").read_bytes() != \
               (tmp_path / "b" / "telemetry.csv").read_bytes()

    def test_override_flag(self, capsys):
        code = cli_main(["run", "--scenario", str(bundled_scenario("nominal")),
                         "--override", "excitation.amplitude=0.0"])
        assert code == 0

    def test_error_exit_one(self, tmp_path, capsys):
        code = cli_main(["run", "--scenario", str(tmp_path / "missing.scenario")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_validate_ok(self, capsys):
        code = cli_main(["validate", "--scenario",
                         str(bundled_scenario("stuck"))])
        assert code == 0
        assert "OK" in capsys.readouterr().out

    def test_validate_bad_file(self, tmp_path, capsys):
        target = tmp_path / "bad.scenario"
        target.write_text("[scenario]\nduration = -1\n")
        assert cli_main(["validate", "--scenario", str(target)]) == 1

    def test_tune_prints_thresholds(self, capsys, tmp_path):
        sc = make_scenario(duration=2.0)
        path = tmp_path / "short.scenario"
        save_scenario(sc, path)
        code = cli_main(["tune", "--scenarios", str(path), "--factor", "3.0"])
        out = capsys.readouterr().out
        assert code == 0
        assert "torsional" in out and "electrical" in out

    def test_tune_rejects_faulty_scenario(self, capsys):
        code = cli_main(["tune", "--scenarios",
                         str(bundled_scenario("bias"))])
        assert code == 1
        assert "fault-free" in capsys.readouterr().err


def test_run_determinism_in_memory():
    sc = make_scenario(duration=1.0)
    a = seadiag.run(sc)
    b = seadiag.run(sc)
    assert a.telemetry == b.telemetry
    assert a.residuals == b.residuals
    assert a.report == b.report
