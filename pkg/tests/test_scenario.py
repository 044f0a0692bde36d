"""Scenario loading, validation, CLI runs, artifact determinism, and the
manifest round trip."""

import hashlib

import pytest
import yaml

from pnradar import Mode
from pnradar.cli import main, read_calibration_csv, run
from pnradar.scenario import (ExperimentKind, ScenarioError, load_scenario,
                              resolve_scenario)

MINIMAL = """
radar: {mode: uwb}
scene:
  target:
    points:
      - {sigma_m2: 1.0e-3, range_m: 10.0}
"""

SERIES = """
seed: 77
radar: {mode: uwb}
code: {family: msequence, taps: [5, 2, 0], chips_per_bit: 31}
scene:
  target:
    points:
      - {sigma_m2: 1.0e-3, range_m: 10.0}
  noise_psd_w_per_hz: 1.0e-19
experiment:
  kind: rcs_sweep_series
  sweeps: 4
"""


def _write(tmp_path, text, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def _hashes(paths):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest()
            for p in paths if p.suffix == ".csv"}


class TestLoadScenario:
    def test_minimal_file_materializes_defaults(self, tmp_path):
        scenario = load_scenario(_write(tmp_path, MINIMAL))
        raw = scenario.raw
        assert raw["radar"]["nb"]["carrier_hz"] == 1.0e9
        assert raw["radar"]["nb"]["chip_rate_hz"] == 10.0e6
        assert raw["radar"]["uwb"]["monocycle_width_s"] == 0.33e-9
        assert raw["code"]["chips_per_bit"] == 127
        assert raw["scene"]["clutter"]["count"] == 0
        assert raw["receiver"]["uwb"]["max_range_m"] > 0
        assert raw["experiment"]["kind"] == "profile"
        assert scenario.mode is Mode.DS_UWB
        assert scenario.experiment is ExperimentKind.PROFILE

    def test_carrier_out_of_band_rejected(self, tmp_path):
        text = MINIMAL.replace(
            "radar: {mode: uwb}",
            "radar:\n  mode: nb\n  nb: {carrier_hz: 5.0e+9}")
        with pytest.raises(ScenarioError, match="carrier outside 300-3000 MHz"):
            load_scenario(_write(tmp_path, text))

    def test_pulse_width_vs_pri_names_both_fields(self, tmp_path):
        text = MINIMAL.replace(
            "radar: {mode: uwb}",
            "radar:\n  mode: nb\n  nb: {pulse_width_s: 1.0e-4, pri_s: 1.0e-4}")
        with pytest.raises(ScenarioError) as err:
            load_scenario(_write(tmp_path, text))
        assert "pulse_width_s" in str(err.value) and "pri_s" in str(err.value)

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ScenarioError, match="antenna_height: unknown key"):
            load_scenario(_write(tmp_path, MINIMAL + "\nantenna_height: 3\n"))

    def test_unknown_nested_key_rejected(self, tmp_path):
        text = MINIMAL.replace("radar: {mode: uwb}",
                               "radar: {mode: uwb, gain_db: 30}")
        with pytest.raises(ScenarioError, match="radar.gain_db"):
            load_scenario(_write(tmp_path, text))

    def test_parse_error_reports_line(self, tmp_path):
        path = _write(tmp_path, "radar: {mode: nb\nscene: oops")
        with pytest.raises(ScenarioError, match="line 2"):
            load_scenario(path)

    def test_missing_target_rejected(self, tmp_path):
        with pytest.raises(ScenarioError, match="scene.target.points"):
            load_scenario(_write(tmp_path, "radar: {mode: uwb}\n"))

    def test_chips_per_bit_exceeding_code_rejected(self, tmp_path):
        text = MINIMAL + "code: {taps: [5, 2, 0], chips_per_bit: 127}\n"
        with pytest.raises(ScenarioError, match="chips_per_bit"):
            load_scenario(_write(tmp_path, text))

    def test_gate_fields_must_pair(self, tmp_path):
        text = MINIMAL + "receiver: {gate_min_m: 9.0}\n"
        with pytest.raises(ScenarioError, match="gate"):
            load_scenario(_write(tmp_path, text))

    def test_interferer_validation(self, tmp_path):
        text = MINIMAL + (
            "scene2: {}\n")
        with pytest.raises(ScenarioError, match="unknown key"):
            load_scenario(_write(tmp_path, text))

    def test_sweep_series_needs_two_sweeps(self, tmp_path):
        text = SERIES.replace("sweeps: 4", "sweeps: 1")
        with pytest.raises(ScenarioError, match="sweeps"):
            load_scenario(_write(tmp_path, text))

    def test_string_exponent_floats_accepted(self, tmp_path):
        # YAML 1.1 reads 5.0e9 (no exponent sign) as a string
        text = MINIMAL.replace("1.0e-3", "1.0e-3").replace(
            "range_m: 10.0", "range_m: 1.0e1")
        scenario = load_scenario(_write(tmp_path, text))
        assert scenario.scene.target.points[0].range_m == 10.0


class TestRunExperiments:
    def test_profile_run_writes_artifacts(self, tmp_path):
        text = MINIMAL + f"output: {{directory: {tmp_path / 'out'}}}\n"
        scenario = load_scenario(_write(tmp_path, text))
        written = run(scenario, quiet=True)
        names = {p.name for p in written}
        assert names == {"profile.csv", "run_manifest.yaml"}
        lines = (tmp_path / "out" / "profile.csv").read_text().splitlines()
        assert lines[0] == "range_m,power_linear,power_db"
        assert len(lines) > 10

    def test_series_run_row_count(self, tmp_path):
        text = SERIES + f"output: {{directory: {tmp_path / 'out'}}}\n"
        scenario = load_scenario(_write(tmp_path, text))
        run(scenario, quiet=True)
        lines = (tmp_path / "out" / "series.csv").read_text().splitlines()
        assert lines[0] == "sweep,mode,sigma_m2,dbsm"
        assert len(lines) == 1 + 4

    def test_byte_identical_reruns(self, tmp_path):
        text = SERIES + f"output: {{directory: {tmp_path / 'out1'}}}\n"
        scenario = load_scenario(_write(tmp_path, text))
        h1 = _hashes(run(scenario, quiet=True))
        text2 = SERIES + f"output: {{directory: {tmp_path / 'out2'}}}\n"
        scenario2 = load_scenario(_write(tmp_path, text2, "s2.yaml"))
        h2 = _hashes(run(scenario2, quiet=True))
        assert h1 == h2

    def test_manifest_round_trip(self, tmp_path):
        text = SERIES + f"output: {{directory: {tmp_path / 'out1'}}}\n"
        scenario = load_scenario(_write(tmp_path, text))
        h1 = _hashes(run(scenario, quiet=True))
        manifest = tmp_path / "out1" / "run_manifest.yaml"
        replay = load_scenario(manifest)
        replay.raw["output"]["directory"] = str(tmp_path / "out2")
        replay2 = resolve_scenario(replay.raw)
        h2 = _hashes(run(replay2, quiet=True))
        assert h1 == h2

    def test_calibrate_then_consume_calibration_file(self, tmp_path):
        # calibration is waveform-specific: use the same code as the series
        cal_text = MINIMAL + (
            "code: {family: msequence, taps: [5, 2, 0], chips_per_bit: 31}\n"
            "experiment: {kind: calibrate}\n"
            f"output: {{directory: {tmp_path / 'cal'}}}\n")
        run(load_scenario(_write(tmp_path, cal_text, "cal.yaml")), quiet=True)
        cal_file = tmp_path / "cal" / "calibration.csv"
        cal = read_calibration_csv(cal_file)
        assert cal.reference_sigma_m2 == pytest.approx(1e-3)
        series_text = SERIES + (
            f"output: {{directory: {tmp_path / 'out'}}}\n")
        scenario = load_scenario(_write(tmp_path, series_text, "series.yaml"))
        scenario.raw["experiment"]["calibration_file"] = str(cal_file)
        scenario = resolve_scenario(scenario.raw)
        run(scenario, quiet=True)
        rows = (tmp_path / "out" / "series.csv").read_text().splitlines()[1:]
        dbsm = [float(r.split(",")[3]) for r in rows]
        assert all(abs(v + 30.0) < 1.0 for v in dbsm)

    def test_polarimetric_run(self, tmp_path):
        text = MINIMAL + (
            "experiment: {kind: polarimetric}\n"
            f"output: {{directory: {tmp_path / 'out'}}}\n")
        run(load_scenario(_write(tmp_path, text)), quiet=True)
        for pol in ("vv", "hh", "vh", "hv"):
            assert (tmp_path / "out" / f"profile_{pol}.csv").exists()

    def test_failed_run_removes_partial_outputs(self, tmp_path):
        # gate excludes the only scatterer: the series run raises and cleans up
        text = SERIES + (
            "receiver: {gate_min_m: 1.0, gate_max_m: 2.0}\n"
            f"output: {{directory: {tmp_path / 'out'}}}\n")
        scenario = load_scenario(_write(tmp_path, text))
        with pytest.raises(Exception):
            run(scenario, quiet=True)
        assert not list((tmp_path / "out").glob("*.csv"))


class TestCompareModes:
    def test_clean_sphere_modes_agree(self, tmp_path):
        text = """
seed: 5
radar: {mode: nb}
code: {taps: [5, 2, 0], chips_per_bit: 31}
scene:
  target:
    points:
      - {sigma_m2: 1.0e-3, range_m: 10.0}
experiment: {kind: compare_modes, sweeps: 3}
"""
        text += f"output: {{directory: {tmp_path / 'out'}}}\n"
        run(load_scenario(_write(tmp_path, text)), quiet=True)
        rows = (tmp_path / "out" / "compare_summary.csv").read_text().splitlines()
        assert rows[0] == "mode,mean_dbsm,std_dbsm,uwb_std_lt_nb_std"
        means = {r.split(",")[0]: float(r.split(",")[1]) for r in rows[1:]}
        assert abs(means["nb"] - means["uwb"]) < 0.5

    def test_single_sweep_leaves_std_empty(self, tmp_path):
        text = """
radar: {mode: nb}
code: {taps: [5, 2, 0], chips_per_bit: 31}
scene:
  target:
    points:
      - {sigma_m2: 1.0e-3, range_m: 10.0}
experiment: {kind: compare_modes, sweeps: 1}
"""
        text += f"output: {{directory: {tmp_path / 'out'}}}\n"
        run(load_scenario(_write(tmp_path, text)), quiet=True)
        rows = (tmp_path / "out" / "compare_summary.csv").read_text().splitlines()
        for row in rows[1:]:
            assert row.split(",")[2] == ""


class TestCliEntry:
    def test_exit_zero_on_success(self, tmp_path, capsys):
        path = _write(tmp_path, MINIMAL)
        rc = main([str(path), "--out", str(tmp_path / "out"), "--quiet"])
        assert rc == 0
        assert (tmp_path / "out" / "profile.csv").exists()

    def test_exit_two_on_validation_failure(self, tmp_path, capsys):
        path = _write(tmp_path, MINIMAL + "volume: 11\n")
        assert main([str(path)]) == 2
        assert "unknown key" in capsys.readouterr().err

    def test_exit_three_on_model_error(self, tmp_path, capsys):
        text = SERIES + "receiver: {gate_min_m: 1.0, gate_max_m: 2.0}\n"
        path = _write(tmp_path, text)
        rc = main([str(path), "--out", str(tmp_path / "out"), "--quiet"])
        assert rc == 3
        assert "no scatterer detected" in capsys.readouterr().err

    def test_mode_and_experiment_overrides(self, tmp_path):
        path = _write(tmp_path, MINIMAL)
        rc = main([str(path), "--out", str(tmp_path / "out"), "--quiet",
                   "--mode", "nb", "--experiment", "profile", "--seed", "9"])
        assert rc == 0
        manifest = yaml.safe_load(
            (tmp_path / "out" / "run_manifest.yaml").read_text())
        assert manifest["scenario"]["radar"]["mode"] == "nb"
        assert manifest["seed"] == 9
        assert "tool_version" in manifest

    def test_missing_file_reports_validation_error(self, tmp_path):
        assert main([str(tmp_path / "nope.yaml")]) == 2
