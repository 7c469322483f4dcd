"""
Lattice QIP - Command-Line Tests
"""

import json
import math

import numpy as np
import pandas as pd
import pytest

from main import EXIT_IO_ERROR, EXIT_OK, EXIT_USER_ERROR, build_parser, main


SMALL_FEASIBILITY = {
    'i1_min_w_m2': 1e6,
    'i1_max_w_m2': 1e8,
    'i2_min_w_m2': 1e6,
    'i2_max_w_m2': 1e10,
    'grid_points': 8,
    'decoherence_ceiling_per_s': 2.0,
    'alpha_ceiling': 1.0,
}


def run_cli(out_dir, *args, config=None):
    argv = list(args) + ["--out", str(out_dir), "--jobs", "1", "--quiet"]
    if config is not None:
        argv += ["--config", str(config)]
    return main(argv)


def read_record(out_dir, command):
    with open(out_dir / f"{command}.json", encoding="utf-8") as f:
        return json.load(f)


class TestParser:
    def test_subcommands_registered(self):
        parser = build_parser()
        for name in ("feasibility", "gate", "transport", "protocol", "geometry", "stability"):
            args = parser.parse_args([name])
            assert args.handler.name == name

    def test_missing_subcommand_is_usage_error(self):
        assert main([]) == 2

    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert "0.1.0" in capsys.readouterr().out

    def test_jobs_must_be_positive(self, tmp_path):
        assert main(["gate", "--out", str(tmp_path), "--jobs", "0", "--quiet"]) == EXIT_USER_ERROR


class TestGate:
    def test_reference_budget(self, tmp_path, capsys):
        assert run_cli(tmp_path, "gate") == EXIT_OK
        record = read_record(tmp_path, "gate")
        assert record['command'] == "gate"
        assert record['schema_version'] == 1
        assert record['config']['gate']['a_bohr'] == 200.0
        results = record['results']
        assert 2.0 <= results['tau_ms'] <= 3.0
        assert results['C_closed_form'] == pytest.approx(0.016997, rel=1e-4)
        assert results['C_ratio_quadrature_to_closed_form'] == pytest.approx(math.sqrt(2.0), rel=1e-3)
        assert "tau" in capsys.readouterr().out

    def test_invalid_scattering_length(self, tmp_path, write_config):
        config = write_config({'gate': {'a_bohr': 0}})
        assert run_cli(tmp_path, "gate", config=config) == EXIT_USER_ERROR
        assert not (tmp_path / "gate.json").exists()

    def test_outside_validity_regime(self, tmp_path, write_config):
        config = write_config({'gate': {'r0_nm': 10}})
        assert run_cli(tmp_path, "gate", config=config) == EXIT_USER_ERROR

    def test_missing_config_file(self, tmp_path):
        assert run_cli(tmp_path, "gate", config=tmp_path / "absent.yaml") == EXIT_IO_ERROR

    def test_unknown_config_key(self, tmp_path, write_config):
        config = write_config({'gate': {'scattering_length': 100}})
        assert run_cli(tmp_path, "gate", config=config) == EXIT_USER_ERROR


class TestFeasibility:
    def test_small_grid(self, tmp_path, write_config):
        config = write_config({'feasibility': SMALL_FEASIBILITY})
        assert run_cli(tmp_path, "feasibility", config=config) == EXIT_OK
        results = read_record(tmp_path, "feasibility")['results']
        assert results['n_points'] == 64
        low, high = results['independent_control_bounds']
        assert low < 0.24 < high
        assert results['operating_point_within_ceiling'] is True
        table = pd.read_csv(tmp_path / "feasibility.csv")
        assert len(table) == 64
        assert table['feasible'].sum() == results['n_feasible']

    def test_missing_grid_key(self, tmp_path, write_config, capsys):
        section = {k: v for k, v in SMALL_FEASIBILITY.items() if k != 'i2_max_w_m2'}
        config = write_config({'feasibility': section})
        assert run_cli(tmp_path, "feasibility", config=config) == EXIT_USER_ERROR
        assert "i2_max_w_m2" in capsys.readouterr().err

    def test_zero_ceiling_gives_empty_region(self, tmp_path, write_config):
        config = write_config({'feasibility': {**SMALL_FEASIBILITY, 'decoherence_ceiling_per_s': 0.0}})
        assert run_cli(tmp_path, "feasibility", config=config) == EXIT_OK
        results = read_record(tmp_path, "feasibility")['results']
        assert results['feasible_fraction'] == 0.0
        assert results['ratio_bounds'] is None


class TestTransport:
    def test_rows_and_pairs(self, tmp_path, write_config):
        config = write_config({'transport': {'n_sites': [1, 2], 'pairs': [[[0, 0], [3, 0]]]}})
        assert run_cli(tmp_path, "transport", config=config) == EXIT_OK
        results = read_record(tmp_path, "transport")['results']
        assert results['calibration']['g_calibrated'] == pytest.approx(7.4101, rel=1e-4)
        assert results['rows'][0]['v_um_per_ms'] == pytest.approx(3.198, rel=1e-3)
        assert results['pairs'][0]['N_sites'] == 3
        assert (tmp_path / "transport_pairs.csv").exists()
        table = pd.read_csv(tmp_path / "transport.csv")
        assert table['N_sites'].tolist() == [1, 2]


class TestProtocol:
    def test_ideal_run(self, tmp_path, write_config):
        config = write_config({'protocol': {'ideal': True}})
        assert run_cli(tmp_path, "protocol", config=config) == EXIT_OK
        results = read_record(tmp_path, "protocol")['results']
        assert results['final_state_fidelity'] == pytest.approx(1.0, abs=1e-12)
        assert abs(results['final_state_phase']) == pytest.approx(math.pi)
        assert results['concurrence_li'] == pytest.approx(1.0)
        assert results['fidelity'] is None

    def test_error_budget(self, tmp_path, write_config):
        config = write_config({'protocol': {'trials': 500, 'fidelity_per_transition': 0.995, 'transport_p1': 0.01}})
        assert run_cli(tmp_path, "protocol", config=config) == EXIT_OK
        fidelity = read_record(tmp_path, "protocol")['results']['fidelity']
        assert fidelity['f_multiplicative'] == pytest.approx(0.97035, abs=1e-5)
        assert fidelity['f_montecarlo'] == pytest.approx(0.97035, abs=3e-3)

    def test_qubit_coordinates_set_distance(self, tmp_path, write_config):
        config = write_config({'protocol': {'ideal': True, 'qubit_a': [0, 0], 'qubit_b': [2, 2]}})
        assert run_cli(tmp_path, "protocol", config=config) == EXIT_OK
        results = read_record(tmp_path, "protocol")['results']
        assert results['n_sites'] == 4
        assert results['timing']['tau_e_ms'] == pytest.approx(11.4)

    def test_same_seed_gives_identical_output(self, tmp_path, write_config):
        config = write_config({'protocol': {'trials': 64}})
        first, second = tmp_path / "a", tmp_path / "b"
        assert run_cli(first, "protocol", "--seed", "7", config=config) == EXIT_OK
        assert main(["protocol", "--out", str(second), "--jobs", "2", "--quiet",
                     "--seed", "7", "--config", str(config)]) == EXIT_OK
        assert (first / "protocol.json").read_bytes() == (second / "protocol.json").read_bytes()
        assert read_record(first, "protocol")['seed'] == 7


class TestGeometry:
    def test_pattern_and_translation(self, tmp_path, write_config):
        config = write_config({'geometry': {'grid_points': 10, 'delta_phases_rad': [0.0, -math.pi, math.pi]}})
        assert run_cli(tmp_path, "geometry", config=config) == EXIT_OK
        results = read_record(tmp_path, "geometry")['results']
        assert results['pattern_min'] == pytest.approx(3.0, abs=1e-6)
        assert results['pattern_max'] == pytest.approx(5.25, abs=1e-3)
        assert float(np.hypot(*results['translation_um'])) == pytest.approx(1.5, rel=1e-9)
        table = pd.read_csv(tmp_path / "pattern.csv")
        assert len(table) == 100

    def test_deforming_phase_change(self, tmp_path, write_config):
        config = write_config({'geometry': {'delta_phases_rad': [0.3, 0.0, 0.0]}})
        assert run_cli(tmp_path, "geometry", config=config) == EXIT_USER_ERROR


class TestStability:
    def test_synthetic_default(self, tmp_path):
        assert run_cli(tmp_path, "stability") == EXIT_OK
        results = read_record(tmp_path, "stability")['results']
        record = results['series']['synthetic']
        assert record['rms1_nm'] == pytest.approx(92.0, rel=1e-9)
        assert record['rms_diff_nm'] == pytest.approx(26.0, rel=1e-9)
        assert (tmp_path / "synthetic_spectrum.csv").exists()
        assert results['dfs']['Cs133']['681'] == pytest.approx(-0.1112, abs=5e-4)

    def test_position_file(self, tmp_path, position_csv):
        out = tmp_path / "out"
        assert run_cli(out, "stability", str(position_csv)) == EXIT_OK
        record = read_record(out, "stability")['results']['series']['positions.csv']
        assert record['rms1_nm'] == pytest.approx(92.0, rel=0.02)
        assert record['rms_diff_nm'] == pytest.approx(26.0, rel=0.02)
        spectrum = pd.read_csv(out / "positions_spectrum.csv")
        assert list(spectrum.columns) == ['f_hz', 'psd1', 'psd2', 'psd_diff']

    def test_schema_error(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("t_s,x1_nm,y1_nm,x2_nm,y2_nm\n0.0,1,2,3,4\n0.001,1,2,oops,4\n")
        assert run_cli(tmp_path, "stability", str(path)) == EXIT_USER_ERROR
        assert "line 3" in capsys.readouterr().err

    def test_missing_input(self, tmp_path):
        assert run_cli(tmp_path, "stability", str(tmp_path / "absent.csv")) == EXIT_IO_ERROR

    def test_unsupported_input_suffix(self, tmp_path, capsys):
        path = tmp_path / "positions.xlsx"
        path.write_text("t_s,x1_nm,y1_nm,x2_nm,y2_nm\n0.0,1,2,3,4\n")
        assert run_cli(tmp_path, "stability", str(path)) == EXIT_USER_ERROR
        assert "Unsupported file format" in capsys.readouterr().err

    def test_nonuniform_sampling_refuses_spectrum(self, tmp_path):
        t = np.arange(64) * 1e-3
        t[40:] += 0.02
        rng = np.random.default_rng(2)
        frame = pd.DataFrame({
            't_s': t,
            'x1_nm': rng.normal(0, 50, 64),
            'y1_nm': rng.normal(0, 50, 64),
            'x2_nm': rng.normal(0, 50, 64),
            'y2_nm': rng.normal(0, 50, 64),
        })
        path = tmp_path / "gappy.csv"
        frame.to_csv(path, index=False)
        out = tmp_path / "out"
        assert run_cli(out, "stability", str(path)) == EXIT_OK
        record = read_record(out, "stability")['results']['series']['gappy.csv']
        assert record['spectrum_refused'] is True
        assert record['warnings']
        assert not (out / "gappy_spectrum.csv").exists()

    def test_single_sample_is_rejected(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("t_s,x1_nm,y1_nm,x2_nm,y2_nm\n0.0,1,2,3,4\n")
        assert run_cli(tmp_path, "stability", str(path)) == EXIT_USER_ERROR
