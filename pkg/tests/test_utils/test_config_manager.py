"""
Lattice QIP - Configuration Tests
"""

import pydantic
import pytest

from app.core.species_registry import lookup_species
from app.utils.config_manager import ConfigManager, get_config_manager
from app.utils.run_config import FeasibilitySection, GateSection, ProtocolSection, RunConfig
from app.utils.validators import ValidationError
import config


class TestRunConfig:
    def test_defaults(self):
        run_config = RunConfig()
        assert run_config.seed == config.DEFAULT_SEED
        assert run_config.gate.a_bohr == 200.0
        assert run_config.gate.r0_nm == pytest.approx(210.0)
        assert run_config.feasibility.i2_max_w_m2 == 1e10
        assert run_config.transport.n_sites == [1, 2, 5, 10]
        assert run_config.stability.inputs == []

    def test_echo_is_plain_json(self):
        echo = RunConfig().model_dump(mode="json")
        assert echo["lattice"]["line_model"] == "fine_structure"
        assert echo["geometry"]["delta_phases_rad"] is None

    def test_unknown_keys_rejected(self):
        with pytest.raises(pydantic.ValidationError):
            RunConfig.model_validate({"gate": {"a_bohrs": 100}})

    def test_frozen(self):
        with pytest.raises(pydantic.ValidationError):
            RunConfig().gate.a_bohr = 5.0

    def test_written_feasibility_section_needs_every_bound(self):
        with pytest.raises(pydantic.ValidationError) as info:
            FeasibilitySection.model_validate({"i1_min_w_m2": 1e6, "i1_max_w_m2": 1e8})
        assert "i2_min_w_m2" in str(info.value)

    def test_feasibility_bounds_ordered(self):
        data = FeasibilitySection.defaults().model_dump()
        data["i1_min_w_m2"] = data["i1_max_w_m2"]
        with pytest.raises(pydantic.ValidationError):
            FeasibilitySection.model_validate(data)

    def test_trap_frequencies_come_in_pairs(self):
        with pytest.raises(pydantic.ValidationError):
            GateSection(li_trap_khz=200.0)
        gate = GateSection(li_trap_khz=200.0, cs_trap_khz=150.0)
        assert gate.trap_frequencies_hz == (200e3, 150e3)
        with pytest.raises(pydantic.ValidationError):
            GateSection(omega_r_khz=None)

    def test_protocol_sites_come_in_pairs(self):
        with pytest.raises(pydantic.ValidationError):
            ProtocolSection(qubit_a=(0, 0))
        section = ProtocolSection(qubit_a=(0, 0), qubit_b=(2, 1))
        assert section.qubit_b == (2, 1)

    @pytest.mark.parametrize("section, data", [
        ("gate", {"a_bohr": 0}),
        ("protocol", {"transport_p1": 1.0}),
        ("transport", {"n_sites": [1, -2]}),
        ("transport", {"fidelity_target": 1.0}),
        ("geometry", {"color": 2}),
        ("lattice", {"line_model": "hyperfine"}),
    ])
    def test_out_of_range_values(self, section, data):
        with pytest.raises(pydantic.ValidationError):
            RunConfig.model_validate({section: data})

    @pytest.mark.parametrize("section, field, value", [
        ("protocol", "transport_p1", 1.0),
        ("protocol", "transport_p1", -0.1),
        ("protocol", "fidelity_per_transition", 1.5),
        ("transport", "fidelity_target", 1.0),
    ])
    def test_probability_error_names_field(self, section, field, value):
        with pytest.raises(pydantic.ValidationError) as info:
            RunConfig.model_validate({section: {field: value}})
        assert field in str(info.value)

    def test_ideal_protocol_without_transition_fidelity(self):
        assert ProtocolSection(fidelity_per_transition=None).fidelity_per_transition is None
        assert ProtocolSection(fidelity_per_transition=1.0).fidelity_per_transition == 1.0


class TestConfigManager:
    def test_singleton(self):
        assert get_config_manager() is get_config_manager()

    def test_defaults_without_file(self):
        manager = ConfigManager()
        manager.load(None)
        assert manager.resolve() == RunConfig()

    def test_load_and_resolve(self, write_config):
        path = write_config({"seed": 5, "gate": {"a_bohr": 120}, "protocol": {"ideal": True}})
        manager = ConfigManager()
        manager.load(path)
        run_config = manager.resolve()
        assert run_config.seed == 5
        assert run_config.gate.a_bohr == 120
        assert run_config.gate.omega_r_khz == pytest.approx(160.0)
        assert run_config.protocol.ideal is True

    def test_overrides_merge_sections(self, write_config):
        path = write_config({"seed": 5, "stability": {"synthetic_samples": 512}})
        manager = ConfigManager()
        manager.load(path)
        run_config = manager.resolve({"seed": None, "stability": {"inputs": ["a.csv"]}})
        assert run_config.seed == 5
        assert run_config.stability.synthetic_samples == 512
        assert run_config.stability.inputs == ["a.csv"]
        assert manager.resolve({"seed": 9}).seed == 9

    def test_missing_feasibility_key_is_named(self, write_config):
        path = write_config({"feasibility": {"i1_min_w_m2": 1e6, "i1_max_w_m2": 1e8, "i2_min_w_m2": 1e6}})
        manager = ConfigManager()
        manager.load(path)
        with pytest.raises(ValidationError) as info:
            manager.resolve()
        assert "feasibility.i2_max_w_m2" in str(info.value)

    def test_malformed_yaml_reports_line(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("gate:\n  a_bohr: 100\n  offset_nm: [1, 2\n")
        with pytest.raises(ValidationError) as info:
            ConfigManager().load(path)
        assert info.value.line is not None

    def test_non_mapping_yaml(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ValidationError):
            ConfigManager().load(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            ConfigManager().load(tmp_path / "absent.yaml")

    def test_species_override_file(self, tmp_path, write_config):
        overrides = tmp_path / "species.yaml"
        overrides.write_text("Cs133.D2.isat_w_m2: 20.0\nLi6.mass_amu: 6.0\n")
        path = write_config({"species_overrides_file": str(overrides), "species_overrides": {"Li6.mass_amu": 6.5}})
        manager = ConfigManager()
        manager.load(path)
        run_config = manager.resolve()
        # inline values win over the file
        assert run_config.species_overrides == {"Cs133.D2.isat_w_m2": 20.0, "Li6.mass_amu": 6.5}
        manager.apply_species_overrides(run_config)
        assert lookup_species("Cs133").line("D2").isat == 20.0
        assert lookup_species("Li6").mass_amu == pytest.approx(6.5)

    def test_bad_override_file(self, tmp_path):
        overrides = tmp_path / "species.yaml"
        overrides.write_text("Rb87.mass_amu: 87\nLi6.mass_amu: heavy\n")
        with pytest.raises(ValidationError) as info:
            ConfigManager().load_species_overrides(overrides)
        assert "Rb87" in str(info.value)

    def test_non_numeric_override(self, tmp_path):
        overrides = tmp_path / "species.yaml"
        overrides.write_text("Li6.mass_amu: heavy\n")
        with pytest.raises(ValidationError):
            ConfigManager().load_species_overrides(overrides)

    @pytest.mark.parametrize("value", [0, -1.0])
    def test_non_positive_override_file_value(self, tmp_path, value):
        overrides = tmp_path / "species.yaml"
        overrides.write_text(f"Li6.mass_amu: {value}\n")
        with pytest.raises(ValidationError) as info:
            ConfigManager().load_species_overrides(overrides)
        assert "Li6.mass_amu" in str(info.value)

    @pytest.mark.parametrize("value", [0.0, -6.0])
    def test_non_positive_inline_override(self, value):
        run_config = RunConfig(species_overrides={"Li6.mass_amu": value})
        with pytest.raises(ValidationError) as info:
            ConfigManager().apply_species_overrides(run_config)
        assert "Li6.mass_amu" in str(info.value)
        assert lookup_species("Li6").mass_amu > 0

    def test_inline_override_with_unknown_line(self):
        run_config = RunConfig(species_overrides={"Li6.D5.gamma_hz": 1.0})
        with pytest.raises(ValidationError):
            ConfigManager().apply_species_overrides(run_config)

    def test_reference_config_loads(self):
        manager = ConfigManager()
        manager.load(config.REFERENCE_CONFIG)
        run_config = manager.resolve()
        assert run_config.gate.a_bohr == 200
        assert run_config.feasibility.grid_points == 200
        assert run_config.transport.pairs[1] == ((0, 0), (3, 2))

    def test_run_config_property_resolves_defaults(self):
        assert ConfigManager().run_config == RunConfig()
