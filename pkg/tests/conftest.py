"""
Lattice QIP - Shared Test Fixtures
"""

from pathlib import Path

import pytest
import yaml

from app.core.species_registry import set_species_registry
from app.core.stability_toolkit import series_to_frame, synthesize_series
import app.utils.config_manager as config_manager_module


@pytest.fixture(autouse=True)
def fresh_singletons():
    """Every test starts from the built-in species tables and a new config manager."""
    set_species_registry(None)
    config_manager_module._config_manager_instance = None
    yield
    set_species_registry(None)
    config_manager_module._config_manager_instance = None


@pytest.fixture
def synthetic_series():
    """4096-sample two-color series with 92 nm single-color and 26 nm differential RMS."""
    return synthesize_series(seed=1234)


@pytest.fixture
def position_csv(tmp_path, synthetic_series) -> Path:
    """The synthetic series written in the position-file schema."""
    path = tmp_path / "positions.csv"
    with open(path, "w", encoding="utf-8") as f:
        f.write("# synthetic lattice-minimum positions\n")
    series_to_frame(synthetic_series).to_csv(path, mode="a", index=False)
    return path


@pytest.fixture
def write_config(tmp_path):
    """Write a YAML run configuration and return its path."""

    def _write(data: dict, name: str = "run.yaml") -> Path:
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(data, f)
        return path

    return _write
