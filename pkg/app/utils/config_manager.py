"""
Lattice QIP - Configuration Manager
Loads the YAML run configuration, applies command-line overrides and the
species-override file, and validates the result into a RunConfig.
"""

from pathlib import Path
from typing import Any, Dict, Optional

import pydantic
import yaml

from app.core.species_registry import SpeciesRegistry, get_species_registry, set_species_registry
from app.utils.logger import get_logger
from app.utils.run_config import RunConfig
from app.utils.validators import ValidationError, validate_override_keys, validate_positive
import config


def _describe(error: pydantic.ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]) or "<root>"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


class ConfigManager:
    """
    Manages run configuration with multiple layers:
    1. Compiled-in defaults (config.py and the RunConfig field defaults)
    2. YAML run configuration file
    3. Command-line overrides (--seed)
    4. Species-override file (LATTICE_QIP_SPECIES_OVERRIDES or the config)
    """

    def __init__(self):
        """Initialize the configuration manager."""
        self.logger = get_logger(self.__class__.__name__)

        self.config_path: Optional[Path] = None

        # Cache for the raw YAML mapping
        self._raw: Dict[str, Any] = {}
        self._run_config: Optional[RunConfig] = None

    # ========================================================================
    # Loading
    # ========================================================================

    def load(self, config_path: Optional[str | Path] = None) -> Dict[str, Any]:
        """
        Load a YAML run configuration.

        Args:
            config_path: Path to the YAML file (None = defaults only)

        Returns:
            Raw configuration mapping

        Raises:
            ValidationError: If the file is not a YAML mapping
            OSError: If the file cannot be read
        """
        self._run_config = None
        if config_path is None:
            self.config_path = None
            self._raw = {}
            self.logger.debug("No config file given, using defaults")
            return self._raw

        self.config_path = Path(config_path)
        with open(self.config_path, "r", encoding="utf-8") as f:
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                line = None
                mark = getattr(e, "problem_mark", None)
                if mark is not None:
                    line = mark.line + 1
                raise ValidationError(f"Malformed YAML in {self.config_path}: {e}", line=line) from e

        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ValidationError(f"{self.config_path} must contain a mapping of sections")

        self._raw = data
        self.logger.info(f"Run config loaded from {self.config_path}")
        return self._raw

    def load_species_overrides(self, override_path: str | Path) -> Dict[str, float]:
        """
        Read a flat `key: value` species-override file.

        Raises:
            ValidationError: Unknown keys or values that are not positive numbers
            OSError: If the file cannot be read
        """
        with open(override_path, "r", encoding="utf-8") as f:
            try:
                data = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ValidationError(f"Malformed species-override file {override_path}: {e}") from e

        if not isinstance(data, dict):
            raise ValidationError(f"{override_path} must be a flat key: value mapping")

        errors = validate_override_keys(data.keys(), get_species_registry().names())
        if errors:
            raise ValidationError("; ".join(errors))

        overrides = {}
        for key, value in data.items():
            is_valid, error = validate_positive(str(key), value)
            if not is_valid:
                raise ValidationError(f"{override_path}: {error}")
            overrides[str(key)] = float(value)

        self.logger.info(f"{len(overrides)} species override(s) read from {override_path}")
        return overrides

    # ========================================================================
    # Resolution
    # ========================================================================

    def resolve(self, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
        """
        Validate the loaded mapping plus overrides into a RunConfig.

        Args:
            overrides: Top-level overrides (e.g. {"seed": 7}); None values are
                ignored and section mappings are merged key by key

        Returns:
            RunConfig

        Raises:
            ValidationError: On unknown keys, wrong types or out-of-range values
        """
        data = dict(self._raw)
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if isinstance(value, dict) and isinstance(data.get(key), dict):
                data[key] = {**data[key], **value}
            else:
                data[key] = value

        override_file = data.pop("species_overrides_file", None) or config.SPECIES_OVERRIDE_FILE
        if override_file:
            merged = self.load_species_overrides(override_file)
            merged.update(data.get("species_overrides") or {})
            data["species_overrides"] = merged

        try:
            run_config = RunConfig.model_validate(data)
        except pydantic.ValidationError as e:
            raise ValidationError(f"Invalid configuration: {_describe(e)}") from e

        self._run_config = run_config
        self.logger.debug(f"Resolved run config: seed={run_config.seed}")
        return run_config

    def apply_species_overrides(self, run_config: RunConfig) -> SpeciesRegistry:
        """
        Install a registry carrying the run's species overrides.

        Raises:
            ValidationError: If an override key does not name a known line,
                or a value is not a positive number
        """
        for key, value in run_config.species_overrides.items():
            is_valid, error = validate_positive(key, value)
            if not is_valid:
                raise ValidationError(f"species_overrides: {error}")

        registry = SpeciesRegistry()
        if run_config.species_overrides:
            try:
                registry = registry.apply_overrides(run_config.species_overrides)
            except KeyError as e:
                raise ValidationError(str(e.args[0] if e.args else e)) from e
        set_species_registry(registry)
        return registry

    @property
    def run_config(self) -> RunConfig:
        """The last resolved RunConfig (resolving defaults on first use)."""
        if self._run_config is None:
            self.resolve()
        return self._run_config


# Singleton instance
_config_manager_instance: Optional[ConfigManager] = None


def get_config_manager() -> ConfigManager:
    """
    Get the singleton ConfigManager instance.

    Returns:
        ConfigManager instance
    """
    global _config_manager_instance
    if _config_manager_instance is None:
        _config_manager_instance = ConfigManager()
    return _config_manager_instance
