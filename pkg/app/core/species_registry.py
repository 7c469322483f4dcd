"""
Lattice QIP - Species Registry
Physical constants and atomic species/transition data for 6Li and 133Cs.

All quantities are SI; angular frequencies are rad/s. Linewidths and
saturation intensities are compiled-in table values and can be overridden
with a flat key/value mapping (see SpeciesRegistry.apply_overrides).
"""

import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Mapping, Optional, Tuple

from scipy import constants as sc

from app.core.errors import UnknownSpeciesError
from app.utils.logger import get_logger


logger = get_logger(__name__)


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA constants used across the package (SI)."""

    hbar: float = sc.hbar
    amu: float = sc.atomic_mass
    bohr_radius: float = sc.physical_constants["Bohr radius"][0]
    speed_of_light: float = sc.c
    gauss_per_tesla: float = 1e4

    def to_dict(self) -> Dict[str, float]:
        """Convert to dictionary."""
        return {
            'hbar': self.hbar,
            'amu': self.amu,
            'bohr_radius': self.bohr_radius,
            'speed_of_light': self.speed_of_light,
            'gauss_per_tesla': self.gauss_per_tesla,
        }


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class TransitionLine:
    """
    One optical transition (two-level description).

    Attributes:
        label: Line name, e.g. "D1" or "D2"
        wavelength: Vacuum wavelength λ₀ (m)
        gamma: Natural linewidth Γ (rad/s)
        isat: Two-level saturation intensity (W/m²)
        strength: Relative line strength within the fine-structure doublet
    """

    label: str
    wavelength: float
    gamma: float
    isat: float
    strength: float = 1.0

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ValueError(f"{self.label}: wavelength must be positive")
        if self.gamma <= 0:
            raise ValueError(f"{self.label}: linewidth must be positive")
        if self.isat <= 0:
            raise ValueError(f"{self.label}: saturation intensity must be positive")

    @property
    def omega0(self) -> float:
        """Angular transition frequency ω₀ = 2πc/λ₀ (rad/s)."""
        return 2.0 * math.pi * CONSTANTS.speed_of_light / self.wavelength

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary (user-facing units)."""
        return {
            'label': self.label,
            'wavelength_nm': self.wavelength * 1e9,
            'gamma_hz': self.gamma / (2.0 * math.pi),
            'isat_w_m2': self.isat,
            'strength': self.strength,
        }


@dataclass(frozen=True)
class Species:
    """
    Atomic species with its optical lines and qubit encoding.

    Attributes:
        name: Registry key ("Li6", "Cs133")
        mass: Atomic mass (kg)
        lines: Transition lines, D1 first
        qubit_state_labels: Hyperfine labels of (|0⟩, |1⟩)
        fine_structure_pair: Labels of the (j=1/2, j=3/2) excited lines
    """

    name: str
    mass: float
    lines: Tuple[TransitionLine, ...]
    qubit_state_labels: Tuple[str, str]
    fine_structure_pair: Tuple[str, str] = ("D1", "D2")
    dominant_label: str = "D2"

    def line(self, label: str) -> TransitionLine:
        """Return the transition line with the given label."""
        for candidate in self.lines:
            if candidate.label == label:
                return candidate
        raise KeyError(f"{self.name} has no line '{label}'")

    @property
    def dominant_line(self) -> TransitionLine:
        return self.line(self.dominant_label)

    @property
    def mass_amu(self) -> float:
        return self.mass / CONSTANTS.amu

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'name': self.name,
            'mass_amu': self.mass_amu,
            'lines': [line.to_dict() for line in self.lines],
            'qubit_state_labels': list(self.qubit_state_labels),
            'fine_structure_pair': list(self.fine_structure_pair),
        }


def two_level_isat(wavelength: float, gamma: float) -> float:
    """
    Two-level saturation intensity ħω₀³Γ/(12πc²).

    Args:
        wavelength: Transition wavelength (m)
        gamma: Natural linewidth (rad/s)

    Returns:
        Saturation intensity (W/m²)
    """
    omega0 = 2.0 * math.pi * CONSTANTS.speed_of_light / wavelength
    return CONSTANTS.hbar * omega0 ** 3 * gamma / (12.0 * math.pi * CONSTANTS.speed_of_light ** 2)


def _mhz(value: float) -> float:
    return 2.0 * math.pi * value * 1e6


# Standard alkali data tables (vacuum wavelengths, two-level saturation intensities)
_BUILTIN_SPECIES: Dict[str, Species] = {
    "Li6": Species(
        name="Li6",
        mass=6.0151228 * CONSTANTS.amu,
        lines=(
            TransitionLine("D1", 670.992421e-9, _mhz(5.8724), 25.40, strength=1.0 / 3.0),
            TransitionLine("D2", 670.977338e-9, _mhz(5.8724), 25.41, strength=2.0 / 3.0),
        ),
        qubit_state_labels=("|F=1/2,m_F=1/2>", "|F=3/2,m_F=-1/2>"),
    ),
    "Cs133": Species(
        name="Cs133",
        mass=132.905451931 * CONSTANTS.amu,
        lines=(
            TransitionLine("D1", 894.59295986e-9, _mhz(4.5612), 8.33, strength=1.0 / 3.0),
            TransitionLine("D2", 852.34727582e-9, _mhz(5.2227), 11.02, strength=2.0 / 3.0),
        ),
        qubit_state_labels=("|F=3,m_F=0>", "|F=4,m_F=0>"),
    ),
}


class SpeciesRegistry:
    """
    Immutable-value store of species data with optional overrides.

    Override keys (flat mapping):
        <species>.<line>.gamma_hz   natural linewidth / 2π
        <species>.<line>.isat_w_m2  saturation intensity
        <species>.mass_amu          atomic mass in amu
    """

    def __init__(self, species: Optional[Mapping[str, Species]] = None):
        self._species: Dict[str, Species] = dict(species or _BUILTIN_SPECIES)

    def names(self) -> Tuple[str, ...]:
        return tuple(self._species)

    def lookup(self, name: str) -> Species:
        """
        Look up a species by registry name.

        Args:
            name: "Li6" or "Cs133"

        Returns:
            Fully populated Species

        Raises:
            UnknownSpeciesError: For any other name
        """
        try:
            return self._species[name]
        except KeyError:
            raise UnknownSpeciesError(
                f"Unknown species '{name}'. Known: {', '.join(self._species)}"
            ) from None

    def apply_overrides(self, overrides: Mapping[str, Any]) -> "SpeciesRegistry":
        """
        Return a new registry with table values replaced.

        Args:
            overrides: Flat mapping of override keys to numbers

        Returns:
            New SpeciesRegistry

        Raises:
            KeyError: If a key does not name a known species/line/field
        """
        updated = dict(self._species)

        for key, raw_value in overrides.items():
            parts = str(key).split(".")
            value = float(raw_value)
            species = updated.get(parts[0])
            if species is None:
                raise KeyError(f"Override '{key}': unknown species '{parts[0]}'")

            if len(parts) == 2 and parts[1] == "mass_amu":
                updated[parts[0]] = replace(species, mass=value * CONSTANTS.amu)
            elif len(parts) == 3 and parts[2] in ("gamma_hz", "isat_w_m2"):
                line = species.line(parts[1])
                if parts[2] == "gamma_hz":
                    new_line = replace(line, gamma=2.0 * math.pi * value)
                else:
                    new_line = replace(line, isat=value)
                lines = tuple(new_line if l.label == line.label else l for l in species.lines)
                updated[parts[0]] = replace(species, lines=lines)
            else:
                raise KeyError(f"Override '{key}' is not a recognized key")

            logger.info(f"Species override applied: {key} = {value}")

        return SpeciesRegistry(updated)


# Singleton instance
_registry_instance: Optional[SpeciesRegistry] = None


def get_species_registry() -> SpeciesRegistry:
    """
    Get the process-wide registry (built-in tables unless replaced).

    Returns:
        SpeciesRegistry instance
    """
    global _registry_instance
    if _registry_instance is None:
        _registry_instance = SpeciesRegistry()
    return _registry_instance


def set_species_registry(registry: Optional[SpeciesRegistry]) -> None:
    """Replace the process-wide registry (None restores the built-in tables)."""
    global _registry_instance
    _registry_instance = registry


def lookup_species(name: str) -> Species:
    """Look up a species in the process-wide registry."""
    return get_species_registry().lookup(name)


def detuning(line: TransitionLine, laser_wavelength: float) -> float:
    """
    Laser detuning Δ = ω − ω₀ from a transition.

    Args:
        line: Transition line
        laser_wavelength: Laser wavelength (m)

    Returns:
        Detuning in rad/s; positive means blue-detuned
    """
    if laser_wavelength <= 0:
        raise ValueError("laser_wavelength must be positive")
    return 2.0 * math.pi * CONSTANTS.speed_of_light / laser_wavelength - line.omega0
