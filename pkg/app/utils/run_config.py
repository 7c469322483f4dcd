"""
Lattice QIP - Run Configuration Schema
Pydantic models for the sectioned YAML run configuration.

Every physical key carries its unit as a suffix (_nm, _um, _khz, _hz,
_w_m2, _ms, _bohr, _per_s); dimensionless keys carry none.
"""

from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.utils.validators import validate_probability
import config


def _probability(name: str, value: Optional[float], allow_one: bool) -> Optional[float]:
    if value is None:
        return value
    is_valid, error = validate_probability(name, value, allow_one=allow_one)
    if not is_valid:
        raise ValueError(error)
    return value


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class LatticeSection(_Section):
    """Beam geometry, line model and the reference intensities."""

    lattice_constant_um: float = Field(config.DEFAULT_LATTICE_CONSTANT_M * 1e6, gt=0)
    wavelength1_nm: float = Field(config.DEFAULT_WAVELENGTH_1_M * 1e9, gt=0)
    wavelength2_nm: float = Field(config.DEFAULT_WAVELENGTH_2_M * 1e9, gt=0)
    line_model: Literal["dominant", "fine_structure"] = config.DEFAULT_LINE_MODEL
    i1_w_m2: float = Field(config.DEFAULT_I1_W_M2, gt=0)
    ratio_i1_i2: float = Field(config.DEFAULT_RATIO_I1_I2, gt=0)


class FeasibilitySection(_Section):
    """
    (I₁, I₂) scan. The grid bounds and ceilings are required whenever the
    section is written out; the section as a whole defaults to the
    compiled-in scan.
    """

    i1_min_w_m2: float = Field(gt=0)
    i1_max_w_m2: float = Field(gt=0)
    i2_min_w_m2: float = Field(gt=0)
    i2_max_w_m2: float = Field(gt=0)
    grid_points: int = Field(config.DEFAULT_GRID_POINTS, ge=2)
    decoherence_ceiling_per_s: float = Field(ge=0)
    alpha_ceiling: float = Field(gt=0)

    @model_validator(mode="after")
    def _check_bounds(self):
        if self.i1_min_w_m2 >= self.i1_max_w_m2:
            raise ValueError("i1_min_w_m2 must be smaller than i1_max_w_m2")
        if self.i2_min_w_m2 >= self.i2_max_w_m2:
            raise ValueError("i2_min_w_m2 must be smaller than i2_max_w_m2")
        return self

    @classmethod
    def defaults(cls) -> "FeasibilitySection":
        lo1, hi1 = config.DEFAULT_GRID_I1_RANGE_W_M2
        lo2, hi2 = config.DEFAULT_GRID_I2_RANGE_W_M2
        return cls(
            i1_min_w_m2=lo1,
            i1_max_w_m2=hi1,
            i2_min_w_m2=lo2,
            i2_max_w_m2=hi2,
            decoherence_ceiling_per_s=config.DEFAULT_DECOHERENCE_CEILING_PER_S,
            alpha_ceiling=config.DEFAULT_ALPHA_CEILING,
        )


class GateSection(_Section):
    """Atom-molecule coupling inputs; trap frequencies take precedence over omega_r."""

    a_bohr: float = Field(config.DEFAULT_SCATTERING_LENGTH_BOHR, gt=0)
    omega0_khz: float = Field(config.DEFAULT_OMEGA0_HZ * 1e-3, gt=0)
    omega_r_khz: Optional[float] = Field(config.DEFAULT_OMEGA_R_HZ * 1e-3, gt=0)
    li_trap_khz: Optional[float] = Field(None, gt=0)
    cs_trap_khz: Optional[float] = Field(None, gt=0)
    r0_nm: Optional[float] = Field(config.DEFAULT_R0_M * 1e9, gt=0)
    offset_nm: float = Field(config.DEFAULT_OFFSET_M * 1e9, ge=0)
    detuning_vib_khz: Optional[float] = Field(None, gt=0)
    fc_method: Literal["closed_form", "quadrature"] = "closed_form"

    @model_validator(mode="after")
    def _check_traps(self):
        if (self.li_trap_khz is None) != (self.cs_trap_khz is None):
            raise ValueError("li_trap_khz and cs_trap_khz must be given together")
        if self.li_trap_khz is None and self.omega_r_khz is None:
            raise ValueError("either omega_r_khz or both trap frequencies are required")
        return self

    @property
    def trap_frequencies_hz(self) -> Optional[Tuple[float, float]]:
        if self.li_trap_khz is None:
            return None
        return (self.li_trap_khz * 1e3, self.cs_trap_khz * 1e3)


Site = Tuple[int, int]


class TransportSection(_Section):
    """Transport error law parameters and the rows to report."""

    n_sites: List[int] = Field(default_factory=lambda: [1, 2, 5, 10])
    pairs: List[Tuple[Site, Site]] = Field(default_factory=list)
    fidelity_target: float = Field(1.0 - config.DEFAULT_TRANSPORT_P1, gt=0)
    x0_nm: float = Field(config.DEFAULT_MESSENGER_X0_M * 1e9, gt=0)
    crosstalk_alpha: float = Field(config.DEFAULT_CROSSTALK_ALPHA, gt=0)
    crosstalk_depth_khz: float = Field(config.DEFAULT_CROSSTALK_DEPTH_HZ * 1e-3, gt=0)

    @field_validator("fidelity_target")
    @classmethod
    def _target_below_one(cls, value: float) -> float:
        return _probability("fidelity_target", value, allow_one=False)

    @field_validator("n_sites")
    @classmethod
    def _non_negative(cls, values: List[int]) -> List[int]:
        if any(n < 0 for n in values):
            raise ValueError("n_sites entries must be non-negative")
        return values


class ProtocolSection(_Section):
    """Entangling protocol run and its error budget."""

    ideal: bool = False
    n_sites: int = Field(1, ge=0)
    qubit_a: Optional[Site] = None
    qubit_b: Optional[Site] = None
    fidelity_per_transition: Optional[float] = Field(config.DEFAULT_FIDELITY_PER_TRANSITION, gt=0)
    transport_p1: float = config.DEFAULT_TRANSPORT_P1
    include_leakage: bool = config.DEFAULT_LEAKAGE_IN_BUDGET
    trials: int = Field(config.DEFAULT_MC_TRIALS, ge=2)

    @field_validator("fidelity_per_transition")
    @classmethod
    def _fidelity_in_range(cls, value: Optional[float]) -> Optional[float]:
        return _probability("fidelity_per_transition", value, allow_one=True)

    @field_validator("transport_p1")
    @classmethod
    def _p1_below_one(cls, value: float) -> float:
        return _probability("transport_p1", value, allow_one=False)

    @model_validator(mode="after")
    def _check_sites(self):
        if (self.qubit_a is None) != (self.qubit_b is None):
            raise ValueError("qubit_a and qubit_b must be given together")
        return self


class GeometrySection(_Section):
    """Pattern dump and the optional phase-shift translation."""

    color: Literal[0, 1] = 0
    delta_phases_rad: Optional[Tuple[float, float, float]] = None
    grid_points: int = Field(64, ge=2)
    extent_um: Optional[float] = Field(None, gt=0)


class StabilitySection(_Section):
    """Position-series analysis; without inputs a synthetic series is analysed."""

    inputs: List[str] = Field(default_factory=list)
    synthetic_samples: int = Field(4096, ge=2)
    synthetic_interval_ms: float = Field(1.0, gt=0)
    synthetic_rms1_nm: float = Field(92.0, gt=0)
    synthetic_rms_diff_nm: float = Field(26.0, gt=0)


class RunConfig(BaseModel):
    """Fully resolved run configuration; model_dump(mode='json') is the echo."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = Field(config.DEFAULT_SEED, ge=0)
    species_overrides: Dict[str, float] = Field(default_factory=dict)
    lattice: LatticeSection = Field(default_factory=LatticeSection)
    feasibility: FeasibilitySection = Field(default_factory=FeasibilitySection.defaults)
    gate: GateSection = Field(default_factory=GateSection)
    transport: TransportSection = Field(default_factory=TransportSection)
    protocol: ProtocolSection = Field(default_factory=ProtocolSection)
    geometry: GeometrySection = Field(default_factory=GeometrySection)
    stability: StabilitySection = Field(default_factory=StabilitySection)
