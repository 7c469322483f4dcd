"""
Lattice QIP - Lattice Model
Two-color triangular optical lattice: intensity pattern, dipole potentials,
cross-talk forces, decoherence limits and the feasibility region.

Colors are indexed 0 (L1, qubit lattice) and 1 (L2, messenger lattice).
Both colors share one lattice constant, so the pattern shape is color
independent and only the intensity scale differs.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from app.core.errors import NearResonanceError, NonTranslationalPhaseError, RegimeError
from app.core.species_registry import CONSTANTS, Species, TransitionLine, detuning, lookup_species
from app.utils.logger import get_logger
import config


logger = get_logger(__name__)

LINE_MODELS = ("dominant", "fine_structure")

# Projection directions r_j = x cos(2jπ/3) + y sin(2jπ/3), j = 1, 2, 3
_ANGLES = np.array([2.0 * math.pi * j / 3.0 for j in (1, 2, 3)])
DIRECTIONS = np.stack([np.cos(_ANGLES), np.sin(_ANGLES)], axis=1)

# Which color confines which species
OWN_LATTICE = {
    config.QUBIT_SPECIES: 0,
    config.MESSENGER_SPECIES: 1,
}


# ============================================================================
# Geometry
# ============================================================================

def theta_for_wavelength(wavelength: float, lattice_constant: float) -> float:
    """
    Beam angle to the lattice normal giving lattice constant d.

    Raises:
        RegimeError: If 2λ/3d > 1 (no real angle)
    """
    s = 2.0 * wavelength / (3.0 * lattice_constant)
    if s > 1.0 or s <= 0.0:
        raise RegimeError(
            f"No beam angle for λ={wavelength:.4g} m and d={lattice_constant:.4g} m "
            f"(2λ/3d = {s:.4g})"
        )
    return math.asin(s)


def lattice_constant_from_theta(theta: float, wavelength: float) -> float:
    """Inverse of theta_for_wavelength: d = 2λ/(3 sin θ)."""
    return 2.0 * wavelength / (3.0 * math.sin(theta))


def lattice_vectors(lattice_constant: float) -> Tuple[np.ndarray, np.ndarray]:
    """Primitive vectors of the triangular lattice of the intensity pattern."""
    a1 = lattice_constant * np.array([0.0, 1.0])
    a2 = lattice_constant * np.array([math.sqrt(3.0) / 2.0, 0.5])
    return a1, a2


@dataclass(frozen=True)
class LatticeGeometry:
    """
    Beam geometry shared by both lattice colors.

    Attributes:
        lattice_constant: Lattice constant d (m)
        wavelengths: (λ₁, λ₂) in m
    """

    lattice_constant: float = config.DEFAULT_LATTICE_CONSTANT_M
    wavelengths: Tuple[float, float] = (config.DEFAULT_WAVELENGTH_1_M, config.DEFAULT_WAVELENGTH_2_M)

    def __post_init__(self):
        if self.lattice_constant <= 0:
            raise ValueError("lattice_constant must be positive")
        # Raises RegimeError for unreachable geometries
        for wavelength in self.wavelengths:
            theta_for_wavelength(wavelength, self.lattice_constant)

    @property
    def thetas(self) -> Tuple[float, ...]:
        return tuple(theta_for_wavelength(w, self.lattice_constant) for w in self.wavelengths)

    def k_perp_for(self, color: int) -> float:
        """In-plane wavevector magnitude k sin θ of one color (1/m)."""
        wavelength = self.wavelengths[color]
        return 2.0 * math.pi / wavelength * math.sin(self.thetas[color])

    @property
    def k_perp(self) -> float:
        return self.k_perp_for(0)

    @property
    def pattern_wavenumber(self) -> float:
        """g = √3 k⊥ / 2, the spatial frequency inside each cos² term."""
        return math.sqrt(3.0) * self.k_perp / 2.0

    @property
    def directions(self) -> np.ndarray:
        return DIRECTIONS.copy()

    def to_dict(self) -> Dict:
        a1, a2 = lattice_vectors(self.lattice_constant)
        return {
            'lattice_constant_um': self.lattice_constant * 1e6,
            'wavelengths_nm': [w * 1e9 for w in self.wavelengths],
            'theta_deg': [math.degrees(t) for t in self.thetas],
            'k_perp_per_um': [self.k_perp_for(c) * 1e-6 for c in range(len(self.wavelengths))],
            'lattice_vectors_um': [list(a1 * 1e6), list(a2 * 1e6)],
        }


@dataclass(frozen=True)
class LatticeConfig:
    """
    One lattice color: geometry, peak intensity and beam phases.

    Phases are stored modulo 2π.
    """

    geometry: LatticeGeometry = field(default_factory=LatticeGeometry)
    intensity: float = 0.0
    phases: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    color: int = 0

    def __post_init__(self):
        if self.intensity < 0:
            raise ValueError("intensity must be non-negative")
        if len(self.phases) != 3:
            raise ValueError("exactly three beam phases are required")
        if self.color not in (0, 1):
            raise ValueError("color must be 0 (L1) or 1 (L2)")
        wrapped = tuple(float(p) % (2.0 * math.pi) for p in self.phases)
        object.__setattr__(self, 'phases', wrapped)

    @property
    def wavelength(self) -> float:
        return self.geometry.wavelengths[self.color]


# ============================================================================
# Potentials
# ============================================================================

def _check_detuning(line: TransitionLine, delta: float) -> None:
    if abs(delta) <= config.MIN_DETUNING_IN_LINEWIDTHS * line.gamma:
        raise NearResonanceError(
            f"{line.label}: |Δ| = {abs(delta):.3e} rad/s is within "
            f"{config.MIN_DETUNING_IN_LINEWIDTHS:g}Γ of resonance"
        )


def dipole_potential(line: TransitionLine, intensity: float, delta: float) -> float:
    """
    Far-detuned two-level dipole potential V = (ħΓ/8)(I/I_sat)/(Δ/Γ).

    Args:
        line: Transition line
        intensity: Local intensity (W/m²)
        delta: Detuning Δ (rad/s)

    Returns:
        Potential energy (J); positive for blue detuning

    Raises:
        NearResonanceError: If |Δ| ≤ 10Γ
    """
    _check_detuning(line, delta)
    return CONSTANTS.hbar * line.gamma ** 2 * intensity / (8.0 * line.isat * delta)


def species_potential(
    species: Species,
    intensity: float,
    laser_wavelength: float,
    line_model: str = config.DEFAULT_LINE_MODEL,
) -> float:
    """
    Dipole potential of a species in light of one wavelength.

    "dominant" uses the D2 line alone; "fine_structure" sums D1 and D2
    weighted by line strength.
    """
    return sum(v for _, v in _line_potentials(species, intensity, laser_wavelength, line_model))


def _line_potentials(
    species: Species, intensity: float, laser_wavelength: float, line_model: str
) -> List[Tuple[TransitionLine, float]]:
    if line_model not in LINE_MODELS:
        raise ValueError(f"Unknown line model '{line_model}' (expected one of {LINE_MODELS})")

    if line_model == "dominant":
        line = species.dominant_line
        return [(line, dipole_potential(line, intensity, detuning(line, laser_wavelength)))]

    return [
        (line, line.strength * dipole_potential(line, intensity, detuning(line, laser_wavelength)))
        for line in species.lines
    ]


# ============================================================================
# Intensity pattern
# ============================================================================

def _arguments(lattice: LatticeConfig, x, y) -> np.ndarray:
    g = lattice.geometry.pattern_wavenumber
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    phases = np.asarray(lattice.phases)
    # shape (..., 3)
    r = x[..., None] * DIRECTIONS[:, 0] + y[..., None] * DIRECTIONS[:, 1]
    return g * r + phases


def intensity_pattern(lattice: LatticeConfig, x, y):
    """
    Relative intensity 6 − Σ_j cos²(g r_j + φ_j); caller scales by I_m/6.

    Accepts scalars or broadcastable arrays of positions (m).
    """
    value = 6.0 - np.sum(np.cos(_arguments(lattice, x, y)) ** 2, axis=-1)
    return float(value) if np.ndim(value) == 0 else value


def pattern_gradient(lattice: LatticeConfig, x, y) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic gradient (∂P/∂x, ∂P/∂y) of the relative pattern (1/m)."""
    g = lattice.geometry.pattern_wavenumber
    s = np.sin(2.0 * _arguments(lattice, x, y)) * g
    return np.sum(s * DIRECTIONS[:, 0], axis=-1), np.sum(s * DIRECTIONS[:, 1], axis=-1)


def unit_cell_points(lattice_constant: float, samples: int = config.UNIT_CELL_SAMPLES) -> Tuple[np.ndarray, np.ndarray]:
    """Regular samples u·a1 + v·a2, u, v ∈ [0, 1), of one unit cell."""
    a1, a2 = lattice_vectors(lattice_constant)
    u, v = np.meshgrid(np.arange(samples) / samples, np.arange(samples) / samples, indexing='ij')
    x = u * a1[0] + v * a2[0]
    y = u * a1[1] + v * a2[1]
    return x, y


def pattern_extrema(lattice: LatticeConfig, samples: int = config.UNIT_CELL_SAMPLES) -> Tuple[float, float]:
    """(P_min, P_max) of the relative pattern over a sampled unit cell."""
    x, y = unit_cell_points(lattice.geometry.lattice_constant, samples)
    values = intensity_pattern(lattice, x, y)
    return float(np.min(values)), float(np.max(values))


def max_pattern_gradient(lattice: LatticeConfig, samples: int = config.UNIT_CELL_SAMPLES) -> float:
    """Largest |∇P| over a sampled unit cell (1/m)."""
    x, y = unit_cell_points(lattice.geometry.lattice_constant, samples)
    gx, gy = pattern_gradient(lattice, x, y)
    return float(np.max(np.hypot(gx, gy)))


def pattern_grid(lattice: LatticeConfig, nx: int = 64, ny: int = 64, extent: Optional[float] = None) -> pd.DataFrame:
    """
    Sample the relative pattern on a square grid for plotting.

    Args:
        lattice: Lattice color
        nx, ny: Grid points along x and y
        extent: Side length (m); defaults to 3 lattice constants

    Returns:
        DataFrame with columns x_um, y_um, intensity_rel in row-major order
    """
    extent = extent or 3.0 * lattice.geometry.lattice_constant
    xs = np.linspace(0.0, extent, nx)
    ys = np.linspace(0.0, extent, ny)
    yy, xx = np.meshgrid(ys, xs, indexing='ij')
    values = intensity_pattern(lattice, xx, yy)
    return pd.DataFrame({
        'x_um': xx.ravel() * 1e6,
        'y_um': yy.ravel() * 1e6,
        'intensity_rel': np.asarray(values).ravel(),
    })


# ============================================================================
# Phase-to-translation mapping
# ============================================================================

def translation_for_phases(lattice: LatticeConfig, delta_phases: Sequence[float]) -> np.ndarray:
    """
    Rigid in-plane shift t with I(x − t; φ) = I(x; φ + δφ).

    Each cos² term is π-periodic, so the triple translates the pattern iff
    Σδφ_j is a multiple of π.

    Args:
        lattice: Lattice color (phases φ)
        delta_phases: Phase changes δφ_j (rad)

    Returns:
        Displacement vector (m), shape (2,)

    Raises:
        NonTranslationalPhaseError: If the triple deforms the pattern
    """
    dphi = np.asarray(delta_phases, dtype=float)
    if dphi.shape != (3,):
        raise ValueError("exactly three phase changes are required")

    total = float(np.sum(dphi))
    m = round(total / math.pi)
    if abs(total - m * math.pi) > config.TRANSLATION_PHASE_TOLERANCE:
        raise NonTranslationalPhaseError(
            f"Phase sum {total:.6g} rad is not a multiple of π; the pattern deforms"
        )

    reduced = dphi.copy()
    reduced[0] -= m * math.pi
    g = lattice.geometry.pattern_wavenumber
    shift = -(2.0 / (3.0 * g)) * (reduced @ DIRECTIONS)

    _verify_translation(lattice, dphi, shift)
    logger.debug(f"Phase change {dphi.tolist()} -> translation {shift.tolist()} m")
    return shift


def _verify_translation(lattice: LatticeConfig, dphi: np.ndarray, shift: np.ndarray) -> None:
    x, y = unit_cell_points(lattice.geometry.lattice_constant, config.TRANSLATION_CHECK_SAMPLES)
    shifted = intensity_pattern(lattice, x - shift[0], y - shift[1])
    rephased = LatticeConfig(
        geometry=lattice.geometry,
        intensity=lattice.intensity,
        phases=tuple(np.asarray(lattice.phases) + dphi),
        color=lattice.color,
    )
    target = intensity_pattern(rephased, x, y)
    span = float(np.max(target) - np.min(target)) or 1.0
    mismatch = float(np.max(np.abs(shifted - target))) / span
    if mismatch > config.TRANSLATION_PATTERN_TOLERANCE:
        raise NonTranslationalPhaseError(
            f"No rigid shift reproduces the rephased pattern (mismatch {mismatch:.3g})"
        )


# ============================================================================
# Forces, depths and rates
# ============================================================================

def own_lattice_index(species: Species) -> int:
    """Color index of the lattice that confines the species."""
    try:
        return OWN_LATTICE[species.name]
    except KeyError:
        raise ValueError(f"No lattice assignment for species '{species.name}'") from None


def _colors(
    i1: float, i2: float, geometry: LatticeGeometry, phases: Sequence[Sequence[float]]
) -> Tuple[LatticeConfig, LatticeConfig]:
    return (
        LatticeConfig(geometry=geometry, intensity=i1, phases=tuple(phases[0]), color=0),
        LatticeConfig(geometry=geometry, intensity=i2, phases=tuple(phases[1]), color=1),
    )


_ZERO_PHASES = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))


def max_force(lattice: LatticeConfig, species: Species, line_model: str = config.DEFAULT_LINE_MODEL) -> float:
    """Largest dipole force magnitude a lattice color exerts on a species (N)."""
    if lattice.intensity == 0:
        return 0.0
    u = species_potential(species, lattice.intensity, lattice.wavelength, line_model)
    return abs(u) / 6.0 * max_pattern_gradient(lattice)


def max_force_ratio(
    i1: float,
    i2: float,
    species: Species,
    geometry: Optional[LatticeGeometry] = None,
    phases: Sequence[Sequence[float]] = _ZERO_PHASES,
    line_model: str = config.DEFAULT_LINE_MODEL,
) -> float:
    """
    Cross-talk factor α: max force of the other lattice over the own lattice's.

    Args:
        i1, i2: Peak intensities of L1 and L2 (W/m²)
        species: Species whose forces are compared
        geometry: Beam geometry (defaults to LatticeGeometry())
        phases: Beam phases per color
        line_model: "dominant" or "fine_structure"

    Returns:
        α (dimensionless)
    """
    if i1 < 0 or i2 < 0:
        raise ValueError("intensities must be non-negative")
    geometry = geometry or LatticeGeometry()
    colors = _colors(i1, i2, geometry, phases)
    own = own_lattice_index(species)
    own_force = max_force(colors[own], species, line_model)
    if own_force == 0:
        raise ValueError("own lattice intensity must be positive")
    return max_force(colors[1 - own], species, line_model) / own_force


def lattice_depth(lattice: LatticeConfig, species: Species, line_model: str = config.DEFAULT_LINE_MODEL) -> float:
    """Peak-to-trough potential depth |U(I_m)|·(P_max − P_min)/6 (J)."""
    if lattice.intensity == 0:
        return 0.0
    p_min, p_max = pattern_extrema(lattice)
    u = species_potential(species, lattice.intensity, lattice.wavelength, line_model)
    return abs(u) * (p_max - p_min) / 6.0


def scattering_rate(line: TransitionLine, v_depth: float, delta: float) -> float:
    """
    Off-resonant photon scattering rate Γ_sc = (V/ħ)(Γ/|Δ|).

    Raises:
        NearResonanceError: If |Δ| ≤ 10Γ
    """
    _check_detuning(line, delta)
    return abs(v_depth) / CONSTANTS.hbar * line.gamma / abs(delta)


def species_scattering_rate(
    species: Species,
    lattices: Sequence[LatticeConfig],
    line_model: str = config.DEFAULT_LINE_MODEL,
) -> float:
    """Total scattering rate of a species in the light of all lattice colors (1/s)."""
    total = 0.0
    for lattice in lattices:
        if lattice.intensity == 0:
            continue
        p_min, p_max = pattern_extrema(lattice)
        depth_fraction = (p_max - p_min) / 6.0
        for line, potential in _line_potentials(species, lattice.intensity, lattice.wavelength, line_model):
            delta = detuning(line, lattice.wavelength)
            total += scattering_rate(line, potential * depth_fraction, delta)
    return total


def recoil_energy(mass: float, lattice_constant: float) -> float:
    """Lattice recoil energy E_R = ħ²π²/(2 m d²) (J)."""
    return CONSTANTS.hbar ** 2 * math.pi ** 2 / (2.0 * mass * lattice_constant ** 2)


def tunneling_rate(v_depth: float, species_mass: float, lattice_constant: float) -> float:
    """
    Tight-binding tunneling rate J/ħ of the lowest band (1/s).

    Uses the deep-lattice 1D asymptote
    J = (4/√π) E_R s^(3/4) exp(−2√s), s = V/E_R.
    """
    if v_depth <= 0:
        raise ValueError("lattice depth must be positive")
    e_r = recoil_energy(species_mass, lattice_constant)
    s = v_depth / e_r
    if s < 1.0:
        logger.warning(f"Shallow lattice (V/E_R = {s:.3g}); tunneling estimate unreliable")
    return float(_tunneling_per_s(s, e_r))


def _tunneling_per_s(s, e_r: float):
    s = np.asarray(s, dtype=float)
    return 4.0 / math.sqrt(math.pi) * e_r * s ** 0.75 * np.exp(-2.0 * np.sqrt(s)) / CONSTANTS.hbar


def third_axis_frequency(depth: float, species_mass: float, wavelength: float) -> float:
    """
    Harmonic frequency of a retro-reflected 1D standing wave V₀cos²(kz).

    Returns:
        Angular trap frequency ω = k·√(2V₀/m) (rad/s)
    """
    if depth <= 0:
        raise ValueError("depth must be positive")
    k = 2.0 * math.pi / wavelength
    return k * math.sqrt(2.0 * depth / species_mass)


# ============================================================================
# Feasibility
# ============================================================================

@dataclass(frozen=True)
class FeasibilityRequirements:
    decoherence_ceiling: float = config.DEFAULT_DECOHERENCE_CEILING_PER_S
    alpha_ceiling: float = config.DEFAULT_ALPHA_CEILING


@dataclass(frozen=True)
class FeasibilityPoint:
    """One (I₁, I₂) grid point with its five requirement flags."""

    i1: float
    i2: float
    alpha: float
    independent_control_ok: bool
    li_tunneling_ok: bool
    cs_tunneling_ok: bool
    li_scattering_ok: bool
    cs_scattering_ok: bool

    @property
    def feasible(self) -> bool:
        return (
            self.independent_control_ok
            and self.li_tunneling_ok
            and self.cs_tunneling_ok
            and self.li_scattering_ok
            and self.cs_scattering_ok
        )

    @property
    def ratio(self) -> float:
        return self.i1 / self.i2

    def to_row(self) -> Dict:
        return {
            'I1_W_m2': self.i1,
            'I2_W_m2': self.i2,
            'alpha': self.alpha,
            'indep_ok': int(self.independent_control_ok),
            'li_tun_ok': int(self.li_tunneling_ok),
            'cs_tun_ok': int(self.cs_tunneling_ok),
            'li_sc_ok': int(self.li_scattering_ok),
            'cs_sc_ok': int(self.cs_scattering_ok),
            'feasible': int(self.feasible),
        }


@dataclass(frozen=True)
class SpeciesResponse:
    """
    Per-unit-intensity response of one species to both colors.

    Every quantity is linear in the intensities, so a whole grid is evaluated
    from these coefficients.
    """

    name: str
    own: int
    mass: float
    force_per_intensity: Tuple[float, float]
    depth_per_intensity: Tuple[float, float]
    scattering_per_intensity: Tuple[float, float]

    @property
    def alpha_coefficient(self) -> float:
        """α = alpha_coefficient · I_other / I_own."""
        return self.force_per_intensity[1 - self.own] / self.force_per_intensity[self.own]


def species_response(
    species: Species,
    geometry: Optional[LatticeGeometry] = None,
    phases: Sequence[Sequence[float]] = _ZERO_PHASES,
    line_model: str = config.DEFAULT_LINE_MODEL,
) -> SpeciesResponse:
    """Evaluate force, depth and scattering coefficients at unit intensity."""
    geometry = geometry or LatticeGeometry()
    colors = _colors(1.0, 1.0, geometry, phases)
    return SpeciesResponse(
        name=species.name,
        own=own_lattice_index(species),
        mass=species.mass,
        force_per_intensity=tuple(max_force(c, species, line_model) for c in colors),
        depth_per_intensity=tuple(lattice_depth(c, species, line_model) for c in colors),
        scattering_per_intensity=tuple(species_scattering_rate(species, [c], line_model) for c in colors),
    )


@dataclass
class FeasibilityResult:
    """Labeled grid plus the extremal feasible I₁/I₂ ratios."""

    points: List[FeasibilityPoint]
    requirements: FeasibilityRequirements

    @property
    def feasible_points(self) -> List[FeasibilityPoint]:
        return [p for p in self.points if p.feasible]

    @property
    def ratio_bounds(self) -> Optional[Tuple[float, float]]:
        ratios = [p.ratio for p in self.feasible_points]
        if not ratios:
            return None
        return min(ratios), max(ratios)

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame([p.to_row() for p in self.points])


def _rates(
    response: SpeciesResponse, i1: np.ndarray, i2: np.ndarray, lattice_constant: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    intensities = (i1, i2)
    alpha = response.alpha_coefficient * intensities[1 - response.own] / intensities[response.own]
    scattering = (
        response.scattering_per_intensity[0] * i1 + response.scattering_per_intensity[1] * i2
    )
    depth = response.depth_per_intensity[response.own] * intensities[response.own]
    e_r = recoil_energy(response.mass, lattice_constant)
    tunneling = np.where(depth > 0, _tunneling_per_s(depth / e_r, e_r), np.inf)
    return alpha, scattering, tunneling


def _evaluate_rows(
    i1_values: np.ndarray,
    i2_values: np.ndarray,
    li: SpeciesResponse,
    cs: SpeciesResponse,
    requirements: FeasibilityRequirements,
    lattice_constant: float,
) -> List[FeasibilityPoint]:
    i1, i2 = np.meshgrid(i1_values, i2_values, indexing='ij')
    li_alpha, li_sc, li_tun = _rates(li, i1, i2, lattice_constant)
    cs_alpha, cs_sc, cs_tun = _rates(cs, i1, i2, lattice_constant)

    ceiling = requirements.decoherence_ceiling
    points = []
    for idx in np.ndindex(i1.shape):
        points.append(FeasibilityPoint(
            i1=float(i1[idx]),
            i2=float(i2[idx]),
            alpha=float(max(li_alpha[idx], cs_alpha[idx])),
            independent_control_ok=bool(
                li_alpha[idx] < requirements.alpha_ceiling and cs_alpha[idx] < requirements.alpha_ceiling
            ),
            li_tunneling_ok=bool(li_tun[idx] < ceiling),
            cs_tunneling_ok=bool(cs_tun[idx] < ceiling),
            li_scattering_ok=bool(li_sc[idx] < ceiling),
            cs_scattering_ok=bool(cs_sc[idx] < ceiling),
        ))
    return points


def default_grid(points: int = config.DEFAULT_GRID_POINTS) -> Tuple[np.ndarray, np.ndarray]:
    """Log-spaced default (I₁, I₂) axes."""
    lo1, hi1 = config.DEFAULT_GRID_I1_RANGE_W_M2
    lo2, hi2 = config.DEFAULT_GRID_I2_RANGE_W_M2
    return (
        np.logspace(math.log10(lo1), math.log10(hi1), points),
        np.logspace(math.log10(lo2), math.log10(hi2), points),
    )


def feasibility_region(
    i1_values: Sequence[float],
    i2_values: Sequence[float],
    requirements: Optional[FeasibilityRequirements] = None,
    geometry: Optional[LatticeGeometry] = None,
    line_model: str = config.DEFAULT_LINE_MODEL,
    n_jobs: int = 1,
) -> FeasibilityResult:
    """
    Label every (I₁, I₂) grid point with the five requirement flags.

    Rows of I₁ are evaluated independently (optionally in parallel) and
    merged in grid order, so the result does not depend on n_jobs.

    Args:
        i1_values: L1 intensities (W/m²)
        i2_values: L2 intensities (W/m²)
        requirements: Decoherence and cross-talk ceilings
        geometry: Beam geometry
        line_model: "dominant" or "fine_structure"
        n_jobs: joblib worker count

    Returns:
        FeasibilityResult (an empty feasible set is a valid result)
    """
    i1_values = np.asarray(i1_values, dtype=float)
    i2_values = np.asarray(i2_values, dtype=float)
    if i1_values.size == 0 or i2_values.size == 0:
        raise ValueError("feasibility grid must be non-empty")
    if np.any(i1_values <= 0) or np.any(i2_values <= 0):
        raise ValueError("grid intensities must be positive")

    requirements = requirements or FeasibilityRequirements()
    geometry = geometry or LatticeGeometry()
    li = species_response(lookup_species(config.QUBIT_SPECIES), geometry, line_model=line_model)
    cs = species_response(lookup_species(config.MESSENGER_SPECIES), geometry, line_model=line_model)

    logger.info(f"Evaluating feasibility grid {i1_values.size}x{i2_values.size}")
    chunks = np.array_split(i1_values, max(1, min(n_jobs, i1_values.size)))
    results = Parallel(n_jobs=n_jobs)(
        delayed(_evaluate_rows)(chunk, i2_values, li, cs, requirements, geometry.lattice_constant)
        for chunk in chunks
    )

    points = [p for chunk_points in results for p in chunk_points]
    result = FeasibilityResult(points=points, requirements=requirements)
    logger.info(f"Feasible points: {len(result.feasible_points)} of {len(points)}")
    return result


def independent_control_bounds(
    alpha_ceiling: float = config.DEFAULT_ALPHA_CEILING,
    geometry: Optional[LatticeGeometry] = None,
    line_model: str = config.DEFAULT_LINE_MODEL,
) -> Tuple[float, float]:
    """
    I₁/I₂ interval in which both species' cross-talk stays below the ceiling.

    Returns:
        (low, high) ratio bounds
    """
    if alpha_ceiling <= 0:
        raise ValueError("alpha_ceiling must be positive")
    li = species_response(lookup_species(config.QUBIT_SPECIES), geometry, line_model=line_model)
    cs = species_response(lookup_species(config.MESSENGER_SPECIES), geometry, line_model=line_model)
    # α_Li = a_Li·I₂/I₁ and α_Cs = a_Cs·I₁/I₂
    return li.alpha_coefficient / alpha_ceiling, alpha_ceiling / cs.alpha_coefficient


def optimal_ratio(
    geometry: Optional[LatticeGeometry] = None,
    line_model: str = config.DEFAULT_LINE_MODEL,
) -> Dict[str, float]:
    """Ratio balancing both species' cross-talk (geometric mean of the bounds)."""
    low, high = independent_control_bounds(1.0, geometry, line_model)
    ratio = math.sqrt(low * high)
    return {
        'ratio': ratio,
        'alpha_li': low / ratio,
        'alpha_cs': ratio / high,
    }


@dataclass
class OperatingPoint:
    """Rates and cross-talk at one (I₁, I₂) configuration."""

    i1: float
    i2: float
    alpha: Dict[str, float]
    depth_rad_s: Dict[str, float]
    depth_in_recoils: Dict[str, float]
    scattering_per_s: Dict[str, float]
    tunneling_per_s: Dict[str, float]

    def within(self, ceiling: float) -> bool:
        rates = list(self.scattering_per_s.values()) + list(self.tunneling_per_s.values())
        return all(r < ceiling for r in rates)

    def to_dict(self) -> Dict:
        return {
            'I1_W_m2': self.i1,
            'I2_W_m2': self.i2,
            'ratio': self.i1 / self.i2,
            'alpha': self.alpha,
            'depth_rad_s': self.depth_rad_s,
            'depth_in_recoils': self.depth_in_recoils,
            'scattering_per_s': self.scattering_per_s,
            'tunneling_per_s': self.tunneling_per_s,
        }


def operating_point(
    i1: float = config.DEFAULT_I1_W_M2,
    ratio: float = config.DEFAULT_RATIO_I1_I2,
    geometry: Optional[LatticeGeometry] = None,
    line_model: str = config.DEFAULT_LINE_MODEL,
) -> OperatingPoint:
    """
    Evaluate cross-talk, depths, scattering and tunneling at I₁, I₂ = I₁/ratio.
    """
    if i1 <= 0 or ratio <= 0:
        raise ValueError("i1 and ratio must be positive")
    geometry = geometry or LatticeGeometry()
    i2 = i1 / ratio
    colors = _colors(i1, i2, geometry, _ZERO_PHASES)

    result = OperatingPoint(i1=i1, i2=i2, alpha={}, depth_rad_s={}, depth_in_recoils={},
                            scattering_per_s={}, tunneling_per_s={})
    for name in (config.QUBIT_SPECIES, config.MESSENGER_SPECIES):
        species = lookup_species(name)
        own = colors[own_lattice_index(species)]
        depth = lattice_depth(own, species, line_model)
        result.alpha[name] = max_force_ratio(i1, i2, species, geometry, line_model=line_model)
        result.depth_rad_s[name] = depth / CONSTANTS.hbar
        result.depth_in_recoils[name] = depth / recoil_energy(species.mass, geometry.lattice_constant)
        result.scattering_per_s[name] = species_scattering_rate(species, colors, line_model)
        result.tunneling_per_s[name] = tunneling_rate(depth, species.mass, geometry.lattice_constant)
    return result
