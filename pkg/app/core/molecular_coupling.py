"""
Lattice QIP - Molecular Coupling
Two-atom center-of-mass reduction, Franck-Condon overlap between the trap
ground state and the weakly bound molecule, atom-molecule Rabi rates and
the per-operation error terms of one gate.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import integrate

from app.core.errors import RegimeError
from app.core.species_registry import CONSTANTS, lookup_species
from app.utils.logger import get_logger
import config


logger = get_logger(__name__)

# C = FC_CLOSED_FORM_PREFACTOR · (a/r₀)^(3/2)
FC_CLOSED_FORM_PREFACTOR = 2.0 * math.pi ** -0.25

FC_METHODS = ("closed_form", "quadrature")


@dataclass(frozen=True)
class TwoAtomSystem:
    """
    Two atoms in separate harmonic traps, reduced to COM and relative motion.

    Fields may be scalars or equally shaped arrays; the derived frequencies
    are then evaluated elementwise.

    Attributes:
        m1, m2: Masses (kg)
        omega1, omega2: Per-species trap frequencies (rad/s)
    """

    m1: float
    m2: float
    omega1: float
    omega2: float

    @property
    def total_mass(self) -> float:
        return self.m1 + self.m2

    @property
    def reduced_mass(self) -> float:
        return self.m1 * self.m2 / self.total_mass

    @property
    def omega_c(self) -> float:
        """COM frequency, ω_c² = (m₁ω₁² + m₂ω₂²)/M."""
        return np.sqrt((self.m1 * self.omega1 ** 2 + self.m2 * self.omega2 ** 2) / self.total_mass)

    @property
    def omega_r(self) -> float:
        """Relative-motion frequency ω_r = ω₁ω₂/ω_c."""
        return self.omega1 * self.omega2 / self.omega_c

    @property
    def r0(self) -> float:
        """Relative-motion oscillator length √(ħ/µω_r)."""
        return oscillator_length(self.reduced_mass, self.omega_r)

    def to_dict(self) -> Dict[str, float]:
        return {
            'reduced_mass_amu': self.reduced_mass / CONSTANTS.amu,
            'omega_c_hz': self.omega_c / (2.0 * math.pi),
            'omega_r_hz': self.omega_r / (2.0 * math.pi),
            'r0_nm': self.r0 * 1e9,
        }


def oscillator_length(mass: float, omega: float) -> float:
    """Ground-state width √(ħ/mω) (m)."""
    return np.sqrt(CONSTANTS.hbar / (mass * omega))


def reduce_system(m1: float, omega1: float, m2: float, omega2: float) -> TwoAtomSystem:
    """Build the reduced two-atom description; all inputs must be positive."""
    if any(np.any(np.asarray(v) <= 0) for v in (m1, omega1, m2, omega2)):
        raise ValueError("masses and trap frequencies must be positive")
    return TwoAtomSystem(m1=m1, m2=m2, omega1=omega1, omega2=omega2)


def relative_trap_frequency_for(
    omega_r: float, frequency_ratio: float, m1: float, m2: float
) -> Tuple[float, float]:
    """
    Trap frequencies (ω₁, ω₂ = ρω₁) producing a requested ω_r.

    Args:
        omega_r: Target relative-motion frequency (rad/s)
        frequency_ratio: ρ = ω₂/ω₁
        m1, m2: Masses (kg)
    """
    if min(omega_r, frequency_ratio, m1, m2) <= 0:
        raise ValueError("inputs must be positive")
    total = m1 + m2
    omega1 = omega_r * math.sqrt((m1 + m2 * frequency_ratio ** 2) / total) / frequency_ratio
    return omega1, frequency_ratio * omega1


# ============================================================================
# Franck-Condon overlap
# ============================================================================

def _check_regime(a: float, r0: float) -> None:
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    if a <= 0 or a >= r0 / 2.0:
        raise RegimeError(
            f"Scattering length a = {a:.3e} m outside 0 < a < r0/2 (r0 = {r0:.3e} m)"
        )


def franck_condon(a: float, r0: float) -> float:
    """
    Closed-form overlap C = 2π^(−1/4)(a/r₀)^(3/2), valid for a ≪ r₀.

    Raises:
        RegimeError: If a ≤ 0 or a ≥ r₀/2
    """
    _check_regime(a, r0)
    return FC_CLOSED_FORM_PREFACTOR * (a / r0) ** 1.5


def _quad(integrand, eps: float) -> float:
    value, abserr = integrate.quad(
        integrand,
        0.0,
        config.FC_QUADRATURE_UPPER_R0,
        points=sorted({eps, 10.0 * eps, 1.0}),
        epsabs=config.FC_QUADRATURE_EPSABS,
        epsrel=1e-10,
        limit=config.FC_QUADRATURE_LIMIT,
    )
    logger.debug(f"quad value={value:.6e} abserr={abserr:.2e}")
    return value


def franck_condon_quadrature(a: float, r0: float) -> float:
    """
    Overlap ∫4πr²ψ_a(r)ψ_m(r)dr by adaptive quadrature on (0, 20r₀).

    ψ_a = (r₀²π)^(−3/4) exp(−r²/2r₀²), ψ_m = (2πa)^(−1/2) exp(−r/a)/r.
    The integral is taken in u = r/r₀, where the integrand is u·exp(−u/ε − u²/2).
    """
    _check_regime(a, r0)
    eps = a / r0
    prefactor = 4.0 * math.pi * (2.0 * math.pi) ** -0.5 * math.pi ** -0.75 * eps ** -0.5
    return prefactor * _quad(lambda u: u * math.exp(-u / eps - 0.5 * u * u), eps)


def radial_normalization(kind: str, a: float, r0: float) -> float:
    """
    ∫4πr²ψ²dr for "trap" (ψ_a) or "molecule" (ψ_m) with the overlap quadrature.
    """
    eps = a / r0
    if kind == "trap":
        prefactor = 4.0 * math.pi * math.pi ** -1.5
        return prefactor * _quad(lambda u: u * u * math.exp(-u * u), eps)
    if kind == "molecule":
        prefactor = 4.0 * math.pi / (2.0 * math.pi * eps)
        return prefactor * _quad(lambda u: math.exp(-2.0 * u / eps), eps)
    raise ValueError(f"Unknown wavefunction kind '{kind}'")


# ============================================================================
# Rates and error terms
# ============================================================================

def rabi_and_time(c: float, omega0: float) -> Tuple[float, float]:
    """
    Molecule Rabi frequency Ω = CΩ₀ and two-pulse sequence time τ = π/Ω.
    """
    if not 0 < c <= 1:
        raise ValueError("Franck-Condon factor must lie in (0, 1]")
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")
    omega = c * omega0
    return omega, math.pi / omega


def overlap_fidelity(offset: float, r0: float) -> float:
    """Single-axis overlap fidelity exp(−δ²/r₀²)."""
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    return math.exp(-offset ** 2 / r0 ** 2)


def overlap_fidelity_3d(offset: float, r0: float) -> float:
    """Overlap fidelity for the same offset on all three axes, exp(−3δ²/r₀²)."""
    return overlap_fidelity(offset, r0) ** 3


def offresonant_leakage(omega: float, detuning_vib: float) -> float:
    """Leakage per π-pulse into a neighboring vibrational level, (1 + Δ²/4Ω²)^(−1/2)."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    return (1.0 + detuning_vib ** 2 / (4.0 * omega ** 2)) ** -0.5


@dataclass(frozen=True)
class CouplingBudget:
    """Rabi rate, pulse time and per-operation error terms of one gate."""

    scattering_length: float
    omega0: float
    franck_condon: float
    omega: float
    pulse_pair_time: float
    offset: float
    overlap_fidelity: float
    overlap_fidelity_3d: float
    leakage: float
    detuning_vib: float
    omega_r: float
    r0: float
    r0_derived: float
    fc_method: str = "closed_form"

    def to_record(self) -> Dict[str, float]:
        """Flat key-value gate report."""
        two_pi = 2.0 * math.pi
        return {
            'omega_r_hz': self.omega_r / two_pi,
            'r0_nm': self.r0 * 1e9,
            'r0_derived_nm': self.r0_derived * 1e9,
            'C': self.franck_condon,
            'omega_hz': self.omega / two_pi,
            'tau_ms': self.pulse_pair_time * 1e3,
            'F_per_op': self.overlap_fidelity,
            'F_per_op_3axis': self.overlap_fidelity_3d,
            'dp_per_pulse': self.leakage,
            'fc_method': self.fc_method,
        }


def gate_budget(
    a_bohr: float = config.DEFAULT_SCATTERING_LENGTH_BOHR,
    omega0_hz: float = config.DEFAULT_OMEGA0_HZ,
    omega_r_hz: Optional[float] = config.DEFAULT_OMEGA_R_HZ,
    r0: Optional[float] = config.DEFAULT_R0_M,
    offset: float = config.DEFAULT_OFFSET_M,
    detuning_vib_hz: Optional[float] = None,
    trap_frequencies_hz: Optional[Tuple[float, float]] = None,
    fc_method: str = "closed_form",
) -> CouplingBudget:
    """
    Assemble the full coupling budget of one Li-Cs gate.

    Args:
        a_bohr: Scattering length (Bohr radii)
        omega0_hz: Free-atom Rabi frequency / 2π
        omega_r_hz: Relative-motion frequency / 2π (ignored if trap frequencies given)
        r0: Oscillator length used for the overlap (m); None uses the derived √(ħ/µω_r)
        offset: Relative lattice offset δ (m)
        detuning_vib_hz: Vibrational detuning / 2π (defaults to ω_r)
        trap_frequencies_hz: (Li, Cs) trap frequencies / 2π
        fc_method: "closed_form" or "quadrature"

    Returns:
        CouplingBudget
    """
    if fc_method not in FC_METHODS:
        raise ValueError(f"Unknown Franck-Condon method '{fc_method}'")

    two_pi = 2.0 * math.pi
    m_li = lookup_species(config.QUBIT_SPECIES).mass
    m_cs = lookup_species(config.MESSENGER_SPECIES).mass

    if trap_frequencies_hz is not None:
        system = reduce_system(m_li, two_pi * trap_frequencies_hz[0], m_cs, two_pi * trap_frequencies_hz[1])
        omega_r = system.omega_r
    elif omega_r_hz is not None:
        omega_r = two_pi * omega_r_hz
    else:
        raise ValueError("either omega_r_hz or trap_frequencies_hz is required")

    mu = m_li * m_cs / (m_li + m_cs)
    r0_derived = oscillator_length(mu, omega_r)
    r0_used = r0 if r0 is not None else r0_derived
    if r0 is not None and abs(r0 / r0_derived - 1.0) > 0.1:
        logger.warning(
            f"Quoted r0 = {r0 * 1e9:.1f} nm differs from sqrt(hbar/mu omega_r) = "
            f"{r0_derived * 1e9:.1f} nm; using the quoted value"
        )

    a = a_bohr * CONSTANTS.bohr_radius
    c = franck_condon(a, r0_used) if fc_method == "closed_form" else franck_condon_quadrature(a, r0_used)
    omega, tau = rabi_and_time(c, two_pi * omega0_hz)
    detuning_vib = two_pi * detuning_vib_hz if detuning_vib_hz is not None else omega_r

    budget = CouplingBudget(
        scattering_length=a,
        omega0=two_pi * omega0_hz,
        franck_condon=c,
        omega=omega,
        pulse_pair_time=tau,
        offset=offset,
        overlap_fidelity=overlap_fidelity(offset, r0_used),
        overlap_fidelity_3d=overlap_fidelity_3d(offset, r0_used),
        leakage=offresonant_leakage(omega, detuning_vib),
        detuning_vib=detuning_vib,
        omega_r=omega_r,
        r0=r0_used,
        r0_derived=r0_derived,
        fc_method=fc_method,
    )
    logger.info(f"Gate budget: C={c:.4g}, Omega/2pi={omega / two_pi:.1f} Hz, tau={tau * 1e3:.3f} ms")
    return budget
