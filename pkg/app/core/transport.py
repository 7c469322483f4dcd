"""
Lattice QIP - Messenger Transport
Adiabatic transport error of the messenger atom, the velocity bound it
implies, and the entanglement timing/reach scaling laws.
"""

import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from app.core.errors import InfeasibleTargetError
from app.core.species_registry import CONSTANTS, lookup_species
from app.utils.logger import get_logger
import config


logger = get_logger(__name__)

NQ_PER_N2 = 4.0 * math.pi / math.sqrt(3.0)

TIMING_COLUMNS = ['N_sites', 'v_um_per_ms', 'p1', 'tau_e_ms', 'Nq']


def messenger_frequency(x0: float, mass: Optional[float] = None) -> float:
    """Trap frequency ω = ħ/(m x₀²) of the messenger along the transport axis."""
    if x0 <= 0:
        raise ValueError("x0 must be positive")
    mass = mass if mass is not None else lookup_species(config.MESSENGER_SPECIES).mass
    return CONSTANTS.hbar / (mass * x0 ** 2)


@dataclass(frozen=True)
class TransportParams:
    """
    Parameters of one constant-velocity transport leg.

    Attributes:
        n_sites: Sites traversed N
        reduced_velocity: ν = v k/(π ω)
        lattice_constant: d (m)
        x0: Messenger oscillator length (m)
        omega: Messenger trap frequency (rad/s); derived from x0 when None
        crosstalk_alpha: α of the wrong lattice
        crosstalk_depth_hz: U*/(α h)
    """

    n_sites: int = 1
    reduced_velocity: float = 0.0
    lattice_constant: float = config.DEFAULT_LATTICE_CONSTANT_M
    x0: float = config.DEFAULT_MESSENGER_X0_M
    omega: Optional[float] = None
    crosstalk_alpha: float = config.DEFAULT_CROSSTALK_ALPHA
    crosstalk_depth_hz: float = config.DEFAULT_CROSSTALK_DEPTH_HZ

    def __post_init__(self):
        if self.n_sites < 0:
            raise ValueError("n_sites must be non-negative")
        if self.reduced_velocity < 0:
            raise ValueError("reduced velocity must be non-negative")
        if min(self.lattice_constant, self.x0, self.crosstalk_alpha, self.crosstalk_depth_hz) <= 0:
            raise ValueError("physical transport parameters must be positive")
        if self.omega is None:
            object.__setattr__(self, 'omega', messenger_frequency(self.x0))
        elif self.omega <= 0:
            raise ValueError("omega must be positive")

    @property
    def k(self) -> float:
        return math.pi / self.lattice_constant

    @property
    def crosstalk_depth(self) -> float:
        """U* = α·h·(U*/αh) in J."""
        return self.crosstalk_alpha * CONSTANTS.hbar * 2.0 * math.pi * self.crosstalk_depth_hz

    @property
    def lamb_dicke_term(self) -> float:
        """(k x₀)² exp(−(k x₀)²)."""
        kx2 = (self.k * self.x0) ** 2
        return kx2 * math.exp(-kx2)

    @property
    def raw_depth_factor(self) -> float:
        """U*/(ħω) as printed, before calibration."""
        return self.crosstalk_depth / (CONSTANTS.hbar * self.omega)

    @property
    def velocity(self) -> float:
        return velocity_from_reduced(self.reduced_velocity, self)


def velocity_from_reduced(nu: float, params: TransportParams) -> float:
    """v = ν π ω / k (m/s)."""
    return nu * math.pi * params.omega / params.k


def reduced_from_velocity(velocity: float, params: TransportParams) -> float:
    """ν = v k / (π ω)."""
    return velocity * params.k / (math.pi * params.omega)


class TransportModel:
    """
    Transport error law with its one-point calibration.

    The depth factor is g = κ·U*/(ħω); κ is fixed so that p₁ = 0.01 at
    ν = 0.03 for one site with the reference parameters.
    """

    def __init__(
        self,
        reference: Optional[TransportParams] = None,
        calibration_p1: float = config.CALIBRATION_P1,
        calibration_nu: float = config.CALIBRATION_NU,
        calibration_n: int = config.CALIBRATION_N,
    ):
        self.reference = reference or TransportParams()
        self.calibration_p1 = calibration_p1
        self.calibration_nu = calibration_nu
        self.calibration_n = calibration_n

        self.calibrated_depth_factor = calibration_p1 / (
            calibration_n * (math.pi / 2.0) * calibration_nu * self.reference.lamb_dicke_term
        )
        self.calibration_factor = self.calibrated_depth_factor / self.reference.raw_depth_factor

        logger.debug(
            f"Transport calibration: g_raw={self.reference.raw_depth_factor:.4f}, "
            f"g_cal={self.calibrated_depth_factor:.4f}"
        )

    def depth_factor(self, params: TransportParams) -> float:
        return self.calibration_factor * params.raw_depth_factor

    def transport_error(self, params: TransportParams) -> float:
        """p₁ = N(π/2)ν g (k x₀)² exp(−(k x₀)²), capped at 1."""
        p1 = (
            params.n_sites * (math.pi / 2.0) * params.reduced_velocity
            * self.depth_factor(params) * params.lamb_dicke_term
        )
        return min(p1, 1.0)

    def max_velocity(self, n_sites: int, fidelity_target: float, params: Optional[TransportParams] = None) -> float:
        """
        Largest velocity with p₁ ≤ 1 − fidelity_target.

        Returns:
            Velocity (m/s); infinite for N = 0

        Raises:
            ValueError: If fidelity_target ≤ 0
            InfeasibleTargetError: If fidelity_target ≥ 1
        """
        if fidelity_target <= 0:
            raise ValueError("fidelity_target must be positive")
        if fidelity_target >= 1:
            raise InfeasibleTargetError(
                f"Fidelity target {fidelity_target} needs zero velocity; no positive v meets it"
            )
        if n_sites < 0:
            raise ValueError("n_sites must be non-negative")
        if n_sites == 0:
            return math.inf

        params = replace(params or self.reference, n_sites=n_sites, reduced_velocity=0.0)
        per_nu = n_sites * (math.pi / 2.0) * self.depth_factor(params) * params.lamb_dicke_term
        nu = (1.0 - fidelity_target) / per_nu
        return velocity_from_reduced(nu, params)

    def timing_report(self, n_sites: int, fidelity_target: float = 1.0 - config.DEFAULT_TRANSPORT_P1) -> Dict:
        """One timing row for N sites: velocity bound, p₁, τ_e and N_q."""
        velocity = self.max_velocity(n_sites, fidelity_target)
        if n_sites == 0:
            p1 = 0.0
            transport_time = 0.0
        else:
            nu = reduced_from_velocity(velocity, self.reference)
            p1 = self.transport_error(replace(self.reference, n_sites=n_sites, reduced_velocity=nu))
            transport_time = n_sites * self.reference.lattice_constant / velocity

        return {
            'N_sites': n_sites,
            'v_um_per_ms': velocity * 1e3 if math.isfinite(velocity) else math.inf,
            'p1': p1,
            'tau_e_ms': entangle_time(n_sites) * 1e3,
            'Nq': qubit_reach(n_sites),
            'transitions_ms': config.ENTANGLE_FIXED_TIME_S * 1e3,
            'transport_ms': transport_time * 1e3,
        }

    def calibration_record(self) -> Dict[str, float]:
        ref = self.reference
        return {
            'calibration_p1': self.calibration_p1,
            'calibration_nu': self.calibration_nu,
            'calibration_n': self.calibration_n,
            'k_x0': ref.k * ref.x0,
            'lamb_dicke_term': ref.lamb_dicke_term,
            'omega_rad_s': ref.omega,
            'g_raw': ref.raw_depth_factor,
            'g_calibrated': self.calibrated_depth_factor,
            'calibration_factor': self.calibration_factor,
        }


def transport_error(params: TransportParams, model: Optional[TransportModel] = None) -> float:
    """Transport excitation probability with the default calibrated model."""
    return (model or TransportModel()).transport_error(params)


def max_velocity(n_sites: int, fidelity_target: float, params: Optional[TransportParams] = None) -> float:
    """Velocity bound for N sites and a target transport fidelity (m/s)."""
    return TransportModel().max_velocity(n_sites, fidelity_target, params)


def entangle_time(n_sites: int) -> float:
    """τ_e = (5 + 0.4 N²) ms, returned in s."""
    if n_sites < 0:
        raise ValueError("n_sites must be non-negative")
    return config.ENTANGLE_FIXED_TIME_S + config.ENTANGLE_QUADRATIC_TIME_S * n_sites ** 2


def qubit_reach(n_sites: float) -> float:
    """Accessible qubits N_q = (4π/√3) N² within N sites."""
    if n_sites < 0:
        raise ValueError("n_sites must be non-negative")
    return NQ_PER_N2 * n_sites ** 2


def entangle_time_from_reach(n_qubits: float) -> float:
    """τ_e as a function of N_q (s)."""
    return config.ENTANGLE_FIXED_TIME_S + config.ENTANGLE_QUADRATIC_TIME_S * n_qubits / NQ_PER_N2


# ============================================================================
# Lattice coordinates
# ============================================================================

def site_position(coords: Sequence[int], lattice_constant: float = 1.0) -> np.ndarray:
    """Position of integer site coordinates in the basis (1, 0)d, (1/2, √3/2)d."""
    if len(coords) != 2 or any(int(c) != c for c in coords):
        raise ValueError(f"Site coordinates must be two integers, got {coords!r}")
    i, j = coords
    return lattice_constant * np.array([i + 0.5 * j, math.sqrt(3.0) / 2.0 * j])


def site_distance(site_a: Sequence[int], site_b: Sequence[int]) -> int:
    """Sites traversed on a straight line between two sites, rounded up."""
    delta = site_position(site_b) - site_position(site_a)
    return int(math.ceil(float(np.hypot(*delta)) - 1e-9))


def _pair_row(model: TransportModel, source, target, fidelity_target: float) -> Dict:
    n = site_distance(source, target)
    row = model.timing_report(n, fidelity_target)
    row['source'] = list(source)
    row['target'] = list(target)
    return row


def transport_table(
    pairs: Sequence[Tuple[Sequence[int], Sequence[int]]],
    fidelity_target: float = 1.0 - config.DEFAULT_TRANSPORT_P1,
    model: Optional[TransportModel] = None,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """
    Timing rows for many (source, target) site pairs, in input order.
    """
    model = model or TransportModel()
    rows = Parallel(n_jobs=n_jobs)(
        delayed(_pair_row)(model, source, target, fidelity_target) for source, target in pairs
    )
    logger.info(f"Transport table: {len(rows)} pairs")
    return pd.DataFrame(rows, columns=['source', 'target'] + TIMING_COLUMNS + ['transitions_ms', 'transport_ms'])
