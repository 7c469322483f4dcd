"""
Lattice QIP - Protocol Simulator
State-vector simulation of the rf-pulse gate constructions and of the
two-step distant-qubit entanglement protocol.

The register holds one messenger (Cs) and two qubits (Li_a, Li_b) plus a
molecular flag {none, M, M'}: 8 × 3 = 24 levels. A molecular level stores
the spectator qubit's value; the bound Cs/Li pair carries label 0 and the
register remembers which Li site each molecular level is bound to.
Population removed by error channels is kept in a scalar sink so that
Σ|a|² + sink = 1.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy import linalg
from scipy.stats import norm, qmc

from app.core.errors import (
    InvalidChannelError,
    OccupiedMolecularLevelError,
    PreconditionStateError,
)
from app.core.molecular_coupling import CouplingBudget
from app.utils.logger import get_logger
import config


logger = get_logger(__name__)

SUBSYSTEMS = ("Cs", "Li_a", "Li_b")
QUBIT_SITES = ("Li_a", "Li_b")
MOLECULAR_LEVELS = {"none": 0, "M": 1, "M'": 2}
DIMENSION = 24

PRECONDITION_TOLERANCE = 1e-9
_EMPTY = 1e-24

SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_YY = np.kron(SIGMA_Y, SIGMA_Y)

# (Li_a, Li_b) target after the protocol and (Cs, Li_a) state after `create`
BELL_PLUS = np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2.0)
CREATE_TARGET = np.array([0, -1, 1, 0], dtype=complex) / math.sqrt(2.0)


def level_index(cs: int, li_a: int, li_b: int, molecule: str = "none") -> int:
    """Index of a basis level: ((cs·2 + li_a)·2 + li_b)·3 + mol."""
    return ((cs * 2 + li_a) * 2 + li_b) * 3 + MOLECULAR_LEVELS[molecule]


def _decode(index: int) -> Tuple[int, int, int, int]:
    qubits, mol = divmod(index, 3)
    cs, rest = divmod(qubits, 4)
    li_a, li_b = divmod(rest, 2)
    return cs, li_a, li_b, mol


# ============================================================================
# Register
# ============================================================================

@dataclass(frozen=True, eq=False)
class ProtocolRegister:
    """
    Immutable register state.

    Attributes:
        amplitudes: Complex vector over the 24 levels
        bonds: (molecular level, Li site) pairs of occupied molecular levels
        sink: Population removed by error channels
    """

    amplitudes: np.ndarray
    bonds: Tuple[Tuple[str, str], ...] = ()
    sink: float = 0.0

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex).copy()
        if amplitudes.shape != (DIMENSION,):
            raise ValueError(f"register needs {DIMENSION} amplitudes, got {amplitudes.shape}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amplitudes)

    @property
    def norm(self) -> float:
        """Retained population Σ|a|²."""
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def total_probability(self) -> float:
        return self.norm + self.sink

    def partner(self, level: str) -> Optional[str]:
        return dict(self.bonds).get(level)

    def molecular_population(self, level: Optional[str] = None) -> float:
        """Population in M, M' or (level=None) both."""
        mols = [MOLECULAR_LEVELS[level]] if level else [1, 2]
        return float(sum(np.sum(np.abs(self.amplitudes[m::3]) ** 2) for m in mols))

    def qubit_vector(self) -> np.ndarray:
        """8-component (Cs, Li_a, Li_b) amplitude vector; molecular levels must be empty."""
        if self.molecular_population() > _EMPTY:
            raise OccupiedMolecularLevelError(
                f"Molecular levels hold population {self.molecular_population():.3e}"
            )
        return self.amplitudes[0::3].copy()


def register_from_qubits(vector: Sequence[complex]) -> ProtocolRegister:
    """Register from an 8-component (Cs, Li_a, Li_b) state; must be normalized."""
    vector = np.asarray(vector, dtype=complex)
    if vector.shape != (8,):
        raise ValueError("qubit state must have 8 components")
    if abs(np.vdot(vector, vector).real - 1.0) > config.NORM_TOLERANCE:
        raise ValueError("qubit state must be normalized")
    amplitudes = np.zeros(DIMENSION, dtype=complex)
    amplitudes[0::3] = vector
    return ProtocolRegister(amplitudes)


def product_register(cs: Sequence[complex], li_a: Sequence[complex], li_b: Sequence[complex]) -> ProtocolRegister:
    """Register from three single-qubit states (normalized individually)."""
    parts = [np.asarray(p, dtype=complex) for p in (cs, li_a, li_b)]
    parts = [p / np.linalg.norm(p) for p in parts]
    return register_from_qubits(np.kron(np.kron(parts[0], parts[1]), parts[2]))


def initial_register() -> ProtocolRegister:
    """Messenger in (|0⟩+|1⟩)/√2, both qubits in |0⟩."""
    return product_register([1, 1], [1, 0], [1, 0])


# ============================================================================
# Pulses
# ============================================================================

@dataclass(frozen=True)
class Channel:
    """Two-level coupling between pair state |Cs=pair[0], site=pair[1]⟩ and a molecular level."""

    pair: Tuple[int, int]
    site: str
    level: str

    def validate(self) -> None:
        if self.site not in QUBIT_SITES:
            raise InvalidChannelError(f"Unknown qubit site '{self.site}'")
        if self.level not in ("M", "M'"):
            raise InvalidChannelError(f"Unknown molecular level '{self.level}'")
        if len(self.pair) != 2 or any(v not in (0, 1) for v in self.pair):
            raise InvalidChannelError(f"Pair state must be two bits, got {self.pair!r}")


@dataclass(frozen=True)
class PulseSpec:
    """
    One rf pulse on a channel.

    Error terms are applied as an amplitude factor √(F(1 − δp)) on the
    whole register, the removed population going to the sink.
    """

    channel: Channel
    area: float = math.pi
    phase: float = 0.0
    overlap_fidelity: float = 1.0
    leakage: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.area <= 2.0 * math.pi:
            raise ValueError("pulse area must lie in [0, 2π]")
        if not 0.0 <= self.overlap_fidelity <= 1.0 or not 0.0 <= self.leakage <= 1.0:
            raise ValueError("error terms must lie in [0, 1]")

    @property
    def success_probability(self) -> float:
        return self.overlap_fidelity * (1.0 - self.leakage)


def pulse_unitary(area: float, phase: float = 0.0) -> np.ndarray:
    """Resonant pulse on (pair, molecule); area π maps pair → −i·molecule."""
    c = math.cos(area / 2.0)
    s = math.sin(area / 2.0)
    return np.array([
        [c, -1j * np.exp(-1j * phase) * s],
        [-1j * np.exp(1j * phase) * s, c],
    ], dtype=complex)


def _pair_index(channel: Channel, pair_values: Tuple[int, int], spectator: int) -> int:
    cs, li = pair_values
    if channel.site == "Li_a":
        return level_index(cs, li, spectator)
    return level_index(cs, spectator, li)


def _molecular_index(channel: Channel, spectator: int) -> int:
    if channel.site == "Li_a":
        return level_index(0, 0, spectator, channel.level)
    return level_index(0, spectator, 0, channel.level)


def _with_loss(amplitudes: np.ndarray, sink: float, success: float) -> Tuple[np.ndarray, float]:
    if success >= 1.0:
        return amplitudes, sink
    population = float(np.vdot(amplitudes, amplitudes).real)
    return amplitudes * math.sqrt(success), sink + (1.0 - success) * population


def _update_bonds(bonds: Tuple[Tuple[str, str], ...], amplitudes: np.ndarray, level: str, site: str):
    table = dict(bonds)
    population = float(np.sum(np.abs(amplitudes[MOLECULAR_LEVELS[level]::3]) ** 2))
    if population > _EMPTY:
        table[level] = site
    else:
        table.pop(level, None)
    return tuple(sorted(table.items()))


def apply_pulse(reg: ProtocolRegister, pulse: PulseSpec) -> ProtocolRegister:
    """
    Apply a pulse of arbitrary area on its channel; identity elsewhere.

    A pulse that fails removes its loss from the whole register, not only
    from the addressed pair, so off-channel amplitudes also shrink by
    √success_probability.

    Raises:
        InvalidChannelError: Malformed channel, or molecular level bound to the other site
    """
    channel = pulse.channel
    channel.validate()
    bound_to = reg.partner(channel.level)
    if bound_to is not None and bound_to != channel.site:
        raise InvalidChannelError(
            f"Level {channel.level} is occupied by a molecule with {bound_to}"
        )

    unitary = pulse_unitary(pulse.area, pulse.phase)
    amplitudes = np.array(reg.amplitudes)
    for spectator in (0, 1):
        i = _pair_index(channel, channel.pair, spectator)
        m = _molecular_index(channel, spectator)
        amplitudes[[i, m]] = unitary @ amplitudes[[i, m]]

    amplitudes, sink = _with_loss(amplitudes, reg.sink, pulse.success_probability)
    bonds = _update_bonds(reg.bonds, amplitudes, channel.level, channel.site)
    return ProtocolRegister(amplitudes, bonds=bonds, sink=sink)


def apply_pi_pulse(reg: ProtocolRegister, channel: Channel) -> ProtocolRegister:
    """Ideal resonant π-pulse on one channel."""
    return apply_pulse(reg, PulseSpec(channel=channel))


def apply_composite(
    reg: ProtocolRegister,
    first: Channel,
    second: Channel,
    success: Tuple[float, float] = (1.0, 1.0),
    trace: Optional[List] = None,
    label: str = "composite",
) -> ProtocolRegister:
    """
    Two π-pulses pair_in → molecule → pair_out through one molecular level.

    Raises:
        InvalidChannelError: If the in/out pair states coincide, the two pulses
            use different levels or sites, or the level is already occupied
    """
    if first.pair == second.pair:
        raise InvalidChannelError(f"Composite in/out pair states coincide: {first.pair}")
    if first.level != second.level or first.site != second.site:
        raise InvalidChannelError("Composite pulses must share molecular level and site")
    if reg.molecular_population(first.level) > _EMPTY:
        raise InvalidChannelError(f"Level {first.level} is occupied by an unfinished composite")

    for n, (channel, p) in enumerate(((first, success[0]), (second, success[1])), start=1):
        reg = apply_pulse(reg, PulseSpec(channel=channel, overlap_fidelity=p))
        if trace is not None:
            trace.append((f"{label} pulse {n}", reg))
    return reg


def apply_transport_loss(reg: ProtocolRegister, p1: float) -> ProtocolRegister:
    """Remove the transport excitation probability p₁ from the register."""
    if not 0.0 <= p1 <= 1.0:
        raise ValueError("p1 must lie in [0, 1]")
    amplitudes, sink = _with_loss(np.array(reg.amplitudes), reg.sink, 1.0 - p1)
    return replace(reg, amplitudes=amplitudes, sink=sink)


# ============================================================================
# Diagnostics
# ============================================================================

def reduced_density_matrix(reg: ProtocolRegister, keep: Sequence[str], normalize: bool = True) -> np.ndarray:
    """Reduced density matrix of the listed subsystems (in the given order)."""
    for name in keep:
        if name not in SUBSYSTEMS:
            raise ValueError(f"Unknown subsystem '{name}'")
    psi = reg.qubit_vector()
    if normalize:
        total = np.linalg.norm(psi)
        if total == 0:
            raise PreconditionStateError("Register holds no population")
        psi = psi / total

    axes = [SUBSYSTEMS.index(name) for name in keep]
    traced = [i for i in range(3) if i not in axes]
    tensor = np.transpose(psi.reshape(2, 2, 2), axes + traced).reshape(2 ** len(axes), -1)
    return tensor @ tensor.conj().T


def purity(reg: ProtocolRegister, subsystems: Sequence[str]) -> float:
    """Tr ρ² of the normalized reduced state."""
    rho = reduced_density_matrix(reg, subsystems)
    return float(np.trace(rho @ rho).real)


def concurrence_of(rho: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    rho_purity = float(np.trace(rho @ rho).real)
    if rho_purity > 1.0 - 1e-12:
        _, vectors = np.linalg.eigh(rho)
        psi = vectors[:, -1]
        return float(min(1.0, abs(psi @ SIGMA_YY @ psi)))

    evals, evecs = np.linalg.eigh(rho)
    sqrt_rho = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T
    rho_tilde = SIGMA_YY @ rho.conj() @ SIGMA_YY
    r = np.linalg.eigvalsh(sqrt_rho @ rho_tilde @ sqrt_rho)
    lambdas = np.sort(np.sqrt(np.clip(r, 0.0, None)))[::-1]
    return float(max(0.0, lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]))


def concurrence(reg: ProtocolRegister, pair: Sequence[str]) -> float:
    """
    Concurrence of two subsystems after tracing out the third.

    Raises:
        OccupiedMolecularLevelError: If a molecular level holds population
    """
    if len(pair) != 2 or pair[0] == pair[1]:
        raise ValueError("pair must name two different subsystems")
    return concurrence_of(reduced_density_matrix(reg, pair))


def bell_fidelity(reg: ProtocolRegister, pair: Sequence[str] = QUBIT_SITES, target: np.ndarray = BELL_PLUS) -> float:
    """⟨target|ρ_pair|target⟩ of the retained (unnormalized) state; losses lower it."""
    rho = reduced_density_matrix(reg, pair, normalize=False)
    target = np.asarray(target, dtype=complex)
    return float(np.vdot(target, rho @ target).real)


def state_fidelity(reg: ProtocolRegister, target: Sequence[complex]) -> Tuple[float, float]:
    """
    Overlap with an 8-component qubit state.

    Returns:
        (|⟨target|ψ⟩|², arg⟨target|ψ⟩)
    """
    overlap = np.vdot(np.asarray(target, dtype=complex), reg.qubit_vector())
    return float(abs(overlap) ** 2), float(np.angle(overlap))


def level_label(index: int, bonds: Dict[str, str]) -> str:
    cs, li_a, li_b, mol = _decode(index)
    if mol == 0:
        return f"|Cs={cs},Li_a={li_a},Li_b={li_b}>"
    level = "M" if mol == 1 else "M'"
    site = bonds.get(level, "Li_a")
    spectator = ("Li_b", li_b) if site == "Li_a" else ("Li_a", li_a)
    return f"|{level}(Cs+{site}),{spectator[0]}={spectator[1]}>"


def ket_expansion(reg: ProtocolRegister, threshold: float = config.KET_DISPLAY_THRESHOLD) -> List[Dict]:
    """Non-negligible amplitudes with their basis labels."""
    bonds = dict(reg.bonds)
    terms = []
    for index, amp in enumerate(reg.amplitudes):
        if abs(amp) >= threshold:
            terms.append({
                'label': level_label(index, bonds),
                're': float(amp.real),
                'im': float(amp.imag),
            })
    return terms


def format_ket(reg: ProtocolRegister, threshold: float = config.KET_DISPLAY_THRESHOLD) -> str:
    parts = []
    for term in ket_expansion(reg, threshold):
        amp = complex(term['re'], term['im'])
        parts.append(f"({amp.real:+.6f}{amp.imag:+.6f}j){term['label']}")
    return " ".join(parts) if parts else "0"


# ============================================================================
# Protocol steps
# ============================================================================

CREATE_CHANNELS = (Channel((0, 0), "Li_a", "M"), Channel((0, 1), "Li_a", "M"))
SWAP_CHANNELS = (Channel((1, 0), "Li_b", "M'"), Channel((0, 1), "Li_b", "M'"))


def _check_create(reg: ProtocolRegister) -> None:
    plus = np.array([1, 1], dtype=complex) / math.sqrt(2.0)
    target = np.kron(plus, [1, 0])
    rho = reduced_density_matrix(reg, ("Cs", "Li_a"))
    fidelity = float(np.vdot(target, rho @ target).real)
    if fidelity < 1.0 - PRECONDITION_TOLERANCE:
        raise PreconditionStateError(
            f"create needs Cs in (|0>+|1>)/sqrt2 and Li_a in |0> (fidelity {fidelity:.6f})"
        )


def _check_swap(reg: ProtocolRegister) -> None:
    rho = reduced_density_matrix(reg, ("Cs", "Li_a"))
    pair_fidelity = float(np.vdot(CREATE_TARGET, rho @ CREATE_TARGET).real)
    li_b_ground = float(reduced_density_matrix(reg, ("Li_b",))[0, 0].real)
    if min(pair_fidelity, li_b_ground) < 1.0 - PRECONDITION_TOLERANCE:
        raise PreconditionStateError(
            f"swap needs the Cs-Li_a pair entangled and Li_b in |0> "
            f"(fidelities {pair_fidelity:.6f}, {li_b_ground:.6f})"
        )


def _pulse_success(budget: Optional[CouplingBudget], include_leakage: bool) -> float:
    if budget is None:
        return 1.0
    leakage = budget.leakage if include_leakage else 0.0
    return budget.overlap_fidelity * (1.0 - leakage)


def entangle_step(
    reg: ProtocolRegister,
    which: str,
    budget: Optional[CouplingBudget] = None,
    pulse_success: Optional[Tuple[float, float]] = None,
    include_leakage: bool = config.DEFAULT_LEAKAGE_IN_BUDGET,
    strict: Optional[bool] = None,
    trace: Optional[List] = None,
) -> ProtocolRegister:
    """
    One entangling composite: `create` (Cs with Li_a) or `swap` (to Li_b).

    Args:
        reg: Input register
        which: "create" or "swap"
        budget: Coupling budget supplying per-pulse error terms (None = ideal)
        pulse_success: Explicit per-pulse success probabilities (overrides budget)
        include_leakage: Fold δp into the per-pulse success probability
        strict: Check the input state (defaults to True for ideal runs)
        trace: Optional list receiving (operation, register) after each pulse

    Raises:
        PreconditionStateError: Input not of the required form (strict mode)
    """
    if which not in ("create", "swap"):
        raise ValueError(f"Unknown entangling step '{which}'")
    if pulse_success is None:
        p = _pulse_success(budget, include_leakage)
        pulse_success = (p, p)
    if strict is None:
        strict = all(p == 1.0 for p in pulse_success)

    if strict and which == "create":
        _check_create(reg)
    elif strict:
        _check_swap(reg)

    channels = CREATE_CHANNELS if which == "create" else SWAP_CHANNELS
    return apply_composite(reg, channels[0], channels[1], pulse_success, trace=trace, label=which)


def rotation_matrix(theta: float, phi: float) -> np.ndarray:
    """Bloch rotation R(θ, φ) = exp(−iθ/2 (cos φ X + sin φ Y))."""
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return np.array([
        [c, -1j * np.exp(-1j * phi) * s],
        [-1j * np.exp(1j * phi) * s, c],
    ], dtype=complex)


def rotation_pulse(theta: float, omega: float = 1.0) -> Dict[str, float]:
    """
    Detuned full-cycle parameters of the Λ coupling realizing a rotation angle.

    Each qubit level couples to the molecular level with Rabi frequency Ω,
    so the bright state couples with g = Ω/√2 and returns after one
    generalized Rabi cycle W = √(4g² + Δ²) with phase π(1 − Δ/W).

    Returns:
        Dict with detuning, generalized Rabi frequency W and duration (rad/s, s)
    """
    theta = theta % (2.0 * math.pi)
    if theta == 0.0:
        return {'theta': 0.0, 'detuning': math.inf, 'generalized_rabi': math.inf, 'duration': 0.0}
    x = theta / math.pi - 1.0
    g = omega / math.sqrt(2.0)
    w = 2.0 * g / math.sqrt(1.0 - x * x)
    return {'theta': theta, 'detuning': w * x, 'generalized_rabi': w, 'duration': 2.0 * math.pi / w}


def _lambda_unitary(theta: float, phi: float, omega: float) -> np.ndarray:
    params = rotation_pulse(theta, omega)
    if params['duration'] == 0.0:
        return np.eye(3, dtype=complex)
    leg = omega / 2.0
    h = np.array([leg, leg * np.exp(-1j * phi)], dtype=complex)
    hamiltonian = np.zeros((3, 3), dtype=complex)
    hamiltonian[2, :2] = h
    hamiltonian[:2, 2] = h.conj()
    hamiltonian[2, 2] = params['detuning']
    return linalg.expm(-1j * hamiltonian * params['duration'])


def single_qubit_rotation(
    reg: ProtocolRegister,
    target: str,
    theta: float,
    phi: float,
    budget: Optional[CouplingBudget] = None,
) -> ProtocolRegister:
    """
    Rotate one Li qubit by R(θ, φ) through a detuned Λ coupling to a molecular level.

    The Cs=0 manifold couples through M and the Cs=1 manifold through M'.
    Both acquire the same global phase, so the register sees
    e^(−iθ/2)·R(θ, φ) on the target qubit.
    """
    if target not in QUBIT_SITES:
        raise InvalidChannelError(f"Unknown qubit site '{target}'")
    if reg.molecular_population() > _EMPTY:
        raise InvalidChannelError("Rotation needs empty molecular levels")

    omega = budget.omega if budget is not None else 1.0
    unitary = _lambda_unitary(theta, phi, omega)
    amplitudes = np.array(reg.amplitudes)

    for cs, level in ((0, "M"), (1, "M'")):
        for spectator in (0, 1):
            channel = Channel((cs, 0), target, level)
            idx = [
                _pair_index(channel, (cs, 0), spectator),
                _pair_index(channel, (cs, 1), spectator),
                _molecular_index(channel, spectator),
            ]
            amplitudes[idx] = unitary @ amplitudes[idx]

    # The full cycle returns the molecular level exactly; drop rounding residue
    amplitudes[1::3] = 0.0
    amplitudes[2::3] = 0.0
    return ProtocolRegister(amplitudes, bonds=(), sink=reg.sink)


# ============================================================================
# Full protocol and error budget
# ============================================================================

@dataclass
class ProtocolTrace:
    """Ordered (operation, register) record of one protocol run."""

    steps: List[Tuple[str, ProtocolRegister]] = field(default_factory=list)

    @property
    def final(self) -> ProtocolRegister:
        return self.steps[-1][1]

    def to_text(self) -> str:
        return "\n".join(f"{name}: {format_ket(reg)}" for name, reg in self.steps)

    def to_records(self) -> List[Dict]:
        return [
            {'operation': name, 'ket': ket_expansion(reg), 'sink': reg.sink}
            for name, reg in self.steps
        ]


def run_protocol(
    budget: Optional[CouplingBudget] = None,
    transport_p1: float = 0.0,
    include_leakage: bool = config.DEFAULT_LEAKAGE_IN_BUDGET,
    pulse_success: Optional[Sequence[float]] = None,
) -> ProtocolTrace:
    """
    Run create → transport → swap from the initial register.

    Args:
        budget: Coupling budget for per-pulse errors (None = ideal)
        transport_p1: Transport excitation probability
        include_leakage: Fold δp into the pulse errors
        pulse_success: Four explicit per-pulse success probabilities
    """
    trace = ProtocolTrace()
    reg = initial_register()
    trace.steps.append(("initial", reg))

    if pulse_success is None:
        p = _pulse_success(budget, include_leakage)
        pulse_success = (p,) * config.TRANSITIONS_PER_ENTANGLEMENT
    if len(pulse_success) != config.TRANSITIONS_PER_ENTANGLEMENT:
        raise ValueError("four per-pulse success probabilities are required")

    reg = entangle_step(reg, "create", pulse_success=tuple(pulse_success[:2]), trace=trace.steps)
    if transport_p1 > 0:
        reg = apply_transport_loss(reg, transport_p1)
        trace.steps.append(("transport", reg))
    entangle_step(reg, "swap", pulse_success=tuple(pulse_success[2:]), trace=trace.steps)
    return trace


@dataclass
class FidelityReport:
    f_multiplicative: float
    f_montecarlo: float
    mc_sigma: float
    seed: int
    trials: int

    def to_dict(self) -> Dict:
        return {
            'f_multiplicative': self.f_multiplicative,
            'f_montecarlo': self.f_montecarlo,
            'mc_sigma': self.mc_sigma,
            'seed': self.seed,
            'trials': self.trials,
        }


def offset_scale(fidelity: float) -> float:
    """s/r₀ such that E[exp(−δ²/r₀²)] = F for δ ~ N(0, s²)."""
    if not 0.0 < fidelity <= 1.0:
        raise ValueError("fidelity must lie in (0, 1]")
    return math.sqrt((1.0 / fidelity ** 2 - 1.0) / 2.0)


def montecarlo_draws(trials: int, transitions: int, seed: int) -> np.ndarray:
    """Latin-hypercube standard-normal draws, shape (trials, transitions)."""
    sampler = qmc.LatinHypercube(d=transitions, seed=seed)
    return norm.ppf(sampler.random(trials))


def montecarlo_chunk(
    z: np.ndarray,
    fidelities: Sequence[float],
    leakages: Sequence[float],
    transport_p1: float,
) -> np.ndarray:
    """Final Li-pair Bell fidelity for each row of offset draws."""
    scales = np.array([offset_scale(f) for f in fidelities])
    leak = np.asarray(leakages, dtype=float)
    results = np.empty(len(z))
    for n, row in enumerate(z):
        success = np.exp(-(scales * row) ** 2) * (1.0 - leak)
        final = run_protocol(transport_p1=transport_p1, pulse_success=tuple(success)).final
        results[n] = bell_fidelity(final)
    return results


def error_injected_run(
    budgets: Sequence[CouplingBudget],
    transport_p1: float,
    trials: int = config.DEFAULT_MC_TRIALS,
    seed: int = config.DEFAULT_SEED,
    include_leakage: bool = config.DEFAULT_LEAKAGE_IN_BUDGET,
    n_jobs: int = 1,
    progress_callback: Optional[Callable[[int, int], None]] = None,
) -> FidelityReport:
    """
    Multiplicative and Monte-Carlo fidelity of the full protocol.

    Args:
        budgets: Four coupling budgets, one per atom-molecule transition
        transport_p1: Transport excitation probability
        trials: Monte-Carlo trials
        seed: Seed of the Latin-hypercube sampler
        include_leakage: Include δp per pulse
        n_jobs: joblib worker count (the result does not depend on it)
        progress_callback: Called with (chunks_done, chunks_total)

    Returns:
        FidelityReport
    """
    if len(budgets) != config.TRANSITIONS_PER_ENTANGLEMENT:
        raise ValueError("four transition budgets are required")
    if trials < 2:
        raise ValueError("at least two Monte-Carlo trials are required")

    fidelities = [b.overlap_fidelity for b in budgets]
    leakages = [b.leakage if include_leakage else 0.0 for b in budgets]

    f_mult = float(np.prod(fidelities) * np.prod(1.0 - np.asarray(leakages)) * (1.0 - transport_p1))

    z = montecarlo_draws(trials, len(budgets), seed)
    chunks = np.array_split(z, max(1, min(trials, 4 * max(1, n_jobs))))
    logger.info(f"Monte-Carlo: {trials} trials in {len(chunks)} chunks, seed={seed}")

    results = []
    batch = max(1, n_jobs)
    for start in range(0, len(chunks), batch):
        part = Parallel(n_jobs=n_jobs)(
            delayed(montecarlo_chunk)(chunk, fidelities, leakages, transport_p1)
            for chunk in chunks[start:start + batch]
        )
        results.extend(part)
        if progress_callback:
            progress_callback(min(start + batch, len(chunks)), len(chunks))

    values = np.concatenate(results)
    report = FidelityReport(
        f_multiplicative=f_mult,
        f_montecarlo=float(np.mean(values)),
        mc_sigma=float(np.std(values, ddof=1) / math.sqrt(len(values))),
        seed=seed,
        trials=trials,
    )
    logger.info(
        f"Fidelity: multiplicative={report.f_multiplicative:.5f}, "
        f"Monte-Carlo={report.f_montecarlo:.5f} ± {report.mc_sigma:.5f}"
    )
    return report
