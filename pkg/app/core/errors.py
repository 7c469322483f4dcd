"""
Lattice QIP - Domain Errors
Exception hierarchy shared by the physics modules.
"""

from typing import Optional


class LatticeQipError(Exception):
    """Base class for all domain errors raised by app.core."""
    pass


class UnknownSpeciesError(LatticeQipError, KeyError):
    """Requested species is not in the registry."""

    def __str__(self) -> str:
        # KeyError quotes its argument; keep the plain message
        return str(self.args[0]) if self.args else ""


class NearResonanceError(LatticeQipError, ValueError):
    """Far-detuned formula used with |Δ| ≤ 10Γ."""
    pass


class NonTranslationalPhaseError(LatticeQipError, ValueError):
    """Phase triple deforms the lattice pattern instead of translating it."""
    pass


class RegimeError(LatticeQipError, ValueError):
    """Input lies outside the validity regime of a closed-form result."""
    pass


class InfeasibleTargetError(LatticeQipError, ValueError):
    """No positive velocity meets the requested transport fidelity."""
    pass


class InvalidChannelError(LatticeQipError, ValueError):
    """Pulse channel is malformed or collides with an occupied molecular level."""
    pass


class PreconditionStateError(LatticeQipError, ValueError):
    """Register is not in the state a protocol step requires."""
    pass


class OccupiedMolecularLevelError(LatticeQipError, ValueError):
    """Diagnostic requested while a molecular level still holds population."""
    pass


class InsufficientDataError(LatticeQipError, ValueError):
    """Too few samples for the requested statistic."""
    pass


class MisalignedTimestampsError(LatticeQipError, ValueError):
    """Color channels do not share a common time base."""
    pass


class NonuniformSamplingError(LatticeQipError, ValueError):
    """Sampling gaps too irregular for spectrum estimation."""

    def __init__(self, message: str, max_gap: Optional[float] = None, median_gap: Optional[float] = None):
        super().__init__(message)
        self.max_gap = max_gap
        self.median_gap = median_gap


class DegenerateDetuningError(LatticeQipError, ValueError):
    """Fine-structure constant denominator vanishes."""
    pass
