"""
Lattice QIP - Molecular Coupling Tests
"""

import math

import numpy as np
import pytest

from app.core.errors import RegimeError
from app.core.molecular_coupling import (
    franck_condon,
    franck_condon_quadrature,
    gate_budget,
    offresonant_leakage,
    overlap_fidelity,
    overlap_fidelity_3d,
    rabi_and_time,
    radial_normalization,
    reduce_system,
    relative_trap_frequency_for,
)
from app.core.species_registry import CONSTANTS, lookup_species


TWO_PI = 2.0 * math.pi
A0 = CONSTANTS.bohr_radius


class TestReduction:
    def test_equal_frequencies(self):
        li = lookup_species("Li6").mass
        cs = lookup_species("Cs133").mass
        system = reduce_system(li, TWO_PI * 1e5, cs, TWO_PI * 1e5)
        assert system.omega_c == pytest.approx(TWO_PI * 1e5)
        assert system.omega_r == pytest.approx(TWO_PI * 1e5)
        assert system.reduced_mass / CONSTANTS.amu == pytest.approx(5.75465, rel=1e-5)

    def test_derived_oscillator_length(self):
        li = lookup_species("Li6").mass
        cs = lookup_species("Cs133").mass
        system = reduce_system(li, TWO_PI * 160e3, cs, TWO_PI * 160e3)
        assert system.r0 * 1e9 == pytest.approx(104.8, rel=2e-3)
        assert system.to_dict()['r0_nm'] == pytest.approx(system.r0 * 1e9)

    @pytest.mark.parametrize("ratio", [0.5, 1.0, 2.7])
    def test_trap_frequencies_for_target(self, ratio):
        li = lookup_species("Li6").mass
        cs = lookup_species("Cs133").mass
        omega1, omega2 = relative_trap_frequency_for(TWO_PI * 160e3, ratio, li, cs)
        assert omega2 == pytest.approx(ratio * omega1)
        assert reduce_system(li, omega1, cs, omega2).omega_r == pytest.approx(TWO_PI * 160e3, rel=1e-12)

    def test_rejects_nonpositive_inputs(self):
        with pytest.raises(ValueError):
            reduce_system(1.0, 0.0, 1.0, 1.0)

    def test_reduction_identities_over_random_systems(self):
        rng = np.random.default_rng(11)
        n = 100_000
        m1, m2 = 10 ** rng.uniform(0.0, 2.5, size=(2, n)) * CONSTANTS.amu
        omega1, omega2 = TWO_PI * 10 ** rng.uniform(2.0, 7.0, size=(2, n))
        system = reduce_system(m1, omega1, m2, omega2)
        np.testing.assert_allclose(
            system.omega_c ** 2 * system.total_mass, m1 * omega1 ** 2 + m2 * omega2 ** 2, rtol=1e-12
        )
        np.testing.assert_allclose(system.omega_c * system.omega_r, omega1 * omega2, rtol=1e-12)
        # omega_r never exceeds the larger trap frequency
        assert np.all(system.omega_r <= np.maximum(omega1, omega2) * (1 + 1e-12))

    def test_rejects_any_nonpositive_array_entry(self):
        omega = np.array([TWO_PI * 1e5, 0.0])
        with pytest.raises(ValueError):
            reduce_system(1.0, omega, 1.0, omega)


class TestFranckCondon:
    def test_reference_value(self):
        assert franck_condon(200 * A0, 210e-9) == pytest.approx(0.016997, rel=1e-4)

    def test_power_law_exponent(self):
        a = np.linspace(10, 100, 10) * A0
        c = [franck_condon(x, 210e-9) for x in a]
        slope = np.polyfit(np.log(a), np.log(c), 1)[0]
        assert slope == pytest.approx(1.5, abs=1e-9)

    def test_quadrature_slope_close_to_three_halves(self):
        a = np.linspace(10, 100, 10) * A0
        c = [franck_condon_quadrature(x, 210e-9) for x in a]
        slope = np.polyfit(np.log(a), np.log(c), 1)[0]
        assert slope == pytest.approx(1.5, abs=0.01)

    @pytest.mark.parametrize("a_bohr", [10, 40, 100])
    def test_quadrature_matches_small_a_expansion(self, a_bohr):
        r0 = 210e-9
        eps = a_bohr * A0 / r0
        ratio = franck_condon_quadrature(a_bohr * A0, r0) / franck_condon(a_bohr * A0, r0)
        assert ratio == pytest.approx(math.sqrt(2.0) * (1 - 3 * eps ** 2 + 15 * eps ** 4), rel=1e-4)

    @pytest.mark.parametrize("kind", ["trap", "molecule"])
    def test_wavefunctions_are_normalized(self, kind):
        assert radial_normalization(kind, 50 * A0, 210e-9) == pytest.approx(1.0, rel=1e-6)

    def test_unknown_wavefunction_kind(self):
        with pytest.raises(ValueError):
            radial_normalization("bound", 50 * A0, 210e-9)

    @pytest.mark.parametrize("a", [0.0, -1e-9, 105e-9, 200e-9])
    def test_regime_checks(self, a):
        with pytest.raises(RegimeError):
            franck_condon(a, 210e-9)
        with pytest.raises(RegimeError):
            franck_condon_quadrature(a, 210e-9)


class TestRatesAndErrors:
    def test_rabi_and_time(self):
        omega, tau = rabi_and_time(0.016997, TWO_PI * 10e3)
        assert omega / TWO_PI == pytest.approx(169.97, rel=1e-4)
        assert tau == pytest.approx(math.pi / omega)
        assert tau * 1e3 == pytest.approx(2.9417, rel=1e-4)

    @pytest.mark.parametrize("c", [0.0, 1.5])
    def test_rabi_rejects_bad_overlap(self, c):
        with pytest.raises(ValueError):
            rabi_and_time(c, TWO_PI * 10e3)

    def test_overlap_fidelities(self):
        assert overlap_fidelity(10e-9, 210e-9) == pytest.approx(0.997735, abs=1e-6)
        assert overlap_fidelity_3d(10e-9, 210e-9) == pytest.approx(0.993220, abs=1e-6)
        assert overlap_fidelity(0.0, 210e-9) == 1.0

    def test_leakage(self):
        assert offresonant_leakage(TWO_PI * 200, TWO_PI * 160e3) == pytest.approx(2.49999e-3, rel=1e-5)
        assert offresonant_leakage(TWO_PI * 200, 0.0) == 1.0
        with pytest.raises(ValueError):
            offresonant_leakage(0.0, 1.0)


class TestGateBudget:
    def test_reference_budget(self):
        budget = gate_budget()
        record = budget.to_record()
        assert record['C'] == pytest.approx(0.016997, rel=1e-4)
        assert record['omega_hz'] == pytest.approx(169.97, rel=1e-4)
        assert 2.0 <= record['tau_ms'] <= 3.0
        assert record['F_per_op'] == pytest.approx(0.997735, abs=1e-6)
        assert record['F_per_op_3axis'] == pytest.approx(0.993220, abs=1e-6)
        assert record['r0_nm'] == pytest.approx(210.0)
        assert record['r0_derived_nm'] == pytest.approx(104.8, rel=2e-3)
        assert record['dp_per_pulse'] == pytest.approx(2 * 169.97 / 160e3, rel=1e-3)

    def test_derived_r0_when_not_quoted(self):
        budget = gate_budget(r0=None)
        assert budget.r0 == budget.r0_derived

    def test_quoted_r0_far_from_derived_warns(self, caplog):
        caplog.set_level("WARNING")
        gate_budget(r0=210e-9)
        assert "differs" in caplog.text

    def test_trap_frequencies_override_omega_r(self):
        budget = gate_budget(omega_r_hz=None, trap_frequencies_hz=(200e3, 150e3))
        li = lookup_species("Li6").mass
        cs = lookup_species("Cs133").mass
        expected = reduce_system(li, TWO_PI * 200e3, cs, TWO_PI * 150e3).omega_r
        assert budget.omega_r == pytest.approx(expected)

    def test_quadrature_method(self):
        closed = gate_budget()
        quad = gate_budget(fc_method="quadrature")
        assert quad.fc_method == "quadrature"
        assert quad.franck_condon / closed.franck_condon == pytest.approx(math.sqrt(2.0), rel=0.01)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            gate_budget(fc_method="numeric")
        with pytest.raises(ValueError):
            gate_budget(omega_r_hz=None)
        with pytest.raises(RegimeError):
            gate_budget(r0=10e-9)

    def test_larger_scattering_length_speeds_up_gate(self):
        taus = [gate_budget(a_bohr=a).pulse_pair_time for a in (50, 100, 200)]
        assert taus[0] > taus[1] > taus[2]
