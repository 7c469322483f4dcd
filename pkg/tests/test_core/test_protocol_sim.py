"""
Lattice QIP - Protocol Simulator Tests
"""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import trapezoid

from app.core.errors import InvalidChannelError, OccupiedMolecularLevelError, PreconditionStateError
from app.core.molecular_coupling import gate_budget
from app.core.protocol_sim import (
    BELL_PLUS,
    CREATE_CHANNELS,
    CREATE_TARGET,
    DIMENSION,
    Channel,
    ProtocolRegister,
    PulseSpec,
    apply_composite,
    apply_pi_pulse,
    apply_pulse,
    apply_transport_loss,
    bell_fidelity,
    concurrence,
    concurrence_of,
    entangle_step,
    error_injected_run,
    format_ket,
    initial_register,
    ket_expansion,
    level_index,
    montecarlo_draws,
    offset_scale,
    product_register,
    purity,
    reduced_density_matrix,
    register_from_qubits,
    rotation_matrix,
    rotation_pulse,
    run_protocol,
    single_qubit_rotation,
    state_fidelity,
)


PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2.0)
ZERO = np.array([1, 0], dtype=complex)
ONE = np.array([0, 1], dtype=complex)


def basis(cs, li_a, li_b):
    vector = np.zeros(8, dtype=complex)
    vector[(cs * 2 + li_a) * 2 + li_b] = 1.0
    return vector


class TestRegister:
    def test_level_layout(self):
        assert level_index(0, 0, 0) == 0
        assert level_index(1, 1, 1, "M'") == DIMENSION - 1
        assert level_index(0, 1, 0, "M") == 7

    def test_register_is_read_only(self):
        reg = initial_register()
        with pytest.raises(ValueError):
            reg.amplitudes[0] = 1.0

    def test_initial_register(self):
        reg = initial_register()
        assert reg.norm == pytest.approx(1.0)
        assert reg.sink == 0.0
        assert reg.molecular_population() == 0.0
        np.testing.assert_allclose(reg.qubit_vector(), np.kron(PLUS, np.kron(ZERO, ZERO)))

    def test_register_validation(self):
        with pytest.raises(ValueError):
            ProtocolRegister(np.zeros(8))
        with pytest.raises(ValueError):
            register_from_qubits(np.ones(8))
        with pytest.raises(ValueError):
            register_from_qubits(np.ones(4) / 2.0)


class TestPulses:
    def test_pi_pulse_moves_pair_to_molecule(self):
        reg = apply_pi_pulse(initial_register(), CREATE_CHANNELS[0])
        m = level_index(0, 0, 0, "M")
        assert reg.amplitudes[m] == pytest.approx(-1j / math.sqrt(2.0))
        assert reg.molecular_population("M") == pytest.approx(0.5)
        assert reg.partner("M") == "Li_a"
        assert reg.norm == pytest.approx(1.0)

    def test_two_pi_pulse_returns_with_sign_flip(self):
        reg = initial_register()
        pulse = PulseSpec(channel=CREATE_CHANNELS[0], area=2 * math.pi)
        after = apply_pulse(reg, pulse)
        assert after.amplitudes[0] == pytest.approx(-reg.amplitudes[0])
        assert after.molecular_population() == pytest.approx(0.0, abs=1e-30)
        assert after.bonds == ()

    def test_qubit_vector_refused_with_molecule_populated(self):
        reg = apply_pi_pulse(initial_register(), CREATE_CHANNELS[0])
        with pytest.raises(OccupiedMolecularLevelError):
            reg.qubit_vector()

    def test_level_bound_to_other_site(self):
        reg = apply_pi_pulse(initial_register(), Channel((0, 0), "Li_a", "M"))
        with pytest.raises(InvalidChannelError):
            apply_pi_pulse(reg, Channel((0, 0), "Li_b", "M"))

    @pytest.mark.parametrize("channel", [
        Channel((0, 0), "Li_c", "M"),
        Channel((0, 0), "Li_a", "N"),
        Channel((0, 2), "Li_a", "M"),
    ])
    def test_malformed_channels(self, channel):
        with pytest.raises(InvalidChannelError):
            apply_pi_pulse(initial_register(), channel)

    def test_pulse_spec_ranges(self):
        with pytest.raises(ValueError):
            PulseSpec(channel=CREATE_CHANNELS[0], area=7.0)
        with pytest.raises(ValueError):
            PulseSpec(channel=CREATE_CHANNELS[0], overlap_fidelity=1.5)

    def test_lossy_pulse_conserves_total_probability(self):
        pulse = PulseSpec(channel=CREATE_CHANNELS[0], overlap_fidelity=0.9, leakage=0.05)
        reg = apply_pulse(initial_register(), pulse)
        assert reg.norm == pytest.approx(0.9 * 0.95)
        assert reg.total_probability == pytest.approx(1.0)

    def test_lossy_pulse_scales_every_amplitude(self):
        pulse = PulseSpec(channel=CREATE_CHANNELS[0], overlap_fidelity=0.9, leakage=0.05)
        ideal = apply_pi_pulse(initial_register(), CREATE_CHANNELS[0])
        lossy = apply_pulse(initial_register(), pulse)
        np.testing.assert_allclose(lossy.amplitudes, math.sqrt(pulse.success_probability) * ideal.amplitudes)
        # Cs=1 component is outside the addressed pair
        off_channel = level_index(1, 0, 0)
        assert abs(lossy.amplitudes[off_channel]) == pytest.approx(math.sqrt(0.9 * 0.95 / 2.0))
        assert lossy.sink == pytest.approx(1.0 - 0.9 * 0.95)


class TestComposite:
    def test_create_composite(self):
        reg = apply_composite(initial_register(), *CREATE_CHANNELS)
        rho = reduced_density_matrix(reg, ("Cs", "Li_a"))
        assert float(np.vdot(CREATE_TARGET, rho @ CREATE_TARGET).real) == pytest.approx(1.0)
        np.testing.assert_allclose(reg.qubit_vector(), (basis(1, 0, 0) - basis(0, 1, 0)) / math.sqrt(2.0), atol=1e-12)

    def test_coinciding_pairs_rejected(self):
        with pytest.raises(InvalidChannelError):
            apply_composite(initial_register(), CREATE_CHANNELS[0], CREATE_CHANNELS[0])

    def test_mismatched_levels_rejected(self):
        with pytest.raises(InvalidChannelError):
            apply_composite(initial_register(), CREATE_CHANNELS[0], Channel((0, 1), "Li_a", "M'"))

    def test_occupied_level_rejected(self):
        reg = apply_pi_pulse(initial_register(), CREATE_CHANNELS[0])
        with pytest.raises(InvalidChannelError):
            apply_composite(reg, *CREATE_CHANNELS)

    def test_trace_records_each_pulse(self):
        trace = []
        apply_composite(initial_register(), *CREATE_CHANNELS, trace=trace, label="create")
        assert [name for name, _ in trace] == ["create pulse 1", "create pulse 2"]


class TestEntangleSteps:
    def test_create_precondition(self):
        reg = product_register(ZERO, ZERO, ZERO)
        with pytest.raises(PreconditionStateError):
            entangle_step(reg, "create")

    def test_swap_precondition(self):
        with pytest.raises(PreconditionStateError):
            entangle_step(initial_register(), "swap")

    def test_lossy_steps_skip_precondition_check(self):
        reg = entangle_step(initial_register(), "create", pulse_success=(0.9, 0.9))
        assert reg.norm == pytest.approx(0.81)

    def test_unknown_step(self):
        with pytest.raises(ValueError):
            entangle_step(initial_register(), "teleport")


class TestIdealProtocol:
    @pytest.fixture
    def trace(self):
        return run_protocol()

    def test_operations_in_order(self, trace):
        names = [name for name, _ in trace.steps]
        assert names == ["initial", "create pulse 1", "create pulse 2", "swap pulse 1", "swap pulse 2"]

    def test_final_state(self, trace):
        final = trace.final
        assert bell_fidelity(final) == pytest.approx(1.0)
        fidelity, phase = state_fidelity(final, np.kron(ZERO, BELL_PLUS))
        assert fidelity == pytest.approx(1.0)
        assert abs(phase) == pytest.approx(math.pi)

    def test_entanglement_diagnostics(self, trace):
        final = trace.final
        assert concurrence(final, ("Li_a", "Li_b")) == pytest.approx(1.0)
        assert purity(final, ("Cs",)) == pytest.approx(1.0)
        assert concurrence(final, ("Cs", "Li_a")) == pytest.approx(0.0, abs=1e-9)

    def test_intermediate_entanglement(self, trace):
        after_create = trace.steps[2][1]
        assert concurrence(after_create, ("Cs", "Li_a")) == pytest.approx(1.0)
        assert purity(after_create, ("Li_b",)) == pytest.approx(1.0)

    def test_text_and_records(self, trace):
        text = trace.to_text()
        assert text.splitlines()[0].startswith("initial:")
        assert "M(Cs+Li_a)" in text
        records = trace.to_records()
        assert records[-1]['sink'] == 0.0
        assert len(records[-1]['ket']) == 2
        assert format_ket(trace.final).count("|") == 2

    def test_ket_expansion_labels(self):
        terms = ket_expansion(initial_register())
        assert [t["label"] for t in terms] == ["|Cs=0,Li_a=0,Li_b=0>", "|Cs=1,Li_a=0,Li_b=0>"]
        assert terms[0]["re"] == pytest.approx(1 / math.sqrt(2))
        assert terms[0]["im"] == 0.0


class TestConcurrence:
    def test_mixed_separable_state(self):
        rho = np.diag([0.5, 0.0, 0.0, 0.5]).astype(complex)
        assert concurrence_of(rho) == pytest.approx(0.0, abs=1e-12)

    def test_werner_state(self):
        bell = np.outer(BELL_PLUS, BELL_PLUS.conj())
        rho = 0.8 * bell + 0.2 * np.eye(4) / 4.0
        # C = max(0, (3p − 1)/2) for Werner weight p
        assert concurrence_of(rho) == pytest.approx(0.7, abs=1e-9)

    def test_pair_validation(self):
        with pytest.raises(ValueError):
            concurrence(initial_register(), ("Li_a", "Li_a"))
        with pytest.raises(ValueError):
            reduced_density_matrix(initial_register(), ("Rb",))


class TestLossyProtocol:
    def test_multiplicative_fidelity(self):
        trace = run_protocol(transport_p1=0.01, pulse_success=(0.995,) * 4)
        final = trace.final
        assert bell_fidelity(final) == pytest.approx(0.995 ** 4 * 0.99, rel=1e-12)
        assert final.total_probability == pytest.approx(1.0)
        assert "transport" in [name for name, _ in trace.steps]

    def test_budget_with_leakage(self):
        budget = gate_budget()
        without = run_protocol(budget=budget).final
        with_leak = run_protocol(budget=budget, include_leakage=True).final
        assert bell_fidelity(with_leak) < bell_fidelity(without)
        assert bell_fidelity(without) == pytest.approx(budget.overlap_fidelity ** 4)

    def test_transport_loss_range(self):
        with pytest.raises(ValueError):
            apply_transport_loss(initial_register(), 1.5)

    def test_pulse_count(self):
        with pytest.raises(ValueError):
            run_protocol(pulse_success=(1.0, 1.0))


class TestRotation:
    @pytest.mark.parametrize("theta, phi", [(math.pi / 2, 0.0), (math.pi, math.pi / 3), (1.2, 2.5), (5.0, -0.7)])
    @pytest.mark.parametrize("target", ["Li_a", "Li_b"])
    def test_rotation_up_to_global_phase(self, theta, phi, target):
        cs = np.array([0.6, 0.8j])
        reg = product_register(cs, ZERO, ZERO)
        rotated = single_qubit_rotation(reg, target, theta, phi)
        qubit = np.exp(-0.5j * theta) * rotation_matrix(theta, phi) @ ZERO
        expected = np.kron(cs, np.kron(qubit, ZERO) if target == "Li_a" else np.kron(ZERO, qubit))
        np.testing.assert_allclose(rotated.qubit_vector(), expected, atol=1e-9)

    def test_rotation_acts_on_superpositions(self):
        reg = product_register(PLUS, [0.3, 0.4j], ONE)
        rotated = single_qubit_rotation(reg, "Li_a", math.pi / 2, 0.0)
        assert rotated.norm == pytest.approx(1.0)
        assert rotated.molecular_population() == 0.0

    @pytest.mark.parametrize("target", ["Li_a", "Li_b"])
    def test_rotations_about_one_axis_compose(self, target):
        rng = np.random.default_rng(21)
        for _ in range(20):
            theta1, theta2 = rng.uniform(0.1, 3.0, size=2)
            phi = rng.uniform(-math.pi, math.pi)
            np.testing.assert_allclose(
                rotation_matrix(theta2, phi) @ rotation_matrix(theta1, phi),
                rotation_matrix(theta1 + theta2, phi),
                atol=1e-12,
            )

            vector = rng.normal(size=8) + 1j * rng.normal(size=8)
            reg = register_from_qubits(vector / np.linalg.norm(vector))
            twice = single_qubit_rotation(single_qubit_rotation(reg, target, theta1, phi), target, theta2, phi)
            once = single_qubit_rotation(reg, target, theta1 + theta2, phi)
            np.testing.assert_allclose(twice.qubit_vector(), once.qubit_vector(), atol=1e-9)
            assert twice.norm == pytest.approx(1.0)

    def test_zero_rotation_is_identity(self):
        reg = initial_register()
        np.testing.assert_allclose(single_qubit_rotation(reg, "Li_b", 0.0, 0.0).amplitudes, reg.amplitudes)

    def test_rotation_pulse_parameters(self):
        params = rotation_pulse(math.pi, omega=2.0)
        assert params['detuning'] == pytest.approx(0.0)
        assert params['generalized_rabi'] == pytest.approx(2.0 * math.sqrt(2.0))
        assert params['duration'] == pytest.approx(2 * math.pi / params['generalized_rabi'])
        assert rotation_pulse(0.0)['duration'] == 0.0

    def test_rotation_rejects_bad_target(self):
        with pytest.raises(InvalidChannelError):
            single_qubit_rotation(initial_register(), "Cs", 1.0, 0.0)
        reg = apply_pi_pulse(initial_register(), CREATE_CHANNELS[0])
        with pytest.raises(InvalidChannelError):
            single_qubit_rotation(reg, "Li_a", 1.0, 0.0)


class TestMonteCarlo:
    def test_offset_scale(self):
        s = offset_scale(0.995)
        z = np.linspace(-8, 8, 20001)
        weight = np.exp(-z ** 2 / 2) / math.sqrt(2 * math.pi)
        mean = trapezoid(np.exp(-(s * z) ** 2) * weight, z)
        assert mean == pytest.approx(0.995, rel=1e-8)
        assert offset_scale(1.0) == 0.0
        with pytest.raises(ValueError):
            offset_scale(0.0)

    def test_draws_are_seeded(self):
        a = montecarlo_draws(64, 4, seed=5)
        b = montecarlo_draws(64, 4, seed=5)
        assert a.shape == (64, 4)
        np.testing.assert_array_equal(a, b)

    def test_error_injected_run(self):
        budget = replace(gate_budget(), overlap_fidelity=0.995)
        report = error_injected_run([budget] * 4, transport_p1=0.01, trials=2000, seed=11)
        assert report.f_multiplicative == pytest.approx(0.97035, abs=1e-5)
        assert report.f_montecarlo == pytest.approx(report.f_multiplicative, abs=2e-3)
        assert report.mc_sigma > 0
        assert report.to_dict()['trials'] == 2000

    def test_result_independent_of_jobs(self):
        budget = replace(gate_budget(), overlap_fidelity=0.99)
        serial = error_injected_run([budget] * 4, 0.01, trials=64, seed=3, n_jobs=1)
        parallel = error_injected_run([budget] * 4, 0.01, trials=64, seed=3, n_jobs=2)
        assert serial.f_montecarlo == parallel.f_montecarlo

    def test_progress_callback(self):
        calls = []
        error_injected_run([gate_budget()] * 4, 0.0, trials=16, seed=1, progress_callback=lambda d, t: calls.append((d, t)))
        assert calls[-1][0] == calls[-1][1]

    def test_input_validation(self):
        with pytest.raises(ValueError):
            error_injected_run([gate_budget()] * 3, 0.0)
        with pytest.raises(ValueError):
            error_injected_run([gate_budget()] * 4, 0.0, trials=1)
