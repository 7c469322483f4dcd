"""
Lattice QIP - Gate Command
Atom-molecule coupling budget of one Li-Cs gate.
"""

from app.cli.base_command import BaseCommand, CommandContext, CommandResult
from app.core.molecular_coupling import (
    CouplingBudget,
    franck_condon,
    franck_condon_quadrature,
    gate_budget,
)
from app.utils.run_config import RunConfig


def budget_from_config(run_config: RunConfig) -> CouplingBudget:
    """CouplingBudget of the run's gate section."""
    section = run_config.gate
    return gate_budget(
        a_bohr=section.a_bohr,
        omega0_hz=section.omega0_khz * 1e3,
        omega_r_hz=section.omega_r_khz * 1e3 if section.omega_r_khz is not None else None,
        r0=section.r0_nm * 1e-9 if section.r0_nm is not None else None,
        offset=section.offset_nm * 1e-9,
        detuning_vib_hz=section.detuning_vib_khz * 1e3 if section.detuning_vib_khz is not None else None,
        trap_frequencies_hz=section.trap_frequencies_hz,
        fc_method=section.fc_method,
    )


class GateCommand(BaseCommand):
    """Franck-Condon factor, Rabi rate, pulse time and per-operation errors."""

    name = "gate"
    help = "atom-molecule coupling budget"

    def execute(self, run_config: RunConfig, context: CommandContext) -> CommandResult:
        budget = budget_from_config(run_config)

        c_closed = franck_condon(budget.scattering_length, budget.r0)
        c_quad = franck_condon_quadrature(budget.scattering_length, budget.r0)

        results = budget.to_record()
        results.update({
            'C_closed_form': c_closed,
            'C_quadrature': c_quad,
            'C_ratio_quadrature_to_closed_form': c_quad / c_closed,
        })

        text = "\n".join([
            f"r0 = {results['r0_nm']:.1f} nm (derived {results['r0_derived_nm']:.1f} nm)",
            f"C = {c_closed:.6f} (closed form), {c_quad:.6f} (quadrature)",
            f"Omega = 2pi x {results['omega_hz']:.2f} Hz, tau = {results['tau_ms']:.3f} ms",
            f"F per op = {results['F_per_op']:.6f} (1-axis), {results['F_per_op_3axis']:.6f} (3-axis)",
            f"Leakage per pulse = {results['dp_per_pulse']:.4g}",
        ])
        return CommandResult(results=results, text=text)
