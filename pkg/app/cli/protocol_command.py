"""
Lattice QIP - Protocol Command
Runs create, transport and swap and reports the fidelity budget.
"""

from dataclasses import replace

import numpy as np

from app.cli.base_command import BaseCommand, CommandContext, CommandResult
from app.cli.gate_command import budget_from_config
from app.cli.transport_command import transport_model_from_config
from app.core.protocol_sim import (
    BELL_PLUS,
    QUBIT_SITES,
    bell_fidelity,
    concurrence,
    purity,
    run_protocol,
    state_fidelity,
)
from app.core.transport import site_distance
from app.core.workers.montecarlo_worker import MonteCarloWorker
from app.utils.run_config import RunConfig
import config


def _protocol_budget(run_config: RunConfig):
    budget = budget_from_config(run_config)
    fidelity = run_config.protocol.fidelity_per_transition
    if fidelity is not None:
        budget = replace(budget, overlap_fidelity=fidelity)
    return budget


class ProtocolCommand(BaseCommand):
    """Protocol trace, entanglement diagnostics and fidelity report."""

    name = "protocol"
    help = "simulate the entangling protocol and its error budget"

    def execute(self, run_config: RunConfig, context: CommandContext) -> CommandResult:
        section = run_config.protocol

        n_sites = section.n_sites
        if section.qubit_a is not None:
            n_sites = site_distance(section.qubit_a, section.qubit_b)
        timing = transport_model_from_config(run_config).timing_report(n_sites)

        if section.ideal:
            budget = None
            transport_p1 = 0.0
        else:
            budget = _protocol_budget(run_config)
            transport_p1 = section.transport_p1

        trace = run_protocol(budget, transport_p1, include_leakage=section.include_leakage)
        final = trace.final
        results = {
            'n_sites': n_sites,
            'timing': timing,
            'trace': trace.to_records(),
            'bell_fidelity': bell_fidelity(final),
            'concurrence_li': concurrence(final, QUBIT_SITES),
            'purity_cs': purity(final, ("Cs",)),
            'fidelity': None,
        }

        lines = [trace.to_text(), f"N = {n_sites} sites, tau_e = {timing['tau_e_ms']:.4g} ms"]
        if section.ideal:
            f_final, phase = state_fidelity(final, np.kron([1.0, 0.0], BELL_PLUS))
            results['final_state_fidelity'] = f_final
            results['final_state_phase'] = phase
            lines.append(f"Ideal run: F(Bell) = {f_final:.12f}, global phase {phase:.6f} rad")
        else:
            worker = MonteCarloWorker(
                [budget] * config.TRANSITIONS_PER_ENTANGLEMENT,
                transport_p1,
                trials=section.trials,
                seed=run_config.seed,
                include_leakage=section.include_leakage,
                n_jobs=context.jobs,
            )
            report = self.run_worker(worker, context, "monte-carlo")
            results['fidelity'] = report.to_dict()
            lines.append(
                f"F (multiplicative) = {report.f_multiplicative:.5f}, "
                f"F (Monte-Carlo) = {report.f_montecarlo:.5f} +/- {report.mc_sigma:.5f} "
                f"({report.trials} trials, seed {report.seed})"
            )

        lines.append(
            f"Concurrence(Li_a, Li_b) = {results['concurrence_li']:.10f}, "
            f"purity(Cs) = {results['purity_cs']:.10f}"
        )
        return CommandResult(results=results, text="\n".join(lines))
