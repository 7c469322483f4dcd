"""
Lattice QIP - Transport Command
Calibrated transport error law and entanglement timing rows.
"""

import pandas as pd

from app.cli.base_command import BaseCommand, CommandContext, CommandResult
from app.core.transport import TIMING_COLUMNS, TransportModel, TransportParams, transport_table
from app.utils.run_config import RunConfig


def transport_model_from_config(run_config: RunConfig) -> TransportModel:
    """Calibrated TransportModel for the run's lattice and transport sections."""
    section = run_config.transport
    params = TransportParams(
        lattice_constant=run_config.lattice.lattice_constant_um * 1e-6,
        x0=section.x0_nm * 1e-9,
        crosstalk_alpha=section.crosstalk_alpha,
        crosstalk_depth_hz=section.crosstalk_depth_khz * 1e3,
    )
    return TransportModel(reference=params)


class TransportCommand(BaseCommand):
    """Timing report for site counts and coordinate pairs."""

    name = "transport"
    help = "transport velocity bounds and entanglement timing"

    def execute(self, run_config: RunConfig, context: CommandContext) -> CommandResult:
        section = run_config.transport
        model = transport_model_from_config(run_config)

        rows = [model.timing_report(n, section.fidelity_target) for n in section.n_sites]
        tables = {'transport.csv': pd.DataFrame(rows, columns=TIMING_COLUMNS + ['transitions_ms', 'transport_ms'])}
        results = {
            'calibration': model.calibration_record(),
            'rows': rows,
            'pairs': [],
        }

        if section.pairs:
            pair_table = transport_table(section.pairs, section.fidelity_target, model, n_jobs=context.jobs)
            tables['transport_pairs.csv'] = pair_table
            results['pairs'] = pair_table.to_dict(orient='records')

        lines = [
            f"Calibration: g_raw = {model.reference.raw_depth_factor:.4g}, "
            f"g_cal = {model.calibrated_depth_factor:.4g}",
            f"{'N':>4} {'v (um/ms)':>10} {'p1':>8} {'tau_e (ms)':>11} {'N_q':>9}",
        ]
        for row in rows:
            lines.append(
                f"{row['N_sites']:>4} {row['v_um_per_ms']:>10.4g} {row['p1']:>8.4g} "
                f"{row['tau_e_ms']:>11.4g} {row['Nq']:>9.4g}"
            )

        return CommandResult(results=results, text="\n".join(lines), tables=tables)
