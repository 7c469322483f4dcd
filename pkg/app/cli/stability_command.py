"""
Lattice QIP - Stability Command
RMS and spectra of measured (or synthetic) lattice-minimum positions, plus D_FS.
"""

import argparse
from pathlib import Path
from typing import Any, Dict

from app.cli.base_command import BaseCommand, CommandContext, CommandResult
from app.core.species_registry import lookup_species
from app.core.stability_toolkit import dfs_for_species, synthesize_series
from app.core.workers.stability_worker import StabilityWorker
from app.utils.run_config import RunConfig
import config


SYNTHETIC_NAME = "synthetic"


class StabilityCommand(BaseCommand):
    """Summary records and spectrum CSVs keyed by input name."""

    name = "stability"
    help = "position stability, spectra and vector light-shift constants"

    def add_arguments(self, parser: argparse.ArgumentParser):
        parser.add_argument("inputs", nargs="*", help="position CSV files (t_s,x1_nm,y1_nm,x2_nm,y2_nm)")

    def config_overrides(self, args: argparse.Namespace) -> Dict[str, Any]:
        if getattr(args, "inputs", None):
            return {'stability': {'inputs': [str(p) for p in args.inputs]}}
        return {}

    def execute(self, run_config: RunConfig, context: CommandContext) -> CommandResult:
        section = run_config.stability
        series = {}
        if not section.inputs:
            series[SYNTHETIC_NAME] = synthesize_series(
                n_samples=section.synthetic_samples,
                sample_interval=section.synthetic_interval_ms * 1e-3,
                rms1=section.synthetic_rms1_nm * 1e-9,
                rms_diff=section.synthetic_rms_diff_nm * 1e-9,
                seed=run_config.seed,
            )

        worker = StabilityWorker(section.inputs, series=series, n_jobs=context.jobs)
        analysed = self.run_worker(worker, context, "stability")

        results = {'series': {}, 'dfs': self._dfs_table(run_config)}
        tables = {}
        lines = []
        for name, (record, spectrum) in analysed.items():
            results['series'][name] = record
            line = f"{name}: rms1 = {record['rms1_nm']:.2f} nm"
            if 'rms_diff_nm' in record:
                line += f", rms2 = {record['rms2_nm']:.2f} nm, rms_diff = {record['rms_diff_nm']:.2f} nm"
            if record['spectrum_refused']:
                line += " (spectrum refused)"
            else:
                tables[f"{Path(name).stem}_spectrum.csv"] = spectrum
            lines.append(line)

        for species, values in results['dfs'].items():
            formatted = ", ".join(f"{wl} nm: {v:.4g}" for wl, v in values.items())
            lines.append(f"D_FS {species}: {formatted}")

        return CommandResult(results=results, text="\n".join(lines), tables=tables)

    @staticmethod
    def _dfs_table(run_config: RunConfig) -> Dict[str, Dict[str, float]]:
        lattice = run_config.lattice
        table = {}
        for name in (config.QUBIT_SPECIES, config.MESSENGER_SPECIES):
            species = lookup_species(name)
            table[name] = {
                f"{wavelength:g}": dfs_for_species(species, wavelength * 1e-9)
                for wavelength in (lattice.wavelength1_nm, lattice.wavelength2_nm)
            }
        return table
