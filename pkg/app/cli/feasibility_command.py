"""
Lattice QIP - Feasibility Command
Scans the (I₁, I₂) plane and reports the region meeting every requirement.
"""

import math

import numpy as np

from app.cli.base_command import BaseCommand, CommandContext, CommandResult
from app.cli.geometry_command import geometry_from_config
from app.core.lattice_model import (
    FeasibilityRequirements,
    independent_control_bounds,
    operating_point,
    optimal_ratio,
)
from app.core.workers.feasibility_worker import FeasibilityWorker
from app.utils.run_config import RunConfig


class FeasibilityCommand(BaseCommand):
    """Feasibility region, independent-control bounds and the operating point."""

    name = "feasibility"
    help = "scan intensities for the feasible operating region"

    def execute(self, run_config: RunConfig, context: CommandContext) -> CommandResult:
        section = run_config.feasibility
        lattice = run_config.lattice
        geometry = geometry_from_config(run_config)

        n = section.grid_points
        i1_values = np.logspace(math.log10(section.i1_min_w_m2), math.log10(section.i1_max_w_m2), n)
        i2_values = np.logspace(math.log10(section.i2_min_w_m2), math.log10(section.i2_max_w_m2), n)
        requirements = FeasibilityRequirements(
            decoherence_ceiling=section.decoherence_ceiling_per_s,
            alpha_ceiling=section.alpha_ceiling,
        )

        worker = FeasibilityWorker(
            i1_values,
            i2_values,
            requirements=requirements,
            geometry=geometry,
            line_model=lattice.line_model,
            n_jobs=context.jobs,
        )
        region = self.run_worker(worker, context, "feasibility")

        n_points = len(region.points)
        n_feasible = len(region.feasible_points)
        bounds = region.ratio_bounds
        control = independent_control_bounds(section.alpha_ceiling, geometry, lattice.line_model)
        optimum = optimal_ratio(geometry, lattice.line_model)
        point = operating_point(lattice.i1_w_m2, lattice.ratio_i1_i2, geometry, lattice.line_model)

        results = {
            'n_points': n_points,
            'n_feasible': n_feasible,
            'feasible_fraction': n_feasible / n_points,
            'ratio_bounds': list(bounds) if bounds else None,
            'independent_control_bounds': list(control),
            'optimal': optimum,
            'operating_point': point.to_dict(),
            'operating_point_within_ceiling': point.within(section.decoherence_ceiling_per_s),
        }

        lines = [
            f"Grid: {n}x{n} points, {n_feasible} feasible ({results['feasible_fraction']:.2%})",
            (
                f"Feasible I1/I2: {bounds[0]:.4g} .. {bounds[1]:.4g}"
                if bounds else "Feasible I1/I2: empty region"
            ),
            f"Independent control: {control[0]:.4g} < I1/I2 < {control[1]:.4g}",
            f"Optimal I1/I2 = {optimum['ratio']:.4g} (alpha = {optimum['alpha_li']:.3g})",
            f"Operating point I1 = {lattice.i1_w_m2:.3g} W/m^2, I1/I2 = {lattice.ratio_i1_i2:g}:",
        ]
        for species, rate in point.scattering_per_s.items():
            lines.append(
                f"  {species}: scattering {rate:.3g}/s, tunneling {point.tunneling_per_s[species]:.3g}/s, "
                f"depth {point.depth_in_recoils[species]:.3g} E_R"
            )

        return CommandResult(
            results=results,
            text="\n".join(lines),
            tables={'feasibility.csv': region.to_dataframe()},
        )
