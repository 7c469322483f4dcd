"""
Lattice QIP - Geometry Command
Beam angles, lattice vectors, the interference pattern and phase-shift translations.
"""

import math

from app.cli.base_command import BaseCommand, CommandContext, CommandResult
from app.core.lattice_model import (
    LatticeConfig,
    LatticeGeometry,
    max_pattern_gradient,
    pattern_extrema,
    pattern_grid,
    translation_for_phases,
)
from app.utils.run_config import RunConfig


def geometry_from_config(run_config: RunConfig) -> LatticeGeometry:
    """LatticeGeometry of the run's lattice section."""
    lattice = run_config.lattice
    return LatticeGeometry(
        lattice_constant=lattice.lattice_constant_um * 1e-6,
        wavelengths=(lattice.wavelength1_nm * 1e-9, lattice.wavelength2_nm * 1e-9),
    )


class GeometryCommand(BaseCommand):
    """Geometry report and pattern CSV."""

    name = "geometry"
    help = "beam angles, lattice vectors, intensity pattern and phase translations"

    def execute(self, run_config: RunConfig, context: CommandContext) -> CommandResult:
        section = run_config.geometry
        geometry = geometry_from_config(run_config)
        lattice = LatticeConfig(geometry=geometry, color=section.color)

        low, high = pattern_extrema(lattice)
        results = {
            'geometry': geometry.to_dict(),
            'pattern_min': low,
            'pattern_max': high,
            'max_pattern_gradient_per_um': max_pattern_gradient(lattice) * 1e-6,
            'translation_um': None,
        }

        thetas = ", ".join(f"{math.degrees(t):.4f}" for t in geometry.thetas)
        lines = [
            f"Lattice constant: {geometry.lattice_constant * 1e6:g} um",
            f"Beam angles theta (deg): {thetas}",
            f"k_perp: {geometry.k_perp * 1e-6:.6f} 1/um",
            f"Pattern range (color {section.color}): [{low:.4f}, {high:.4f}]",
        ]

        if section.delta_phases_rad is not None:
            shift = translation_for_phases(lattice, section.delta_phases_rad)
            results['translation_um'] = [float(v) * 1e6 for v in shift]
            lines.append(f"Translation: ({shift[0] * 1e6:.6f}, {shift[1] * 1e6:.6f}) um")

        extent = section.extent_um * 1e-6 if section.extent_um else None
        table = pattern_grid(lattice, section.grid_points, section.grid_points, extent)

        return CommandResult(results=results, text="\n".join(lines), tables={'pattern.csv': table})
