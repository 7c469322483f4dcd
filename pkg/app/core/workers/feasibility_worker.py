"""
Lattice QIP - Feasibility Worker
Background worker for the (I₁, I₂) feasibility scan.
"""

from typing import Optional, Sequence

import numpy as np

from app.core.lattice_model import (
    FeasibilityRequirements,
    FeasibilityResult,
    LatticeGeometry,
    feasibility_region,
)
from app.core.workers.base_worker import BaseWorker
import config


class FeasibilityWorker(BaseWorker):
    """
    Worker for the feasibility grid.

    Evaluates the grid in blocks of I₁ rows so progress can be reported;
    blocks are merged in grid order.
    """

    def __init__(
        self,
        i1_values: Sequence[float],
        i2_values: Sequence[float],
        requirements: Optional[FeasibilityRequirements] = None,
        geometry: Optional[LatticeGeometry] = None,
        line_model: str = config.DEFAULT_LINE_MODEL,
        n_jobs: int = 1,
        blocks: int = 100 // config.PROGRESS_STEP_PCT,
    ):
        """
        Initialize feasibility worker.

        Args:
            i1_values: L1 intensity axis (W/m²)
            i2_values: L2 intensity axis (W/m²)
            requirements: Decoherence and cross-talk ceilings
            geometry: Beam geometry
            line_model: "dominant" or "fine_structure"
            n_jobs: joblib worker count per block
            blocks: Number of progress blocks
        """
        super().__init__()

        self.i1_values = np.asarray(i1_values, dtype=float)
        self.i2_values = np.asarray(i2_values, dtype=float)
        self.requirements = requirements or FeasibilityRequirements()
        self.geometry = geometry or LatticeGeometry()
        self.line_model = line_model
        self.n_jobs = n_jobs
        self.blocks = max(1, min(blocks, self.i1_values.size))

    def run(self):
        """Scan the grid."""
        try:
            self.emit_progress(0, f"Scanning {self.i1_values.size}x{self.i2_values.size} grid...")

            points = []
            row_blocks = np.array_split(self.i1_values, self.blocks)
            for n, rows in enumerate(row_blocks, start=1):
                if self._is_cancelled:
                    self.emit_status("Scan cancelled")
                    return

                block = feasibility_region(
                    rows,
                    self.i2_values,
                    requirements=self.requirements,
                    geometry=self.geometry,
                    line_model=self.line_model,
                    n_jobs=self.n_jobs,
                )
                points.extend(block.points)
                self.emit_step(n, len(row_blocks))

            result = FeasibilityResult(points=points, requirements=self.requirements)
            self.emit_status(f"Feasible points: {len(result.feasible_points)} of {len(points)}")
            self.emit_finished(result)

        except Exception as e:
            self.emit_error(e)
