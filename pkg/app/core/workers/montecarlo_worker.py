"""
Lattice QIP - Monte-Carlo Worker
Background worker for the error-injected protocol fidelity estimate.
"""

from typing import Sequence

from app.core.molecular_coupling import CouplingBudget
from app.core.protocol_sim import error_injected_run
from app.core.workers.base_worker import BaseWorker
import config


class MonteCarloWorker(BaseWorker):
    """Worker running the multiplicative and Monte-Carlo fidelity estimates."""

    def __init__(
        self,
        budgets: Sequence[CouplingBudget],
        transport_p1: float,
        trials: int = config.DEFAULT_MC_TRIALS,
        seed: int = config.DEFAULT_SEED,
        include_leakage: bool = config.DEFAULT_LEAKAGE_IN_BUDGET,
        n_jobs: int = 1,
    ):
        super().__init__()

        self.budgets = list(budgets)
        self.transport_p1 = transport_p1
        self.trials = trials
        self.seed = seed
        self.include_leakage = include_leakage
        self.n_jobs = n_jobs

    def run(self):
        """Run the Monte-Carlo estimate."""
        try:
            self.emit_progress(0, f"Running {self.trials} Monte-Carlo trials (seed {self.seed})...")

            def progress_callback(done, total):
                if not self._is_cancelled:
                    self.emit_step(done, total)

            report = error_injected_run(
                self.budgets,
                self.transport_p1,
                trials=self.trials,
                seed=self.seed,
                include_leakage=self.include_leakage,
                n_jobs=self.n_jobs,
                progress_callback=progress_callback,
            )

            if self._is_cancelled:
                self.emit_status("Monte-Carlo run cancelled")
                return

            self.emit_finished(report)

        except Exception as e:
            self.emit_error(e)
