"""
Lattice QIP - Stability Worker
Background worker analysing a batch of position-series files.
"""

from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import pandas as pd
from joblib import Parallel, delayed

from app.core.stability_toolkit import PositionSeries, analyze_series, series_from_frame
from app.core.workers.base_worker import BaseWorker
from app.utils.file_helpers import FileReadError, read_csv_file
from app.utils.validators import ValidationError, data_row_to_line, validate_file_path, validate_position_frame
import config


def load_position_file(file_path: str | Path) -> PositionSeries:
    """
    Read and validate one `t_s,x1_nm,y1_nm,x2_nm,y2_nm` file.

    Raises:
        FileReadError: If the path is not an existing file or cannot be read
        ValidationError: On an unsupported suffix or a schema violation (with its line number)
        MisalignedTimestampsError: If rows carry only one color
    """
    is_valid, error = validate_file_path(file_path)
    if not is_valid:
        raise FileReadError(error)
    is_valid, error = validate_file_path(file_path, suffixes=config.POSITION_FILE_SUFFIXES)
    if not is_valid:
        raise ValidationError(error)

    frame = read_csv_file(file_path)
    is_valid, error, row = validate_position_frame(frame)
    if not is_valid:
        line = data_row_to_line(file_path, row) if row is not None else None
        raise ValidationError(f"{Path(file_path).name}: {error}", line=line)
    return series_from_frame(frame)


class StabilityWorker(BaseWorker):
    """
    Worker for stability analysis of several inputs.

    Files are read and validated in order, then analysed in parallel;
    results are keyed by input name. Input names must have distinct stems.
    """

    def __init__(
        self,
        inputs: Sequence[str | Path] = (),
        series: Optional[Dict[str, PositionSeries]] = None,
        n_jobs: int = 1,
    ):
        """
        Initialize stability worker.

        Args:
            inputs: CSV files to analyse
            series: Already loaded series keyed by name
            n_jobs: joblib worker count
        """
        super().__init__()

        self.inputs = [Path(p) for p in inputs]
        self.series = dict(series or {})
        self.n_jobs = n_jobs

    def run(self):
        """Analyse every input."""
        try:
            loaded = dict(self.series)
            stems = {Path(name).stem for name in loaded}
            total = len(self.inputs) + 1
            for n, path in enumerate(self.inputs, start=1):
                if self._is_cancelled:
                    self.emit_status("Stability analysis cancelled")
                    return
                if path.name in loaded or path.stem in stems:
                    raise ValidationError(f"Duplicate input name or stem: {path.name}")
                stems.add(path.stem)
                loaded[path.name] = load_position_file(path)
                self.emit_step(n, total, f"Loaded {path.name}")

            names = list(loaded)
            analysed = Parallel(n_jobs=self.n_jobs)(
                delayed(analyze_series)(loaded[name]) for name in names
            )
            results: Dict[str, Tuple[Dict, Optional[pd.DataFrame]]] = dict(zip(names, analysed))

            self.emit_progress(100, f"Analysed {len(results)} series")
            self.emit_finished(results)

        except Exception as e:
            self.emit_error(e)
