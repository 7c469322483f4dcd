"""
Lattice QIP - Input Validators
Validation utilities for position tables, override files and config values.
"""

from pathlib import Path
from typing import Any, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from app.utils.logger import get_logger
import config


logger = get_logger(__name__)


class ValidationError(Exception):
    """Raised for malformed configuration or input files."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def validate_dataframe(df: pd.DataFrame) -> Tuple[bool, Optional[str]]:
    """
    Validate that DataFrame is suitable for processing.

    Args:
        df: DataFrame to validate

    Returns:
        Tuple of (is_valid, error_message)
    """
    if df is None:
        return False, "DataFrame is None"

    if df.empty:
        return False, "DataFrame is empty"

    if len(df.columns) == 0:
        return False, "DataFrame has no columns"

    return True, None


def validate_columns(df: pd.DataFrame, columns: Iterable[str]) -> Tuple[bool, Optional[str]]:
    """
    Validate that all required columns exist.

    Returns:
        Tuple of (is_valid, error_message)
    """
    missing = [c for c in columns if c not in df.columns]
    if missing:
        return False, f"Missing column(s): {', '.join(missing)}"

    return True, None


def _first_bad_row(df: pd.DataFrame, column: str) -> Optional[int]:
    values = pd.to_numeric(df[column], errors='coerce')
    bad = values.isna() & df[column].notna()
    if bad.any():
        return int(np.flatnonzero(bad.to_numpy())[0])
    return None


def validate_position_frame(df: pd.DataFrame) -> Tuple[bool, Optional[str], Optional[int]]:
    """
    Validate a lattice-minimum position table.

    Expected header: t_s,x1_nm,y1_nm,x2_nm,y2_nm. Empty cells are allowed in
    the position columns (a color not recorded) but not in t_s.

    Args:
        df: Table as read from CSV

    Returns:
        Tuple of (is_valid, error_message, data_row_index); the row index
        is 0-based over data rows and None when the whole table is at fault
    """
    is_valid, error = validate_dataframe(df)
    if not is_valid:
        return is_valid, error, None

    is_valid, error = validate_columns(df, config.STABILITY_CSV_COLUMNS)
    if not is_valid:
        return is_valid, f"{error} (expected header {','.join(config.STABILITY_CSV_COLUMNS)})", None

    for column in config.STABILITY_CSV_COLUMNS:
        row = _first_bad_row(df, column)
        if row is not None:
            return False, f"Non-numeric value {df[column].iloc[row]!r} in column '{column}'", row

    t = df['t_s'].to_numpy(dtype=float)
    missing = np.flatnonzero(np.isnan(t))
    if missing.size:
        return False, "Missing timestamp", int(missing[0])

    steps = np.flatnonzero(np.diff(t) <= 0)
    if steps.size:
        return False, "Timestamps must be strictly increasing", int(steps[0] + 1)

    logger.debug(f"Position table validated: {len(df)} rows")
    return True, None, None


def data_row_to_line(file_path: str | Path, row: int) -> Optional[int]:
    """
    Map a 0-based data-row index to its 1-based line number in a CSV file,
    skipping comment and blank lines and the header.
    """
    seen_header = False
    data_row = -1
    try:
        with open(file_path, 'r', encoding='utf-8', errors='replace') as f:
            for number, line in enumerate(f, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith('#'):
                    continue
                if not seen_header:
                    seen_header = True
                    continue
                data_row += 1
                if data_row == row:
                    return number
    except OSError:
        return None
    return None


def validate_positive(name: str, value: Any) -> Tuple[bool, Optional[str]]:
    """Validate a strictly positive finite number."""
    try:
        number = float(value)
    except (TypeError, ValueError):
        return False, f"'{name}' must be a number, got {value!r}"

    if not np.isfinite(number) or number <= 0:
        return False, f"'{name}' must be positive and finite, got {value!r}"

    return True, None


def validate_probability(name: str, value: Any, allow_one: bool = True) -> Tuple[bool, Optional[str]]:
    """Validate a probability in [0, 1] (or [0, 1))."""
    try:
        number = float(value)
    except (TypeError, ValueError):
        return False, f"'{name}' must be a number, got {value!r}"

    upper_ok = number <= 1.0 if allow_one else number < 1.0
    if not (number >= 0.0 and upper_ok):
        return False, f"'{name}' must lie in [0, 1{']' if allow_one else ')'}, got {value!r}"

    return True, None


def validate_override_keys(keys: Iterable[str], species_names: Iterable[str]) -> List[str]:
    """
    Check species-override keys of the form <species>.<line>.gamma_hz,
    <species>.<line>.isat_w_m2 or <species>.mass_amu.

    Returns:
        List of error messages (empty when all keys are well-formed)
    """
    known = set(species_names)
    errors = []
    for key in keys:
        parts = str(key).split('.')
        if not parts or parts[0] not in known:
            errors.append(f"Unknown species in override key '{key}'")
        elif len(parts) == 2 and parts[1] == 'mass_amu':
            continue
        elif len(parts) == 3 and parts[2] in ('gamma_hz', 'isat_w_m2'):
            continue
        else:
            errors.append(f"Unrecognized override key '{key}'")
    return errors


def validate_file_path(file_path: str | Path, suffixes: Optional[Iterable[str]] = None) -> Tuple[bool, Optional[str]]:
    """
    Validate that a path names an existing file with an accepted suffix.

    Args:
        file_path: Path to validate
        suffixes: Accepted suffixes (any if None)

    Returns:
        Tuple of (is_valid, error_message)
    """
    if not file_path:
        return False, "File path is empty"

    path = Path(file_path)

    if not path.exists():
        return False, f"File does not exist: {file_path}"

    if not path.is_file():
        return False, f"Path is not a file: {file_path}"

    if suffixes is not None:
        accepted = [s.lower() for s in suffixes]
        if path.suffix.lower() not in accepted:
            return False, f"Unsupported file format: {path.suffix}. Supported: {', '.join(accepted)}"

    return True, None
