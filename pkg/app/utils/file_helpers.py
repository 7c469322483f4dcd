"""
Lattice QIP - File Helpers
Reading input tables with encoding detection and writing result files.
"""

import json
import math
from pathlib import Path
from typing import Any, Optional

import chardet
import numpy as np
import pandas as pd

from app.utils.logger import get_logger


logger = get_logger(__name__)


class FileReadError(Exception):
    """Input file missing, unreadable or not parseable as a table."""


# Fallbacks when the detected encoding fails
FALLBACK_ENCODINGS = ('utf-8', 'latin1')

# Detection below this chardet confidence is treated as utf-8
MIN_ENCODING_CONFIDENCE = 0.7


def detect_encoding(file_path: Path, sample_size: int = 10000) -> str:
    """Best-guess text encoding of the first `sample_size` bytes (chardet)."""
    try:
        with open(file_path, 'rb') as f:
            guess = chardet.detect(f.read(sample_size))
    except OSError as e:
        raise FileReadError(f"Cannot open {file_path}: {e}") from e

    encoding, confidence = guess['encoding'], guess['confidence'] or 0.0
    logger.debug(f"{Path(file_path).name}: encoding {encoding} ({confidence:.0%})")
    if encoding is None or confidence < MIN_ENCODING_CONFIDENCE:
        return 'utf-8'
    return encoding


def read_csv_file(
    file_path: str | Path,
    encoding: Optional[str] = None,
    **kwargs
) -> pd.DataFrame:
    """
    Read a CSV table; lines starting with '#' are comments and spaces after
    delimiters are ignored.

    Args:
        file_path: Path to CSV file
        encoding: Explicit encoding (detected if None)
        **kwargs: Passed to pd.read_csv

    Raises:
        FileReadError: Missing, undecodable or unparseable file
    """
    file_path = Path(file_path)
    if not file_path.exists():
        raise FileReadError(f"File not found: {file_path}")

    options = {'comment': '#', 'skipinitialspace': True, **kwargs}
    candidates = [encoding or detect_encoding(file_path)]
    candidates += [e for e in FALLBACK_ENCODINGS if e != candidates[0]]

    for candidate in candidates:
        try:
            df = pd.read_csv(file_path, encoding=candidate, **options)
        except UnicodeDecodeError:
            logger.warning(f"{file_path.name}: not decodable as {candidate}")
            continue
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise FileReadError(f"Failed to parse {file_path}: {e}") from e
        logger.info(f"Loaded {file_path.name}: {len(df)} rows, {len(df.columns)} columns")
        return df

    raise FileReadError(f"Failed to read {file_path} with encodings {candidates}")


def save_dataframe(df: pd.DataFrame, file_path: str | Path, **kwargs) -> Path:
    """
    Save a DataFrame as CSV.

    Raises:
        FileReadError: If save fails
    """
    file_path = Path(file_path)

    try:
        file_path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(file_path, index=False, encoding='utf-8', **kwargs)
        logger.info(f"Saved {len(df)} rows to {file_path}")
        return file_path

    except OSError as e:
        raise FileReadError(f"Failed to save {file_path}: {e}") from e


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(data: Any, file_path: str | Path) -> Path:
    """
    Write a JSON document with sorted keys.

    Raises:
        FileReadError: If the file cannot be written
    """
    file_path = Path(file_path)
    try:
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(to_jsonable(data), f, indent=2, sort_keys=True)
            f.write("\n")
        logger.info(f"Wrote {file_path}")
        return file_path

    except OSError as e:
        raise FileReadError(f"Failed to write {file_path}: {e}") from e
