"""
Lattice QIP - Stability Toolkit
Lattice-minimum position time series: single-color and differential RMS
displacement, power spectra, and the vector light-shift constant D_FS.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import signal

from app.core.errors import (
    DegenerateDetuningError,
    InsufficientDataError,
    MisalignedTimestampsError,
    NonuniformSamplingError,
)
from app.core.species_registry import Species, detuning
from app.utils.logger import get_logger
import config


logger = get_logger(__name__)

CHANNELS = ("color1", "color2", "diff")
NM = 1e-9


@dataclass(frozen=True, eq=False)
class PositionSeries:
    """
    Lattice-minimum positions of both colors on one time base.

    Attributes:
        timestamps: Sample times (s), strictly increasing
        color1: (n, 2) positions of the color-1 minimum (m)
        color2: (n, 2) positions of the color-2 minimum (m), or None
    """

    timestamps: np.ndarray
    color1: np.ndarray
    color2: Optional[np.ndarray] = None

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=float)
        r1 = np.asarray(self.color1, dtype=float)
        if t.ndim != 1 or r1.shape != (t.size, 2):
            raise ValueError("color1 must have shape (n, 2) matching the timestamps")
        if t.size < 2:
            raise InsufficientDataError(f"Position series needs at least 2 samples, got {t.size}")
        if np.any(np.diff(t) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        object.__setattr__(self, 'timestamps', t)
        object.__setattr__(self, 'color1', r1)

        if self.color2 is not None:
            r2 = np.asarray(self.color2, dtype=float)
            if r2.shape != r1.shape:
                raise MisalignedTimestampsError("color2 must have one sample per timestamp")
            object.__setattr__(self, 'color2', r2)

    @classmethod
    def from_channels(cls, t1, r1, t2, r2) -> "PositionSeries":
        """
        Combine two separately recorded channels sharing one time base.

        Raises:
            MisalignedTimestampsError: If the time bases differ (no resampling)
        """
        t1 = np.asarray(t1, dtype=float)
        t2 = np.asarray(t2, dtype=float)
        if t1.shape != t2.shape or not np.allclose(t1, t2, rtol=0.0, atol=1e-12):
            raise MisalignedTimestampsError("Color channels do not share a common time base")
        return cls(t1, r1, r2)

    @property
    def n_samples(self) -> int:
        return int(self.timestamps.size)

    @property
    def duration(self) -> float:
        return float(self.timestamps[-1] - self.timestamps[0])

    def channel(self, name: str) -> np.ndarray:
        """(n, 2) positions of color1, color2 or their difference."""
        if name == "color1":
            return self.color1
        if name not in ("color2", "diff"):
            raise ValueError(f"Unknown channel '{name}' (expected one of {CHANNELS})")
        if self.color2 is None:
            raise MisalignedTimestampsError("Series has no color2 channel")
        return self.color2 if name == "color2" else self.color1 - self.color2


def series_from_frame(frame: pd.DataFrame) -> PositionSeries:
    """
    Build a series from a `t_s,x1_nm,y1_nm,x2_nm,y2_nm` table.

    Rows where only one color was recorded make the channels misaligned.
    """
    t = frame['t_s'].to_numpy(dtype=float)
    r1 = frame[['x1_nm', 'y1_nm']].to_numpy(dtype=float) * NM
    r2 = frame[['x2_nm', 'y2_nm']].to_numpy(dtype=float) * NM

    missing1 = np.isnan(r1).any(axis=1)
    missing2 = np.isnan(r2).any(axis=1)
    if np.any(missing1 != missing2):
        raise MisalignedTimestampsError(
            f"{int(np.sum(missing1 != missing2))} rows carry only one color"
        )
    keep = ~missing1
    return PositionSeries(t[keep], r1[keep], r2[keep])


def series_to_frame(series: PositionSeries) -> pd.DataFrame:
    """Inverse of series_from_frame (positions in nm)."""
    r2 = series.color2 if series.color2 is not None else np.full_like(series.color1, np.nan)
    return pd.DataFrame({
        't_s': series.timestamps,
        'x1_nm': series.color1[:, 0] / NM,
        'y1_nm': series.color1[:, 1] / NM,
        'x2_nm': r2[:, 0] / NM,
        'y2_nm': r2[:, 1] / NM,
    })


# ============================================================================
# RMS
# ============================================================================

def _rms(positions: np.ndarray) -> float:
    centered = positions - positions.mean(axis=0)
    return float(math.sqrt(np.mean(np.sum(centered ** 2, axis=1))))


def rms_displacement(series: PositionSeries, channel: str = "color1") -> float:
    """Radial RMS displacement about the mean position (m)."""
    return _rms(series.channel(channel))


def per_axis_rms(series: PositionSeries, channel: str = "color1") -> Tuple[float, float]:
    """(x, y) RMS displacements about the mean (m)."""
    positions = series.channel(channel)
    return tuple(float(v) for v in positions.std(axis=0))


def differential_rms(series: PositionSeries) -> float:
    """RMS of r_color1 − r_color2 about its mean (m)."""
    return _rms(series.channel("diff"))


def summary(series: PositionSeries) -> Dict[str, float]:
    """Summary record of one series (lengths in nm)."""
    record = {
        'rms1_nm': rms_displacement(series, "color1") / NM,
        'n_samples': series.n_samples,
        'duration_s': series.duration,
    }
    x1, y1 = per_axis_rms(series, "color1")
    record.update({'rms1_x_nm': x1 / NM, 'rms1_y_nm': y1 / NM})

    if series.color2 is not None:
        x2, y2 = per_axis_rms(series, "color2")
        record.update({
            'rms2_nm': rms_displacement(series, "color2") / NM,
            'rms_diff_nm': differential_rms(series) / NM,
            'rms2_x_nm': x2 / NM,
            'rms2_y_nm': y2 / NM,
        })
    return record


# ============================================================================
# Spectra
# ============================================================================

def check_uniform_sampling(timestamps: np.ndarray) -> float:
    """
    Verify near-uniform sampling and return the sample rate (Hz).

    Raises:
        NonuniformSamplingError: If the largest gap is ≥ 2× the median gap
    """
    gaps = np.diff(np.asarray(timestamps, dtype=float))
    median_gap = float(np.median(gaps))
    max_gap = float(np.max(gaps))
    if max_gap >= config.MAX_GAP_TO_MEDIAN * median_gap:
        raise NonuniformSamplingError(
            f"Largest sampling gap {max_gap:.3g} s exceeds "
            f"{config.MAX_GAP_TO_MEDIAN:g}x the median gap {median_gap:.3g} s",
            max_gap=max_gap,
            median_gap=median_gap,
        )
    return 1.0 / median_gap


def _axis_spectrum(values: np.ndarray, fs: float) -> Tuple[np.ndarray, np.ndarray]:
    n = values.size
    nperseg = (2 * n) // 9
    if nperseg < config.MIN_SPECTRUM_SEGMENTS:
        logger.warning(f"Only {n} samples: using a single Hann periodogram")
        return signal.periodogram(values, fs=fs, window='hann', detrend='constant', scaling='density')
    return signal.welch(
        values,
        fs=fs,
        window='hann',
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend='constant',
        scaling='density',
    )


def power_spectrum(series: PositionSeries, channel: str = "color1") -> Tuple[np.ndarray, np.ndarray]:
    """
    One-sided power spectral density of a channel, summed over x and y.

    Segments are Hann-windowed with 50 % overlap and sized to give at least
    eight averages.

    Returns:
        (frequencies in Hz, density in m²/Hz)

    Raises:
        InsufficientDataError: Fewer than 16 samples
        NonuniformSamplingError: Irregular sampling
    """
    if series.n_samples < config.MIN_SPECTRUM_SAMPLES:
        raise InsufficientDataError(
            f"Spectrum needs at least {config.MIN_SPECTRUM_SAMPLES} samples, got {series.n_samples}"
        )
    fs = check_uniform_sampling(series.timestamps)
    positions = series.channel(channel)

    freqs, psd_x = _axis_spectrum(positions[:, 0], fs)
    _, psd_y = _axis_spectrum(positions[:, 1], fs)
    psd = psd_x + psd_y

    error = parseval_error(freqs, psd, positions)
    if error > config.PARSEVAL_TOLERANCE:
        logger.warning(f"Spectrum of {channel} misses the variance by {error:.1%}")
    return freqs, psd


def parseval_error(freqs: np.ndarray, psd: np.ndarray, positions: np.ndarray) -> float:
    """|∫S df − Var| / Var, with Var the radial variance of the positions."""
    variance = _rms(positions) ** 2
    if variance == 0:
        return 0.0
    integrated = float(np.sum(psd) * (freqs[1] - freqs[0]))
    return abs(integrated - variance) / variance


SPECTRUM_COLUMNS = dict(zip(CHANNELS, ("psd1", "psd2", "psd_diff")))


def spectrum_table(series: PositionSeries) -> pd.DataFrame:
    """
    Spectrum CSV table `f_hz,psd1,psd2,psd_diff` in nm²/Hz.

    A single-color series only gets the psd1 column.
    """
    channels = CHANNELS if series.color2 is not None else CHANNELS[:1]
    table = {}
    for name in channels:
        freqs, psd = power_spectrum(series, name)
        table.setdefault('f_hz', freqs)
        table[SPECTRUM_COLUMNS[name]] = psd / NM ** 2
    return pd.DataFrame(table)


# ============================================================================
# Synthetic data
# ============================================================================

def synthesize_series(
    n_samples: int = 4096,
    sample_interval: float = 1e-3,
    rms1: float = 92e-9,
    rms_diff: float = 26e-9,
    ar_coefficient: float = 0.5,
    seed: int = config.DEFAULT_SEED,
) -> PositionSeries:
    """
    Two-color series of common-mode AR(1) motion plus white differential noise.

    The generated series has radial RMS exactly rms1 on both colors and
    differential RMS exactly rms_diff.
    """
    if rms_diff / 2.0 >= rms1:
        raise ValueError("rms_diff must be smaller than 2·rms1")
    rng = np.random.default_rng(seed)

    white = rng.standard_normal((n_samples, 2))
    common = signal.lfilter([1.0], [1.0, -ar_coefficient], white, axis=0)
    common -= common.mean(axis=0)

    noise = rng.standard_normal((n_samples, 2))
    noise -= noise.mean(axis=0)
    noise -= (np.sum(noise * common) / np.sum(common * common)) * common

    noise_ms = np.mean(np.sum(noise ** 2, axis=1))
    common_ms = np.mean(np.sum(common ** 2, axis=1))
    b = rms_diff / (2.0 * math.sqrt(noise_ms))
    a = math.sqrt((rms1 ** 2 - b ** 2 * noise_ms) / common_ms)

    t = np.arange(n_samples) * sample_interval
    return PositionSeries(t, a * common + b * noise, a * common - b * noise)


# ============================================================================
# Vector light shift
# ============================================================================

def fine_structure_constant_dfs(delta_32: float, delta_12: float) -> float:
    """
    D_FS = (Δ_3/2 − Δ_1/2) / (Δ_3/2 / 2 + Δ_1/2).

    Raises:
        DegenerateDetuningError: If the denominator vanishes
    """
    denominator = delta_32 / 2.0 + delta_12
    if denominator == 0:
        raise DegenerateDetuningError("Δ_3/2/2 + Δ_1/2 = 0; D_FS is undefined")
    return (delta_32 - delta_12) / denominator


def dfs_for_species(species: Species, wavelength: float) -> float:
    """D_FS of a species in light of the given wavelength."""
    half, three_half = species.fine_structure_pair
    return fine_structure_constant_dfs(
        detuning(species.line(three_half), wavelength),
        detuning(species.line(half), wavelength),
    )


# ============================================================================
# Full analysis
# ============================================================================

def analyze_series(series: PositionSeries) -> Tuple[Dict, Optional[pd.DataFrame]]:
    """
    Summary record plus spectrum table of one series.

    A spectrum that cannot be estimated (too few samples, irregular
    sampling) is refused: the summary carries the reason under
    `warnings` and the table is None.
    """
    record = summary(series)
    record['warnings'] = []
    record['spectrum_refused'] = False

    try:
        table = spectrum_table(series)
    except (InsufficientDataError, NonuniformSamplingError) as e:
        logger.warning(f"Spectrum refused: {e}")
        record['warnings'].append(str(e))
        record['spectrum_refused'] = True
        return record, None

    freqs = table['f_hz'].to_numpy()
    record['parseval_error'] = {
        name: parseval_error(freqs, table[column].to_numpy() * NM ** 2, series.channel(name))
        for name, column in SPECTRUM_COLUMNS.items()
        if column in table
    }
    return record, table
