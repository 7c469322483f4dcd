"""
Lattice QIP - Global Configuration
Defines all application-wide constants, paths, and default parameters.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Base directory (project root)
BASE_DIR = Path(__file__).parent.resolve()

# Data directory (reference run configurations)
DATA_DIR = BASE_DIR / "data"
REFERENCE_CONFIG = DATA_DIR / "configs" / "reference.yaml"

# ============================================================================
# Application Settings
# ============================================================================

APP_NAME = "Lattice QIP"
APP_VERSION = "0.1.0"

# Version of the structured JSON record written by every subcommand
SCHEMA_VERSION = 1

# ============================================================================
# Species Data
# ============================================================================

# Optional override file (flat key: value mapping, see species_registry)
SPECIES_OVERRIDE_FILE = os.getenv("LATTICE_QIP_SPECIES_OVERRIDES", "")

# Lattice assignment: which color confines which species
QUBIT_SPECIES = "Li6"
MESSENGER_SPECIES = "Cs133"

# ============================================================================
# Lattice Defaults
# ============================================================================

DEFAULT_LATTICE_CONSTANT_M = 1.5e-6
DEFAULT_WAVELENGTH_1_M = 681e-9  # L1, qubit lattice
DEFAULT_WAVELENGTH_2_M = 1064e-9  # L2, messenger lattice
DEFAULT_LINE_MODEL = "fine_structure"

# Far-detuned formulas are rejected below this |Δ|/Γ
MIN_DETUNING_IN_LINEWIDTHS = 10.0

# Unit-cell sampling for gradients and extrema
UNIT_CELL_SAMPLES = 96

# Translation checks
TRANSLATION_PHASE_TOLERANCE = 1e-9
TRANSLATION_PATTERN_TOLERANCE = 1e-6
TRANSLATION_CHECK_SAMPLES = 64

# Reference operating point ("black dot")
DEFAULT_I1_W_M2 = 2.5e7
DEFAULT_RATIO_I1_I2 = 0.24

# Feasibility scan
DEFAULT_DECOHERENCE_CEILING_PER_S = 2.0
DEFAULT_ALPHA_CEILING = 1.0
DEFAULT_GRID_I1_RANGE_W_M2 = (1e6, 1e8)
DEFAULT_GRID_I2_RANGE_W_M2 = (1e6, 1e10)
DEFAULT_GRID_POINTS = 200

# ============================================================================
# Molecular Coupling Defaults
# ============================================================================

DEFAULT_SCATTERING_LENGTH_BOHR = 200.0
DEFAULT_OMEGA0_HZ = 10e3  # free-atom Rabi frequency / 2π
DEFAULT_OMEGA_R_HZ = 160e3  # relative-motion trap frequency / 2π
DEFAULT_R0_M = 210e-9  # quoted oscillator length
DEFAULT_OFFSET_M = 10e-9  # relative lattice position uncertainty

# Quadrature for the Franck-Condon oracle
FC_QUADRATURE_UPPER_R0 = 20.0
FC_QUADRATURE_EPSABS = 1e-10
FC_QUADRATURE_LIMIT = 200

# ============================================================================
# Transport Defaults
# ============================================================================

DEFAULT_CROSSTALK_ALPHA = 0.16
DEFAULT_CROSSTALK_DEPTH_HZ = 760e3  # U*/(α h)
DEFAULT_MESSENGER_X0_M = 82e-9

# One-point calibration anchor: p1 at reduced velocity nu for N sites
CALIBRATION_P1 = 0.01
CALIBRATION_NU = 0.03
CALIBRATION_N = 1

# Entangling sequence timing
TRANSITIONS_PER_ENTANGLEMENT = 4
ENTANGLE_FIXED_TIME_S = 5e-3
ENTANGLE_QUADRATIC_TIME_S = 0.4e-3

# ============================================================================
# Protocol Defaults
# ============================================================================

DEFAULT_FIDELITY_PER_TRANSITION = 0.995
DEFAULT_TRANSPORT_P1 = 0.01
DEFAULT_MC_TRIALS = 10_000
DEFAULT_SEED = 20240101
NORM_TOLERANCE = 1e-12
KET_DISPLAY_THRESHOLD = 1e-6

# Off-resonant leakage is reported per pulse but kept out of the fidelity budget
DEFAULT_LEAKAGE_IN_BUDGET = False

# ============================================================================
# Stability Defaults
# ============================================================================

MIN_SPECTRUM_SEGMENTS = 8
MIN_SPECTRUM_SAMPLES = 16
MAX_GAP_TO_MEDIAN = 2.0
PARSEVAL_TOLERANCE = 0.05
STABILITY_CSV_COLUMNS = ["t_s", "x1_nm", "y1_nm", "x2_nm", "y2_nm"]
POSITION_FILE_SUFFIXES = (".csv", ".txt")

# ============================================================================
# Logging Settings
# ============================================================================


LOG_LEVEL = os.getenv("LATTICE_QIP_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
LOG_MAX_BYTES = 10 * 1024 * 1024  # 10 MB
LOG_BACKUP_COUNT = 5

# ============================================================================
# Performance Settings
# ============================================================================

DEFAULT_JOBS = int(os.getenv("LATTICE_QIP_JOBS", "0")) or (os.cpu_count() or 1)

# Progress update granularity for workers (percent)
PROGRESS_STEP_PCT = 5

# ============================================================================
# Testing & Development
# ============================================================================

DEBUG_MODE = os.getenv("DEBUG", "False").lower() == "true"
