"""
Configuration settings for the signature concentration lab
"""

from pathlib import Path

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent

# Directory paths
SRC_DIR = PROJECT_ROOT / "src"
CONFIG_DEFINITIONS_DIR = SRC_DIR / "configs" / "config_definitions"
SAMPLES_DIR = PROJECT_ROOT / "samples"
OUTPUT_DIR = PROJECT_ROOT / "output"
TESTS_DIR = PROJECT_ROOT / "tests"

# Config definition paths
DEFAULTS_CONFIG = CONFIG_DEFINITIONS_DIR / "defaults.json"
CONFIG_RULES = CONFIG_DEFINITIONS_DIR / "config_rules.json"
PRESETS_DIR = CONFIG_DEFINITIONS_DIR / "presets"

# Experiment kinds understood by the harness
EXPERIMENT_KINDS = [
    "simulate", "sig", "logsig", "tail", "variance", "meanconc",
    "bchprobe", "smallball", "hyper", "plot",
    "levyarea", "scaling", "ouarea", "normtail",
]

# Severity levels for config issues and invariant checks
SEVERITY_LEVELS = ["INFO", "WARNING", "ERROR"]
DEFAULT_SEVERITY = "ERROR"

# Algebra tolerances
EXP_LOG_TOLERANCE = 1e-10
LYNDON_PROJECTION_TOLERANCE = 1e-8

# Simulation settings
MAX_GRID_STEPS = 4096
CHOLESKY_JITTER = 1e-12
LOW_HURST_WARNING = 0.25
DEFAULT_CHUNK_SIZE = 5000
MAX_CHUNK_ELEMENTS = 4_000_000  # path values held per chunk
DEFAULT_THREADS = 1

# Statistics settings
DEFAULT_QUANTILE_RANGE = (0.99, 0.9999)
DEFAULT_QUANTILE_GRID = (0.5, 0.9999)
DEFAULT_QUANTILE_POINTS = 40
MIN_TAIL_SAMPLES = 1000
MIN_MOMENT_SAMPLES = 100
MIN_HYPER_SAMPLES = 10_000
MIN_FIT_POINTS = 4
BOOTSTRAP_RESAMPLES = 200
BCH_REJECTION_CAP = 100
MIN_BCH_PAIRS = 100
SMALL_BALL_CONSTANT_PER_LEVEL = 2  # C_k = 2k
TAIL_EXPONENT_TOLERANCE = 0.2  # expected window 2/k ± 0.2
PROFILE_ALPHA_BOUNDS = (0.05, 5.0)

# Output settings
SCHEMA_VERSION = "1.0"
CSV_FLOAT_FORMAT = "repr"
INCLUDE_TIMESTAMPS = False  # timestamps would break byte-identical reruns
LOG_LEVEL = "INFO"

# Exit statuses
EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2
EXIT_INVARIANT = 3
