"""
Constants module for the AMG-ANN pipeline.
This module centralizes configuration values and numerical defaults used throughout the package.
"""

import os
from pathlib import Path

try:
    from dotenv import load_dotenv
    load_dotenv(dotenv_path=Path(__file__).resolve().parent.parent / ".env")
except ImportError:
    pass

# Base Directories
BASE_DIR = Path(__file__).resolve().parent.parent  # repository root

DATA_DIR = Path(os.getenv("AMGANN_DATA_DIR", BASE_DIR / "data"))
MODELS_DIR = Path(os.getenv("AMGANN_MODELS_DIR", BASE_DIR / "models"))

# Logging Configuration
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Worker cap for dataset generation (timing benchmarks always run serially)
THREADS = int(os.getenv("AMGANN_THREADS", "1"))

# Largest coarse level factorised with dense LU; larger ones go through SuperLU
DENSE_COARSE_LIMIT = int(os.getenv("AMGANN_DENSE_COARSE_LIMIT", "2000"))

# Linear algebra
PIVOT_TOLERANCE = 1e-14  # relative to max |a_ij|

# Solver defaults
DEFAULT_TOL = 1e-8
DEFAULT_N_MAX = 500
DEFAULT_NU1 = 1
DEFAULT_NU2 = 1

# Strong threshold grid
THETA_MIN = 0.12
THETA_MAX = 0.72
THETA_GRID_POINTS = 25
DATASET2_THETA_POINTS = 18

# Pooling / view
VIEW_SIZE = 50
DEFAULT_NORMALIZATION = "sum-standard"

# Problem grids
DATASET1_EPSILONS = [0.0, 0.4, 0.8, 1.2, 1.6, 2.0, 2.4, 2.8, 3.5, 5.0, 7.0, 9.5]
DATASET2_EXPONENTS = [0.5, 1.5, 3.0]
MESH_LEVELS = list(range(3, 11))  # h = 2^-k
DESK_MAX_LEVEL = 7

# Timing repetitions per mesh level, coarsest to finest
REPETITION_SCHEDULE = {3: 200, 4: 100, 5: 50, 6: 20, 7: 10, 8: 7, 9: 5, 10: 4}

# Corpus and model files
CORPUS_MAGIC = b"AMGS"
CORPUS_VERSION = 1
MODEL_MAGIC = b"AMGN"
MODEL_VERSION = 1
