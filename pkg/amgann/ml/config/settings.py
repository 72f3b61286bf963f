import os
from pathlib import Path

try:
    from dotenv import load_dotenv
except ImportError:  # pragma: no cover
    load_dotenv = None

# Always load .env from the project root
PROJECT_ROOT = Path(__file__).parent.parent.parent.parent
if load_dotenv is not None:
    load_dotenv(dotenv_path=PROJECT_ROOT / '.env')

# Project paths
DATA_DIR = Path(os.getenv("AMGANN_DATA_DIR", PROJECT_ROOT / "data"))
MODELS_DIR = Path(os.getenv("AMGANN_MODELS_DIR", PROJECT_ROOT / "models"))

# Split parameters (fractions of the whole corpus)
RANDOM_STATE = 42
TEST_SIZE = 0.2
VAL_SIZE = 0.2

# Dataset 3: share of each source held out for testing, val:train ratio of the rest
DATASET3_TEST_FRACTION_DS1 = 0.5
DATASET3_TEST_FRACTION_DS2 = 0.2
DATASET3_VAL_TRAIN_RATIO = (1, 3)

# Training configuration
BATCH_SIZE = 32
LEARNING_RATE = 1e-3
MAX_EPOCHS = 1000
PATIENCE = 50
LOG_EVERY = 10

# Adam
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

# Architecture row "W1 D1 P1 W2 D2 P2 O W3 D3"
DEFAULT_ARCHITECTURE = "40 2 0.25 - - - 128 128 4"

# Batch size used for inference only
PREDICT_BATCH_SIZE = 256
