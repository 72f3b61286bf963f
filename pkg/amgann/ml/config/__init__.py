"""
Configuration settings for the surrogate training.
"""

from .settings import *

__all__ = [
    'PROJECT_ROOT', 'DATA_DIR', 'MODELS_DIR',
    'RANDOM_STATE', 'TEST_SIZE', 'VAL_SIZE',
    'DATASET3_TEST_FRACTION_DS1', 'DATASET3_TEST_FRACTION_DS2', 'DATASET3_VAL_TRAIN_RATIO',
    'BATCH_SIZE', 'LEARNING_RATE', 'MAX_EPOCHS', 'PATIENCE', 'LOG_EVERY',
    'ADAM_BETA1', 'ADAM_BETA2', 'ADAM_EPS',
    'DEFAULT_ARCHITECTURE', 'PREDICT_BATCH_SIZE',
]
