"""
Surrogate network, its layers and training.
"""

from .network import NetworkConfig, SurrogateModel, loss_mse, metric_mae
from .trainer import AdamState, SurrogateTrainer, TrainingHistory, adam_step

__all__ = ['NetworkConfig', 'SurrogateModel', 'loss_mse', 'metric_mae',
           'AdamState', 'SurrogateTrainer', 'TrainingHistory', 'adam_step']
