import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from sklearn.metrics import mean_absolute_error, mean_squared_error
from tqdm import tqdm

from amgann.constants import DEFAULT_NORMALIZATION, VIEW_SIZE
from amgann.exceptions import ContractViolation
from amgann.ml.config.settings import (
    ADAM_BETA1, ADAM_BETA2, ADAM_EPS, BATCH_SIZE, DEFAULT_ARCHITECTURE, LEARNING_RATE,
    LOG_EVERY, MAX_EPOCHS, PATIENCE, PREDICT_BATCH_SIZE, RANDOM_STATE,
)
from amgann.ml.models.network import NetworkConfig, SurrogateModel, loss_mse
from amgann.ml.utils.data_loader import SampleArrays
from amgann.utils import sanitize_json

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """First/second moment estimates and the step count."""
    m: List[np.ndarray]
    v: List[np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, params: Sequence[np.ndarray]) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params])


def adam_step(params: Sequence[np.ndarray], grads: Sequence[np.ndarray], state: AdamState,
              lr: float = LEARNING_RATE, beta1: float = ADAM_BETA1, beta2: float = ADAM_BETA2,
              eps: float = ADAM_EPS) -> Sequence[np.ndarray]:
    """Adam update with bias correction, applied to ``params`` in place."""
    state.t += 1
    correction1 = 1.0 - beta1 ** state.t
    correction2 = 1.0 - beta2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p -= lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
    return params


@dataclass
class TrainingHistory:
    train_loss: List[float] = field(default_factory=list)
    val_loss: List[float] = field(default_factory=list)
    best_epoch: int = -1
    stopped_early: bool = False

    def to_dict(self) -> Dict[str, object]:
        return {"train_loss": self.train_loss, "val_loss": self.val_loss,
                "best_epoch": self.best_epoch, "stopped_early": self.stopped_early}


class SurrogateTrainer:
    def __init__(self, config: Union[NetworkConfig, str] = DEFAULT_ARCHITECTURE, m: int = VIEW_SIZE,
                 seed: int = RANDOM_STATE, mode: str = DEFAULT_NORMALIZATION,
                 learning_rate: float = LEARNING_RATE, batch_size: int = BATCH_SIZE,
                 max_epochs: int = MAX_EPOCHS, patience: int = PATIENCE):
        if isinstance(config, str):
            config = NetworkConfig.from_row(config)
        self.seed = seed
        self.model = SurrogateModel(config, m=m, seed=seed, mode=mode)
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.history = TrainingHistory()

    def _batch_loss_step(self, data: SampleArrays, index: np.ndarray, state: AdamState) -> float:
        pred = self.model.forward(data.views[index], data.log_h[index], data.theta[index], training=True)
        target = data.rho[index]
        loss = loss_mse(pred, target)
        grads = self.model.backward(2.0 * (pred - target) / index.size)
        adam_step([p for _, p in self.model.parameters()], grads, state, self.learning_rate)
        return loss

    def train(self, train: SampleArrays, val: SampleArrays) -> TrainingHistory:
        """
        Mini-batch Adam with a seeded shuffle each epoch and early stopping
        on the validation MSE; the best-validation weights are restored.
        """
        if len(train) == 0 or len(val) == 0:
            raise ContractViolation("training and validation sets must not be empty")
        rng = np.random.default_rng(self.seed)
        state = AdamState.zeros_like([p for _, p in self.model.parameters()])
        self.history = TrainingHistory()
        best_loss = np.inf
        best_weights = self.model.get_weights()
        wait = 0

        epochs = tqdm(range(self.max_epochs), desc="Training", leave=False)
        for epoch in epochs:
            order = rng.permutation(len(train))
            batch_losses = []
            for start in range(0, len(train), self.batch_size):
                index = order[start:start + self.batch_size]
                batch_losses.append(self._batch_loss_step(train, index, state) * index.size)
            train_loss = float(np.sum(batch_losses) / len(train))
            val_loss = self.evaluate(val)["loss"]
            self.history.train_loss.append(train_loss)
            self.history.val_loss.append(val_loss)

            if val_loss < best_loss:
                best_loss = val_loss
                best_weights = self.model.get_weights()
                self.history.best_epoch = epoch
                wait = 0
            else:
                wait += 1
            if epoch % LOG_EVERY == 0:
                logger.info(f"Epoch {epoch}: train MSE {train_loss:.3e}, val MSE {val_loss:.3e}")
            if wait >= self.patience:
                self.history.stopped_early = True
                logger.info(f"Early stop at epoch {epoch}; best epoch {self.history.best_epoch} "
                            f"(val MSE {best_loss:.3e})")
                break

        self.model.set_weights(best_weights)
        return self.history

    def predict(self, data: SampleArrays) -> np.ndarray:
        """Dropout-free predictions, in batches."""
        out = []
        for start in range(0, len(data), PREDICT_BATCH_SIZE):
            sl = slice(start, start + PREDICT_BATCH_SIZE)
            out.append(self.model.forward(data.views[sl], data.log_h[sl], data.theta[sl]))
        return np.concatenate(out) if out else np.zeros(0)

    def evaluate(self, data: SampleArrays) -> Dict[str, float]:
        """Loss (MSE) and MAE on a set."""
        pred = self.predict(data)
        return {
            "loss": float(mean_squared_error(data.rho, pred)),
            "mae": float(mean_absolute_error(data.rho, pred)),
        }

    def evaluate_by_source(self, data: SampleArrays) -> Dict[str, Dict[str, float]]:
        """Metrics per originating dataset (ds1 / ds2) plus the union."""
        sources = np.array([s.record.dataset for s in data.samples])
        report = {"all": self.evaluate(data)}
        for source in sorted(set(sources)):
            report[source] = self.evaluate(data.subset(np.flatnonzero(sources == source)))
        return report

    def save_model(self, model_path: Union[str, Path], scores: Optional[Dict[str, object]] = None) -> None:
        """Save the model file and, next to it, a JSON sidecar with history and scores."""
        model_path = Path(model_path)
        self.model.save(model_path)
        sidecar = {"architecture": self.model.config.to_row(), "history": self.history.to_dict(),
                   "scores": scores or {}}
        model_path.with_suffix(".json").write_text(json.dumps(sanitize_json(sidecar), indent=2))

    def load_model(self, model_path: Union[str, Path]) -> None:
        self.model = SurrogateModel.load(model_path)
        self.seed = self.model.seed
