"""
Convolutional surrogate F(V, -log2 h, theta) -> rho and its file format.

A NetworkConfig follows the column scheme ``W1 D1 P1 W2 D2 P2 O W3 D3``:
convolutional layer i has W_i output channels, one padded 3x3 convolution
followed by D_i - 1 unpadded ones (each with ReLU), a 2x2 max pool and
dropout with rate P_i. The flattened features go through a dense layer of
O units, get (-log2 h, theta) appended, pass D3 dense layers of W3 units and
end in one linear unit.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union
import json
import logging
import struct

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from amgann.constants import DEFAULT_NORMALIZATION, MODEL_MAGIC, MODEL_VERSION, VIEW_SIZE
from amgann.exceptions import ContractViolation, ModelFormatError, StructuralError
from amgann.ml.models.layers import Conv2D, Dense, Dropout, Flatten, Layer, MaxPool2, ReLU
from amgann.utils import sanitize_json

logger = logging.getLogger(__name__)


class NetworkConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    w1: int = Field(ge=1)
    d1: int = Field(ge=1)
    p1: float = Field(ge=0.0, lt=1.0)
    w2: Optional[int] = Field(default=None, ge=1)
    d2: Optional[int] = Field(default=None, ge=1)
    p2: Optional[float] = Field(default=None, ge=0.0, lt=1.0)
    o: int = Field(ge=1)
    w3: int = Field(ge=1)
    d3: int = Field(ge=0)

    @model_validator(mode="after")
    def _second_layer_complete(self) -> "NetworkConfig":
        given = [v is not None for v in (self.w2, self.d2, self.p2)]
        if any(given) and not all(given):
            raise ValueError("second convolutional layer needs all of W2, D2, P2")
        return self

    @property
    def conv_layers(self) -> List[Tuple[int, int, float]]:
        layers = [(self.w1, self.d1, self.p1)]
        if self.w2 is not None:
            layers.append((self.w2, self.d2, self.p2))
        return layers

    @classmethod
    def from_row(cls, row: str) -> "NetworkConfig":
        """Parse 'W1 D1 P1 W2 D2 P2 O W3 D3', '-' marking an absent value."""
        parts = row.split()
        if len(parts) != 9:
            raise ValueError(f"architecture row needs 9 fields, got {len(parts)}: {row!r}")
        names = ["w1", "d1", "p1", "w2", "d2", "p2", "o", "w3", "d3"]
        return cls(**{name: (None if part == "-" else part) for name, part in zip(names, parts)})

    def to_row(self) -> str:
        def fmt(value) -> str:
            return "-" if value is None else f"{value:g}"
        values = [self.w1, self.d1, self.p1, self.w2, self.d2, self.p2, self.o, self.w3, self.d3]
        return " ".join(fmt(v) for v in values)


def loss_mse(pred: Sequence[float], target: Sequence[float]) -> float:
    """Mean squared difference."""
    pred, target = _paired(pred, target)
    return float(np.mean((pred - target) ** 2))


def metric_mae(pred: Sequence[float], target: Sequence[float]) -> float:
    """Mean absolute difference."""
    pred, target = _paired(pred, target)
    return float(np.mean(np.abs(pred - target)))


def _paired(pred, target) -> Tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64).ravel()
    target = np.asarray(target, dtype=np.float64).ravel()
    if pred.size == 0:
        raise ContractViolation("loss of an empty batch")
    if pred.shape != target.shape:
        raise StructuralError(f"{pred.size} predictions for {target.size} targets")
    return pred, target


class SurrogateModel:
    """
    The regression network with its parameters.

    Args:
        config: Architecture
        m: Side of the input view
        seed: Seed of the He-normal initialization and of the dropout masks
        mode: Normalization mode the inputs are expected in
    """

    def __init__(self, config: NetworkConfig, m: int = VIEW_SIZE, seed: int = 0,
                 mode: str = DEFAULT_NORMALIZATION):
        self.config = config
        self.m = int(m)
        self.seed = int(seed)
        self.mode = str(getattr(mode, "value", mode))
        init_rng = np.random.default_rng(self.seed)
        self.dropout_rng = np.random.default_rng([self.seed, 1])

        self.conv: List[Layer] = []
        channels, size = 1, self.m
        for width, depth, rate in config.conv_layers:
            conv = Conv2D(channels, width, padded=True, rng=init_rng)
            self.conv += [conv, ReLU()]
            for _ in range(depth - 1):
                conv = Conv2D(width, width, padded=False, rng=init_rng)
                size = conv.output_size(size)
                self.conv += [conv, ReLU()]
            size = MaxPool2.output_size(size)
            self.conv += [MaxPool2(), Dropout(rate, self.dropout_rng)]
            channels = width
            if size < 1:
                raise ContractViolation(f"architecture {config.to_row()} shrinks an {m}x{m} view to nothing")
        self.feature_size = channels * size * size
        self.conv += [Flatten(), Dense(self.feature_size, config.o, init_rng), ReLU()]

        self.head: List[Layer] = []
        width = config.o + 2
        for _ in range(config.d3):
            self.head += [Dense(width, config.w3, init_rng), ReLU()]
            width = config.w3
        self.head.append(Dense(width, 1, init_rng))

    @property
    def layers(self) -> List[Layer]:
        return self.conv + self.head

    def parameters(self) -> List[Tuple[str, np.ndarray]]:
        """Parameters in file order: layer by layer, then by name as declared."""
        return [(f"layer{index}.{name}", value)
                for index, layer in enumerate(self.layers)
                for name, value in layer.params.items()]

    def gradients(self) -> List[np.ndarray]:
        return [layer.grads[name] for layer in self.layers for name in layer.params]

    def features(self, views: np.ndarray, training: bool = False) -> np.ndarray:
        """Output of the convolutional stack and its dense layer, (batch, O)."""
        views = np.asarray(views, dtype=np.float64)
        if views.ndim == 2:
            views = views[None]
        if views.shape[1:] != (self.m, self.m):
            raise StructuralError(f"model expects {self.m}x{self.m} views, got {views.shape[1:]}")
        x = views[:, None, :, :]
        for layer in self.conv:
            x = layer.forward(x, training)
        return x

    def head_forward(self, features: np.ndarray, log_h, theta, training: bool = False) -> np.ndarray:
        """Append (-log2 h, theta) to the features and run the dense head."""
        batch = features.shape[0]
        scalars = np.column_stack([np.broadcast_to(np.asarray(log_h, dtype=np.float64), (batch,)),
                                   np.broadcast_to(np.asarray(theta, dtype=np.float64), (batch,))])
        x = np.concatenate([features, scalars], axis=1)
        for layer in self.head:
            x = layer.forward(x, training)
        return x[:, 0]

    def forward(self, views: np.ndarray, log_h, theta, training: bool = False) -> np.ndarray:
        """
        Predict rho for a batch.

        Args:
            views: (batch, m, m) or (m, m) normalized views
            log_h: -log2(h) per sample or a scalar
            theta: Strong threshold per sample or a scalar

        Returns:
            np.ndarray: (batch,) predictions
        """
        return self.head_forward(self.features(views, training), log_h, theta, training)

    def backward(self, grad_out: np.ndarray) -> List[np.ndarray]:
        """
        Backpropagate d(loss)/d(output) of the last forward call.

        Returns:
            List[np.ndarray]: Gradients in parameters() order
        """
        grad = np.asarray(grad_out, dtype=np.float64).reshape(-1, 1)
        for layer in reversed(self.head):
            grad = layer.backward(grad)
        grad = grad[:, :self.config.o]
        for layer in reversed(self.conv):
            grad = layer.backward(grad)
        return self.gradients()

    def predict(self, view: np.ndarray, log_h: float, theta: float) -> float:
        return float(self.forward(view, log_h, theta)[0])

    def get_weights(self) -> List[np.ndarray]:
        return [value.copy() for _, value in self.parameters()]

    def set_weights(self, weights: Sequence[np.ndarray]) -> None:
        params = self.parameters()
        if len(weights) != len(params):
            raise StructuralError(f"{len(weights)} arrays for {len(params)} parameters")
        for (name, target), value in zip(params, weights):
            if target.shape != np.shape(value):
                raise StructuralError(f"{name}: shape {np.shape(value)} != {target.shape}")
            target[...] = value

    def header(self) -> Dict[str, Any]:
        return sanitize_json({
            "config": self.config.model_dump(),
            "m": self.m,
            "seed": self.seed,
            "mode": self.mode,
            "parameters": [{"name": name, "shape": list(value.shape)} for name, value in self.parameters()],
        })

    def save(self, path: Union[str, Path]) -> None:
        """
        Write the model file: magic, version byte, u32 header length, JSON
        header, then every parameter as little-endian float64 in header order.
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = json.dumps(self.header(), sort_keys=True).encode("utf-8")
        blob = b"".join(value.astype("<f8").tobytes() for _, value in self.parameters())
        with open(path, "wb") as fh:
            fh.write(MODEL_MAGIC)
            fh.write(struct.pack("<BI", MODEL_VERSION, len(header)))
            fh.write(header)
            fh.write(blob)
        logger.info(f"Saved model ({self.config.to_row()}, m={self.m}) to {path}")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SurrogateModel":
        data = Path(path).read_bytes()
        prefix = len(MODEL_MAGIC) + 5
        if len(data) < prefix or data[:len(MODEL_MAGIC)] != MODEL_MAGIC:
            raise ModelFormatError(f"{path} is not a model file")
        version, header_len = struct.unpack("<BI", data[len(MODEL_MAGIC):prefix])
        if version != MODEL_VERSION:
            raise ModelFormatError(f"unsupported model file version {version}")
        try:
            header = json.loads(data[prefix:prefix + header_len].decode("utf-8"))
            model = cls(NetworkConfig(**header["config"]), m=header["m"],
                        seed=header["seed"], mode=header["mode"])
        except (ValueError, KeyError) as exc:
            raise ModelFormatError(f"bad model header in {path}: {exc}") from exc

        if len(header.get("parameters", [])) != len(model.parameters()):
            raise ModelFormatError(f"{path} lists {len(header.get('parameters', []))} parameters, "
                                   f"architecture has {len(model.parameters())}")
        offset = prefix + header_len
        weights = []
        for entry, (name, value) in zip(header["parameters"], model.parameters()):
            if entry["name"] != name or tuple(entry["shape"]) != value.shape:
                raise ModelFormatError(f"parameter {entry['name']} does not match the architecture")
            count = value.size
            if offset + 8 * count > len(data):
                raise ModelFormatError(f"{path} is truncated")
            weights.append(np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(value.shape))
            offset += 8 * count
        if offset != len(data):
            raise ModelFormatError(f"{path} parameter blob does not match its header")
        model.set_weights(weights)
        return model
