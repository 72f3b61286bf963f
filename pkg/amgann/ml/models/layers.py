"""
Network layers in numpy with explicit backward passes.

Activations are batch-first: (batch, channels, height, width) for the
convolutional part, (batch, features) for the dense part. Every layer caches
what its backward pass needs during the last training-mode or inference-mode
forward call.
"""

from typing import Dict, Optional
import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

logger = logging.getLogger(__name__)


class Layer:
    """Base layer: no parameters, identity forward."""

    def __init__(self):
        self.params: Dict[str, np.ndarray] = {}
        self.grads: Dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return grad


def he_normal(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    return rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)


class Conv2D(Layer):
    """3x3 convolution, stride 1, with optional one-pixel zero padding."""

    def __init__(self, in_channels: int, out_channels: int, padded: bool,
                 rng: Optional[np.random.Generator] = None):
        super().__init__()
        self.padded = padded
        shape = (out_channels, in_channels, 3, 3)
        kernel = he_normal(rng, shape, in_channels * 9) if rng is not None else np.zeros(shape)
        self.params = {"kernel": kernel, "bias": np.zeros(out_channels)}
        self._windows = None
        self._input_shape = None

    def output_size(self, size: int) -> int:
        return size if self.padded else size - 2

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        self._input_shape = x.shape
        if self.padded:
            x = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
        windows = sliding_window_view(x, (3, 3), axis=(2, 3))
        self._windows = windows
        out = np.tensordot(windows, self.params["kernel"], axes=([1, 4, 5], [1, 2, 3]))
        return out.transpose(0, 3, 1, 2) + self.params["bias"][None, :, None, None]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        kernel = self.params["kernel"]
        self.grads = {
            "kernel": np.tensordot(grad, self._windows, axes=([0, 2, 3], [0, 2, 3])),
            "bias": grad.sum(axis=(0, 2, 3)),
        }
        padded_grad = np.pad(grad, ((0, 0), (0, 0), (2, 2), (2, 2)))
        windows = sliding_window_view(padded_grad, (3, 3), axis=(2, 3))
        flipped = kernel[:, :, ::-1, ::-1]
        dx = np.tensordot(windows, flipped, axes=([1, 4, 5], [0, 2, 3])).transpose(0, 3, 1, 2)
        if self.padded:
            dx = dx[:, :, 1:-1, 1:-1]
        return dx


class ReLU(Layer):
    def __init__(self):
        super().__init__()
        self._mask = None

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return grad * self._mask


class MaxPool2(Layer):
    """
    2x2 max pooling with stride 2; odd trailing rows/columns are dropped.

    Gradients go to the window maximum only, the first one in row-major
    order when several entries tie.
    """

    def __init__(self):
        super().__init__()
        self._argmax = None
        self._input_shape = None

    @staticmethod
    def output_size(size: int) -> int:
        return size // 2

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        b, c, h, w = x.shape
        ho, wo = h // 2, w // 2
        self._input_shape = x.shape
        blocks = (x[:, :, :2 * ho, :2 * wo]
                  .reshape(b, c, ho, 2, wo, 2)
                  .transpose(0, 1, 2, 4, 3, 5)
                  .reshape(b, c, ho, wo, 4))
        self._argmax = blocks.argmax(axis=-1)
        return np.take_along_axis(blocks, self._argmax[..., None], axis=-1)[..., 0]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        b, c, h, w = self._input_shape
        ho, wo = h // 2, w // 2
        routed = np.zeros((b, c, ho, wo, 4))
        np.put_along_axis(routed, self._argmax[..., None], grad[..., None], axis=-1)
        dx = np.zeros(self._input_shape)
        dx[:, :, :2 * ho, :2 * wo] = (routed.reshape(b, c, ho, wo, 2, 2)
                                      .transpose(0, 1, 2, 4, 3, 5)
                                      .reshape(b, c, 2 * ho, 2 * wo))
        return dx


class Dropout(Layer):
    """Inverted dropout; identity outside training."""

    def __init__(self, rate: float, rng: Optional[np.random.Generator] = None):
        super().__init__()
        self.rate = rate
        self.rng = rng if rng is not None else np.random.default_rng()
        self._mask = None

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        if not training or self.rate == 0.0:
            self._mask = None
            return x
        self._mask = (self.rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return grad if self._mask is None else grad * self._mask


class Flatten(Layer):
    def __init__(self):
        super().__init__()
        self._shape = None

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return grad.reshape(self._shape)


class Dense(Layer):
    def __init__(self, in_features: int, out_features: int,
                 rng: Optional[np.random.Generator] = None):
        super().__init__()
        shape = (in_features, out_features)
        weight = he_normal(rng, shape, in_features) if rng is not None else np.zeros(shape)
        self.params = {"weight": weight, "bias": np.zeros(out_features)}
        self._x = None

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        self._x = x
        return x @ self.params["weight"] + self.params["bias"]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        self.grads = {
            "weight": self._x.T @ grad,
            "bias": grad.sum(axis=0),
        }
        return grad @ self.params["weight"].T
