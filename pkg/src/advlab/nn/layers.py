"""Layer zoo: stride-1 valid convolution, dense, relu, 2x2 max-pool, flatten.

Layers process one example at a time in float64, channels-last. Each layer
exposes forward(x), backward(x, grad_out) -> (grad_in, param_grads),
output_shape(in_shape), a params list, and replace_params for rebuilds.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeMismatchError

__all__ = ["Conv2D", "Dense", "ReLU", "MaxPool2", "Flatten", "LAYER_CODES"]


class Conv2D:
    """Valid-padding stride-1 convolution; weights (kh, kw, c_in, c_out), bias (c_out,)."""

    code = 1

    def __init__(self, weights, bias):
        weights = np.asarray(weights, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if weights.ndim != 4:
            raise ValueError("conv2d weights must have shape (kh, kw, c_in, c_out)")
        if bias.shape != (weights.shape[3],):
            raise ShapeMismatchError((weights.shape[3],), bias.shape, "conv2d bias")
        self.weights = weights
        self.bias = bias

    @property
    def params(self):
        return [self.weights, self.bias]

    def replace_params(self, params):
        return Conv2D(params[0], params[1])

    def output_shape(self, in_shape):
        kh, kw, cin, cout = self.weights.shape
        if len(in_shape) != 3 or in_shape[2] != cin:
            raise ShapeMismatchError(f"(H, W, {cin})", tuple(in_shape), "conv2d input")
        h, w, _ = in_shape
        if h < kh or w < kw:
            raise ShapeMismatchError(f">=({kh}, {kw}, {cin})", tuple(in_shape), "conv2d input")
        return (h - kh + 1, w - kw + 1, cout)

    def forward(self, x):
        kh, kw, _, _ = self.weights.shape
        win = sliding_window_view(x, (kh, kw), axis=(0, 1))  # (Ho, Wo, C, kh, kw)
        return np.einsum("hwcab,abco->hwo", win, self.weights, optimize=True) + self.bias

    def backward(self, x, grad_out):
        kh, kw, _, _ = self.weights.shape
        win = sliding_window_view(x, (kh, kw), axis=(0, 1))
        grad_w = np.einsum("hwcab,hwo->abco", win, grad_out, optimize=True)
        grad_b = grad_out.sum(axis=(0, 1))
        padded = np.pad(grad_out, ((kh - 1, kh - 1), (kw - 1, kw - 1), (0, 0)))
        pwin = sliding_window_view(padded, (kh, kw), axis=(0, 1))  # (H, W, c_out, kh, kw)
        flipped = self.weights[::-1, ::-1]
        grad_in = np.einsum("hwoab,abco->hwc", pwin, flipped, optimize=True)
        return grad_in, [grad_w, grad_b]


class Dense:
    """Fully connected layer on flat vectors; weights (n_in, n_out), bias (n_out,)."""

    code = 2

    def __init__(self, weights, bias):
        weights = np.asarray(weights, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if weights.ndim != 2:
            raise ValueError("dense weights must have shape (n_in, n_out)")
        if bias.shape != (weights.shape[1],):
            raise ShapeMismatchError((weights.shape[1],), bias.shape, "dense bias")
        self.weights = weights
        self.bias = bias

    @property
    def params(self):
        return [self.weights, self.bias]

    def replace_params(self, params):
        return Dense(params[0], params[1])

    def output_shape(self, in_shape):
        n_in = self.weights.shape[0]
        if tuple(in_shape) != (n_in,):
            raise ShapeMismatchError((n_in,), tuple(in_shape), "dense input")
        return (self.weights.shape[1],)

    def forward(self, x):
        return x @ self.weights + self.bias

    def backward(self, x, grad_out):
        return grad_out @ self.weights.T, [np.outer(x, grad_out), grad_out.copy()]


class ReLU:
    code = 3

    @property
    def params(self):
        return []

    def replace_params(self, params):
        return self

    def output_shape(self, in_shape):
        return tuple(in_shape)

    def forward(self, x):
        return np.maximum(x, 0.0)

    def backward(self, x, grad_out):
        return grad_out * (x > 0.0), []


class MaxPool2:
    """2x2 max-pool, stride 2; ties resolved to the first element in row-major window order."""

    code = 4

    @property
    def params(self):
        return []

    def replace_params(self, params):
        return self

    def output_shape(self, in_shape):
        if len(in_shape) != 3 or in_shape[0] % 2 or in_shape[1] % 2:
            raise ShapeMismatchError("(even H, even W, C)", tuple(in_shape), "max-pool input")
        return (in_shape[0] // 2, in_shape[1] // 2, in_shape[2])

    @staticmethod
    def _windows(x):
        h, w, c = x.shape
        return (
            x.reshape(h // 2, 2, w // 2, 2, c)
            .transpose(0, 2, 4, 1, 3)
            .reshape(h // 2, w // 2, c, 4)
        )

    def forward(self, x):
        return self._windows(x).max(axis=3)

    def backward(self, x, grad_out):
        h, w, c = x.shape
        win = self._windows(x)
        idx = win.argmax(axis=3)  # first max in (r0c0, r0c1, r1c0, r1c1) order
        grad_win = np.zeros_like(win)
        np.put_along_axis(grad_win, idx[..., None], grad_out[..., None], axis=3)
        grad_in = (
            grad_win.reshape(h // 2, w // 2, c, 2, 2)
            .transpose(0, 3, 1, 4, 2)
            .reshape(h, w, c)
        )
        return grad_in, []


class Flatten:
    code = 5

    @property
    def params(self):
        return []

    def replace_params(self, params):
        return self

    def output_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x):
        return x.reshape(-1)

    def backward(self, x, grad_out):
        return grad_out.reshape(x.shape), []


LAYER_CODES = {cls.code: cls for cls in (Conv2D, Dense, ReLU, MaxPool2, Flatten)}
