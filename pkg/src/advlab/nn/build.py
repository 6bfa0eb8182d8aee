"""Seeded model construction from plain layer descriptions."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError
from .layers import Conv2D, Dense, Flatten, MaxPool2, ReLU
from .model import Model

__all__ = ["glorot", "build_model"]


def glorot(rng, fan_in: int, fan_out: int, shape):
    """Uniform(-b, b) with b = sqrt(6 / (fan_in + fan_out)).

    Values are snapped to the float32 grid so a freshly built model is
    already exactly representable in the 32-bit file format.
    """
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    vals = rng.uniform(-bound, bound, size=shape)
    return vals.astype(np.float32).astype(np.float64)


def build_model(layer_specs, input_shape, spec_name="identity", seed=0) -> Model:
    """Build a model from dicts like {"type": "conv2d", "kernel": [3, 3], "out_channels": 8}.

    Supported types: conv2d (kernel, out_channels), dense (out), relu,
    maxpool, flatten. Weights use Glorot-uniform init, biases start at zero.
    """
    rng = np.random.default_rng(seed)
    shape = tuple(int(d) for d in input_shape)
    layers = []
    for i, spec in enumerate(layer_specs):
        kind = spec.get("type")
        if kind == "conv2d":
            if len(shape) != 3:
                raise ShapeMismatchError("(H, W, C)", shape, context=f"layer {i} (conv2d)")
            kh, kw = (int(k) for k in spec["kernel"])
            c_in = shape[2]
            c_out = int(spec["out_channels"])
            fan_in = kh * kw * c_in
            fan_out = kh * kw * c_out
            weights = glorot(rng, fan_in, fan_out, (kh, kw, c_in, c_out))
            layer = Conv2D(weights, np.zeros(c_out))
        elif kind == "dense":
            if len(shape) != 1:
                raise ShapeMismatchError("(N,)", shape, context=f"layer {i} (dense)")
            n_in = shape[0]
            n_out = int(spec["out"])
            weights = glorot(rng, n_in, n_out, (n_in, n_out))
            layer = Dense(weights, np.zeros(n_out))
        elif kind == "relu":
            layer = ReLU()
        elif kind == "maxpool":
            layer = MaxPool2()
        elif kind == "flatten":
            layer = Flatten()
        else:
            raise ValueError(f"unknown layer type {kind!r} at index {i}")
        shape = layer.output_shape(shape)
        layers.append(layer)
    return Model(layers, tuple(int(d) for d in input_shape), spec_name=spec_name)
