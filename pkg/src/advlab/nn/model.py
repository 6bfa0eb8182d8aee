"""Model container, forward inference, loss, and reverse-mode gradients."""

from __future__ import annotations

import numpy as np

from ..errors import DomainMismatchError, ShapeMismatchError
from ..tensor import ImageTensor, tensor

__all__ = [
    "Model",
    "forward",
    "softmax",
    "loss_crossentropy",
    "crossentropy_logits_grad",
    "input_gradient",
    "backward_from_logits",
    "cw_margin",
    "predict",
]


class Model:
    """An ordered layer stack with a fixed input shape and preprocess-spec name.

    Construction validates that layer shapes chain from the input shape to a
    1-D logits vector and freezes all parameter arrays; instances are safe to
    share across threads.
    """

    def __init__(self, layers, input_shape, spec_name="identity"):
        layers = tuple(layers)
        if not layers:
            raise ValueError("model needs at least one layer")
        shape = tuple(int(d) for d in input_shape)
        for layer in layers:
            shape = layer.output_shape(shape)
        if len(shape) != 1:
            raise ShapeMismatchError("(classes,)", shape, "model output")
        for layer in layers:
            for p in layer.params:
                if not np.all(np.isfinite(p)):
                    raise ValueError("model parameters must be finite")
                p.flags.writeable = False
        self.layers = layers
        self.input_shape = tuple(int(d) for d in input_shape)
        self.spec_name = spec_name
        self.class_count = int(shape[0])

    def replace_params(self, per_layer_params) -> "Model":
        """New model with the same architecture and the given parameter arrays."""
        layers = [
            layer.replace_params(params)
            for layer, params in zip(self.layers, per_layer_params)
        ]
        return Model(layers, self.input_shape, self.spec_name)


def _input_data(model, x):
    if isinstance(x, ImageTensor):
        if x.domain != model.spec_name:
            raise DomainMismatchError(model.spec_name, x.domain)
        data = x.data
    else:
        data = np.asarray(x, dtype=np.float64)
    if data.shape != model.input_shape:
        raise ShapeMismatchError(model.input_shape, data.shape, "model input")
    return data


def _trace(layers, data):
    """Run forward keeping each layer's input for the backward pass."""
    inputs = []
    for layer in layers:
        inputs.append(data)
        data = layer.forward(data)
    return inputs, data


def _backprop(layers, inputs, grad_logits, want_param_grads=False):
    grad = grad_logits
    param_grads = []
    for layer, x in zip(reversed(layers), reversed(inputs)):
        grad, pgrads = layer.backward(x, grad)
        if want_param_grads:
            param_grads.append(pgrads)
    if want_param_grads:
        return grad, list(reversed(param_grads))
    return grad


def forward(model, x) -> np.ndarray:
    """Logits for one input; pure and deterministic."""
    inputs, logits = _trace(model.layers, _input_data(model, x))
    return tensor(logits)


def predict(model, x) -> int:
    """Argmax class of the logits (first index on ties)."""
    return int(np.argmax(forward(model, x)))


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = np.exp(z - z.max())
    return z / z.sum()


def loss_crossentropy(logits, label) -> float:
    """Negative log softmax probability of `label`."""
    logits = np.asarray(logits, dtype=np.float64)
    if not 0 <= label < logits.shape[0]:
        raise ValueError(f"label {label} out of range for {logits.shape[0]} classes")
    shifted = logits - logits.max()
    return float(np.log(np.sum(np.exp(shifted))) - shifted[label])


def crossentropy_logits_grad(logits, label) -> np.ndarray:
    """Gradient of loss_crossentropy with respect to the logits (softmax - onehot)."""
    if not 0 <= label < np.shape(logits)[0]:
        raise ValueError(f"label {label} out of range for {np.shape(logits)[0]} classes")
    grad = softmax(logits)
    grad[label] -= 1.0
    return grad


def input_gradient(model, x, label) -> np.ndarray:
    """Gradient of the cross-entropy loss at (x, label) with respect to every pixel of x."""
    data = _input_data(model, x)
    inputs, logits = _trace(model.layers, data)
    grad = _backprop(model.layers, inputs, crossentropy_logits_grad(logits, label))
    return tensor(grad)


def backward_from_logits(model, x, grad_logits):
    """Input gradient of `grad_logits . logits`; also returns the logits.

    This is the raw reverse-mode hook the margin-based attacks use.
    """
    data = _input_data(model, x)
    inputs, logits = _trace(model.layers, data)
    grad = _backprop(model.layers, inputs, np.asarray(grad_logits, dtype=np.float64))
    return tensor(grad), tensor(logits)


def cw_margin(logits, target) -> float:
    """max over i != target of logits[i] - logits[target].

    Negative values mean `target` is the top class by that margin.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if not 0 <= target < logits.shape[0]:
        raise ValueError(f"target {target} out of range for {logits.shape[0]} classes")
    if logits.shape[0] < 2:
        raise ValueError("cw_margin needs at least two classes")
    others = np.delete(logits, target)
    return float(others.max() - logits[target])
