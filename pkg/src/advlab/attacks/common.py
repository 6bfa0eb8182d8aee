"""Helpers shared by the attack implementations."""

from __future__ import annotations

import numpy as np

from ..nn.model import _input_data
from ..preprocess import get_spec, policy_box
from ..tensor import ImageTensor

__all__ = ["prepare", "untargeted_target", "margin_logits_grad"]


def prepare(model, x: ImageTensor, policy):
    """Validate x against the model and resolve the clip box for its channels.

    Returns (data, box) where data is the float64 pixel array and box is
    (lo, hi) per-channel arrays, or None under the unconstrained policy.
    """
    if not isinstance(x, ImageTensor):
        raise TypeError(f"attack input must be an ImageTensor, got {type(x).__name__}")
    data = _input_data(model, x)
    box = policy_box(policy, get_spec(model.spec_name), x.shape[2])
    return data, box


def untargeted_target(logits, true_label: int) -> int:
    """The strongest class other than the true label.

    For a correctly classified input this is the runner-up of the clean
    prediction; for an already misclassified input it is the prediction
    itself, so a zero perturbation is immediately admissible.
    """
    z = np.asarray(logits, dtype=np.float64)
    if not 0 <= true_label < z.shape[0]:
        raise ValueError(f"label {true_label} out of range for {z.shape[0]} classes")
    if z.shape[0] < 2:
        raise ValueError("need at least two classes to pick an adversarial target")
    masked = z.copy()
    masked[true_label] = -np.inf
    return int(np.argmax(masked))


def margin_logits_grad(logits, target: int) -> np.ndarray:
    """Subgradient of cw_margin with respect to the logits.

    Picks the first strongest non-target class, matching cw_margin's max.
    """
    z = np.asarray(logits, dtype=np.float64)
    masked = z.copy()
    masked[target] = -np.inf
    j = int(np.argmax(masked))
    grad = np.zeros(z.shape[0])
    grad[j] = 1.0
    grad[target] = -1.0
    return grad
