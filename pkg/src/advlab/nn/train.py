"""Minimal seeded SGD trainer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Model, _backprop, _trace, crossentropy_logits_grad, loss_crossentropy, _input_data

__all__ = ["TrainConfig", "train", "mean_loss"]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    epochs: int
    batch_size: int
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")


def mean_loss(model, corpus) -> float:
    """Average cross-entropy of (image, label) pairs under the model."""
    items = list(corpus)
    if not items:
        raise ValueError("corpus is empty")
    total = 0.0
    for img, label in items:
        _, logits = _trace(model.layers, _input_data(model, img))
        total += loss_crossentropy(logits, label)
    return total / len(items)


def train(model, corpus, cfg: TrainConfig) -> Model:
    """Plain mini-batch SGD; returns a new model, deterministic given cfg.seed.

    Final parameters are rounded to the float32 grid so that a trained model
    survives the 32-bit file format bit-for-bit.
    """
    items = [(np.asarray(getattr(img, "data", img), dtype=np.float64), int(label)) for img, label in corpus]
    if not items:
        raise ValueError("corpus is empty")
    for _, label in items:
        if not 0 <= label < model.class_count:
            raise ValueError(f"label {label} out of range for {model.class_count} classes")

    work = [layer.replace_params([p.copy() for p in layer.params]) for layer in model.layers]
    rng = np.random.default_rng(cfg.seed)
    n = len(items)
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            grads = None
            for i in batch:
                data, label = items[i]
                inputs, logits = _trace(work, data)
                _, pgrads = _backprop(
                    work, inputs, crossentropy_logits_grad(logits, label), want_param_grads=True
                )
                if grads is None:
                    grads = pgrads
                else:
                    for acc, new in zip(grads, pgrads):
                        for a, g in zip(acc, new):
                            a += g
            scale = cfg.learning_rate / len(batch)
            for layer, pgrads in zip(work, grads):
                for p, g in zip(layer.params, pgrads):
                    p -= scale * g

    rounded = [
        [p.astype(np.float32).astype(np.float64) for p in layer.params] for layer in work
    ]
    return model.replace_params(rounded)
