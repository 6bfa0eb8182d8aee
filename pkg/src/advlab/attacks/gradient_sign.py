"""Signed-gradient attacks: the single-step and the projected iterative one."""

from __future__ import annotations

import numpy as np

from ..nn.model import forward, input_gradient, loss_crossentropy
from ..tensor import ImageTensor
from .common import prepare
from .config import AdvRecord, FgsmConfig, PgdConfig

__all__ = ["fgsm", "pgd"]


def _finish(model, x: ImageTensor, adv_data, label, clean_pred, cfg) -> AdvRecord:
    adv_pred = int(np.argmax(forward(model, adv_data)))
    if cfg.targeted:
        succeeded = adv_pred == cfg.target_label
    else:
        succeeded = adv_pred != label
    return AdvRecord.build(
        x, x.with_data(adv_data), label, clean_pred, adv_pred, succeeded,
        target_label=cfg.target_label,
    )


def fgsm(model, x: ImageTensor, label: int, cfg: FgsmConfig) -> AdvRecord:
    """One step of size epsilon along the loss-gradient sign, then the policy clip.

    Targeted mode steps down the gradient of the target's loss instead.
    """
    data, box = prepare(model, x, cfg.clip_policy)
    if cfg.targeted:
        step = -cfg.epsilon * np.sign(input_gradient(model, data, cfg.target_label))
    else:
        step = cfg.epsilon * np.sign(input_gradient(model, data, label))
    adv = data + step
    if box is not None:
        adv = np.clip(adv, box[0], box[1])
    clean_pred = int(np.argmax(forward(model, data)))
    return _finish(model, x, adv, label, clean_pred, cfg)


def pgd(model, x: ImageTensor, label: int, cfg: PgdConfig, rng=None) -> AdvRecord:
    """Iterated sign steps, re-projected into the epsilon ball around x and then
    clipped by the policy after every step.

    With random_starts > 0 the attack restarts that many times from uniform
    points inside the ball and keeps the run with the best final loss.
    """
    data, box = prepare(model, x, cfg.clip_policy)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    ball_lo = data - cfg.epsilon
    ball_hi = data + cfg.epsilon
    loss_label = cfg.target_label if cfg.targeted else label
    direction = -1.0 if cfg.targeted else 1.0

    def descend(cur):
        for _ in range(cfg.steps):
            step = direction * cfg.alpha * np.sign(input_gradient(model, cur, loss_label))
            cur = np.clip(cur + step, ball_lo, ball_hi)
            if box is not None:
                cur = np.clip(cur, box[0], box[1])
        return cur

    if cfg.random_starts == 0:
        starts = [data]
    else:
        starts = []
        for _ in range(cfg.random_starts):
            jitter = rng.uniform(-cfg.epsilon, cfg.epsilon, size=data.shape)
            start = data + jitter
            if box is not None:
                start = np.clip(start, box[0], box[1])
            starts.append(start)

    best = None
    best_objective = -np.inf
    for start in starts:
        final = descend(start)
        # higher is better: raise the true label's loss, or sink the target's
        objective = direction * loss_crossentropy(forward(model, final), loss_label)
        if objective > best_objective:
            best_objective = objective
            best = final

    clean_pred = int(np.argmax(forward(model, data)))
    return _finish(model, x, best, label, clean_pred, cfg)
