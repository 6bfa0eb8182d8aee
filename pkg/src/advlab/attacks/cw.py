"""The two margin-loss attacks, one minimizing L2 and one squeezing L-infinity."""

from __future__ import annotations

import numpy as np

from ..nn.model import backward_from_logits, cw_margin, forward
from ..tensor import ImageTensor, l2_distance
from .common import margin_logits_grad, prepare, untargeted_target
from .config import AdvRecord, CwL2Config, CwLinfConfig

__all__ = ["cw_l2", "cw_linf"]


def _resolve_target(model, clean_logits, label, target_label):
    if target_label is not None:
        if not 0 <= target_label < model.class_count:
            raise ValueError(
                f"target {target_label} out of range for {model.class_count} classes"
            )
        return int(target_label)
    return untargeted_target(clean_logits, label)


def cw_l2(model, x: ImageTensor, label: int, cfg: CwL2Config) -> AdvRecord:
    """Minimize ||delta||_2^2 + c * max(margin, -kappa), binary-searching c.

    Iterates live inside the clip box through a tanh change of variables, so
    no projection is ever needed. The returned record holds the successful
    candidate with the smallest L2 across the whole search, or x itself with
    succeeded=False when no candidate ever reached margin <= -kappa.
    """
    data, box = prepare(model, x, cfg.clip_policy)
    clean_logits = forward(model, data)
    clean_pred = int(np.argmax(clean_logits))
    target = _resolve_target(model, clean_logits, label, cfg.target_label)

    if cw_margin(clean_logits, target) <= -cfg.kappa:
        # the unperturbed input already clears the confidence bar
        return AdvRecord.build(x, x, label, clean_pred, clean_pred, True, target)

    if box is not None:
        lo = np.broadcast_to(box[0], data.shape)
        hi = np.broadcast_to(box[1], data.shape)
        width = hi - lo
        unit = np.clip((data - lo) / width * 2.0 - 1.0, -1.0 + 1e-6, 1.0 - 1e-6)
        w_start = np.arctanh(unit)

        def to_image(w):
            return lo + (np.tanh(w) + 1.0) * 0.5 * width

        def pullback(w, grad_img):
            return grad_img * 0.5 * width * (1.0 - np.tanh(w) ** 2)

    else:
        w_start = data.copy()

        def to_image(w):
            return w

        def pullback(w, grad_img):
            return grad_img

    best = None  # (l2, image, predicted class)

    def consider(adv, logits):
        nonlocal best
        if cw_margin(logits, target) <= -cfg.kappa:
            l2 = l2_distance(adv, data)
            if best is None or l2 < best[0]:
                best = (l2, adv.copy(), int(np.argmax(logits)))
            return True
        return False

    c_lo, c_hi = 0.0, None
    c = cfg.initial_c
    for _ in range(cfg.search_steps):
        w = w_start.copy()
        hit = False
        for _ in range(cfg.iterations):
            adv = to_image(w)
            logits = forward(model, adv)
            hit |= consider(adv, logits)
            grad = 2.0 * (adv - data)
            if cw_margin(logits, target) > -cfg.kappa:
                mgrad, _ = backward_from_logits(model, adv, margin_logits_grad(logits, target))
                grad = grad + c * np.asarray(mgrad)
            w = w - cfg.learning_rate * pullback(w, grad)
        adv = to_image(w)
        hit |= consider(adv, forward(model, adv))
        if hit:
            c_hi = c
            c = (c_lo + c_hi) / 2.0
        else:
            c_lo = c
            c = c * 10.0 if c_hi is None else (c_lo + c_hi) / 2.0

    if best is None:
        return AdvRecord.build(x, x, label, clean_pred, clean_pred, False, target)
    _, adv, adv_pred = best
    return AdvRecord.build(x, x.with_data(adv), label, clean_pred, adv_pred, True, target)


def cw_linf(model, x: ImageTensor, label: int, cfg: CwLinfConfig) -> AdvRecord:
    """Minimize c * max(margin, 0) + sum_i max(0, |delta_i| - tau), shrinking tau.

    The policy box stands in for the value range the attack "computes" for
    itself: every iterate is clipped into it, so an original lying outside
    the box is dragged to the box face and pinned there, which is what turns
    mean-centered images into fields of exact zeros under the unit box.
    """
    data, box = prepare(model, x, cfg.clip_policy)
    lo = np.broadcast_to(box[0], data.shape)
    hi = np.broadcast_to(box[1], data.shape)
    width = float(np.max(box[1] - box[0]))
    tau = cfg.initial_tau if cfg.initial_tau is not None else width
    lr = cfg.learning_rate if cfg.learning_rate is not None else 0.01 * width

    clean_logits = forward(model, data)
    clean_pred = int(np.argmax(clean_logits))
    target = untargeted_target(clean_logits, label)

    cur = np.clip(data, lo, hi)
    last_success = None

    def check(img):
        nonlocal last_success
        logits = forward(model, img)
        margin = cw_margin(logits, target)
        if margin <= 0.0:
            last_success = (img.copy(), int(np.argmax(logits)))
        return logits, margin

    for _ in range(cfg.iterations):
        logits, margin = check(cur)
        delta = cur - data
        grad = np.where(np.abs(delta) > tau, np.sign(delta), 0.0)
        if margin > 0.0:
            mgrad, _ = backward_from_logits(model, cur, margin_logits_grad(logits, target))
            grad = grad + cfg.c * np.asarray(mgrad)
        cur = np.clip(cur - lr * grad, lo, hi)
        if np.max(np.abs(cur - data)) <= tau:
            tau *= cfg.decay
    check(cur)

    if last_success is None:
        return AdvRecord.build(x, x, label, clean_pred, clean_pred, False, target)
    adv, adv_pred = last_success
    return AdvRecord.build(x, x.with_data(adv), label, clean_pred, adv_pred, True, target)
