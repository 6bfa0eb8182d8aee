"""Eligibility filtering and the cross-model transfer metric."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..nn.model import predict
from ..preprocess import apply, get_spec, invert

__all__ = [
    "select_eligible",
    "transfer_predictions",
    "transfer_rate",
    "hit_target_rate",
    "avg_linf",
    "TargetTransfer",
    "TransferReport",
]


def select_eligible(records):
    """Records worth transferring: clean prediction right, adversarial wrong."""
    return [
        r for r in records
        if r.clean_pred == r.true_label and r.adv_pred != r.true_label
    ]


def transfer_predictions(records, target):
    """Predict each record's adversarial image with another model.

    The image crosses model boundaries through raw pixel space: undo the
    source pre-processing, then apply the target's. Returns (prediction,
    clamped) pairs, where clamped reports whether the inversion had to pull
    out-of-range pixels back into [0, 255].
    """
    target_spec = get_spec(target.spec_name)
    out = []
    for r in records:
        source_spec = get_spec(r.adversarial.domain)
        raw, clamped = invert(source_spec, r.adversarial)
        out.append((predict(target, apply(target_spec, raw)), clamped))
    return out


def transfer_rate(eligible, target):
    """Fraction of eligible records the target also misclassifies.

    Returns (rate, eligible_count, transferred_count); rate is None when
    there is nothing to measure.
    """
    eligible = list(eligible)
    if not eligible:
        return None, 0, 0
    preds = transfer_predictions(eligible, target)
    transferred = sum(
        1 for (pred, _), r in zip(preds, eligible) if pred != r.true_label
    )
    return transferred / len(eligible), len(eligible), transferred


def hit_target_rate(eligible, target):
    """Stricter targeted metric: the target model predicts the attack's target label."""
    eligible = list(eligible)
    if not eligible:
        return None, 0, 0
    preds = transfer_predictions(eligible, target)
    hits = sum(
        1 for (pred, _), r in zip(preds, eligible)
        if r.target_label is not None and pred == r.target_label
    )
    return hits / len(eligible), len(eligible), hits


def avg_linf(records) -> Optional[float]:
    """Mean per-record L-infinity perturbation; None for an empty set."""
    records = list(records)
    if not records:
        return None
    return sum(r.linf for r in records) / len(records)


@dataclass(frozen=True)
class TargetTransfer:
    """One (attack, target model) cell of the transfer table."""

    target: str
    eligible: int
    transferred: int
    rate: Optional[float]
    hit_target_rate: Optional[float] = None


@dataclass(frozen=True)
class TransferReport:
    """One attack's row block: eligibility, distances, and per-target cells."""

    source: str
    attack: str
    records: int
    errors: int
    eligible: int
    avg_linf_eligible: Optional[float]
    clamped: int
    targets: tuple
