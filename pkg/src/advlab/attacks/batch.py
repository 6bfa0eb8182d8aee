"""Corpus-wide attack runs with per-image isolation and stable ordering."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..preprocess import apply, get_spec
from .config import AdvRecord, CwL2Config, CwLinfConfig, FgsmConfig, PgdConfig
from .cw import cw_l2, cw_linf
from .gradient_sign import fgsm, pgd

__all__ = ["BatchResult", "run_attack", "attack_batch"]


@dataclass(frozen=True)
class BatchResult:
    """One corpus slot: either a record or the error that image produced."""

    index: int
    image_id: str
    record: Optional[AdvRecord]
    error: Optional[str] = None


def run_attack(model, x, label, cfg, rng=None) -> AdvRecord:
    """Dispatch on the config type; rng only matters for the restarted attack."""
    if isinstance(cfg, FgsmConfig):
        return fgsm(model, x, label, cfg)
    if isinstance(cfg, PgdConfig):
        return pgd(model, x, label, cfg, rng=rng)
    if isinstance(cfg, CwL2Config):
        return cw_l2(model, x, label, cfg)
    if isinstance(cfg, CwLinfConfig):
        return cw_linf(model, x, label, cfg)
    raise TypeError(f"unknown attack config {type(cfg).__name__}")


def _as_triple(item):
    if hasattr(item, "image_id"):
        return item.image_id, item.image, item.label
    image_id, image, label = item
    return image_id, image, label


def attack_batch(model, corpus, cfg, workers: int = 1):
    """Attack every corpus image, returning one BatchResult per image in order.

    Images are pre-processed with the model's own spec first. A failure on one
    image lands in that slot's error field instead of aborting the batch. The
    per-image RNG stream depends only on (cfg.seed, index), so results are
    identical for any worker count.
    """
    items = list(corpus)
    spec = get_spec(model.spec_name)

    def one(i, item):
        image_id, image, label = _as_triple(item)
        try:
            pre = apply(spec, image)
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, i]))
            return BatchResult(i, image_id, run_attack(model, pre, label, cfg, rng=rng))
        except Exception as exc:
            return BatchResult(i, image_id, None, f"{type(exc).__name__}: {exc}")

    if workers <= 1 or len(items) <= 1:
        return [one(i, item) for i, item in enumerate(items)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(len(items)), items))
