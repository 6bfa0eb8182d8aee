"""Pixel-statistic adversarial detectors and the channel tables behind them.

Every detector is a pure function returning a DetectionVerdict; nothing here
mutates images or models. The flag direction is fixed per detector:

* gap          - flagged when every channel extreme sits far from its limits
* shift        - flagged when one channel's (min+max)/2 midpoint drifts up
* zero-count   - flagged when too many pixels are exactly 0.0
* disagreement - flagged when two models disagree on the same raw image
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainMismatchError, ShapeMismatchError
from .nn.model import predict
from .preprocess import apply, channel_limits, get_spec
from .tensor import ImageTensor, channel_stats

__all__ = [
    "DetectionVerdict",
    "gap_detect",
    "shift_detect",
    "zero_detect",
    "disagreement_detect",
    "Aggregate",
    "ChannelTable",
    "corpus_channel_table",
    "verdict_json",
]

ZERO_COUNT_DEFAULT = 100


def _limits_for(spec, channels: int) -> tuple:
    """Channel limits widened to the image's channel count (identity only)."""
    limits = channel_limits(spec)
    if spec.kind == "identity":
        return tuple((0.0, 255.0) for _ in range(channels))
    if len(limits) != channels:
        raise DomainMismatchError(
            f"{len(limits)}-channel image", f"{channels}-channel image"
        )
    return tuple(limits)


@dataclass(frozen=True)
class DetectionVerdict:
    detector: str
    flagged: bool
    score: float
    threshold: float
    channel: Optional[int] = None


def verdict_json(verdict: DetectionVerdict, image_id: str) -> dict:
    """Verdict as a JSON-line-ready dict."""
    return {
        "detector": verdict.detector,
        "flagged": verdict.flagged,
        "score": verdict.score,
        "threshold": verdict.threshold,
        "channel": verdict.channel,
        "image_id": image_id,
    }


def gap_detect(img: ImageTensor, spec, epsilon: float) -> DetectionVerdict:
    """Flag when all channel extremes keep a distance of at least epsilon
    from both channel limits.

    Natural images tend to touch their limits somewhere; bounded attacks push
    every pixel inward by up to epsilon, opening a gap on both sides.
    """
    spec = get_spec(spec)
    if img.domain != spec.name:
        raise DomainMismatchError(spec.name, img.domain)
    stats = channel_stats(img)
    limits = _limits_for(spec, img.shape[2])
    score = min(
        min(stats.minimum[c] - lo, hi - stats.maximum[c])
        for c, (lo, hi) in enumerate(limits)
    )
    return DetectionVerdict("gap", score >= epsilon, float(score), float(epsilon))


def shift_detect(img: ImageTensor, channel: int = 0, epsilon: float = 1.0) -> DetectionVerdict:
    """Flag when a channel's (min + max) / 2 midpoint reaches epsilon / 2.

    Only meaningful on the symmetric [-1, 1] input space, where clean images
    center near 0 and clipped L-infinity attacks shift the midpoint upward.
    """
    if img.domain != "inception-sym":
        raise DomainMismatchError("inception-sym", img.domain)
    if not 0 <= channel < img.shape[2]:
        raise ValueError(f"channel {channel} out of range for {img.shape[2]}-channel image")
    stats = channel_stats(img)
    score = (stats.minimum[channel] + stats.maximum[channel]) / 2.0
    threshold = epsilon / 2.0
    return DetectionVerdict("shift", score >= threshold, float(score), float(threshold), channel)


def zero_detect(img: ImageTensor, count_threshold: int = ZERO_COUNT_DEFAULT) -> DetectionVerdict:
    """Flag when the number of pixels exactly equal to 0.0 reaches the threshold.

    Continuous-valued images hit exact zero essentially never; attacks clipped
    at a 0 floor produce them in bulk.
    """
    score = float(sum(channel_stats(img).zero_count))
    return DetectionVerdict("zero-count", score >= count_threshold, score, float(count_threshold))


def disagreement_detect(a, b, raw: ImageTensor) -> DetectionVerdict:
    """Flag a raw image when two models, each behind its own pre-processing,
    predict different classes for it."""
    pred_a = predict(a, apply(get_spec(a.spec_name), raw))
    pred_b = predict(b, apply(get_spec(b.spec_name), raw))
    score = 0.0 if pred_a == pred_b else 1.0
    return DetectionVerdict("disagreement", score >= 1.0, score, 1.0)


@dataclass(frozen=True)
class Aggregate:
    """Corpus-level summary of one per-image statistic."""

    minimum: float
    average: float
    maximum: float
    std: float


def _aggregate(values) -> Aggregate:
    arr = np.asarray(values, dtype=np.float64)
    return Aggregate(
        minimum=float(arr.min()),
        average=float(arr.mean()),
        maximum=float(arr.max()),
        std=float(arr.std()),
    )


@dataclass(frozen=True)
class ChannelTable:
    """Per-channel aggregates of per-image channel minima and maxima.

    min_of[c] summarizes image-wise channel-c minima across the corpus,
    max_of[c] the maxima; limits is the spec's (lo, hi) row.
    """

    spec_name: str
    image_count: int
    min_of: tuple  # one Aggregate per channel
    max_of: tuple
    limits: tuple


def corpus_channel_table(corpus, spec) -> ChannelTable:
    """Summarize channel extremes across a corpus of same-spec images."""
    spec = get_spec(spec)
    images = list(corpus)
    if not images:
        raise ValueError("corpus is empty")
    mins, maxs = [], []
    channels = images[0].shape[2]
    for img in images:
        if img.domain != spec.name:
            raise DomainMismatchError(spec.name, img.domain)
        if img.shape[2] != channels:
            raise ShapeMismatchError(
                f"{channels}-channel image", f"{img.shape[2]}-channel image", "corpus_channel_table"
            )
        stats = channel_stats(img)
        mins.append(stats.minimum)
        maxs.append(stats.maximum)
    mins = np.asarray(mins)
    maxs = np.asarray(maxs)
    limits = _limits_for(spec, channels)
    return ChannelTable(
        spec_name=spec.name,
        image_count=len(images),
        min_of=tuple(_aggregate(mins[:, c]) for c in range(channels)),
        max_of=tuple(_aggregate(maxs[:, c]) for c in range(channels)),
        limits=tuple(limits),
    )
