"""Immutable float64 tensors plus the elementwise and reduction ops every module shares.

Arrays produced here are row-major, 64-bit, and marked read-only so they can be
handed to concurrent workers without copying.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError

__all__ = [
    "tensor",
    "elementwise",
    "linf_distance",
    "l2_distance",
    "ImageTensor",
    "ChannelStats",
    "channel_stats",
]


def tensor(values, shape=None) -> np.ndarray:
    """Return a read-only float64 array; reshapes to `shape` if given."""
    arr = np.array(values, dtype=np.float64, order="C")
    if shape is not None:
        arr = np.ascontiguousarray(arr.reshape(tuple(shape)))
    arr.flags.writeable = False
    return arr


def _require_same_shape(a, b, context):
    if a.shape != b.shape:
        raise ShapeMismatchError(a.shape, b.shape, context)


_UNARY_OPS = {"sign": np.sign, "abs": np.abs}
_BINARY_OPS = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
    "clamp-lo": np.maximum,
    "clamp-hi": np.minimum,
}


def elementwise(op, a, b=None) -> np.ndarray:
    """Apply a pointwise op; `b` is a scalar, an equal-shape tensor, or omitted for unary ops.

    Supported ops: add, sub, mul, sign, abs, clamp-lo, clamp-hi.
    """
    a = np.asarray(a, dtype=np.float64)
    if op in _UNARY_OPS:
        return tensor(_UNARY_OPS[op](a))
    if op not in _BINARY_OPS:
        raise ValueError(f"unknown elementwise op {op!r}")
    if b is None:
        raise ValueError(f"elementwise op {op!r} needs a second operand")
    if np.ndim(b) == 0:
        b = np.float64(b)
    else:
        b = np.asarray(b, dtype=np.float64)
        _require_same_shape(a, b, f"elementwise {op!r}")
    return tensor(_BINARY_OPS[op](a, b))


def linf_distance(a, b) -> float:
    """Largest absolute pointwise difference between two equal-shape tensors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _require_same_shape(a, b, "linf_distance")
    return float(np.max(np.abs(a - b)))


def l2_distance(a, b) -> float:
    """Euclidean distance between two equal-shape tensors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _require_same_shape(a, b, "l2_distance")
    return float(np.sqrt(np.sum((a - b) ** 2)))


@dataclass(frozen=True)
class ImageTensor:
    """H x W x C pixel grid tagged with the space it lives in.

    `domain` is "raw" for 0..255 RGB input or the name of the preprocess spec
    the pixels were transformed under.
    """

    data: np.ndarray
    domain: str = "raw"

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise ShapeMismatchError("(H, W, C)", arr.shape, "ImageTensor")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite values")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def shape(self):
        return self.data.shape

    def with_data(self, data) -> "ImageTensor":
        """New image in the same domain with different pixels."""
        return ImageTensor(data, self.domain)


@dataclass(frozen=True)
class ChannelStats:
    """Per-channel pixel statistics; zero_count is the number of values exactly 0.0."""

    minimum: tuple
    maximum: tuple
    mean: tuple
    std: tuple
    zero_count: tuple


def channel_stats(img) -> ChannelStats:
    """Per-channel min/max/mean/std and exact-0.0 counts of an H x W x C image.

    Negative zero compares equal to 0.0 and is counted.
    """
    data = img.data if isinstance(img, ImageTensor) else np.asarray(img, dtype=np.float64)
    if data.ndim != 3:
        raise ShapeMismatchError("(H, W, C)", data.shape, "channel_stats")
    flat = data.reshape(-1, data.shape[2])
    return ChannelStats(
        minimum=tuple(float(v) for v in flat.min(axis=0)),
        maximum=tuple(float(v) for v in flat.max(axis=0)),
        mean=tuple(float(v) for v in flat.mean(axis=0)),
        std=tuple(float(v) for v in flat.std(axis=0)),
        zero_count=tuple(int(v) for v in np.sum(flat == 0.0, axis=0)),
    )
