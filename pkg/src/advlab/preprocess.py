"""Named input transforms, their per-channel value limits, and attack clipping boxes.

Three transforms are supported:

* ``caffe-bgr``   - RGB->BGR channel swap followed by per-channel mean
                    subtraction (means 103.939 / 116.779 / 123.68 in BGR order).
* ``inception-sym`` - symmetric scaling x / 127.5 - 1 into [-1, 1].
* ``identity``    - pixels kept in raw 0..255 units.

Channel limits are the images of raw 0 and 255 under the transform. They are
stored as exact decimal constants so detector thresholds and reports can
compare against them bit-for-bit; ``apply`` clamps its output into the limit
box to keep the two consistent at the last ulp.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainMismatchError
from .tensor import ImageTensor

__all__ = [
    "PreprocessSpec",
    "ClipPolicy",
    "CAFFE_BGR",
    "INCEPTION_SYM",
    "IDENTITY",
    "CLIP_NONE",
    "CLIP_MODEL_BOX",
    "CLIP_PIXEL_BOX",
    "CLIP_UNIT_BOX",
    "get_spec",
    "get_clip_policy",
    "channel_limits",
    "apply",
    "invert",
    "clip",
    "policy_box",
]

# Means subtracted after the RGB->BGR swap, i.e. indexed in BGR order.
CAFFE_BGR_MEANS = (103.939, 116.779, 123.68)

# Exact limit rows: image of raw {0, 255} per pre-processed channel.
_CAFFE_LIMITS = ((-103.939, 151.061), (-116.779, 138.221), (-123.68, 131.32))
_INCEPTION_LIMITS = ((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0))
_IDENTITY_LIMITS = ((0.0, 255.0), (0.0, 255.0), (0.0, 255.0))


@dataclass(frozen=True)
class PreprocessSpec:
    """A named, invertible pixel transform."""

    name: str
    kind: str  # "caffe-bgr" | "inception-sym" | "identity"


CAFFE_BGR = PreprocessSpec("caffe-bgr", "caffe-bgr")
INCEPTION_SYM = PreprocessSpec("inception-sym", "inception-sym")
IDENTITY = PreprocessSpec("identity", "identity")

_SPECS = {s.name: s for s in (CAFFE_BGR, INCEPTION_SYM, IDENTITY)}


def get_spec(name) -> PreprocessSpec:
    """Look up a spec by its config name."""
    spec = _SPECS.get(name if not isinstance(name, PreprocessSpec) else name.name)
    if spec is None:
        raise ValueError(f"unknown preprocess spec {name!r}")
    return spec


def channel_limits(spec) -> tuple:
    """Per-channel (lo, hi) of pre-processed values reachable from raw [0, 255]."""
    spec = get_spec(spec)
    if spec.kind == "caffe-bgr":
        return _CAFFE_LIMITS
    if spec.kind == "inception-sym":
        return _INCEPTION_LIMITS
    return _IDENTITY_LIMITS


def _limit_arrays(spec, channels):
    limits = channel_limits(spec)
    if spec.kind == "identity":
        lo = np.zeros(channels)
        hi = np.full(channels, 255.0)
        return lo, hi
    if channels != len(limits):
        raise DomainMismatchError(f"{len(limits)}-channel image", f"{channels}-channel image")
    lo = np.array([l for l, _ in limits])
    hi = np.array([h for _, h in limits])
    return lo, hi


def apply(spec, raw: ImageTensor) -> ImageTensor:
    """Transform a raw RGB [0, 255] image into the spec's pre-processed space."""
    spec = get_spec(spec)
    if raw.domain != "raw":
        raise DomainMismatchError("raw", raw.domain)
    data = raw.data
    if data.min() < 0.0 or data.max() > 255.0:
        raise ValueError(
            f"raw pixel values outside [0, 255]: min={data.min()}, max={data.max()}"
        )
    if spec.kind == "identity":
        return ImageTensor(data, spec.name)
    lo, hi = _limit_arrays(spec, data.shape[2])
    if spec.kind == "caffe-bgr":
        out = data[:, :, ::-1] - np.array(CAFFE_BGR_MEANS)
    else:  # inception-sym
        out = data / 127.5 - 1.0
    # clamp into the exact limit constants (at most 1 ulp of drift)
    out = np.clip(out, lo, hi)
    return ImageTensor(out, spec.name)


def invert(spec, pre: ImageTensor):
    """Map a pre-processed image back to raw RGB.

    Returns ``(raw_image, clamped)`` where `clamped` reports whether any value
    had to be clamped into [0, 255] because the input left the spec's box.
    """
    spec = get_spec(spec)
    if pre.domain != spec.name:
        raise DomainMismatchError(spec.name, pre.domain)
    data = pre.data
    if spec.kind == "caffe-bgr":
        raw = (data + np.array(CAFFE_BGR_MEANS))[:, :, ::-1]
    elif spec.kind == "inception-sym":
        raw = (data + 1.0) * 127.5
    else:
        raw = data
    clamped = bool(raw.min() < 0.0 or raw.max() > 255.0)
    raw = np.clip(raw, 0.0, 255.0)
    return ImageTensor(raw, "raw"), clamped


_POLICY_KINDS = ("none", "model-box", "pixel-box", "unit-box")


@dataclass(frozen=True)
class ClipPolicy:
    """The box adversarial iterates are pushed back into after every step."""

    kind: str

    def __post_init__(self):
        if self.kind not in _POLICY_KINDS:
            raise ValueError(f"unknown clip policy {self.kind!r}")


CLIP_NONE = ClipPolicy("none")
CLIP_MODEL_BOX = ClipPolicy("model-box")
CLIP_PIXEL_BOX = ClipPolicy("pixel-box")
CLIP_UNIT_BOX = ClipPolicy("unit-box")


def get_clip_policy(name) -> ClipPolicy:
    if isinstance(name, ClipPolicy):
        return name
    return ClipPolicy(name)


def policy_box(policy, spec, channels):
    """Per-channel (lo, hi) arrays for a policy, or None for the unconstrained one."""
    policy = get_clip_policy(policy)
    if policy.kind == "none":
        return None
    if policy.kind == "model-box":
        return _limit_arrays(get_spec(spec), channels)
    if policy.kind == "pixel-box":
        return np.zeros(channels), np.full(channels, 255.0)
    return np.zeros(channels), np.ones(channels)


def clip(policy, spec, img: ImageTensor) -> ImageTensor:
    """Clamp a pre-processed image into the policy box (identity for policy "none")."""
    spec = get_spec(spec)
    if img.domain != spec.name:
        raise DomainMismatchError(spec.name, img.domain)
    box = policy_box(policy, spec, img.shape[2])
    if box is None:
        return img
    lo, hi = box
    return ImageTensor(np.clip(img.data, lo, hi), img.domain)
