"""Adversarial-example laboratory: attacks, pre-processing, detectors, transfer harness."""

from .errors import (
    AdvLabError,
    ConfigError,
    CorpusError,
    DomainMismatchError,
    ParseError,
    ShapeMismatchError,
)
from .preprocess import (
    CAFFE_BGR,
    CLIP_MODEL_BOX,
    CLIP_NONE,
    CLIP_PIXEL_BOX,
    CLIP_UNIT_BOX,
    IDENTITY,
    INCEPTION_SYM,
    ClipPolicy,
    PreprocessSpec,
    apply,
    channel_limits,
    clip,
    get_clip_policy,
    get_spec,
    invert,
)
from .tensor import ChannelStats, ImageTensor, channel_stats, elementwise, l2_distance, linf_distance, tensor

__version__ = "0.1.0"

__all__ = [
    "AdvLabError",
    "CAFFE_BGR",
    "CLIP_MODEL_BOX",
    "CLIP_NONE",
    "CLIP_PIXEL_BOX",
    "CLIP_UNIT_BOX",
    "ChannelStats",
    "ClipPolicy",
    "ConfigError",
    "CorpusError",
    "DomainMismatchError",
    "IDENTITY",
    "INCEPTION_SYM",
    "ImageTensor",
    "ParseError",
    "PreprocessSpec",
    "ShapeMismatchError",
    "apply",
    "channel_limits",
    "channel_stats",
    "clip",
    "elementwise",
    "get_clip_policy",
    "get_spec",
    "invert",
    "l2_distance",
    "linf_distance",
    "tensor",
    "__version__",
]
