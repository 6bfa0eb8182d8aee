"""Attack parameter bundles and the per-image result record."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..preprocess import CLIP_NONE, ClipPolicy
from ..tensor import ImageTensor, l2_distance, linf_distance

__all__ = ["FgsmConfig", "PgdConfig", "CwL2Config", "CwLinfConfig", "AdvRecord"]


@dataclass(frozen=True)
class FgsmConfig:
    """One signed gradient step of size epsilon."""

    epsilon: float
    targeted: bool = False
    target_label: Optional[int] = None
    clip_policy: ClipPolicy = CLIP_NONE
    seed: int = 0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.targeted and self.target_label is None:
            raise ValueError("targeted mode needs a target_label")


@dataclass(frozen=True)
class PgdConfig:
    """Iterated signed gradient steps projected back into the epsilon ball."""

    epsilon: float
    alpha: float
    steps: int
    random_starts: int = 0
    targeted: bool = False
    target_label: Optional[int] = None
    clip_policy: ClipPolicy = CLIP_NONE
    seed: int = 0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.random_starts < 0:
            raise ValueError("random_starts must be >= 0")
        if self.targeted and self.target_label is None:
            raise ValueError("targeted mode needs a target_label")


@dataclass(frozen=True)
class CwL2Config:
    """L2-minimal misclassification via binary search over the loss constant c.

    target_label None selects untargeted mode: the optimization drives toward
    the strongest class other than the true label.
    """

    kappa: float = 0.0
    search_steps: int = 9
    iterations: int = 1000
    learning_rate: float = 0.01
    initial_c: float = 1.0
    target_label: Optional[int] = None
    clip_policy: ClipPolicy = CLIP_NONE
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.kappa <= 100:
            raise ValueError("kappa must be in [0, 100]")
        if self.search_steps < 1:
            raise ValueError("search_steps must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.initial_c <= 0:
            raise ValueError("initial_c must be > 0")


@dataclass(frozen=True)
class CwLinfConfig:
    """Margin loss plus a shrinking per-pixel budget tau; needs a real clip box.

    learning_rate None picks 0.01 times the widest channel of the policy box,
    initial_tau None starts tau at that full width.
    """

    iterations: int = 100
    initial_tau: Optional[float] = None
    decay: float = 0.9
    c: float = 10.0
    learning_rate: Optional[float] = None
    clip_policy: ClipPolicy = field(default=CLIP_NONE)
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.initial_tau is not None and self.initial_tau <= 0:
            raise ValueError("initial_tau must be > 0")
        if not 0 < self.decay < 1:
            raise ValueError("decay must be in (0, 1)")
        if self.c <= 0:
            raise ValueError("c must be > 0")
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.clip_policy.kind == "none":
            raise ValueError("cw-linf computes its own value box and needs a clip policy other than 'none'")


@dataclass(frozen=True)
class AdvRecord:
    """Everything one attack run produced for one image, in pre-processed units."""

    original: ImageTensor
    adversarial: ImageTensor
    true_label: int
    clean_pred: int
    adv_pred: int
    linf: float
    l2: float
    succeeded: bool
    target_label: Optional[int] = None

    @staticmethod
    def build(original, adversarial, true_label, clean_pred, adv_pred, succeeded,
              target_label=None) -> "AdvRecord":
        """Fill the distance fields from the stored image pair."""
        return AdvRecord(
            original=original,
            adversarial=adversarial,
            true_label=int(true_label),
            clean_pred=int(clean_pred),
            adv_pred=int(adv_pred),
            linf=linf_distance(original.data, adversarial.data),
            l2=l2_distance(original.data, adversarial.data),
            succeeded=bool(succeeded),
            target_label=None if target_label is None else int(target_label),
        )
