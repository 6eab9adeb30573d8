"""Stance classes, label provenance, and probability distributions over classes."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class Stance(Enum):
    PRO_RUSSIAN = "pro_russian"
    PRO_UKRAINIAN = "pro_ukrainian"
    NEUTRAL = "neutral"


# Fixed class order used for all vectors, matrices and serialized files.
CLASS_ORDER: tuple[Stance, Stance, Stance] = (
    Stance.PRO_RUSSIAN,
    Stance.PRO_UKRAINIAN,
    Stance.NEUTRAL,
)

CLASS_INDEX: dict[Stance, int] = {c: i for i, c in enumerate(CLASS_ORDER)}

N_CLASSES = len(CLASS_ORDER)


def parse_stance(value: str) -> Stance:
    try:
        return Stance(value)
    except ValueError:
        raise ValueError(f"unknown stance label: {value!r}") from None


class Provenance(Enum):
    MANUAL = "manual"
    PREDICTED = "predicted"
    TRIAGE_CONFIRMED = "triage_confirmed"
    PROPAGATED = "propagated"


@dataclass(frozen=True)
class StanceLabel:
    stance: Stance
    provenance: Provenance


@dataclass(frozen=True)
class ProbDist:
    """A probability distribution over the three stance classes.

    Entries must be non-negative and sum to 1 within 1e-9.
    """

    pro_russian: float
    pro_ukrainian: float
    neutral: float

    def __post_init__(self):
        vec = (self.pro_russian, self.pro_ukrainian, self.neutral)
        if any(p < 0 for p in vec):
            raise ValueError(f"negative probability in {vec}")
        if abs(sum(vec) - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {sum(vec)!r}, not 1")

    @classmethod
    def from_array(cls, probs) -> "ProbDist":
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (N_CLASSES,):
            raise ValueError(f"expected {N_CLASSES} probabilities, got shape {probs.shape}")
        return cls(float(probs[0]), float(probs[1]), float(probs[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.pro_russian, self.pro_ukrainian, self.neutral])

    def prob(self, stance: Stance) -> float:
        return float(self.as_array()[CLASS_INDEX[stance]])

    def argmax(self) -> Stance:
        return CLASS_ORDER[int(np.argmax(self.as_array()))]
