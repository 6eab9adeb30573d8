"""Class rebalancing and the random baseline."""

from __future__ import annotations

from collections import defaultdict
from typing import Sequence, TypeVar

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..labels import CLASS_ORDER, Stance
from .validation import as_stances, check_is_fitted

T = TypeVar("T")


def upsample(train: Sequence[tuple[T, Stance]], rng: np.random.Generator,
             classes: Sequence[Stance] | None = None) -> list[tuple[T, Stance]]:
    """Repeat minority-class examples until every class matches the largest.

    Every original example appears at least once; the extra copies are drawn
    with replacement. When ``classes`` is given, each listed class must have
    at least one example; otherwise the classes present in ``train`` are
    equalized among themselves.
    """
    if not train:
        raise ValueError("upsample requires a non-empty training set")
    by_class: dict[Stance, list[tuple[T, Stance]]] = defaultdict(list)
    for example in train:
        by_class[example[1]].append(example)
    if classes is None:
        classes = [s for s in CLASS_ORDER if s in by_class]
    for stance in classes:
        if not by_class.get(stance):
            raise ValueError(f"class {stance.value} has zero examples")
    target = max(len(by_class[s]) for s in classes)

    out = list(train)
    for stance in classes:
        members = by_class[stance]
        deficit = target - len(members)
        if deficit > 0:
            picks = rng.integers(len(members), size=deficit)
            out.extend(members[int(i)] for i in picks)
    return out


def random_predict(rng: np.random.Generator) -> Stance:
    """Uniform draw over the three classes, ignoring the input entirely."""
    return CLASS_ORDER[int(rng.integers(len(CLASS_ORDER)))]


class RandomClassifier(BaseEstimator, ClassifierMixin):
    """Chance baseline: predicts a uniformly random class for every input."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def fit(self, X, y):
        as_stances(y)
        self.classes_ = np.array(CLASS_ORDER)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "classes_")
        rng = np.random.default_rng(self.seed)
        return np.array([random_predict(rng) for _ in range(len(X))])

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "classes_")
        return np.full((len(X), len(CLASS_ORDER)), 1.0 / len(CLASS_ORDER))
