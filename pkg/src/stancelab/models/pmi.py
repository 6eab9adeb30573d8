"""Hashtag baseline: class association scores from pointwise mutual information.

Probabilities are tweet-level relative frequencies: a tweet counts once per
hashtag regardless of repetitions. Hashtag/class pairs that never co-occur get
a minus-infinity sentinel, so a class backed by no seen hashtag can only win
the argmax when every class is in that situation (in which case, like for
hashtag-free tweets and ties, the prediction is uniformly random).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..labels import CLASS_ORDER, Stance
from .validation import as_stances, check_is_fitted

NEG_INF = float("-inf")


@dataclass
class PmiTable:
    """Scores for every (hashtag, class) pair seen at training time."""

    scores: dict[tuple[str, Stance], float] = field(default_factory=dict)
    classes: tuple[Stance, ...] = CLASS_ORDER

    def score(self, hashtag: str, stance: Stance) -> float:
        return self.scores.get((hashtag, stance), NEG_INF)

    def hashtags(self) -> set[str]:
        return {hs for hs, _ in self.scores}


def compute_pmi(labeled: Sequence[tuple[Iterable[str], Stance]]) -> PmiTable:
    """Build a PMI table from (hashtag set, class) pairs, one per tweet.

    For a pair with positive joint count the score is
    ``log(p(hs, c) / (p(hs) * p(c)))`` with natural log; a zero joint count
    yields the minus-infinity sentinel.
    """
    if not labeled:
        raise ValueError("compute_pmi requires at least one labeled tweet")
    n = len(labeled)
    class_counts: Counter = Counter()
    hashtag_counts: Counter = Counter()
    joint_counts: Counter = Counter()
    for hashtags, stance in labeled:
        hashtags = set(hashtags)
        class_counts[stance] += 1
        for hs in hashtags:
            hashtag_counts[hs] += 1
            joint_counts[hs, stance] += 1

    scores: dict[tuple[str, Stance], float] = {}
    for hs in hashtag_counts:
        for stance in CLASS_ORDER:
            joint = joint_counts.get((hs, stance), 0)
            if joint > 0 and class_counts[stance] > 0:
                scores[hs, stance] = math.log(
                    joint * n / (hashtag_counts[hs] * class_counts[stance])
                )
            else:
                scores[hs, stance] = NEG_INF
    return PmiTable(scores=scores)


def hashtag_predict(table: PmiTable, hashtags: Iterable[str],
                    rng: np.random.Generator) -> Stance:
    """Predict the class with the highest PMI score over the tweet's hashtags.

    Hashtag-free tweets, tweets whose hashtags were all never seen, and argmax
    ties are resolved by a uniform draw among the tied classes.
    """
    best = {stance: NEG_INF for stance in table.classes}
    for hs in hashtags:
        for stance in table.classes:
            s = table.score(hs, stance)
            if s > best[stance]:
                best[stance] = s
    top = max(best.values())
    candidates = [stance for stance in table.classes if best[stance] == top]
    if len(candidates) == 1:
        return candidates[0]
    return candidates[int(rng.integers(len(candidates)))]


class HashtagPmiClassifier(BaseEstimator, ClassifierMixin):
    """Estimator wrapper around the PMI table; X is a sequence of hashtag sets."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def fit(self, X: Sequence[Iterable[str]], y):
        y = as_stances(y)
        if len(X) != len(y):
            raise ValueError("X and y length mismatch")
        self.table_ = compute_pmi(list(zip(X, y)))
        self.classes_ = np.array(CLASS_ORDER)
        return self

    def predict(self, X: Sequence[Iterable[str]]) -> np.ndarray:
        check_is_fitted(self, "table_")
        rng = np.random.default_rng(self.seed)
        return np.array([hashtag_predict(self.table_, hs, rng) for hs in X])
