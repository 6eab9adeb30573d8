"""Feature assembly and model orchestration over a prepared corpus.

The evaluation protocol scores original tweets only (retweet duplicates
collapse onto their originals), while prediction for graph triage covers
every tweet, since retweet edges carry the retweet ids.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

from .corpus import Corpus, extract_hashtags
from .embeddings import DEFAULT_MAX_LEN, EmbeddingTable, embed_average, embed_sequence
from .evaluation import EvaluationReport, cross_validate
from .labels import CLASS_ORDER, ProbDist, Stance
from .models import (
    HashtagPmiClassifier,
    RandomClassifier,
    SoftmaxRegression,
    TextCnn,
)
from .models.sampling import upsample

FAMILIES = ("random", "pmi", "logreg", "cnn")
EMBEDDING_FAMILIES = ("logreg", "cnn")


def fold_seed_of(seed: int, fold_id: int) -> int:
    """Stable per-fold integer seed derived from the run seed."""
    return int(np.random.default_rng([seed, fold_id, 17]).integers(2 ** 31 - 1))


def original_ids(corpus: Corpus) -> list[str]:
    if not corpus.groups:
        raise ValueError("corpus must be prepared before feature assembly")
    return sorted(g.original_id for g in corpus.groups.values())


def _feature_of(corpus: Corpus, family: str, tweet_id: str,
                table: EmbeddingTable | None, max_len: int):
    if family == "random":
        return 0.0
    if family == "pmi":
        return extract_hashtags(corpus.tweet_by_id[tweet_id].raw_text)
    tokens = corpus.processed[tweet_id].tokens
    if family == "logreg":
        return embed_average(table, tokens)
    if family == "cnn":
        return embed_sequence(table, tokens, max_len=max_len)
    raise ValueError(f"unknown model family {family!r}")


def assemble_features(corpus: Corpus, family: str,
                      table: EmbeddingTable | None = None,
                      max_len: int = DEFAULT_MAX_LEN,
                      ids: list[str] | None = None) -> dict[str, Any]:
    """Feature per tweet id; defaults to the labeled originals."""
    if family not in FAMILIES:
        raise ValueError(f"unknown model family {family!r}")
    if family in EMBEDDING_FAMILIES and table is None:
        raise ValueError(f"family {family!r} needs an embedding table")
    if ids is None:
        ids = [i for i in original_ids(corpus) if i in corpus.labels]
    return {i: _feature_of(corpus, family, i, table, max_len) for i in ids}


def make_estimator_factory(family: str, seed: int,
                           **overrides) -> Callable[[int], Any]:
    def factory(fold_id: int):
        fold_seed = fold_seed_of(seed, fold_id)
        if family == "random":
            return RandomClassifier(seed=fold_seed)
        if family == "pmi":
            return HashtagPmiClassifier(seed=fold_seed)
        if family == "logreg":
            return SoftmaxRegression(seed=fold_seed, **overrides)
        if family == "cnn":
            return TextCnn(seed=fold_seed, **overrides)
        raise ValueError(f"unknown model family {family!r}")
    return factory


def evaluate_family(corpus: Corpus, family: str,
                    table: EmbeddingTable | None = None, n_folds: int = 10,
                    seed: int = 0, target_precision: float = 0.8,
                    max_len: int = DEFAULT_MAX_LEN,
                    **overrides) -> EvaluationReport:
    """Run the fold protocol for one model family on the labeled originals."""
    features = assemble_features(corpus, family, table, max_len)
    labels = {i: corpus.labels[i].stance for i in features}
    train_only = frozenset(i for i in features if i in corpus.train_only)
    return cross_validate(
        features, labels,
        make_estimator=make_estimator_factory(family, seed, **overrides),
        n_folds=n_folds, seed=seed, train_only=train_only,
        upsample_train=family in EMBEDDING_FAMILIES,
        target_precision=target_precision,
    )


def train_family(corpus: Corpus, family: str,
                 table: EmbeddingTable | None = None, seed: int = 0,
                 max_len: int = DEFAULT_MAX_LEN, **overrides):
    """Fit one estimator on every labeled original (upsampled for the
    gradient-trained families)."""
    features = assemble_features(corpus, family, table, max_len)
    ids = sorted(features)
    pairs = [(features[i], corpus.labels[i].stance) for i in ids]
    if family in EMBEDDING_FAMILIES:
        pairs = upsample(pairs, np.random.default_rng([seed, 999]))
    X = [f for f, _ in pairs]
    y = [s for _, s in pairs]
    est = make_estimator_factory(family, seed, **overrides)(0)
    est.fit(X, y)
    return est


def predict_all(corpus: Corpus, family: str, estimator,
                table: EmbeddingTable | None = None,
                max_len: int = DEFAULT_MAX_LEN) -> dict[str, ProbDist]:
    """Class probabilities for every tweet in the corpus, retweets included."""
    if not hasattr(estimator, "predict_proba"):
        raise ValueError(
            f"family {family!r} yields no per-class probabilities")
    ids = sorted(t.id for t in corpus.tweets)
    features = assemble_features(corpus, family, table, max_len, ids=ids)
    probs = np.asarray(estimator.predict_proba([features[i] for i in ids]))
    return {i: ProbDist.from_array(probs[k]) for k, i in enumerate(ids)}


def save_predictions(preds: Mapping[str, ProbDist], path: str | Path) -> None:
    """TSV of tweet_id and the three class probabilities, full precision."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("tweet_id\t" + "\t".join(f"p_{s.value}" for s in CLASS_ORDER)
                 + "\n")
        for tweet_id in sorted(preds):
            p = preds[tweet_id]
            cells = "\t".join(repr(p.prob(s)) for s in CLASS_ORDER)
            fh.write(f"{tweet_id}\t{cells}\n")


def load_predictions(path: str | Path) -> dict[str, ProbDist]:
    out: dict[str, ProbDist] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        expected = ["tweet_id"] + [f"p_{s.value}" for s in CLASS_ORDER]
        if header != expected:
            raise ValueError(f"bad predictions header in {path}: {header}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 fields")
            tweet_id = parts[0]
            if tweet_id in out:
                raise ValueError(f"{path}:{lineno}: duplicate id {tweet_id!r}")
            values = [float(x) for x in parts[1:]]
            out[tweet_id] = ProbDist(pro_russian=values[0],
                                     pro_ukrainian=values[1],
                                     neutral=values[2])
    return out
