"""Synthetic corpus with known structure for end-to-end checks.

Class identity is carried by disjoint trigger-token sets (a contiguous run
of 3-4 triggers per tweet) on top of class-neutral filler tokens; a slice of
tweets is heavily diluted with fillers, which drags down averaged-embedding
representations but not max-pooled ones. Labels carry 20% noise resampled
from the class prior, so the class skew survives noising and a perfect
text classifier tops out around macro F1 0.87 rather than 1.0. Well over
half of the tweets carry a hashtag that agrees with the true class 90% of
the time, giving the hashtag baseline real but partial signal. Retweets of a
subset of tweets provide the retweet graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingTable
from .corpus import RT_PLACEHOLDER, URL_PLACEHOLDER, USER_PLACEHOLDER
from .labels import CLASS_ORDER, Stance

DEFAULT_CLASS_WEIGHTS = (512, 910, 6923)
EMBED_DIM = 16
N_TRIGGERS = 10
N_FILLERS = 40
N_TAGS = 3
HASHTAG_RATE = 0.6
HASHTAG_AGREEMENT = 0.9
HEAVY_RATE = 0.4

_CLASS_CODE = {Stance.PRO_RUSSIAN: "r", Stance.PRO_UKRAINIAN: "u",
               Stance.NEUTRAL: "n"}


def apportion(total: int, weights: tuple[int, ...]) -> list[int]:
    """Largest-remainder split of ``total`` proportional to ``weights``."""
    shares = [total * w / sum(weights) for w in weights]
    counts = [int(s) for s in shares]
    remainders = sorted(range(len(weights)),
                        key=lambda i: shares[i] - counts[i], reverse=True)
    for i in remainders[:total - sum(counts)]:
        counts[i] += 1
    return counts


def trigger_tokens(stance: Stance) -> list[str]:
    code = _CLASS_CODE[stance]
    return [f"sig{code}{i}" for i in range(N_TRIGGERS)]


def _build_table(rng: np.random.Generator) -> EmbeddingTable:
    """Trigger vectors sit on per-class axes; everything else is class-blind
    noise in the remaining dimensions."""
    vectors: dict[str, np.ndarray] = {}

    def neutral_noise() -> np.ndarray:
        v = np.zeros(EMBED_DIM)
        v[3:] = 0.6 * rng.standard_normal(EMBED_DIM - 3)
        return v

    for axis, stance in enumerate(CLASS_ORDER):
        for token in trigger_tokens(stance):
            v = np.zeros(EMBED_DIM)
            v[axis] = 2.5
            v[3:] = 0.2 * rng.standard_normal(EMBED_DIM - 3)
            vectors[token] = v
    for i in range(N_FILLERS):
        vectors[f"filler{i}"] = neutral_noise()
    for stance in CLASS_ORDER:
        for k in range(N_TAGS):
            vectors[f"{_CLASS_CODE[stance]}tag{k}"] = neutral_noise()
    for token in (RT_PLACEHOLDER, URL_PLACEHOLDER, USER_PLACEHOLDER):
        vectors[token] = np.zeros(EMBED_DIM)
    return EmbeddingTable(dim=EMBED_DIM, vectors=vectors)


@dataclass
class SyntheticCorpus:
    records: list[dict]              # JSONL-ready tweet records
    labels: dict[str, Stance]        # noisy labels for original tweets
    true_labels: dict[str, Stance]   # pre-noise classes, for diagnostics
    table: EmbeddingTable


def make_synthetic(n_originals: int = 1500, n_retweets: int = 600,
                   seed: int = 7, noise_rate: float = 0.2,
                   class_weights: tuple[int, ...] = DEFAULT_CLASS_WEIGHTS,
                   n_users: int = 150) -> SyntheticCorpus:
    rng = np.random.default_rng([seed, 0])
    counts = apportion(n_originals, class_weights)
    prior = np.array(class_weights, dtype=np.float64) / sum(class_weights)

    classes: list[Stance] = []
    for stance, count in zip(CLASS_ORDER, counts):
        classes.extend([stance] * count)
    rng.shuffle(classes)

    records = []
    true_labels: dict[str, Stance] = {}
    texts: dict[str, str] = {}
    authors: dict[str, str] = {}
    for i, stance in enumerate(classes):
        tweet_id = f"s{i:05d}"
        user = f"user{int(rng.integers(n_users)):03d}"
        heavy = rng.random() < HEAVY_RATE
        n_fill = int(rng.integers(20, 35)) if heavy else int(rng.integers(5, 10))
        tokens = [f"filler{int(rng.integers(N_FILLERS))}"
                  for _ in range(n_fill)]
        run_len = int(rng.integers(3, 5))
        run = list(rng.choice(trigger_tokens(stance), size=run_len,
                              replace=False))
        insert_at = int(rng.integers(len(tokens) + 1))
        tokens[insert_at:insert_at] = run
        if rng.random() < HASHTAG_RATE:
            if rng.random() < HASHTAG_AGREEMENT:
                tag_class = stance
            else:
                others = [s for s in CLASS_ORDER if s is not stance]
                tag_class = others[int(rng.integers(len(others)))]
            tokens.append(
                f"#{_CLASS_CODE[tag_class]}tag{int(rng.integers(N_TAGS))}")
        text = " ".join(tokens)
        records.append({"id": tweet_id, "user_id": user,
                        "timestamp": 1000 + i, "text": text})
        true_labels[tweet_id] = stance
        texts[tweet_id] = text
        authors[tweet_id] = user

    # label noise: a noisy tweet's label is redrawn from the class prior,
    # so the label marginal stays at the skew
    labels = dict(true_labels)
    original_ids = [r["id"] for r in records]
    n_noisy = round(noise_rate * n_originals)
    noisy = rng.choice(n_originals, size=n_noisy, replace=False)
    for idx in noisy:
        drawn = rng.choice(len(CLASS_ORDER), p=prior)
        labels[original_ids[int(idx)]] = CLASS_ORDER[int(drawn)]

    # retweets skew toward early tweets so some user pairs repeat
    for j in range(n_retweets):
        src = int(n_originals * rng.random() ** 2)
        src_id = original_ids[src]
        author = authors[src_id]
        while True:
            retweeter = f"user{int(rng.integers(n_users)):03d}"
            if retweeter != author:
                break
        records.append({
            "id": f"r{j:05d}",
            "user_id": retweeter,
            "timestamp": 10000 + j,
            "text": f"RT @{author}: {texts[src_id]}",
        })

    table = _build_table(np.random.default_rng([seed, 1]))
    return SyntheticCorpus(records=records, labels=labels,
                           true_labels=true_labels, table=table)


def write_synthetic(syn: SyntheticCorpus, out_dir: str | Path) -> dict[str, Path]:
    """Write corpus JSONL, labels TSV, and the embedding table; returns
    the paths keyed by role."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus_path = out_dir / "corpus.jsonl"
    labels_path = out_dir / "labels.tsv"
    table_path = out_dir / "embeddings.txt"

    with open(corpus_path, "w", encoding="utf-8") as fh:
        for record in syn.records:
            fh.write(json.dumps(record, sort_keys=True,
                                separators=(",", ":"),
                                ensure_ascii=False) + "\n")
    with open(labels_path, "w", encoding="utf-8") as fh:
        for tweet_id in sorted(syn.labels):
            fh.write(f"{tweet_id}\t{syn.labels[tweet_id].value}\n")
    with open(table_path, "w", encoding="utf-8") as fh:
        words = sorted(syn.table.vectors)
        fh.write(f"{len(words)} {syn.table.dim}\n")
        for word in words:
            cells = " ".join(repr(float(x)) for x in syn.table.vectors[word])
            fh.write(f"{word} {cells}\n")
    return {"corpus": corpus_path, "labels": labels_path, "table": table_path}
