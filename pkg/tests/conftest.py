"""Shared fixtures: tiny corpora, embedding tables, and graph builders."""

from __future__ import annotations

import json

import numpy as np
import pytest

from stancelab.corpus import Corpus, Tweet, ingest_corpus, prepare_corpus
from stancelab.embeddings import EmbeddingTable
from stancelab.network import EdgeRecord, RetweetGraph, edge_key


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path


def corpus_from_rows(tmp_path, rows, name="corpus.jsonl") -> Corpus:
    """Round rows through the on-disk format, then preprocess and group."""
    path = write_jsonl(tmp_path / name, rows)
    return prepare_corpus(ingest_corpus(path))


def tweet_row(tweet_id, user_id, text, timestamp=1000, label=None, lang=None):
    row = {"id": tweet_id, "user_id": user_id, "timestamp": timestamp,
           "text": text}
    if label is not None:
        row["label"] = label
    if lang is not None:
        row["lang"] = lang
    return row


def make_table(tokens, dim=4, seed=0) -> EmbeddingTable:
    """Deterministic random vectors for the given tokens, zero OOV vector."""
    rng = np.random.default_rng(seed)
    vectors = {tok: rng.normal(size=dim) for tok in sorted(tokens)}
    return EmbeddingTable(dim=dim, vectors=vectors,
                          oov_vector=np.zeros(dim))


def graph_of(edges, extra_nodes=()) -> RetweetGraph:
    """Build a graph from (user_a, user_b) pairs or (a, b, tweet_ids)."""
    records = {}
    nodes = set(extra_nodes)
    for entry in edges:
        if len(entry) == 2:
            a, b = entry
            tweet_ids = frozenset({f"t-{a}-{b}"})
        else:
            a, b, ids = entry
            tweet_ids = frozenset(ids)
        key = edge_key(a, b)
        records[key] = EdgeRecord(tweet_ids=tweet_ids)
        nodes.update(key)
    return RetweetGraph(nodes=frozenset(nodes), edges=records)


@pytest.fixture
def retweet_rows():
    """Two users retweeting a third; one unrelated original."""
    return [
        tweet_row("t1", "alice", "Convoy spotted near the border today",
                  timestamp=100, label="pro_russian"),
        tweet_row("t2", "bob", "RT @alice: Convoy spotted near the border today",
                  timestamp=200),
        tweet_row("t3", "carol", "RT @alice: Convoy spotted near the border today",
                  timestamp=300),
        tweet_row("t4", "dave", "Completely unrelated statement", timestamp=400),
    ]
