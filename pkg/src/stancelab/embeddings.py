"""Pre-trained word vector tables and tweet embedding (average / padded sequence).

The on-disk format is whitespace-separated text: an optional ``count dim``
header line followed by ``token v1 ... v_dim`` data lines, values parsed as
decimal floats.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

logger = logging.getLogger(__name__)

DEFAULT_MAX_LEN = 50


@dataclass(eq=False)
class EmbeddingTable:
    """Token -> fixed-dimension vector map with a dedicated out-of-vocabulary vector.

    Out-of-vocabulary tokens (including the preprocessing placeholders, which
    no pre-trained table covers) map to the all-zero ``oov_vector``.
    """

    dim: int
    vectors: dict[str, np.ndarray]
    oov_vector: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.oov_vector is None:
            self.oov_vector = np.zeros(self.dim)
        if self.oov_vector.shape != (self.dim,):
            raise ValueError("oov_vector length does not match dim")
        for token, vec in self.vectors.items():
            if vec.shape != (self.dim,):
                raise ValueError(f"vector for {token!r} has length {vec.shape}, expected {self.dim}")

    def lookup(self, token: str) -> np.ndarray:
        return self.vectors.get(token, self.oov_vector)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.oov_vector, other.oov_vector)
            and self.vectors.keys() == other.vectors.keys()
            and all(np.array_equal(v, other.vectors[k]) for k, v in self.vectors.items())
        )


@dataclass(frozen=True)
class TweetMatrix:
    """A ``max_len x dim`` embedding matrix; rows past ``true_len`` are zero padding."""

    rows: np.ndarray
    true_len: int

    def __post_init__(self):
        if self.true_len > self.rows.shape[0]:
            raise ValueError("true_len exceeds matrix rows")


def load_embedding_table(path: str | Path) -> EmbeddingTable:
    """Parse an embedding text file.

    The dimension is inferred from the first data line; lines with the wrong
    number of fields (or unparsable values) are skipped and counted. An empty
    file, a file with no usable data lines, or more than 50% skipped lines is
    a fatal error.
    """
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    n_data = 0
    n_skipped = 0
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    lines = [line for line in lines if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty embedding file")

    start = 0
    header = lines[0].split()
    if len(header) == 2:
        try:
            int(header[0]), int(header[1])
            start = 1
        except ValueError:
            pass

    for line in lines[start:]:
        parts = line.split()
        if dim is None:
            if len(parts) < 2:
                n_data += 1
                n_skipped += 1
                continue
            dim = len(parts) - 1
        n_data += 1
        if len(parts) != dim + 1:
            n_skipped += 1
            continue
        try:
            vec = np.array([float(v) for v in parts[1:]])
        except ValueError:
            n_skipped += 1
            continue
        vectors[parts[0]] = vec

    if dim is None or not vectors:
        raise ValueError(f"{path}: no usable embedding lines")
    if n_skipped > 0.5 * n_data:
        raise ValueError(f"{path}: {n_skipped}/{n_data} lines malformed or of inconsistent dimension")
    if n_skipped:
        logger.warning("%s: skipped %d of %d embedding lines", path, n_skipped, n_data)
    return EmbeddingTable(dim=dim, vectors=vectors)


def embed_average(table: EmbeddingTable, tokens: Iterable[str]) -> np.ndarray:
    """Arithmetic mean of the tokens' vectors; an empty token list gives the OOV vector."""
    tokens = list(tokens)
    if not tokens:
        return table.oov_vector.copy()
    total = np.zeros(table.dim)
    for token in tokens:
        total += table.lookup(token)
    return total / len(tokens)


def embed_sequence(table: EmbeddingTable, tokens: Sequence[str],
                   max_len: int = DEFAULT_MAX_LEN) -> TweetMatrix:
    """Stack the first ``max_len`` token vectors; the remaining rows stay zero."""
    if max_len < 1:
        raise ValueError("max_len must be positive")
    rows = np.zeros((max_len, table.dim))
    true_len = min(len(tokens), max_len)
    for i in range(true_len):
        rows[i] = table.lookup(tokens[i])
    return TweetMatrix(rows=rows, true_len=true_len)


class AverageEmbedding(BaseEstimator, TransformerMixin):
    """Transformer mapping token lists to averaged embedding vectors."""

    def __init__(self, table: EmbeddingTable | None = None):
        self.table = table

    def fit(self, X, y=None):
        if self.table is None:
            raise ValueError("AverageEmbedding requires an embedding table")
        return self

    def transform(self, X: Iterable[Sequence[str]]) -> np.ndarray:
        self.fit(X)
        return np.stack([embed_average(self.table, tokens) for tokens in X])


class SequenceEmbedding(BaseEstimator, TransformerMixin):
    """Transformer mapping token lists to padded :class:`TweetMatrix` values."""

    def __init__(self, table: EmbeddingTable | None = None, max_len: int = DEFAULT_MAX_LEN):
        self.table = table
        self.max_len = max_len

    def fit(self, X, y=None):
        if self.table is None:
            raise ValueError("SequenceEmbedding requires an embedding table")
        return self

    def transform(self, X: Iterable[Sequence[str]]) -> list[TweetMatrix]:
        self.fit(X)
        return [embed_sequence(self.table, tokens, self.max_len) for tokens in X]
