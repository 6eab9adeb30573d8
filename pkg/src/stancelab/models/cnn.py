"""Single-layer convolutional text classifier with manual backprop.

One bank of width-4 filters slides over the embedding rows, relu and a max
over valid window positions produce one feature per filter, and a softmax
readout maps the pooled vector to class probabilities. Valid positions are
those fully inside the true (unpadded) token span; a tweet shorter than the
filter width contributes exactly one window over its zero-padded rows.

Relu commutes with the max here (both monotone), so pooling is done on the
pre-activations and relu applied once to the pooled value; backprop routes
the pooled gradient to the argmax position and gates it on the cached
pre-activation sign.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.base import BaseEstimator, ClassifierMixin

from ..embeddings import TweetMatrix
from ..labels import CLASS_INDEX, CLASS_ORDER, N_CLASSES, ProbDist, Stance
from .config import TrainConfig
from .logreg import softmax
from .validation import check_is_fitted, check_matching_lengths, stance_indices

DEFAULT_N_FILTERS = 100
DEFAULT_FILTER_WIDTH = 4
INIT_SCALE = 0.05


@dataclass
class CnnModel:
    """filters (F, w, dim), filter_biases (F,), output_weights (3, F), output_biases (3,)."""

    filters: np.ndarray
    filter_biases: np.ndarray
    output_weights: np.ndarray
    output_biases: np.ndarray

    def __post_init__(self):
        self.filters = np.asarray(self.filters, dtype=np.float64)
        self.filter_biases = np.asarray(self.filter_biases, dtype=np.float64)
        self.output_weights = np.asarray(self.output_weights, dtype=np.float64)
        self.output_biases = np.asarray(self.output_biases, dtype=np.float64)
        if self.filters.ndim != 3:
            raise ValueError(f"filters must be (F, w, dim), got {self.filters.shape}")
        f = self.filters.shape[0]
        if self.filter_biases.shape != (f,):
            raise ValueError("filter_biases shape mismatch")
        if self.output_weights.shape != (N_CLASSES, f):
            raise ValueError("output_weights shape mismatch")
        if self.output_biases.shape != (N_CLASSES,):
            raise ValueError("output_biases shape mismatch")

    @property
    def n_filters(self) -> int:
        return self.filters.shape[0]

    @property
    def filter_width(self) -> int:
        return self.filters.shape[1]

    @property
    def dim(self) -> int:
        return self.filters.shape[2]


@dataclass
class CnnGradients:
    """Gradient arrays mirroring the model parameter shapes."""

    filters: np.ndarray
    filter_biases: np.ndarray
    output_weights: np.ndarray
    output_biases: np.ndarray


@dataclass
class CnnCache:
    """Forward-pass intermediates needed for the backward pass."""

    windows: np.ndarray      # (B, P, dim, w) views into the padded inputs
    pre: np.ndarray          # (B, P, F) pre-activations, every position
    valid: np.ndarray        # (B,) count of valid window positions
    argmax: np.ndarray       # (B, F) pooled position per filter
    pooled_pre: np.ndarray   # (B, F) pre-activation at the pooled position
    pooled: np.ndarray       # (B, F) relu of pooled_pre
    probs: np.ndarray        # (B, 3)


def init_cnn(dim: int, n_filters: int = DEFAULT_N_FILTERS,
             filter_width: int = DEFAULT_FILTER_WIDTH, seed: int = 0) -> CnnModel:
    """Draw every parameter from U[-0.05, 0.05] with a fixed draw order."""
    if dim < 1 or n_filters < 1 or filter_width < 1:
        raise ValueError("dim, n_filters and filter_width must be positive")
    rng = np.random.default_rng(seed)
    s = INIT_SCALE
    return CnnModel(
        filters=rng.uniform(-s, s, size=(n_filters, filter_width, dim)),
        filter_biases=rng.uniform(-s, s, size=n_filters),
        output_weights=rng.uniform(-s, s, size=(N_CLASSES, n_filters)),
        output_biases=rng.uniform(-s, s, size=N_CLASSES),
    )


def _stack(matrices: Sequence[TweetMatrix], filter_width: int,
           dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Stack tweet matrices into (B, L, dim) plus true lengths, padding rows
    so at least one full window exists."""
    if not matrices:
        raise ValueError("need at least one tweet matrix")
    rows = max(max(m.rows.shape[0] for m in matrices), filter_width)
    batch = np.zeros((len(matrices), rows, dim))
    lengths = np.zeros(len(matrices), dtype=np.int64)
    for i, m in enumerate(matrices):
        if m.rows.shape[1] != dim:
            raise ValueError(
                f"tweet matrix has dim {m.rows.shape[1]}, model expects {dim}"
            )
        batch[i, :m.rows.shape[0]] = m.rows
        lengths[i] = m.true_len
    return batch, lengths


def _forward_batch(model: CnnModel, batch: np.ndarray,
                   lengths: np.ndarray) -> CnnCache:
    w = model.filter_width
    n_pos = batch.shape[1] - w + 1
    windows = sliding_window_view(batch, w, axis=1)          # (B, P, dim, w)
    pre = np.einsum("bpdw,fwd->bpf", windows, model.filters) + model.filter_biases
    valid = np.clip(lengths - w + 1, 1, n_pos)
    in_span = np.arange(n_pos)[None, :] < valid[:, None]     # (B, P)
    masked = np.where(in_span[:, :, None], pre, -np.inf)
    argmax = masked.argmax(axis=1)                           # (B, F)
    pooled_pre = np.take_along_axis(masked, argmax[:, None, :], axis=1)[:, 0, :]
    pooled = np.maximum(pooled_pre, 0.0)
    probs = softmax(pooled @ model.output_weights.T + model.output_biases)
    return CnnCache(windows=windows, pre=pre, valid=valid, argmax=argmax,
                    pooled_pre=pooled_pre, pooled=pooled, probs=probs)


def _backward_batch(model: CnnModel, cache: CnnCache,
                    y_idx: np.ndarray) -> CnnGradients:
    """Gradients of the mean cross-entropy over the batch (no penalty terms)."""
    b = len(y_idx)
    dlogits = (cache.probs - np.eye(N_CLASSES)[y_idx]) / b   # (B, 3)
    d_out_b = dlogits.sum(axis=0)
    d_out_w = dlogits.T @ cache.pooled
    dpooled = dlogits @ model.output_weights                 # (B, F)
    dpre = dpooled * (cache.pooled_pre > 0.0)
    d_filter_b = dpre.sum(axis=0)
    chosen = cache.windows[np.arange(b)[:, None], cache.argmax]  # (B, F, dim, w)
    d_filters = np.einsum("bf,bfdw->fwd", dpre, chosen)
    return CnnGradients(filters=d_filters, filter_biases=d_filter_b,
                        output_weights=d_out_w, output_biases=d_out_b)


def cnn_forward(model: CnnModel, matrix: TweetMatrix) -> tuple[ProbDist, CnnCache]:
    """Run one tweet through the network; the cache keeps the pre-activations
    and argmax positions the backward pass needs."""
    batch, lengths = _stack([matrix], model.filter_width, model.dim)
    cache = _forward_batch(model, batch, lengths)
    return ProbDist.from_array(cache.probs[0]), cache


def cnn_gradients(model: CnnModel, cache: CnnCache,
                  target: Stance) -> CnnGradients:
    """Cross-entropy gradients for a single cached example."""
    if cache.probs.shape[0] != 1:
        raise ValueError("cache does not hold a single example")
    return _backward_batch(model, cache, np.array([CLASS_INDEX[target]]))


def cnn_loss(cache: CnnCache, y_idx: np.ndarray) -> float:
    picked = cache.probs[np.arange(len(y_idx)), y_idx]
    return float(-np.mean(np.log(np.maximum(picked, 1e-300))))


class TextCnn(BaseEstimator, ClassifierMixin):
    """Convolutional classifier over padded embedding matrices.

    X is a sequence of TweetMatrix values; training runs seeded mini-batch
    gradient descent on mean cross-entropy plus ``l2`` times the squared
    filter and readout weights (biases unpenalized).
    """

    def __init__(self, n_filters: int = DEFAULT_N_FILTERS,
                 filter_width: int = DEFAULT_FILTER_WIDTH,
                 learning_rate: float = 0.01, epochs: int = 30,
                 batch_size: int = 32, l2: float = 1e-4, seed: int = 0):
        self.n_filters = n_filters
        self.filter_width = filter_width
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.l2 = l2
        self.seed = seed

    def fit(self, X: Sequence[TweetMatrix], y):
        check_matching_lengths(X, y)
        y_idx = stance_indices(y)
        if len(X) == 0:
            raise ValueError("cannot fit on an empty training set")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        dim = X[0].rows.shape[1]
        batch_all, lengths_all = _stack(X, self.filter_width, dim)
        model = init_cnn(dim, self.n_filters, self.filter_width, self.seed)
        rng = np.random.default_rng(self.seed + 1)
        lr = self.learning_rate

        for epoch in range(self.epochs):
            order = rng.permutation(len(X))
            for start in range(0, len(X), self.batch_size):
                idx = order[start:start + self.batch_size]
                cache = _forward_batch(model, batch_all[idx], lengths_all[idx])
                loss = cnn_loss(cache, y_idx[idx]) + self.l2 * (
                    np.sum(model.filters ** 2) + np.sum(model.output_weights ** 2)
                )
                if not np.isfinite(loss):
                    raise RuntimeError(
                        f"non-finite loss at epoch {epoch}, batch start {start}: "
                        f"lr={lr}, l2={self.l2}"
                    )
                g = _backward_batch(model, cache, y_idx[idx])
                model.filters -= lr * (g.filters + 2.0 * self.l2 * model.filters)
                model.filter_biases -= lr * g.filter_biases
                model.output_weights -= lr * (
                    g.output_weights + 2.0 * self.l2 * model.output_weights
                )
                model.output_biases -= lr * g.output_biases

        self.model_ = model
        self.classes_ = np.array(CLASS_ORDER)
        return self

    def predict_proba(self, X: Sequence[TweetMatrix],
                      chunk: int = 256) -> np.ndarray:
        check_is_fitted(self, "model_")
        out = []
        for start in range(0, len(X), chunk):
            part = X[start:start + chunk]
            batch, lengths = _stack(part, self.model_.filter_width,
                                    self.model_.dim)
            out.append(_forward_batch(self.model_, batch, lengths).probs)
        return np.concatenate(out, axis=0)

    def predict(self, X: Sequence[TweetMatrix]) -> np.ndarray:
        probs = self.predict_proba(X)
        return np.array([CLASS_ORDER[i] for i in np.argmax(probs, axis=1)])


def train_cnn(data: list[tuple[TweetMatrix, Stance]],
              cfg: TrainConfig,
              n_filters: int = DEFAULT_N_FILTERS,
              filter_width: int = DEFAULT_FILTER_WIDTH) -> CnnModel:
    """Functional wrapper around :class:`TextCnn`."""
    if not data:
        raise ValueError("cannot fit on an empty training set")
    X = [m for m, _ in data]
    y = [cls for _, cls in data]
    est = TextCnn(n_filters=n_filters, filter_width=filter_width,
                  learning_rate=cfg.learning_rate, epochs=cfg.epochs,
                  batch_size=cfg.batch_size, l2=cfg.l2, seed=cfg.seed)
    return est.fit(X, y).model_
