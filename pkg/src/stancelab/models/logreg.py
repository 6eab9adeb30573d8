"""Multinomial logistic regression on averaged embeddings.

Hand-rolled mini-batch gradient descent: the point of keeping it explicit is
that the gradients double as the reference for the convolutional model's
output layer. Weights start at zero so runs are reproducible without an init
draw; only the shuffle order consumes randomness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..labels import CLASS_ORDER, N_CLASSES, ProbDist, Stance
from .config import TrainConfig
from .validation import (
    check_feature_matrix,
    check_is_fitted,
    check_matching_lengths,
    stance_indices,
)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row max for stability."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=-1, keepdims=True)


@dataclass
class LogRegModel:
    """Weights (n_classes, dim) and biases (n_classes,)."""

    weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.weights.ndim != 2 or self.weights.shape[0] != N_CLASSES:
            raise ValueError(f"weights must be ({N_CLASSES}, dim), got {self.weights.shape}")
        if self.biases.shape != (N_CLASSES,):
            raise ValueError(f"biases must be ({N_CLASSES},), got {self.biases.shape}")

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def logreg_proba(model: LogRegModel, X: np.ndarray) -> np.ndarray:
    X = check_feature_matrix(X, dim=model.dim)
    return softmax(X @ model.weights.T + model.biases)


def _ce_loss(probs: np.ndarray, y_idx: np.ndarray, weights: np.ndarray,
             l2: float) -> float:
    picked = probs[np.arange(len(y_idx)), y_idx]
    # clip only guards the log; picked == 0 would already be a non-finite loss
    return float(-np.mean(np.log(np.maximum(picked, 1e-300)))
                 + l2 * np.sum(weights ** 2))


class SoftmaxRegression(BaseEstimator, ClassifierMixin):
    """Three-class softmax regression trained by mini-batch gradient descent.

    The objective is mean cross-entropy plus ``l2 * sum(W**2)``; biases are
    not penalized. Batches are drawn from a seeded shuffle each epoch, and the
    final short batch is kept.
    """

    def __init__(self, learning_rate: float = 0.05, epochs: int = 30,
                 batch_size: int = 32, l2: float = 1e-4, seed: int = 0):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.l2 = l2
        self.seed = seed

    def fit(self, X, y):
        X = check_feature_matrix(X)
        check_matching_lengths(X, y)
        y_idx = stance_indices(y)
        if len(X) == 0:
            raise ValueError("cannot fit on an empty training set")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        n, dim = X.shape
        W = np.zeros((N_CLASSES, dim))
        b = np.zeros(N_CLASSES)
        onehot = np.eye(N_CLASSES)[y_idx]
        rng = np.random.default_rng(self.seed)

        for epoch in range(self.epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                batch = order[start:start + self.batch_size]
                Xb, Yb = X[batch], onehot[batch]
                probs = softmax(Xb @ W.T + b)
                loss = _ce_loss(probs, y_idx[batch], W, self.l2)
                if not np.isfinite(loss):
                    raise RuntimeError(
                        f"non-finite loss at epoch {epoch}, batch start {start}: "
                        f"loss={loss}, lr={self.learning_rate}, l2={self.l2}"
                    )
                G = (probs - Yb) / len(batch)
                W -= self.learning_rate * (G.T @ Xb + 2.0 * self.l2 * W)
                b -= self.learning_rate * G.sum(axis=0)

        self.model_ = LogRegModel(weights=W, biases=b)
        self.classes_ = np.array(CLASS_ORDER)
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        return logreg_proba(self.model_, X)

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        return np.array([CLASS_ORDER[i] for i in np.argmax(probs, axis=1)])


def train_logreg(data: list[tuple[np.ndarray, Stance]],
                 cfg: TrainConfig) -> LogRegModel:
    """Functional wrapper around :class:`SoftmaxRegression`."""
    if not data:
        raise ValueError("cannot fit on an empty training set")
    X = np.stack([np.asarray(vec, dtype=np.float64) for vec, _ in data])
    y = [cls for _, cls in data]
    est = SoftmaxRegression(learning_rate=cfg.learning_rate, epochs=cfg.epochs,
                            batch_size=cfg.batch_size, l2=cfg.l2, seed=cfg.seed)
    return est.fit(X, y).model_


def predict_logreg(model: LogRegModel, x: np.ndarray) -> ProbDist:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a single feature vector, got shape {x.shape}")
    return ProbDist.from_array(logreg_proba(model, x[None, :])[0])
