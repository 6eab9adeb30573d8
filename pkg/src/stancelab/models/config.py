"""Shared training configuration for the gradient-descent classifiers."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer settings for mini-batch gradient descent.

    ``epochs`` may be zero, in which case training returns the model at
    initialization.
    """

    learning_rate: float
    epochs: int = 30
    batch_size: int = 32
    seed: int = 0
    l2: float = 1e-4

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be non-negative, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if self.l2 < 0:
            raise ValueError(f"l2 must be non-negative, got {self.l2}")
