"""Input checks shared by the estimators.

Kept deliberately small: the estimators accept either Stance values or their
string names for y, and 2-d float matrices for X where applicable.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.exceptions import NotFittedError

from ..labels import Stance, parse_stance


def check_is_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted; call fit first"
        )


def as_stances(y) -> list[Stance]:
    """Coerce labels to Stance values, accepting enum members, labeled
    records carrying a ``stance`` attribute, or names."""
    out = []
    for item in y:
        if isinstance(item, Stance):
            out.append(item)
        elif hasattr(item, "stance"):
            out.append(item.stance)
        else:
            out.append(parse_stance(str(item)))
    return out


def stance_indices(y) -> np.ndarray:
    from ..labels import CLASS_INDEX

    return np.array([CLASS_INDEX[s] for s in as_stances(y)], dtype=np.int64)


def check_feature_matrix(X, dim: int | None = None) -> np.ndarray:
    """Validate a dense 2-d float matrix, optionally with a fixed column count."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d feature matrix, got shape {X.shape}")
    if dim is not None and X.shape[1] != dim:
        raise ValueError(
            f"feature matrix has {X.shape[1]} columns, expected {dim}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains non-finite values")
    return X


def check_matching_lengths(X, y) -> None:
    if len(X) != len(y):
        raise ValueError(f"X has {len(X)} rows but y has {len(y)} labels")
