from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..exceptions import InputError
from .matrix import DyadMatrix


def check_dyad_matrix(x, kind: str = "similarity") -> DyadMatrix:
    """Accept a DyadMatrix or a square array-like; arrays get positional labels."""
    if isinstance(x, DyadMatrix):
        return x
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"expected a square matrix, got shape {arr.shape}")
    return DyadMatrix(tuple(str(i) for i in range(arr.shape[0])), arr, kind)


def check_same_actors(*matrices: DyadMatrix) -> None:
    first = matrices[0].actors
    for m in matrices[1:]:
        if m.actors != first:
            raise InputError("matrices must share the same actor order")


def check_predictors(X, names: Sequence[str] | None = None) -> tuple[list[str], list[DyadMatrix]]:
    """Normalise predictors given as a mapping, a list, or a (p, n, n) array."""
    if isinstance(X, Mapping):
        keys = list(X)
        mats = [check_dyad_matrix(X[k]) for k in keys]
    else:
        if isinstance(X, np.ndarray) and X.ndim == 3:
            X = list(X)
        mats = [check_dyad_matrix(m) for m in X]
        keys = [f"x{i + 1}" for i in range(len(mats))]
    if names is not None:
        if len(names) != len(mats):
            raise InputError(f"{len(names)} names for {len(mats)} predictors")
        keys = list(names)
    if not mats:
        raise InputError("at least one predictor is required")
    return keys, mats
