"""Single principal-component factor of two collinear actor-level scores."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..exceptions import DegenerateInput


class CentralityFactor(TransformerMixin, BaseEstimator):
    """First principal component of two standardised variables.

    For two standardised inputs with correlation r the correlation matrix
    has eigenvalues 1 + |r| and 1 - |r|, so the leading component explains
    (1 + |r|) / 2 of the variance and both loadings equal its square root.
    The component is oriented so that the first variable loads positively.
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise ValueError(f"expected two columns, got {X.shape[1]}")
        if X.shape[0] < 2:
            raise DegenerateInput("the factor needs at least two actors")
        self.mean_ = X.mean(axis=0)
        self.scale_ = X.std(axis=0, ddof=1)
        if (self.scale_ == 0).any():
            raise DegenerateInput("zero variance in an input column")
        Z = (X - self.mean_) / self.scale_
        r = float(Z[:, 0] @ Z[:, 1] / (len(Z) - 1))
        r = min(1.0, max(-1.0, r))
        sign = 1.0 if r >= 0 else -1.0
        lam = 1.0 + abs(r)
        self.correlation_ = r
        self.components_ = np.array([[1.0, sign]]) / math.sqrt(2.0)
        self.explained_variance_ = np.array([lam])
        self.explained_variance_ratio_ = np.array([lam / 2.0])
        self.loadings_ = self.components_[0] * math.sqrt(lam)
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X, dtype=float)
        return ((X - self.mean_) / self.scale_) @ self.components_.T


@dataclass(frozen=True)
class FactorResult:
    scores: np.ndarray
    loadings: np.ndarray
    variance_explained: float
    correlation: float


def centrality_factor(degree, betweenness) -> FactorResult:
    """Betweenness-degree factor: one score per actor from the two centralities."""
    X = np.column_stack([np.asarray(degree, dtype=float), np.asarray(betweenness, dtype=float)])
    est = CentralityFactor().fit(X)
    return FactorResult(est.transform(X)[:, 0], est.loadings_, float(est.explained_variance_ratio_[0]), est.correlation_)
