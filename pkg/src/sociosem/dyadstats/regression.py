"""Multiple regression on dyadic matrices with double semi-partialing (DSP)
permutation tests, variance inflation factors and hierarchical model blocks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ..exceptions import InputError, RankError
from ..tables import Table, fmt_float, full, stars
from . import _permute
from ._validation import check_dyad_matrix, check_predictors, check_same_actors
from .matrix import DyadMatrix, dyad_index, dyad_mask

# 1 - R^2 at or below this is treated as perfect collinearity
_COLLINEAR = 1e-10


def _lstsq(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.lstsq(A, b, rcond=None)[0]


def _stack(matrices: Sequence[DyadMatrix], dyad_mode: str):
    n = matrices[0].n_actors
    rows, cols = dyad_index(n, dyad_mode)
    V = np.column_stack([m.values[rows, cols] for m in matrices])
    keep = ~np.isnan(V).any(axis=1)
    return V, keep, rows, cols


def _r2_on_others(X: np.ndarray, k: int) -> float:
    """R^2 of column k regressed on the other columns plus an intercept."""
    xk = X[:, k]
    others = np.column_stack([np.ones(len(xk)), np.delete(X, k, axis=1)])
    resid = xk - others @ _lstsq(others, xk)
    sst = float(((xk - xk.mean()) ** 2).sum())
    if sst == 0.0:
        return 1.0
    return 1.0 - float(resid @ resid) / sst


def _vif_from_columns(X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[1])
    for k in range(X.shape[1]):
        tol = 1.0 - _r2_on_others(X, k)
        out[k] = np.inf if tol <= _COLLINEAR else 1.0 / tol
    return out


def vif(predictors, names: Sequence[str] | None = None, dyad_mode: str = "upper") -> dict[str, float]:
    """Variance inflation factor per predictor, over jointly observed dyads.

    Perfectly collinear predictors report ``inf`` rather than failing.
    """
    names, mats = check_predictors(predictors, names)
    if len(mats) < 2:
        raise InputError("VIF needs at least two predictors")
    check_same_actors(*mats)
    V, keep, _, _ = _stack(mats, dyad_mode)
    return dict(zip(names, _vif_from_columns(V[keep]).tolist()))


@dataclass(frozen=True)
class MrqapResult:
    names: tuple[str, ...]
    intercept: float
    coef: np.ndarray
    p_values: np.ndarray
    r2: float
    adj_r2: float
    n_dyads: int
    vif: np.ndarray
    permutations: int | str
    seed: int
    dyad_mode: str = "upper"
    null_distributions: np.ndarray = field(default=None, repr=False, compare=False)

    def coefficients(self) -> dict[str, float]:
        return {"intercept": self.intercept, **dict(zip(self.names, self.coef.tolist()))}

    def to_table(self) -> Table:
        table = Table(["predictor", "coef", "p_value", "vif"])
        for name, b, p, v in zip(self.names, self.coef, self.p_values, self.vif):
            table.add_row([name, full(b), full(p), full(v)])
        table.add_row(["intercept", full(self.intercept), "", ""])
        table.add_row(["r2", full(self.r2), "", ""])
        table.add_row(["adj_r2", full(self.adj_r2), "", ""])
        table.add_row(["n_dyads", self.n_dyads, "", ""])
        return table


def adjusted_r2(r2: float, n: int, p: int) -> float:
    return 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)


def _offending(X: np.ndarray, names: Sequence[str]) -> list[str]:
    bad = [names[k] for k, v in enumerate(_vif_from_columns(X)) if np.isinf(v)]
    return bad or list(names)


def mrqap_dsp(
    y,
    predictors,
    permutations: int | str = 2000,
    seed: int = 0,
    names: Sequence[str] | None = None,
    dyad_mode: str = "upper",
    n_jobs: int | None = 1,
) -> MrqapResult:
    """OLS of a dyadic response on dyadic predictors with DSP p-values.

    For predictor k the other predictors are partialled out of it, the
    residual matrix is row/column permuted and substituted back, and the
    refitted coefficient builds the null for k. The point estimates are the
    plain OLS fit and are never touched by the permutation step.
    """
    names, mats = check_predictors(predictors, names)
    y = check_dyad_matrix(y)
    check_same_actors(y, *mats)
    n = y.n_actors
    p = len(mats)
    V, keep, rows, cols = _stack([y, *mats], dyad_mode)
    yv = V[keep, 0]
    X = V[keep, 1:]
    m = len(yv)
    if m <= p + 1:
        raise InputError(f"{m} usable dyads for {p} predictors; need more than {p + 1}")
    X1 = np.column_stack([np.ones(m), X])
    if np.linalg.matrix_rank(X1) < p + 1:
        bad = _offending(X, names)
        raise RankError(f"rank-deficient design; collinear predictors: {', '.join(bad)}", bad)

    beta = _lstsq(X1, yv)
    resid = yv - X1 @ beta
    sst = float(((yv - yv.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0 else float("nan")
    adj = adjusted_r2(r2, m, p)

    complete = bool(keep.all())
    mask = dyad_mask(n, dyad_mode)
    nulls = []
    pvals = []
    for k in range(p):
        others = np.delete(X1, k + 1, axis=1)
        e_k = X1[:, k + 1] - others @ _lstsq(others, X1[:, k + 1])
        r_y = yv - others @ _lstsq(others, yv)
        E = np.full((n, n), np.nan)
        E[rows[keep], cols[keep]] = e_k
        if dyad_mode == "upper":
            E[cols[keep], rows[keep]] = e_k
        if complete:
            G_inv = np.linalg.inv(others.T @ others)
            proj = np.column_stack([others, r_y])

            def statistic(perms, E=E, G_inv=G_inv, proj=proj):
                ep = _permute.gather(E, perms, mask)
                cross = ep @ proj
                Xe, num = cross[:, :-1], cross[:, -1]
                den = np.einsum("ij,ij->i", ep, ep) - np.einsum("ij,jk,ik->i", Xe, G_inv, Xe)
                return num / den
        else:
            def statistic(perms, E=E, others=others):
                ep = E[perms[:, rows[keep]], perms[:, cols[keep]]]
                out = np.empty(len(ep))
                for i, e in enumerate(ep):
                    ok = ~np.isnan(e)
                    A = np.column_stack([others[ok], e[ok]])
                    out[i] = _lstsq(A, yv[ok])[-1] if ok.sum() > A.shape[1] else np.nan
                return out

        null = _permute.run_null(statistic, n, len(rows), permutations, seed, n_jobs)
        nulls.append(null)
        pvals.append(_permute.p_value(null[~np.isnan(null)], float(beta[k + 1]), permutations))

    return MrqapResult(
        names=tuple(names),
        intercept=float(beta[0]),
        coef=beta[1:].copy(),
        p_values=np.array(pvals),
        r2=r2,
        adj_r2=adj,
        n_dyads=m,
        vif=_vif_from_columns(X) if p >= 2 else np.ones(1),
        permutations=permutations,
        seed=seed,
        dyad_mode=dyad_mode,
        null_distributions=np.array(nulls),
    )


def hierarchical_models(
    y,
    blocks: Sequence[Mapping[str, DyadMatrix]],
    permutations: int | str = 2000,
    seed: int = 0,
    dyad_mode: str = "upper",
    n_jobs: int | None = 1,
) -> list[MrqapResult]:
    """Fit one DSP regression per cumulative union of predictor blocks."""
    if not blocks:
        raise InputError("at least one predictor block is required")
    results = []
    current: dict[str, DyadMatrix] = {}
    for block in blocks:
        if not block:
            raise InputError("predictor blocks must be non-empty")
        current.update(block)
        results.append(mrqap_dsp(y, dict(current), permutations, seed, dyad_mode=dyad_mode, n_jobs=n_jobs))
    return results


def models_table(results: Sequence[MrqapResult | None], labels: Sequence[str] | None = None) -> Table:
    """Side-by-side coefficient table, 6 decimals with DSP significance stars.

    A ``None`` entry stands for a model that could not be estimated and
    renders as ``NA`` in every row.
    """
    labels = labels or [f"Model {i + 1}" for i in range(len(results))]
    fitted = [r for r in results if r is not None]
    order = list(dict.fromkeys(name for r in fitted for name in r.names))
    table = Table(["predictor", *labels])
    for name in order:
        cells = []
        for r in results:
            if r is None:
                cells.append("NA")
            elif name in r.names:
                k = r.names.index(name)
                cells.append(fmt_float(r.coef[k], 6) + stars(r.p_values[k]))
            else:
                cells.append("")
        table.add_row([name, *cells])
    na = "NA"
    table.add_row(["Constant", *(na if r is None else fmt_float(r.intercept, 6) for r in results)])
    table.add_row(["Adjusted R2", *(na if r is None else fmt_float(r.adj_r2, 4) for r in results)])
    table.add_row(["Dyads", *(na if r is None else r.n_dyads for r in results)])
    return table


class MRQAPRegressor(RegressorMixin, BaseEstimator):
    """Estimator form of :func:`mrqap_dsp`.

    ``X`` is a mapping of named dyadic matrices, a list of them, or a
    ``(p, n, n)`` array; ``y`` is the response matrix. ``predict`` returns
    the fitted actor-by-actor matrix and ``score`` the R^2 over observed
    dyads.
    """

    def __init__(self, permutations=2000, seed=0, dyad_mode="upper", n_jobs=1):
        self.permutations = permutations
        self.seed = seed
        self.dyad_mode = dyad_mode
        self.n_jobs = n_jobs

    def fit(self, X, y):
        res = mrqap_dsp(y, X, self.permutations, self.seed, dyad_mode=self.dyad_mode, n_jobs=self.n_jobs)
        self.result_ = res
        self.feature_names_in_ = np.array(res.names, dtype=object)
        self.coef_ = res.coef
        self.intercept_ = res.intercept
        self.p_values_ = res.p_values
        self.r2_ = res.r2
        self.adj_r2_ = res.adj_r2
        self.vif_ = res.vif
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "coef_")
        _, mats = check_predictors(X)
        if len(mats) != len(self.coef_):
            raise InputError(f"expected {len(self.coef_)} predictors, got {len(mats)}")
        out = np.full(mats[0].values.shape, self.intercept_)
        for b, m in zip(self.coef_, mats):
            out = out + b * m.values
        return out

    def score(self, X, y, sample_weight=None) -> float:
        pred = self.predict(X)
        y = check_dyad_matrix(y)
        rows, cols = dyad_index(y.n_actors, self.dyad_mode)
        yt, yp = y.values[rows, cols], pred[rows, cols]
        ok = ~np.isnan(yt) & ~np.isnan(yp)
        yt, yp = yt[ok], yp[ok]
        return 1.0 - float(((yt - yp) ** 2).sum()) / float(((yt - yt.mean()) ** 2).sum())
