"""QAP correlation test for a pair of dyadic matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from ..exceptions import InputError, NotEnoughActors, UndefinedCorrelation
from . import _permute
from ._validation import check_dyad_matrix, check_same_actors
from .matrix import DyadMatrix, dyad_index, dyad_mask


@dataclass(frozen=True)
class QapResult:
    r: float
    p_value: float
    permutations: int | str
    seed: int
    alternative: str = "two-sided"
    n_dyads: int = 0
    dyad_mode: str = "upper"
    null_distribution: np.ndarray = field(default=None, repr=False, compare=False)


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    den = np.sqrt((xc @ xc) * (yc @ yc))
    if den == 0.0:
        raise UndefinedCorrelation("zero variance in a dyad vector")
    return float((xc @ yc) / den)


def _rowwise_pearson(a: np.ndarray, b: np.ndarray, ok: np.ndarray) -> np.ndarray:
    cnt = ok.sum(axis=1)
    A = np.where(ok, a, 0.0)
    B = np.where(ok, b, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        ma = A.sum(axis=1) / cnt
        mb = B.sum(axis=1) / cnt
        Ac = np.where(ok, A - ma[:, None], 0.0)
        Bc = np.where(ok, B - mb[:, None], 0.0)
        return (Ac * Bc).sum(axis=1) / np.sqrt((Ac * Ac).sum(axis=1) * (Bc * Bc).sum(axis=1))


def qap_correlation(
    a,
    b,
    permutations: int | str = 2000,
    seed: int = 0,
    alternative: str = "two-sided",
    dyad_mode: str = "upper",
    n_jobs: int | None = 1,
    check_multiset: bool = False,
) -> QapResult:
    """Pearson correlation of two dyadic matrices with a QAP permutation p-value.

    The null permutes rows and columns of ``b`` together
    (``b'[i, j] = b[pi[i], pi[j]]``) and recomputes the correlation over the
    dyads observed in both matrices. Monte Carlo p-values are
    ``(exceedances + 1) / (permutations + 1)``; ``permutations="exact"``
    enumerates every ordering of up to 8 actors and returns the exact
    fraction.
    """
    a = check_dyad_matrix(a)
    b = check_dyad_matrix(b)
    check_same_actors(a, b)
    n = a.n_actors
    if n < 3:
        raise NotEnoughActors(f"QAP needs at least 3 actors, got {n}")
    rows, cols = dyad_index(n, dyad_mode)
    av = a.values[rows, cols]
    bv = b.values[rows, cols]
    a_ok = ~np.isnan(av)
    ok = a_ok & ~np.isnan(bv)
    if ok.sum() < 3:
        raise InputError(f"only {int(ok.sum())} jointly observed dyads; at least 3 are needed")

    complete = bool(ok.all())
    if complete:
        a_c = av - av.mean()
        b_c = bv - bv.mean()
        den = np.sqrt((a_c @ a_c) * (b_c @ b_c))
        if den == 0.0:
            raise UndefinedCorrelation("zero variance in a dyad vector")
        observed = float((bv @ a_c) / den)
        sorted_b = np.sort(bv)
        mask = dyad_mask(n, dyad_mode)

        def statistic(perms):
            bp = _permute.gather(b.values, perms, mask)
            if check_multiset:
                assert np.array_equal(np.sort(bp, axis=1), np.broadcast_to(sorted_b, bp.shape))
            return (bp @ a_c) / den
    else:
        observed = pearson(av[ok], bv[ok])

        def statistic(perms):
            bp = b.values[perms[:, rows], perms[:, cols]]
            return _rowwise_pearson(av[None, :], bp, a_ok[None, :] & ~np.isnan(bp))

    null = _permute.run_null(statistic, n, len(rows), permutations, seed, n_jobs)
    p = _permute.p_value(null, observed, permutations, alternative)
    return QapResult(observed, p, permutations, seed, alternative, int(ok.sum()), dyad_mode, null)


class QAPCorrelation(BaseEstimator):
    """Estimator wrapper around :func:`qap_correlation`.

    ``fit(X, y)`` takes the two dyadic matrices (``DyadMatrix`` or square
    arrays with NaN for missing cells).
    """

    def __init__(self, permutations=2000, seed=0, alternative="two-sided", dyad_mode="upper", n_jobs=1):
        self.permutations = permutations
        self.seed = seed
        self.alternative = alternative
        self.dyad_mode = dyad_mode
        self.n_jobs = n_jobs

    def fit(self, X, y):
        res = qap_correlation(X, y, self.permutations, self.seed, self.alternative, self.dyad_mode, self.n_jobs)
        self.result_ = res
        self.r_ = res.r
        self.p_value_ = res.p_value
        self.null_distribution_ = res.null_distribution
        self.n_dyads_ = res.n_dyads
        return self
