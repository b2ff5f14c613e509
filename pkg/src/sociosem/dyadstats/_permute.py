"""Seeded permutation draws and the block-parallel driver.

Draw ``i`` of a run seeded with ``seed`` is a pure function of
``(seed, i)``, and blocks are sized from the problem alone, so null
distributions are bit-identical at any level of parallelism.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable

import numpy as np
from joblib import Parallel, delayed

# bytes of permuted dyads materialised per block
_BLOCK_BYTES = 1 << 25
_MAX_BLOCK = 256
EXACT_LIMIT = 8


def block_size(n_dyads: int) -> int:
    return int(max(1, min(_MAX_BLOCK, _BLOCK_BYTES // (8 * max(n_dyads, 1)))))


def draw(seed: int, i: int, n: int) -> np.ndarray:
    return np.random.default_rng([int(seed), int(i)]).permutation(n)


def draws(seed: int, start: int, stop: int, n: int) -> np.ndarray:
    return np.stack([draw(seed, i, n) for i in range(start, stop)])


def gather(M: np.ndarray, perms: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Dyads of ``M[pi][:, pi]`` selected by ``mask``, one row per permutation."""
    out = np.empty((len(perms), int(mask.sum())))
    for k, pi in enumerate(perms):
        out[k] = M.take(pi, axis=0).take(pi, axis=1)[mask]
    return out


def exact_draws(n: int) -> np.ndarray:
    if n > EXACT_LIMIT:
        raise ValueError(f"exact enumeration is limited to {EXACT_LIMIT} actors ({math.factorial(n)} permutations requested)")
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp)


def run_null(
    statistic: Callable[[np.ndarray], np.ndarray],
    n: int,
    n_dyads: int,
    permutations: int | str,
    seed: int,
    n_jobs: int | None = 1,
) -> np.ndarray:
    """Evaluate ``statistic`` on every permutation draw.

    ``statistic`` maps a ``(k, n)`` array of permutations to ``k`` values.
    ``permutations="exact"`` enumerates all ``n!`` orderings instead of
    sampling.
    """
    bs = block_size(n_dyads)
    if permutations == "exact":
        perms = exact_draws(n)
        tasks = [(lambda s=s: perms[s:s + bs]) for s in range(0, len(perms), bs)]
    else:
        total = int(permutations)
        if total < 1:
            raise ValueError("permutations must be >= 1")
        tasks = [(lambda s=s: draws(seed, s, min(s + bs, total), n)) for s in range(0, total, bs)]

    def work(make):
        return statistic(make())

    if n_jobs == 1 or len(tasks) == 1:
        parts = [work(t) for t in tasks]
    else:
        parts = Parallel(n_jobs=n_jobs)(delayed(work)(t) for t in tasks)
    return np.concatenate(parts)


def exceedances(null: np.ndarray, observed: float, alternative: str = "two-sided") -> int:
    """Draws at least as extreme as ``observed``; ties within round-off count.

    Round-off scales with the size of the statistics, not with ``observed``
    alone: an observed value that is zero in exact arithmetic must still tie
    with draws that are zero up to noise.
    """
    tol = 1e-10 * max(abs(observed), float(np.max(np.abs(null), initial=0.0)), 1e-300)
    if alternative == "two-sided":
        hit = np.abs(null) >= abs(observed) - tol
    elif alternative == "greater":
        hit = null >= observed - tol
    elif alternative == "less":
        hit = null <= observed + tol
    else:
        raise ValueError(f"alternative must be two-sided, greater or less, got {alternative!r}")
    return int(np.count_nonzero(hit))


def p_value(null: np.ndarray, observed: float, permutations: int | str, alternative: str = "two-sided") -> float:
    k = exceedances(null, observed, alternative)
    if permutations == "exact":
        return k / len(null)
    return (k + 1) / (len(null) + 1)
