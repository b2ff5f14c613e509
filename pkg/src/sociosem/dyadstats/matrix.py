"""Actor-by-actor dyadic matrices and their construction."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from ..exceptions import EmptyMatrix, InputError, KindError, NotEnoughActors

KINDS = ("binary-match", "abs-difference", "similarity", "interaction")
DYAD_MODES = ("upper", "both")


@dataclass(frozen=True, eq=False)
class DyadMatrix:
    """Square matrix of a dyadic variable with NaN marking missing cells.

    The diagonal is always missing. Values are stored read-only.
    """

    actors: tuple[str, ...]
    values: np.ndarray
    kind: str = "similarity"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise KindError(f"unknown matrix kind {self.kind!r}")
        values = np.array(self.values, dtype=float)
        n = len(self.actors)
        if values.shape != (n, n):
            raise InputError(f"matrix shape {values.shape} does not match {n} actors")
        if len(set(self.actors)) != n:
            raise InputError("actor labels must be unique")
        np.fill_diagonal(values, np.nan)
        both = ~np.isnan(values) & ~np.isnan(values.T)
        if not np.array_equal(np.isnan(values), np.isnan(values.T)) or not np.allclose(
            values[both], values.T[both], rtol=1e-12, atol=1e-12
        ):
            raise InputError("dyad matrix must be symmetric")
        if self.kind == "binary-match" and not np.isin(values[both], (0.0, 1.0)).all():
            raise InputError("binary-match entries must be 0 or 1")
        if self.kind == "abs-difference" and (values[both] < 0).any():
            raise InputError("abs-difference entries must be non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "actors", tuple(self.actors))
        object.__setattr__(self, "values", values)

    @property
    def n_actors(self) -> int:
        return len(self.actors)

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    def dyads(self, mode: str = "upper") -> np.ndarray:
        return self.values[dyad_index(self.n_actors, mode)]

    def submatrix(self, indices: Sequence[int]) -> "DyadMatrix":
        idx = np.asarray(indices, dtype=int)
        return DyadMatrix(tuple(self.actors[i] for i in idx), self.values[np.ix_(idx, idx)], self.kind)

    def with_values(self, values: np.ndarray, kind: str | None = None) -> "DyadMatrix":
        return DyadMatrix(self.actors, values, kind or self.kind)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["author_id", *self.actors])
        for actor, row in zip(self.actors, self.values):
            writer.writerow([actor, *("" if math.isnan(v) else repr(float(v)) for v in row)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, kind: str = "similarity") -> "DyadMatrix":
        rows = list(csv.reader(io.StringIO(text)))
        header = rows[0][1:]
        labels = [r[0] for r in rows[1:]]
        if labels != header:
            raise InputError("row labels must match the header order")
        values = np.array([[float(c) if c != "" else np.nan for c in r[1:]] for r in rows[1:]], dtype=float)
        return cls(tuple(header), values.reshape(len(header), len(header)), kind)

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")

    @classmethod
    def read_csv(cls, path: str | Path, kind: str = "similarity") -> "DyadMatrix":
        return cls.from_csv(Path(path).read_text(encoding="utf-8"), kind)


def dyad_index(n: int, mode: str = "upper") -> tuple[np.ndarray, np.ndarray]:
    """Row/column indices of the dyads used by every statistic.

    ``upper`` counts each unordered pair once; ``both`` takes every
    off-diagonal cell, which double counts symmetric data.
    """
    if mode == "upper":
        return np.triu_indices(n, 1)
    if mode == "both":
        rows, cols = np.nonzero(~np.eye(n, dtype=bool))
        return rows, cols
    raise ValueError(f"dyad mode must be one of {DYAD_MODES}, got {mode!r}")


def dyad_mask(n: int, mode: str = "upper") -> np.ndarray:
    """Boolean mask selecting the same cells, in the same order, as :func:`dyad_index`."""
    if mode == "upper":
        return np.triu(np.ones((n, n), dtype=bool), 1)
    if mode == "both":
        return ~np.eye(n, dtype=bool)
    raise ValueError(f"dyad mode must be one of {DYAD_MODES}, got {mode!r}")


def _per_actor(values: Mapping[str, Any] | Sequence[Any], actors: Sequence[str] | None):
    if isinstance(values, Mapping):
        actors = tuple(values) if actors is None else tuple(actors)
        return actors, [values.get(a) for a in actors]
    if actors is None:
        raise InputError("actors are required when values is a sequence")
    values = list(values)
    if len(values) != len(actors):
        raise InputError(f"{len(values)} values for {len(actors)} actors")
    return tuple(actors), values


def _is_missing(v) -> bool:
    return v is None or (isinstance(v, float) and math.isnan(v))


def match_matrix(values, actors: Sequence[str] | None = None) -> DyadMatrix:
    """1 where two actors share a categorical attribute, 0 otherwise.

    ``None`` (or NaN) marks a missing attribute; its row and column become
    missing.
    """
    actors, vals = _per_actor(values, actors)
    present = np.array([not _is_missing(v) for v in vals])
    if not present.any():
        raise EmptyMatrix("attribute is missing for every actor")
    codes = {v: i for i, v in enumerate(dict.fromkeys(v for v in vals if not _is_missing(v)))}
    code = np.array([codes[v] if not _is_missing(v) else -1 for v in vals])
    m = (code[:, None] == code[None, :]).astype(float)
    m[~present, :] = np.nan
    m[:, ~present] = np.nan
    return DyadMatrix(actors, m, "binary-match")


def absdiff_matrix(values, actors: Sequence[str] | None = None) -> DyadMatrix:
    """Absolute difference of per-actor scores; NaN/None scores give missing rows."""
    actors, vals = _per_actor(values, actors)
    x = np.array([np.nan if _is_missing(v) else float(v) for v in vals], dtype=float)
    if np.isnan(x).all():
        raise EmptyMatrix("score is missing for every actor")
    return DyadMatrix(actors, np.abs(x[:, None] - x[None, :]), "abs-difference")


def to_similarity(m: DyadMatrix, transform: str = "raw") -> DyadMatrix:
    """Turn an abs-difference matrix into a similarity.

    ``negate`` gives ``-M``, ``max-minus`` gives ``max(M) - M`` and ``raw``
    returns the matrix unchanged.
    """
    if m.kind != "abs-difference":
        raise KindError(f"to_similarity expects an abs-difference matrix, got {m.kind!r}")
    if transform == "raw":
        return m
    if transform == "negate":
        return m.with_values(-m.values, "similarity")
    if transform == "max-minus":
        return m.with_values(np.nanmax(m.values) - m.values, "similarity")
    raise ValueError(f"unknown transform {transform!r}")


def interaction_matrix(graph, binary: bool = True) -> DyadMatrix:
    """Adjacency of an interaction graph; ``binary`` maps any weight >= 1 to 1."""
    index = {a: i for i, a in enumerate(graph.nodes)}
    n = len(index)
    m = np.zeros((n, n))
    for (u, v), w in graph.weights.items():
        value = 1.0 if binary else float(w)
        m[index[u], index[v]] = m[index[v], index[u]] = value
    return DyadMatrix(graph.nodes, m, "interaction")


def align(m: DyadMatrix, actors: Sequence[str]) -> DyadMatrix:
    """Reorder (and restrict) ``m`` to ``actors``; unknown actors get missing rows."""
    actors = tuple(actors)
    if actors == m.actors:
        return m
    pos = {a: i for i, a in enumerate(m.actors)}
    idx = np.array([pos.get(a, -1) for a in actors])
    out = np.full((len(actors), len(actors)), np.nan)
    ok = idx >= 0
    out[np.ix_(ok, ok)] = m.values[np.ix_(idx[ok], idx[ok])]
    return DyadMatrix(actors, out, m.kind)


def filter_group(
    matrices: Iterable[DyadMatrix] | Mapping[str, DyadMatrix],
    mask: Callable[[str], bool] | Sequence[bool],
):
    """Principal submatrices over the actors selected by ``mask``.

    ``mask`` is either a predicate on actor ids or a boolean per actor.
    Returns the same container shape it was given (dict or list).
    """
    named = isinstance(matrices, Mapping)
    items = list(matrices.items()) if named else list(enumerate(matrices))
    if not items:
        return {} if named else []
    actors = items[0][1].actors
    for _, m in items:
        if m.actors != actors:
            raise InputError("all matrices must share the same actor order")
    keep = [mask(a) for a in actors] if callable(mask) else list(mask)
    if len(keep) != len(actors):
        raise InputError(f"mask has {len(keep)} entries for {len(actors)} actors")
    idx = [i for i, k in enumerate(keep) if k]
    if len(idx) < 3:
        raise NotEnoughActors(f"group selects {len(idx)} actors; at least 3 are needed")
    subs = [(k, m.submatrix(idx)) for k, m in items]
    return dict(subs) if named else [m for _, m in subs]
