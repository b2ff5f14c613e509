"""Per-post and per-author language metrics: sentiment, emotionality, complexity, length."""

from __future__ import annotations

import csv
import math
from fractions import Fraction
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Corpus, Post
from .exceptions import InputError, RangeError
from .tables import Table, full
from .textprep import PreprocessConfig, stem, surface_tokens

LOG_BASES = {"e": math.e, "10": 10.0, "2": 2.0}


def _check_unit(value: float, what: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0 or math.isnan(value):
        raise RangeError(f"{what} must lie in [0, 1], got {value!r}")
    return value


def _read_score_table(text: str, key: str, value: str) -> dict[str, float]:
    reader = csv.DictReader(text.splitlines())
    if reader.fieldnames is None or key not in reader.fieldnames or value not in reader.fieldnames:
        raise InputError(f"expected a header with {key},{value}")
    return {row[key].strip(): _check_unit(row[value], f"{value} for {row[key]!r}") for row in reader}


@dataclass(frozen=True)
class SentimentProvider:
    """Word- and post-level sentiment in [0, 1].

    In ``lexicon`` mode a post scores the mean of its word scores. In
    ``external`` mode post scores come from ``external_scores`` (keyed by
    post id) and the lexicon is used only for word-level emotionality.
    """

    mode: str = "lexicon"
    lexicon: Mapping[str, float] = field(default_factory=dict)
    oov_default: float = 0.5
    external_scores: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("lexicon", "external"):
            raise InputError(f"sentiment mode must be 'lexicon' or 'external', got {self.mode!r}")
        _check_unit(self.oov_default, "oov_default")
        for w, s in self.lexicon.items():
            _check_unit(s, f"lexicon score for {w!r}")
        for pid, s in self.external_scores.items():
            _check_unit(s, f"external score for post {pid!r}")

    def word(self, token: str) -> float:
        return self.lexicon.get(token, self.oov_default)

    @classmethod
    def bundled(cls, language: str = "italian", **kwargs) -> "SentimentProvider":
        text = resources.files("sociosem.data").joinpath(f"lexicon_{language}.csv").read_text("utf-8")
        return cls(lexicon=_read_score_table(text, "word", "score"), **kwargs)

    @classmethod
    def from_lexicon_file(cls, path: str | Path, **kwargs) -> "SentimentProvider":
        return cls(lexicon=_read_score_table(Path(path).read_text("utf-8"), "word", "score"), **kwargs)

    def with_external_scores(self, path: str | Path) -> "SentimentProvider":
        scores = _read_score_table(Path(path).read_text("utf-8"), "post_id", "sentiment")
        return SentimentProvider("external", self.lexicon, self.oov_default, scores)


def post_sentiment(tokens: Sequence[str], provider: SentimentProvider, post_id: str | None = None) -> float:
    if provider.mode == "external":
        if post_id not in provider.external_scores:
            raise InputError(f"no external sentiment score for post {post_id!r}")
        return _check_unit(provider.external_scores[post_id], f"external score for post {post_id!r}")
    if not tokens:
        return provider.oov_default
    return math.fsum(provider.word(t) for t in tokens) / len(tokens)


def emotionality(tokens: Sequence[str], provider: SentimentProvider) -> float:
    """Twice the root-mean-square distance of word sentiments from 0.5.

    Returns NaN for an empty post.
    """
    n = len(tokens)
    if n == 0:
        return math.nan
    return 2.0 * math.sqrt(math.fsum((0.5 - provider.word(t)) ** 2 for t in tokens) / n)


@dataclass(frozen=True)
class PostFrequencyIndex:
    n_posts: int
    post_df: Mapping[str, int]

    @property
    def vocabulary(self) -> tuple[str, ...]:
        return tuple(sorted(self.post_df))


def _metric_tokens(post: Post, cfg: PreprocessConfig, stage: str) -> list[str]:
    words = surface_tokens(post.text, cfg)
    if stage == "stemmed":
        return stem(words, cfg)
    if stage != "surface":
        raise ValueError(f"token stage must be 'surface' or 'stemmed', got {stage!r}")
    return words


def build_post_index(corpus: Corpus, cfg: PreprocessConfig = PreprocessConfig(), stage: str = "surface") -> PostFrequencyIndex:
    df: Counter[str] = Counter()
    for post in corpus.posts:
        df.update(set(_metric_tokens(post, cfg, stage)))
    return PostFrequencyIndex(len(corpus.posts), dict(df))


def complexity(tokens: Sequence[str], index: PostFrequencyIndex, log_base: float = math.e) -> float:
    """Mean log inverse post-frequency of a post's words (NaN for an empty post).

    Each word is weighted by its reduced share ``f(w) / n``, so repeating a
    post's tokens any whole number of times returns the identical float.
    """
    n = len(tokens)
    if n == 0:
        return math.nan
    counts = Counter(tokens)
    terms = []
    for w in sorted(counts):
        try:
            n_w = index.post_df[w]
        except KeyError:
            raise InputError(f"word {w!r} is not in the post-frequency index") from None
        terms.append(float(Fraction(counts[w], n)) * math.log(index.n_posts / n_w, log_base))
    return math.fsum(terms)


def post_length(text: str, cfg: PreprocessConfig = PreprocessConfig()) -> int:
    """Characters in the space-joined surviving words (before stemming)."""
    return len(" ".join(surface_tokens(text, cfg)))


@dataclass(frozen=True)
class PostMetrics:
    post_id: str
    sentiment: float
    emotionality: float
    complexity: float
    length: int
    n_words: int


def post_metrics(
    post: Post,
    provider: SentimentProvider,
    index: PostFrequencyIndex,
    cfg: PreprocessConfig = PreprocessConfig(),
    stage: str = "surface",
    log_base: float = math.e,
) -> PostMetrics:
    tokens = _metric_tokens(post, cfg, stage)
    return PostMetrics(
        post.post_id,
        post_sentiment(tokens, provider, post.post_id),
        emotionality(tokens, provider),
        complexity(tokens, index, log_base),
        post_length(post.text, cfg),
        len(tokens),
    )


@dataclass(frozen=True)
class ActorMetrics:
    author_id: str
    sentiment: float
    emotionality: float
    complexity: float
    length: float
    n_posts: int


METRIC_NAMES = ("sentiment", "emotionality", "complexity", "length")


def _mean(values: list[float]) -> float:
    vals = [v for v in values if not math.isnan(v)]
    # fsum keeps the mean independent of post order
    return math.fsum(vals) / len(vals) if vals else math.nan


def actor_metrics(
    corpus: Corpus,
    provider: SentimentProvider,
    index: PostFrequencyIndex | None = None,
    cfg: PreprocessConfig = PreprocessConfig(),
    stage: str = "surface",
    log_base: float = math.e,
) -> list[ActorMetrics]:
    """Unweighted per-author means of the post metrics.

    A post whose metric is undefined is left out of that metric's mean
    only; an author with no scorable post gets NaN.
    """
    if index is None:
        index = build_post_index(corpus, cfg, stage)
    out = []
    for author, posts in corpus.posts_by_author().items():
        pm = [post_metrics(p, provider, index, cfg, stage, log_base) for p in posts]
        out.append(ActorMetrics(
            author,
            _mean([m.sentiment for m in pm]),
            _mean([m.emotionality for m in pm]),
            _mean([m.complexity for m in pm]),
            _mean([float(m.length) for m in pm]),
            len(pm),
        ))
    return out


def actor_metrics_table(metrics: Sequence[ActorMetrics]) -> Table:
    table = Table(["author_id", *METRIC_NAMES])
    for m in metrics:
        table.add_row([m.author_id, *(full(getattr(m, k)) for k in METRIC_NAMES)])
    return table
