"""Text preprocessing, per-author tf-idf vectors and cosine text similarity."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
import snowballstemmer
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import _TOKEN_RE, Corpus, raw_tokens
from .dyadstats.matrix import DyadMatrix
from .exceptions import NotEnoughActors

logger = logging.getLogger(__name__)

LANGUAGES = ("italian", "english")
IDF_SCHEMES = ("smooth", "raw")


@lru_cache(maxsize=None)
def bundled_stopwords(language: str) -> frozenset[str]:
    if language not in LANGUAGES:
        raise ValueError(f"language must be one of {LANGUAGES}, got {language!r}")
    text = resources.files("sociosem.data").joinpath(f"stopwords_{language}.txt").read_text("utf-8")
    return frozenset(read_word_list(text.splitlines()))


def read_word_list(lines: Iterable[str]) -> list[str]:
    return [w.strip().lower() for w in lines if w.strip() and not w.lstrip().startswith("#")]


def load_stopwords(path: str | Path) -> frozenset[str]:
    return frozenset(read_word_list(Path(path).read_text("utf-8").splitlines()))


@dataclass(frozen=True)
class PreprocessConfig:
    language: str = "italian"
    stopwords: frozenset[str] | None = None
    stemmer: str = "snowball"
    lowercase: bool = True

    def __post_init__(self):
        if self.language not in LANGUAGES:
            raise ValueError(f"language must be one of {LANGUAGES}, got {self.language!r}")
        if self.stemmer not in ("snowball", "none"):
            raise ValueError(f"stemmer must be 'snowball' or 'none', got {self.stemmer!r}")
        if self.stopwords is not None:
            object.__setattr__(self, "stopwords", frozenset(w.lower() for w in self.stopwords))

    @property
    def stopword_set(self) -> frozenset[str]:
        return bundled_stopwords(self.language) if self.stopwords is None else self.stopwords

    def describe(self) -> dict:
        return {
            "language": self.language,
            "stopwords": "bundled" if self.stopwords is None else sorted(self.stopwords),
            "stemmer": self.stemmer,
            "lowercase": self.lowercase,
        }


@lru_cache(maxsize=None)
def _stemmer(language: str):
    return snowballstemmer.stemmer(language)


def surface_tokens(text: str, cfg: PreprocessConfig = PreprocessConfig()) -> list[str]:
    """Words that survive punctuation and stop-word removal, before stemming."""
    words = raw_tokens(text) if cfg.lowercase else _TOKEN_RE.findall(text)
    stop = cfg.stopword_set
    return [w for w in words if w.lower() not in stop]


@lru_cache(maxsize=1 << 18)
def _stem_word(language: str, word: str) -> str:
    return _stemmer(language).stemWord(word)


def stem(words: Sequence[str], cfg: PreprocessConfig = PreprocessConfig()) -> list[str]:
    if cfg.stemmer == "none":
        return list(words)
    return [_stem_word(cfg.language, w) for w in words]


def preprocess(text: str, cfg: PreprocessConfig = PreprocessConfig()) -> list[str]:
    """Lowercase, strip punctuation, drop stop-words, then stem."""
    return stem(surface_tokens(text, cfg), cfg)


@dataclass(frozen=True)
class AuthorDocument:
    author_id: str
    term_counts: Mapping[str, int]

    @property
    def is_empty(self) -> bool:
        return not self.term_counts


@dataclass(frozen=True)
class CorpusIndex:
    n_docs: int
    df: Mapping[str, int]
    vocabulary: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.vocabulary:
            object.__setattr__(self, "vocabulary", tuple(sorted(self.df)))


def index_documents(docs: Sequence[AuthorDocument]) -> CorpusIndex:
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(doc.term_counts.keys())
    return CorpusIndex(len(docs), dict(df))


def build_author_documents(
    corpus: Corpus, cfg: PreprocessConfig = PreprocessConfig()
) -> tuple[list[AuthorDocument], CorpusIndex]:
    """One bag of stems per author, pooled over all of that author's posts."""
    docs = []
    for author, posts in corpus.posts_by_author().items():
        counts: Counter[str] = Counter()
        for post in posts:
            counts.update(preprocess(post.text, cfg))
        doc = AuthorDocument(author, dict(sorted(counts.items())))
        if doc.is_empty:
            logger.warning("author %s has no terms left after preprocessing", author)
        docs.append(doc)
    return docs, index_documents(docs)


def idf_weights(index: CorpusIndex, scheme: str = "smooth") -> dict[str, float]:
    if scheme == "smooth":
        return {w: math.log((1 + index.n_docs) / (1 + d)) + 1.0 for w, d in index.df.items()}
    if scheme == "raw":
        return {w: math.log(index.n_docs / d) for w, d in index.df.items()}
    raise ValueError(f"idf scheme must be one of {IDF_SCHEMES}, got {scheme!r}")


@dataclass(frozen=True)
class TfIdfVector:
    author_id: str
    weights: Mapping[str, float]

    @property
    def is_empty(self) -> bool:
        return not self.weights


def tfidf_vectors(
    docs: Sequence[AuthorDocument],
    index: CorpusIndex,
    scheme: str = "smooth",
    warnings: list[str] | None = None,
) -> list[TfIdfVector]:
    """Raw-count tf times idf, L2-normalised per author.

    Empty documents give empty vectors; a message is appended to
    ``warnings`` when a list is passed.
    """
    idf = idf_weights(index, scheme)
    out = []
    for doc in docs:
        raw = {w: c * idf[w] for w, c in sorted(doc.term_counts.items())}
        norm = math.sqrt(math.fsum(v * v for v in raw.values()))
        if norm == 0.0:
            msg = f"author {doc.author_id}: empty tf-idf vector, excluded from text similarity"
            logger.warning(msg)
            if warnings is not None:
                warnings.append(msg)
            out.append(TfIdfVector(doc.author_id, {}))
            continue
        out.append(TfIdfVector(doc.author_id, {w: v / norm for w, v in raw.items() if v != 0.0}))
    return out


def _to_sparse(vectors: Sequence[TfIdfVector]) -> sp.csr_matrix:
    vocab = sorted({w for v in vectors for w in v.weights})
    col = {w: j for j, w in enumerate(vocab)}
    indptr, indices, data = [0], [], []
    for v in vectors:
        for w, x in v.weights.items():
            indices.append(col[w])
            data.append(x)
        indptr.append(len(indices))
    X = sp.csr_matrix((np.array(data, dtype=float), np.array(indices, dtype=np.int64), np.array(indptr)),
                      shape=(len(vectors), len(vocab)))
    X.sort_indices()
    return X


def cosine_similarity_matrix(X: sp.csr_matrix) -> np.ndarray:
    sim = (X @ X.T).toarray()
    return np.clip(sim, 0.0, 1.0)


def text_similarity_matrix(vectors: Sequence[TfIdfVector]) -> DyadMatrix:
    """Cosine similarity of normalised vectors; empty authors are missing."""
    nonempty = np.array([not v.is_empty for v in vectors])
    if nonempty.sum() < 2:
        raise NotEnoughActors("text similarity needs at least two non-empty documents")
    sim = cosine_similarity_matrix(_to_sparse(vectors))
    sim[~nonempty, :] = np.nan
    sim[:, ~nonempty] = np.nan
    # symmetrise against round-off in the sparse product
    sim = np.triu(sim, 1)
    sim = sim + sim.T
    sim[~nonempty, :] = np.nan
    sim[:, ~nonempty] = np.nan
    return DyadMatrix(tuple(v.author_id for v in vectors), sim, "similarity")


class AuthorTfidf(TransformerMixin, BaseEstimator):
    """Estimator form of the tf-idf step.

    ``X`` is a sequence of author documents, each a list of post texts
    (a bare string counts as one post). ``transform`` returns the
    L2-normalised sparse tf-idf matrix, rows aligned with ``X``.
    """

    def __init__(self, language="italian", stopwords=None, stemmer="snowball", idf="smooth"):
        self.language = language
        self.stopwords = stopwords
        self.stemmer = stemmer
        self.idf = idf

    def _cfg(self) -> PreprocessConfig:
        stop = None if self.stopwords is None else frozenset(self.stopwords)
        return PreprocessConfig(self.language, stop, self.stemmer)

    def _documents(self, X) -> list[AuthorDocument]:
        cfg = self._cfg()
        docs = []
        for i, posts in enumerate(X):
            if isinstance(posts, str):
                posts = [posts]
            counts: Counter[str] = Counter()
            for text in posts:
                counts.update(preprocess(text, cfg))
            docs.append(AuthorDocument(str(i), dict(sorted(counts.items()))))
        return docs

    def fit(self, X, y=None):
        docs = self._documents(list(X))
        index = index_documents(docs)
        self.index_ = index
        self.vocabulary_ = {w: j for j, w in enumerate(index.vocabulary)}
        self.idf_ = idf_weights(index, self.idf)
        return self

    def transform(self, X):
        check_is_fitted(self, "idf_")
        X = list(X)
        rows, cols, data = [], [], []
        for i, doc in enumerate(self._documents(X)):
            raw = [(self.vocabulary_[w], c * self.idf_[w]) for w, c in doc.term_counts.items() if w in self.vocabulary_]
            norm = math.sqrt(math.fsum(v * v for _, v in raw))
            if norm == 0.0:
                continue
            for j, v in raw:
                rows.append(i)
                cols.append(j)
                data.append(v / norm)
        X_out = sp.csr_matrix((data, (rows, cols)), shape=(len(X), len(self.vocabulary_)))
        X_out.sort_indices()
        return X_out

    def similarity(self, X) -> np.ndarray:
        """Pairwise cosine similarity of the transformed documents (diagonal NaN)."""
        sim = cosine_similarity_matrix(self.transform(X))
        np.fill_diagonal(sim, np.nan)
        return sim
