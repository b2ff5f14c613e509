"""Synthetic forums with planted homophily, for end-to-end validation."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .corpus import AuthorAttributes, Corpus, Post
from .dyadstats.matrix import DyadMatrix
from .semantics import SentimentProvider
from .textprep import PreprocessConfig, build_author_documents, text_similarity_matrix, tfidf_vectors


@dataclass(frozen=True)
class SynthConfig:
    n_actors: int = 100
    n_vocab_clusters: int = 4
    words_per_cluster: int = 60
    posts_per_actor: int = 4
    beta_text: float = 2.0
    beta_centrality: float = 0.0
    noise_scale: float = 0.5
    seed: int = 0
    intercept: float = -3.5
    shared_words: int = 120
    cluster_word_share: float = 0.5
    words_per_post: int = 25
    n_weeks: int = 6
    male_share: float = 0.66
    content_manager_share: float = 0.07
    sentiment_words_per_post: int = 3

    def __post_init__(self):
        for name in ("n_actors", "n_vocab_clusters", "words_per_cluster", "posts_per_actor",
                     "shared_words", "words_per_post", "n_weeks"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.sentiment_words_per_post < 0:
            raise ValueError("sentiment_words_per_post must be >= 0")
        if not 0.0 <= self.cluster_word_share <= 1.0:
            raise ValueError("cluster_word_share must lie in [0, 1]")


@dataclass
class GroundTruth:
    config: SynthConfig
    clusters: np.ndarray
    latent_centrality: np.ndarray
    text_similarity: DyadMatrix
    tie_probability: np.ndarray
    ties: np.ndarray = field(repr=False)

    def summary(self) -> dict:
        return {
            "config": asdict(self.config),
            "planted": {"beta_text": self.config.beta_text, "beta_centrality": self.config.beta_centrality,
                        "intercept": self.config.intercept},
            "clusters": self.clusters.tolist(),
            "latent_centrality": self.latent_centrality.tolist(),
            "n_ties": int(np.triu(self.ties, 1).sum()),
        }


def _zipf(k: int) -> np.ndarray:
    w = 1.0 / np.arange(1, k + 1)
    return w / w.sum()


def generate(cfg: SynthConfig = SynthConfig()) -> tuple[Corpus, GroundTruth]:
    """Draw a corpus whose ties follow
    ``logit P(tie) = intercept + beta_text * cos_ij - beta_centrality * |s_i - s_j| + noise``,
    with tie probabilities clamped to [0.01, 0.99].

    ``cos_ij`` is the tf-idf cosine similarity of the actors' standalone
    posts. Every tie becomes a two-post thread (opener, commenter), so the
    default interaction rule recovers exactly the planted ties.
    """
    if cfg.n_vocab_clusters == 1 and cfg.beta_text != 0:
        warnings.warn("a single vocabulary cluster leaves the text effect unidentifiable", stacklevel=2)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_actors
    actors = tuple(f"u{i:04d}" for i in range(n))
    clusters = np.arange(n) % cfg.n_vocab_clusters
    rng.shuffle(clusters)
    shared = [f"zq{j}" for j in range(cfg.shared_words)]
    vocab = [[f"t{c}q{j}" for j in range(cfg.words_per_cluster)] for c in range(cfg.n_vocab_clusters)]
    p_shared, p_cluster = _zipf(cfg.shared_words), _zipf(cfg.words_per_cluster)
    # lexicon words give each actor a stable tone, so sentiment and
    # emotionality vary across actors
    lexicon = SentimentProvider.bundled("italian").lexicon
    positive = sorted(w for w, v in lexicon.items() if v > 0.5)
    negative = sorted(w for w, v in lexicon.items() if v < 0.5)
    tone = rng.random(n)

    def text_for(i: int) -> str:
        from_cluster = rng.random(cfg.words_per_post) < cfg.cluster_word_share
        c_idx = rng.choice(cfg.words_per_cluster, size=cfg.words_per_post, p=p_cluster)
        s_idx = rng.choice(cfg.shared_words, size=cfg.words_per_post, p=p_shared)
        cv = vocab[clusters[i]]
        words = [cv[c] if fc else shared[s] for fc, c, s in zip(from_cluster, c_idx, s_idx)]
        for _ in range(cfg.sentiment_words_per_post):
            pool = positive if rng.random() < tone[i] else negative
            words.append(pool[rng.integers(len(pool))])
        return " ".join(words)

    posts: list[Post] = []

    def add(author: int, thread: str, week: int) -> None:
        posts.append(Post(f"p{len(posts) + 1:06d}", actors[author], thread, week, text_for(author)))

    for i in range(n):
        for k in range(cfg.posts_per_actor):
            add(i, f"s{i:04d}_{k}", int(rng.integers(cfg.n_weeks)))

    base = Corpus(tuple(posts), {a: AuthorAttributes(a) for a in actors})
    docs, index = build_author_documents(base, PreprocessConfig(stemmer="none", stopwords=frozenset()))
    text_sim = text_similarity_matrix(tfidf_vectors(docs, index))

    latent = rng.normal(size=n)
    cos = np.nan_to_num(text_sim.values)
    eps = rng.normal(scale=cfg.noise_scale, size=(n, n))
    eps = np.triu(eps, 1) + np.triu(eps, 1).T
    logit = cfg.intercept + cfg.beta_text * cos - cfg.beta_centrality * np.abs(latent[:, None] - latent[None, :]) + eps
    prob = np.clip(1.0 / (1.0 + np.exp(-logit)), 0.01, 0.99)
    np.fill_diagonal(prob, 0.0)
    upper = np.triu(rng.random((n, n)) < prob, 1)
    ties = (upper | upper.T).astype(int)

    for t, (i, j) in enumerate(zip(*np.nonzero(upper))):
        opener, commenter = (i, j) if rng.random() < 0.5 else (j, i)
        week = int(rng.integers(cfg.n_weeks))
        add(int(opener), f"t{t:05d}", week)
        add(int(commenter), f"t{t:05d}", week)

    genders = np.where(rng.random(n) < cfg.male_share, "M", "F")
    managers = rng.random(n) < cfg.content_manager_share
    authors = {a: AuthorAttributes(a, str(g), bool(m)) for a, g, m in zip(actors, genders, managers)}
    corpus = Corpus(tuple(posts), authors)
    truth = GroundTruth(cfg, clusters, latent, text_sim, prob, ties)
    return corpus, truth
