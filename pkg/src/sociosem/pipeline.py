"""Run configuration, staged analysis and report tables."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import platform
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy
import sklearn
from scipy import stats

from . import __version__
from .corpus import Corpus, IngestPolicy, corpus_stats, read_corpus, write_authors, write_posts
from .dyadstats import (
    DyadMatrix,
    absdiff_matrix,
    FactorResult,
    centrality_factor,
    filter_group,
    interaction_matrix,
    match_matrix,
    models_table,
    mrqap_dsp,
    qap_correlation,
    to_similarity,
    vif,
)
from .dyadstats.matrix import align
from .exceptions import InputError, NumericalError
from .network import centrality_scores, graph_stats
from .semantics import LOG_BASES, SentimentProvider, actor_metrics, build_post_index
from .tables import ACTOR_LEVELS, Table, fmt_float, fmt_percent, full, stars
from .textprep import PreprocessConfig, build_author_documents, load_stopwords, text_similarity_matrix, tfidf_vectors

DEFAULT_BLOCKS = [["text", "length"], ["gender", "role"], ["factor", "rotating_leadership"],
                  ["sentiment", "emotionality", "complexity"]]
DEFAULT_EXTRA_MODELS = [["text", "factor"]]
DYADIC_VARS = ("text", "gender", "role", "sentiment", "emotionality", "complexity", "length",
               "degree", "betweenness", "rotating_leadership")
LABELS = {
    "interaction": "Network Interaction", "text": "Text", "gender": "Gender", "role": "Role",
    "sentiment": "Sentiment", "emotionality": "Emotionality", "complexity": "Complexity",
    "length": "Length", "degree": "Degree Centrality", "betweenness": "Betweenness Centrality",
    "rotating_leadership": "Rotating Leadership", "factor": "Betweenness-Degree Factor",
}
ACTOR_VARS = ("gender", "role", "sentiment", "emotionality", "complexity", "length",
              "degree", "betweenness", "rotating_leadership")
# keys that change how a run executes but never what it computes
EXECUTION_KEYS = ("output", "n_jobs")


@dataclass
class RunConfig:
    posts: str | None = None
    authors: str | None = None
    output: str = "out"
    allow_empty: bool = False
    synthesize_authors: bool = True
    language: str = "italian"
    stopwords: str | None = None
    stemmer: str = "snowball"
    idf: str = "smooth"
    log_base: str = "e"
    token_stage: str = "surface"
    sentiment_lexicon: str | None = None
    sentiment_scores: str | None = None
    oov_default: float = 0.5
    interaction_rule: str = "preceding"
    threshold: float = 0.30
    rl_variant: str = "threshold"
    cumulative_weeks: bool = False
    interaction: str = "binary"
    permutations: int = 2000
    seed: int = 0
    alternative: str = "two-sided"
    dyad_mode: str = "upper"
    transform: str = "raw"
    blocks: list = field(default_factory=lambda: [list(b) for b in DEFAULT_BLOCKS])
    extra_models: list = field(default_factory=lambda: [list(b) for b in DEFAULT_EXTRA_MODELS])
    n_jobs: int = 1
    synth_n_actors: int = 100
    synth_n_vocab_clusters: int = 4
    synth_words_per_cluster: int = 60
    synth_posts_per_actor: int = 4
    synth_beta_text: float = 2.0
    synth_beta_centrality: float = 0.0
    synth_noise_scale: float = 0.5
    synth_n_weeks: int = 6

    def __post_init__(self):
        if self.log_base not in LOG_BASES:
            raise InputError(f"log_base must be one of {sorted(LOG_BASES)}, got {self.log_base!r}")
        if self.interaction not in ("binary", "weighted"):
            raise InputError(f"interaction must be binary or weighted, got {self.interaction!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if "config" in data and isinstance(data["config"], dict):
            data = data["config"]
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InputError(f"unknown configuration keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text("utf-8")))
        except json.JSONDecodeError as exc:
            raise InputError(f"config {path}: {exc}") from None

    def analytic(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if k not in EXECUTION_KEYS}


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def versions() -> dict:
    import snowballstemmer

    return {"sociosem": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "scikit-learn": sklearn.__version__,
            "snowballstemmer": getattr(snowballstemmer, "__version__", "unknown")}


def write_manifest(cfg: RunConfig, subcommand: str, outdir: Path, outputs: Sequence[str]) -> Path:
    inputs = {}
    for key in ("posts", "authors", "stopwords", "sentiment_lexicon", "sentiment_scores"):
        path = getattr(cfg, key)
        if path:
            inputs[key] = {"path": path, "sha256": sha256_file(path)}
    manifest = {
        "subcommand": subcommand,
        "config": cfg.analytic(),
        "seed": cfg.seed,
        "versions": versions(),
        "inputs": inputs,
        "outputs": {name: sha256_file(outdir / name) for name in sorted(outputs)},
    }
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def pearson_test(x: np.ndarray, y: np.ndarray) -> tuple[float, float, int]:
    """Pearson r with a two-tailed t-test p-value under pairwise deletion."""
    ok = ~np.isnan(x) & ~np.isnan(y)
    x, y = x[ok], y[ok]
    n = len(x)
    if n < 3:
        return math.nan, math.nan, n
    xc, yc = x - x.mean(), y - y.mean()
    den = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if den == 0.0:
        return math.nan, math.nan, n
    r = max(-1.0, min(1.0, float(xc @ yc) / den))
    if abs(r) == 1.0:
        return r, 0.0, n
    t = r * math.sqrt((n - 2) / (1 - r * r))
    return r, float(2 * stats.t.sf(abs(t), n - 2)), n


def actor_correlations(columns: dict[str, np.ndarray]) -> tuple[Table, Table]:
    """Lower-triangular Pearson table (stars at .01/.05) plus a full-precision long table."""
    names = list(columns)
    display = Table(["", *[str(i + 1) for i in range(len(names))]])
    long = Table(["var1", "var2", "r", "p_value", "n"])
    for i, a in enumerate(names):
        cells = []
        for j, b in enumerate(names):
            if j > i:
                cells.append("")
                continue
            if i == j:
                cells.append("1")
                continue
            r, p, n = pearson_test(columns[a], columns[b])
            cells.append("NA" if math.isnan(r) else fmt_float(r) + stars(p, ACTOR_LEVELS))
            long.add_row([a, b, full(r), full(p), n])
        display.add_row([f"{i + 1} {LABELS.get(a, a)}", *cells])
    return display, long


class Analysis:
    """Lazily computed stages of the full pipeline for one configuration."""

    def __init__(self, cfg: RunConfig, corpus: Corpus | None = None):
        self.cfg = cfg
        self._corpus = corpus
        self.warnings: list[str] = []

    @cached_property
    def corpus(self) -> Corpus:
        if self._corpus is not None:
            return self._corpus
        if not self.cfg.posts:
            raise InputError("no posts input configured (set 'posts')")
        policy = IngestPolicy(self.cfg.allow_empty, self.cfg.synthesize_authors)
        return read_corpus(self.cfg.posts, self.cfg.authors, policy)

    @cached_property
    def preprocess_config(self) -> PreprocessConfig:
        stop = load_stopwords(self.cfg.stopwords) if self.cfg.stopwords else None
        return PreprocessConfig(self.cfg.language, stop, self.cfg.stemmer)

    @cached_property
    def provider(self) -> SentimentProvider:
        kw = {"oov_default": self.cfg.oov_default}
        if self.cfg.sentiment_lexicon:
            provider = SentimentProvider.from_lexicon_file(self.cfg.sentiment_lexicon, **kw)
        else:
            provider = SentimentProvider.bundled(self.cfg.language, **kw)
        if self.cfg.sentiment_scores:
            provider = provider.with_external_scores(self.cfg.sentiment_scores)
        return provider

    @cached_property
    def actors(self) -> tuple[str, ...]:
        return self.corpus.actors

    @cached_property
    def stats(self):
        return corpus_stats(self.corpus)

    @cached_property
    def metrics(self):
        cfg = self.cfg
        index = build_post_index(self.corpus, self.preprocess_config, cfg.token_stage)
        return actor_metrics(self.corpus, self.provider, index, self.preprocess_config,
                             cfg.token_stage, LOG_BASES[cfg.log_base])

    @cached_property
    def network(self):
        cfg = self.cfg
        return centrality_scores(self.corpus, cfg.interaction_rule, cfg.threshold, cfg.rl_variant,
                                 cfg.cumulative_weeks, cfg.n_jobs)

    @property
    def graph(self):
        return self.network[0]

    @property
    def centrality(self):
        return self.network[1]

    @cached_property
    def actor_columns(self) -> dict[str, np.ndarray]:
        authors = self.corpus.authors
        gender = {"M": 1.0, "F": 0.0}
        cols = {
            "gender": [gender.get(authors[a].gender, math.nan) for a in self.actors],
            "role": [math.nan if authors[a].is_content_manager is None else float(authors[a].is_content_manager)
                     for a in self.actors],
        }
        by_author = {m.author_id: m for m in self.metrics}
        for k in ("sentiment", "emotionality", "complexity", "length"):
            cols[k] = [getattr(by_author[a], k) for a in self.actors]
        c = self.centrality
        cols["degree"] = [float(c.degree[a]) for a in self.actors]
        cols["betweenness"] = [c.betweenness[a] for a in self.actors]
        cols["rotating_leadership"] = [c.rotating_leadership[a] for a in self.actors]
        return {k: np.array(v, dtype=float) for k, v in cols.items()}

    @cached_property
    def factor(self):
        cols = self.actor_columns
        try:
            return centrality_factor(cols["degree"], cols["betweenness"])
        except NumericalError as exc:
            self.warnings.append(f"centrality factor undefined: {exc}")
            nan = np.full(len(self.actors), math.nan)
            return FactorResult(nan, np.full(2, math.nan), math.nan, math.nan)

    @cached_property
    def text_matrix(self) -> DyadMatrix:
        docs, index = build_author_documents(self.corpus, self.preprocess_config)
        vectors = tfidf_vectors(docs, index, self.cfg.idf, self.warnings)
        return align(text_similarity_matrix(vectors), self.actors)

    @cached_property
    def matrices(self) -> dict[str, DyadMatrix]:
        cols = self.actor_columns
        authors = self.corpus.authors
        out = {"interaction": interaction_matrix(self.graph, self.cfg.interaction == "binary"),
               "text": self.text_matrix}
        genders = [authors[a].gender if authors[a].gender != "unknown" else None for a in self.actors]
        out["gender"] = match_matrix(genders, self.actors)
        out["role"] = match_matrix([authors[a].is_content_manager for a in self.actors], self.actors)
        for k in ("sentiment", "emotionality", "complexity", "length", "degree", "betweenness",
                  "rotating_leadership"):
            out[k] = self._continuous(cols[k])
        out["factor"] = self._continuous(self.factor.scores)
        return out

    def _continuous(self, values) -> DyadMatrix:
        try:
            m = absdiff_matrix(list(values), self.actors)
        except InputError as exc:
            self.warnings.append(f"dyadic matrix left empty: {exc}")
            return DyadMatrix(self.actors, np.full((len(self.actors),) * 2, np.nan), "abs-difference")
        return to_similarity(m, self.cfg.transform)

    def _qap(self, a: DyadMatrix, b: DyadMatrix):
        cfg = self.cfg
        try:
            return qap_correlation(a, b, cfg.permutations, cfg.seed, cfg.alternative, cfg.dyad_mode, cfg.n_jobs)
        except (NumericalError, InputError) as exc:
            self.warnings.append(f"QAP skipped: {exc}")
            return None

    # -- tables ---------------------------------------------------------

    def table_corpus_stats(self) -> Table:
        return self.stats.to_table()

    def table_descriptives(self) -> Table:
        cols = self.actor_columns
        table = Table(["", "variable", "M", "SD"], title="Descriptive statistics")
        g = cols["gender"][~np.isnan(cols["gender"])]
        r = cols["role"][~np.isnan(cols["role"])]
        table.add_row(["1", "Gender", (fmt_percent(g.mean()) + " Male") if len(g) else "NA", ""])
        table.add_row(["2", "Role (Content manager)", (fmt_percent(r.mean()) + " Content managers") if len(r) else "NA", ""])
        for i, k in enumerate(ACTOR_VARS[2:], start=3):
            v = cols[k][~np.isnan(cols[k])]
            sd = float(v.std(ddof=1)) if len(v) > 1 else math.nan
            table.add_row([str(i), LABELS[k], fmt_float(float(v.mean()) if len(v) else math.nan), fmt_float(sd)])
        return table

    def table_actor_values(self) -> Table:
        cols = self.actor_columns
        table = Table(["author_id", *ACTOR_VARS, "factor"])
        for i, a in enumerate(self.actors):
            table.add_row([a, *(full(cols[k][i]) for k in ACTOR_VARS), full(self.factor.scores[i])])
        return table

    def table_actor_correlations(self) -> tuple[Table, Table]:
        return actor_correlations({k: self.actor_columns[k] for k in ACTOR_VARS})

    def table_qap(self) -> tuple[Table, Table]:
        names = ["interaction", *DYADIC_VARS]
        mats = self.matrices
        display = Table(["Similarity Metric", *[str(i + 1) for i in range(len(names) - 1)]])
        long = Table(["var1", "var2", "r", "p_value", "n_dyads"])
        for i, a in enumerate(names):
            cells = []
            for j in range(len(names) - 1):
                if j >= i:
                    cells.append("")
                    continue
                res = self._qap(mats[a], mats[names[j]])
                if res is None:
                    cells.append("NA")
                    long.add_row([a, names[j], "", "", ""])
                else:
                    cells.append(fmt_float(res.r) + stars(res.p_value))
                    long.add_row([a, names[j], full(res.r), full(res.p_value), res.n_dyads])
            display.add_row([f"{i + 1} {LABELS[a]}", *cells])
        return display, long

    def table_qap_groups(self) -> tuple[Table, Table]:
        authors = self.corpus.authors
        groups = {
            "Full Network": lambda a: True,
            "Content Managers": lambda a: authors[a].is_content_manager is True,
            "Non-Content Managers": lambda a: authors[a].is_content_manager is False,
        }
        display = Table(["Similarity Metric", *groups])
        long = Table(["group", "metric", "r", "p_value", "n_dyads", "n_actors"])
        subsets = {}
        for g, pred in groups.items():
            try:
                subsets[g] = filter_group(self.matrices, pred)
            except NumericalError as exc:
                self.warnings.append(f"group {g}: {exc}")
                subsets[g] = None
        for k in DYADIC_VARS:
            cells = []
            for g in groups:
                sub = subsets[g]
                res = None if sub is None else self._qap(sub["interaction"], sub[k])
                if res is None:
                    cells.append("NA")
                else:
                    cells.append(fmt_float(res.r) + stars(res.p_value))
                    long.add_row([g, k, full(res.r), full(res.p_value), res.n_dyads, sub[k].n_actors])
            display.add_row([LABELS[k], *cells])
        display.add_row(["N", *("0" if subsets[g] is None else str(subsets[g]["interaction"].n_actors) for g in groups)])
        return display, long

    def table_vif(self) -> Table:
        names = ["text", "length", "gender", "role", "degree", "betweenness", "rotating_leadership",
                 "sentiment", "emotionality", "complexity"]
        table = Table(["predictor", "vif"])
        try:
            values = vif({k: self.matrices[k] for k in names}, dyad_mode=self.cfg.dyad_mode)
        except (NumericalError, InputError) as exc:
            self.warnings.append(f"VIF skipped: {exc}")
            values = dict.fromkeys(names, math.nan)
        for k, v in values.items():
            table.add_row([k, "inf" if math.isinf(v) else full(v)])
        return table

    def model_specs(self) -> list[list[str]]:
        """Predictor names per model: cumulative blocks, then the extra models."""
        specs, current = [], []
        for block in self.cfg.blocks:
            current = current + [k for k in block if k not in current]
            specs.append(current)
        return specs + [list(m) for m in self.cfg.extra_models]

    def models(self) -> list:
        """One DSP fit per model; a model that cannot be estimated is None."""
        cfg = self.cfg
        y = self.matrices["interaction"]
        results = []
        for i, names in enumerate(self.model_specs(), start=1):
            try:
                results.append(mrqap_dsp(y, {k: self.matrices[k] for k in names}, cfg.permutations, cfg.seed,
                                         dyad_mode=cfg.dyad_mode, n_jobs=cfg.n_jobs))
            except (NumericalError, InputError) as exc:
                self.warnings.append(f"model {i} skipped: {exc}")
                results.append(None)
        return results

    def table_factor(self) -> Table:
        f = self.factor
        table = Table(["statistic", "value"])
        table.add_row(["correlation", full(f.correlation)])
        table.add_row(["variance_explained", full(f.variance_explained)])
        table.add_row(["loading_degree", full(f.loadings[0])])
        table.add_row(["loading_betweenness", full(f.loadings[1])])
        return table


def write_synthetic(corpus: Corpus, truth, outdir: Path) -> list[str]:
    outdir.mkdir(parents=True, exist_ok=True)
    write_posts(corpus, outdir / "posts.jsonl")
    write_authors(corpus, outdir / "authors.csv")
    (outdir / "ground_truth.json").write_text(json.dumps(truth.summary(), indent=2, sort_keys=True) + "\n", "utf-8")
    truth.text_similarity.write_csv(outdir / "ground_truth_text_similarity.csv")
    return ["posts.jsonl", "authors.csv", "ground_truth.json", "ground_truth_text_similarity.csv"]
