"""One test per primary acceptance criterion, each at its stated tolerance.

Every test opens a criterion record; the PASS/FAIL lines are printed as the
tests finish and again in the terminal summary.
"""

import json
import math
import time

import numpy as np
import pytest

from oracles import dyadic, paths
from sociosem import cli
from sociosem.corpus import CorpusStats, corpus_stats
from sociosem.dyadstats import centrality_factor, mrqap_dsp, qap_correlation
from sociosem.network import InteractionGraph, betweenness, degree
from sociosem.semantics import PostFrequencyIndex, SentimentProvider, complexity, emotionality

# -- corpus statistics ----------------------------------------------------


def test_corpus_statistics_arithmetic(criterion, mini_corpus):
    c = criterion("corpus statistics: exact integer quotients, 2.99% / 43.82%, < 1 s")
    start = time.perf_counter()
    s = corpus_stats(mini_corpus)
    elapsed = time.perf_counter() - start
    assert s.type_token_ratio == s.types / s.tokens
    assert s.hapax_type_ratio == s.hapax / s.types
    assert s.hapax <= s.types <= s.tokens
    rows = dict(CorpusStats(23_000, 2_440_467, 72_973, 31_978).to_table().rows)
    assert rows["Type-Token Ratio"] == "2.99%"
    assert rows["Hapax-Type Ratio"] == "43.82%"
    assert elapsed < 1.0
    c.detail = f"{elapsed * 1000:.1f} ms"


# -- language metrics -----------------------------------------------------


def test_emotionality_formula(criterion):
    c = criterion("emotionality: neutral 0, polar word 1, [0.9, 0.1] -> 0.8 (1e-12)")
    prov = SentimentProvider(lexicon={"n": 0.5, "p": 1.0, "hi": 0.9, "lo": 0.1})
    assert emotionality(["n", "n", "n"], prov) == 0.0
    assert emotionality(["p"], prov) == 1.0
    value = emotionality(["hi", "lo"], prov)
    assert abs(value - 0.8) <= 1e-12
    c.detail = f"{value!r}"


def test_complexity_formula(criterion):
    c = criterion("complexity: ubiquitous 0, hand case 1.1513 (1e-4), exact duplication invariance")
    ubiquitous = PostFrequencyIndex(7, {"w": 7, "v": 7})
    assert complexity(["w", "v", "w"], ubiquitous) == 0.0
    index = PostFrequencyIndex(10, {"a": 1, "b": 10})
    value = complexity(["a", "b"], index)
    assert abs(value - 1.1513) <= 1e-4
    rng = np.random.default_rng(0)
    words = [f"w{i}" for i in range(12)]
    big = PostFrequencyIndex(50, {w: int(rng.integers(1, 51)) for w in words})
    for _ in range(200):
        tokens = list(rng.choice(words, size=int(rng.integers(1, 15))))
        k = int(rng.integers(2, 6))
        assert complexity(tokens * k, big) == complexity(tokens, big)
    c.detail = f"{value:.6f}"


# -- centrality -----------------------------------------------------------


def test_centrality_oracle_all_small_graphs(criterion):
    c = criterion("centrality: all connected graphs on <= 6 nodes vs path enumeration (1e-9), < 60 s")
    start = time.perf_counter()
    checked = 0
    for n in range(1, 7):
        nodes = [str(i) for i in range(n)]
        for edges in paths.all_connected_graphs(n):
            g = InteractionGraph.from_edges(nodes, [(str(u), str(v)) for u, v in edges])
            oracle = paths.betweenness(range(n), edges)
            got_b, got_d = betweenness(g), degree(g)
            for v in range(n):
                assert abs(got_b[str(v)] - float(oracle[v])) <= 1e-9
                assert got_d[str(v)] == sum(v in e for e in edges)
            checked += 1
    elapsed = time.perf_counter() - start
    assert checked == 1 + 1 + 4 + 38 + 728 + 26704
    assert elapsed < 60
    c.detail = f"{checked} graphs, {elapsed:.1f} s"


# -- factor ---------------------------------------------------------------


def test_betweenness_degree_factor(criterion):
    c = criterion("factor: r = 0.887 -> variance 0.9435 (5e-4), loadings 0.971 (2e-3)")
    rng = np.random.default_rng(0)
    z = rng.normal(size=(300, 2))
    q, _ = np.linalg.qr(z - z.mean(axis=0))
    r = 0.887
    deg = q[:, 0]
    btw = r * q[:, 0] + math.sqrt(1 - r * r) * q[:, 1]
    f = centrality_factor(deg * 12 + 40, btw * 4000 + 4000)
    assert abs(f.correlation - r) < 1e-12
    assert abs(f.variance_explained - 0.9435) <= 0.0005
    assert np.all(np.abs(f.loadings - 0.971) <= 0.002)
    c.detail = f"variance {f.variance_explained:.5f}, loadings {f.loadings[0]:.5f}"


# -- QAP ------------------------------------------------------------------


def test_qap_exactness(criterion):
    c = criterion("QAP exactness: 4 actors, all 24 permutations == exhaustive oracle")
    rng = np.random.default_rng(1)
    compared = 0
    while compared < 50:
        a, b = dyadic.symmetric(rng, 4, integer=True), dyadic.symmetric(rng, 4, integer=True)
        if np.nanstd(a) == 0 or np.nanstd(b) == 0:
            continue
        res = qap_correlation(a, b, permutations="exact")
        assert len(res.null_distribution) == 24
        assert res.p_value == float(dyadic.exhaustive_qap_p(a, b))
        compared += 1
    c.detail = f"{compared} matrix pairs"


def test_qap_null_calibration(criterion):
    c = criterion("QAP null calibration: 1000 pairs, 30 actors, 500 permutations, P(p<.05) in [.03,.07], < 5 min")
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    pvals = []
    for i in range(1000):
        a, b = dyadic.symmetric(rng, 30), dyadic.symmetric(rng, 30)
        pvals.append(qap_correlation(a, b, permutations=500, seed=i).p_value)
    elapsed = time.perf_counter() - start
    frac = float(np.mean(np.array(pvals) < 0.05))
    assert 0.03 <= frac <= 0.07
    assert elapsed < 300
    c.detail = f"fraction {frac:.3f}, {elapsed:.0f} s"


# -- MRQAP ----------------------------------------------------------------


def test_mrqap_point_estimates(criterion):
    c = criterion("MRQAP: beta matches normal equations to 1e-8 on 100 random instances")
    rng = np.random.default_rng(7)
    worst = 0.0
    for i in range(100):
        n = int(rng.integers(5, 25))
        p = int(rng.integers(1, 5))
        xs = [dyadic.symmetric(rng, n) for _ in range(p)]
        y = sum(rng.normal() * x for x in xs) + dyadic.symmetric(rng, n)
        res = mrqap_dsp(y, xs, permutations=10, seed=i)
        rows, cols = np.triu_indices(n, 1)
        beta = dyadic.normal_equations(np.column_stack([x[rows, cols] for x in xs]), y[rows, cols])
        err = max(abs(res.intercept - beta[0]), float(np.max(np.abs(res.coef - beta[1:]))))
        worst = max(worst, err)
        assert err <= 1e-8
    c.detail = f"max abs error {worst:.1e}"


def test_mrqap_dsp_recovery(criterion):
    c = criterion("MRQAP DSP: planted beta=(0.5, 0), 50 actors, 100 seeds: >= 95 recovered, <= 10 false positives")
    recovered = false_pos = 0
    for seed in range(100):
        y, x1, x2 = dyadic.planted_dyadic(seed, n=50)
        res = mrqap_dsp(y, {"x1": x1, "x2": x2}, permutations=2000, seed=seed)
        recovered += res.coef[0] > 0 and res.p_values[0] < 0.05
        false_pos += res.p_values[1] < 0.05
    assert recovered >= 95
    assert false_pos <= 10
    c.detail = f"recovered {recovered}/100, planted-zero significant {false_pos}/100"


# -- end to end -----------------------------------------------------------


def test_end_to_end_determinism(criterion, tmp_path):
    c = criterion("end-to-end: report from a manifest byte-identical across runs and n_jobs")
    synth = tmp_path / "synth"
    assert cli.main(["synth", "--synth_n_actors", "60", "--seed", "5", "--output", str(synth)]) == 0
    first = tmp_path / "first"
    assert cli.main(["report", "--posts", str(synth / "posts.jsonl"), "--authors", str(synth / "authors.csv"),
                     "--permutations", "500", "--output", str(first)]) == 0
    manifest = str(first / "manifest.json")
    runs = {"repeat": [], "n_jobs=2": ["--n_jobs", "2"], "n_jobs=-1": ["--n_jobs", "-1"]}
    files = sorted(p.relative_to(first) for p in first.rglob("*") if p.is_file())
    for label, extra in runs.items():
        out = tmp_path / label
        assert cli.main(["report", "--config", manifest, "--output", str(out), *extra]) == 0
        assert sorted(p.relative_to(out) for p in out.rglob("*") if p.is_file()) == files
        for rel in files:
            assert (first / rel).read_bytes() == (out / rel).read_bytes(), f"{label}: {rel}"
    outputs = json.loads((first / "manifest.json").read_text())["outputs"]
    c.detail = f"{len(outputs)} artifacts x {len(runs) + 1} runs"


# -- performance ----------------------------------------------------------


def _performance_inputs(n: int, p: int):
    rng = np.random.default_rng(99)
    y = np.triu((rng.random((n, n)) < 0.02).astype(float), 1)
    y = y + y.T
    xs = []
    for _ in range(p):
        u = rng.normal(size=n)
        xs.append(np.abs(u[:, None] - u[None, :]))
    return y, xs


@pytest.mark.slow
def test_performance_qap(criterion):
    c = criterion("performance: QAP, 1600 actors, 2000 permutations, < 10 min")
    y, (x,) = _performance_inputs(1600, 1)
    start = time.perf_counter()
    res = qap_correlation(y, x, permutations=2000, seed=0)
    elapsed = time.perf_counter() - start
    assert res.n_dyads == 1600 * 1599 // 2
    assert elapsed < 600
    c.detail = f"{elapsed:.0f} s"


@pytest.mark.slow
def test_performance_mrqap(criterion):
    c = criterion("performance: MRQAP, 1600 actors, 6 predictors, 2000 permutations, < 60 min")
    y, xs = _performance_inputs(1600, 6)
    start = time.perf_counter()
    res = mrqap_dsp(y, xs, permutations=2000, seed=0)
    elapsed = time.perf_counter() - start
    assert res.null_distributions.shape == (6, 2000)
    assert elapsed < 3600
    c.detail = f"{elapsed:.0f} s"
