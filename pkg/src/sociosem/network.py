"""Interaction graph, centralities, weekly betweenness series and rotating leadership."""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

from joblib import Parallel, delayed

from .corpus import Corpus
from .exceptions import UndefinedMetric
from .tables import Table, full

RULES = ("preceding", "opener", "all-prior")
# sources per betweenness work unit; fixed so results do not depend on n_jobs
_BLOCK = 128
# relative changes this close below the threshold still count, so that
# rescaling a series cannot flip a boundary case through round-off
_THRESHOLD_SLACK = 1e-12


@dataclass(frozen=True)
class InteractionGraph:
    """Undirected simple graph; ``weights`` maps (u, v) with u before v in
    node order to the number of interactions."""

    nodes: tuple[str, ...]
    weights: Mapping[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        order = {a: i for i, a in enumerate(self.nodes)}
        clean: dict[tuple[str, str], int] = {}
        for (u, v), w in self.weights.items():
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if w < 1:
                raise ValueError(f"edge weight must be >= 1, got {w}")
            key = (u, v) if order[u] < order[v] else (v, u)
            clean[key] = clean.get(key, 0) + int(w)
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "weights", MappingProxyType(dict(sorted(clean.items(), key=lambda kv: (order[kv[0][0]], order[kv[0][1]])))))

    @classmethod
    def from_edges(cls, nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> "InteractionGraph":
        nodes = tuple(nodes)
        counts: Counter = Counter()
        order = {a: i for i, a in enumerate(nodes)}
        for u, v in edges:
            if u != v:
                counts[(u, v) if order[u] < order[v] else (v, u)] += 1
        return cls(nodes, dict(counts))

    @property
    def n_edges(self) -> int:
        return len(self.weights)

    def adjacency(self) -> list[list[int]]:
        index = {a: i for i, a in enumerate(self.nodes)}
        adj: list[list[int]] = [[] for _ in self.nodes]
        for u, v in self.weights:
            adj[index[u]].append(index[v])
            adj[index[v]].append(index[u])
        for nbrs in adj:
            nbrs.sort()
        return adj

    def edge_table(self) -> Table:
        table = Table(["source", "target", "weight"])
        for (u, v), w in self.weights.items():
            table.add_row([u, v, w])
        return table


def interactions(corpus: Corpus, rule: str = "preceding") -> Iterator[tuple[str, str, int]]:
    """Yield ``(commenter, target, week)`` for every interaction in the corpus.

    Threads are read in input order (stable-sorted by week); the first post
    opens the thread. ``preceding`` links a commenter to the opener and to
    the author of the post right before theirs; ``opener`` only to the
    opener; ``all-prior`` to every earlier author in the thread.
    """
    if rule not in RULES:
        raise ValueError(f"interaction rule must be one of {RULES}, got {rule!r}")
    threads: dict[str, list] = {}
    for post in corpus.posts:
        threads.setdefault(post.thread_id, []).append(post)
    for posts in threads.values():
        posts = sorted(posts, key=lambda p: p.week)
        opener = posts[0].author_id
        earlier = [opener]
        for prev, post in zip(posts, posts[1:]):
            me = post.author_id
            if rule == "opener":
                targets = {opener}
            elif rule == "preceding":
                targets = {opener, prev.author_id}
            else:
                targets = set(earlier)
            for t in sorted(targets):
                if t != me:
                    yield me, t, post.week
            earlier.append(me)


def build_graph(corpus: Corpus, rule: str = "preceding", weeks: Iterable[int] | None = None) -> InteractionGraph:
    """Interaction graph over every posting author (isolates included).

    ``weeks`` restricts the interactions counted to comments made in those
    weeks; the node set stays the full actor set.
    """
    wanted = None if weeks is None else set(weeks)
    edges = [(u, v) for u, v, w in interactions(corpus, rule) if wanted is None or w in wanted]
    return InteractionGraph.from_edges(corpus.actors, edges)


def degree(graph: InteractionGraph) -> dict[str, int]:
    counts = dict.fromkeys(graph.nodes, 0)
    for u, v in graph.weights:
        counts[u] += 1
        counts[v] += 1
    return counts


def _brandes_block(adj: list[list[int]], sources: range) -> list[float]:
    n = len(adj)
    total = [0.0] * n
    for s in sources:
        stack = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0] * n
        dist = [-1] * n
        sigma[s], dist[s] = 1, 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                total[w] += delta[w]
    return total


def betweenness(graph: InteractionGraph, n_jobs: int | None = 1) -> dict[str, float]:
    """Unnormalised shortest-path betweenness on the unweighted skeleton.

    Each unordered pair (s, t) contributes sigma_st(v) / sigma_st to every
    intermediate v; disconnected pairs contribute nothing. Per-source
    work is split into fixed blocks and reduced in block order, so the
    result is bit-identical for any ``n_jobs``.
    """
    adj = graph.adjacency()
    n = len(adj)
    blocks = [range(i, min(i + _BLOCK, n)) for i in range(0, n, _BLOCK)]
    if n_jobs == 1 or len(blocks) <= 1:
        partials = [_brandes_block(adj, b) for b in blocks]
    else:
        partials = Parallel(n_jobs=n_jobs)(delayed(_brandes_block)(adj, b) for b in blocks)
    total = [0.0] * n
    for part in partials:
        for i, x in enumerate(part):
            total[i] += x
    return {a: total[i] / 2.0 for i, a in enumerate(graph.nodes)}


@dataclass(frozen=True)
class GraphStats:
    n_nodes: int
    n_edges: int
    n_isolates: int
    avg_degree_all: float
    avg_degree_connected: float
    avg_distance: float
    reachable_pairs: int

    def to_table(self) -> Table:
        table = Table(["statistic", "value"])
        for k, v in self.__dict__.items():
            table.add_row([k, v if isinstance(v, int) else full(v)])
        return table


def graph_stats(graph: InteractionGraph) -> GraphStats:
    """Average degree (all nodes and non-isolates) and mean geodesic distance
    over reachable pairs; the distance is NaN when there are no edges."""
    deg = degree(graph)
    n = len(graph.nodes)
    connected = [d for d in deg.values() if d > 0]
    adj = graph.adjacency()
    dist_sum, pairs = 0, 0
    for s in range(n):
        dist = {s: 0}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        for t, d in dist.items():
            if t > s:
                dist_sum += d
                pairs += 1
    return GraphStats(
        n_nodes=n,
        n_edges=graph.n_edges,
        n_isolates=n - len(connected),
        avg_degree_all=sum(deg.values()) / n if n else math.nan,
        avg_degree_connected=sum(connected) / len(connected) if connected else math.nan,
        avg_distance=dist_sum / pairs if pairs else math.nan,
        reachable_pairs=pairs,
    )


@dataclass(frozen=True)
class CentralitySeries:
    author_id: str
    weeks: tuple[int, ...]
    values: tuple[float, ...]


def weekly_snapshots(
    corpus: Corpus, rule: str = "preceding", cumulative: bool = False, n_jobs: int | None = 1
) -> dict[str, CentralitySeries]:
    """Betweenness per actor per week.

    Each week's graph holds the interactions made in that week (or up to
    and including it when ``cumulative``). Inactive actors score 0.
    """
    weeks = corpus.weeks
    by_week: dict[int, list[tuple[str, str]]] = {w: [] for w in weeks}
    for u, v, w in interactions(corpus, rule):
        by_week[w].append((u, v))
    per_week = []
    acc: list[tuple[str, str]] = []
    for w in weeks:
        if cumulative:
            acc = acc + by_week[w]
            edges = acc
        else:
            edges = by_week[w]
        per_week.append(betweenness(InteractionGraph.from_edges(corpus.actors, edges), n_jobs))
    return {
        a: CentralitySeries(a, tuple(weeks), tuple(b[a] for b in per_week))
        for a in corpus.actors
    }


def rotating_leadership(values: Sequence[float], threshold: float = 0.30, variant: str = "threshold") -> int:
    """Count significant week-to-week changes in a betweenness series.

    A change from ``b_prev > 0`` is significant when
    ``|b - b_prev| / b_prev >= threshold``; from ``b_prev == 0`` any rise is.
    ``variant="alternating"`` counts only significant changes whose
    direction reverses the previous significant change.
    """
    if len(values) < 2:
        raise UndefinedMetric("rotating leadership needs at least two weeks")
    if variant not in ("threshold", "alternating"):
        raise ValueError(f"unknown variant {variant!r}")
    count = 0
    last_dir = 0
    for prev, cur in zip(values, values[1:]):
        if prev > 0:
            significant = abs(cur - prev) / prev >= threshold - _THRESHOLD_SLACK
        else:
            significant = cur > 0
        if not significant:
            continue
        direction = 1 if cur > prev else -1
        if variant == "threshold" or (last_dir and direction != last_dir):
            count += 1
        last_dir = direction
    return count


@dataclass(frozen=True)
class CentralityScores:
    degree: Mapping[str, int]
    betweenness: Mapping[str, float]
    rotating_leadership: Mapping[str, float]

    def to_table(self) -> Table:
        table = Table(["author_id", "degree", "betweenness", "rotating_leadership"])
        for a in self.degree:
            rl = self.rotating_leadership.get(a, math.nan)
            table.add_row([a, self.degree[a], full(self.betweenness[a]), "" if math.isnan(rl) else int(rl)])
        return table


def centrality_scores(
    corpus: Corpus,
    rule: str = "preceding",
    threshold: float = 0.30,
    variant: str = "threshold",
    cumulative: bool = False,
    n_jobs: int | None = 1,
) -> tuple[InteractionGraph, CentralityScores]:
    graph = build_graph(corpus, rule)
    series = weekly_snapshots(corpus, rule, cumulative, n_jobs)
    rl = {}
    for a, s in series.items():
        try:
            rl[a] = float(rotating_leadership(s.values, threshold, variant))
        except UndefinedMetric:
            rl[a] = math.nan
    return graph, CentralityScores(degree(graph), betweenness(graph, n_jobs), rl)
