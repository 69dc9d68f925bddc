"""Walk corpus generation and the corpus-level transforms.

Covers uniform truncated random walks, second-order p/q-biased walks,
corpus frequency statistics, frequency pruning at retain levels and the
skip transform that subsamples every (k+1)-th walk position.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .alias import alias_setup
from .graph import Graph

logger = logging.getLogger(__name__)


@dataclass
class WalkConfig:
    walks_per_node: int = 80
    walk_length: int = 40
    p: float = 1.0
    q: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.walks_per_node < 1:
            raise ValueError(f"walks_per_node must be >= 1, got {self.walks_per_node}")
        if self.walk_length < 1:
            raise ValueError(f"walk_length must be >= 1, got {self.walk_length}")
        if not self.p > 0:
            raise ValueError(f"p must be > 0, got {self.p}")
        if not self.q > 0:
            raise ValueError(f"q must be > 0, got {self.q}")


class WalkCorpus:
    """Ordered node-id sequences, stored flat (tokens + walk offsets)."""

    def __init__(self, tokens: np.ndarray, offsets: np.ndarray, origin: str = "uniform"):
        self.tokens = np.ascontiguousarray(tokens, dtype=np.int32)
        self.offsets = np.ascontiguousarray(offsets, dtype=np.int64)
        self.origin = origin
        if len(self.offsets) < 1 or self.offsets[0] != 0 or self.offsets[-1] != len(self.tokens):
            raise ValueError("offsets must start at 0 and end at len(tokens)")
        if np.any(np.diff(self.offsets) < 1):
            raise ValueError("corpus contains an empty walk")

    @classmethod
    def from_walks(cls, walks, origin: str = "uniform") -> "WalkCorpus":
        arrays = [np.asarray(w, dtype=np.int32) for w in walks]
        lengths = np.array([len(a) for a in arrays], dtype=np.int64)
        offsets = np.zeros(len(arrays) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        tokens = np.concatenate(arrays) if arrays else np.empty(0, dtype=np.int32)
        return cls(tokens, offsets, origin)

    def __len__(self) -> int:
        return len(self.offsets) - 1

    def __getitem__(self, i: int) -> np.ndarray:
        return self.tokens[self.offsets[i]:self.offsets[i + 1]]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def total_tokens(self) -> int:
        return len(self.tokens)

    @property
    def max_walk_length(self) -> int:
        return int(np.diff(self.offsets).max()) if len(self) else 0

    def to_list(self) -> list[list[int]]:
        return [w.tolist() for w in self]

    def __repr__(self):
        return f"WalkCorpus({len(self)} walks, {self.total_tokens} tokens, origin={self.origin!r})"


@dataclass
class VocabStats:
    """Per-node occurrence counts over a corpus; ``nodes`` lists exactly the
    ids appearing in it (sorted ascending)."""

    nodes: np.ndarray
    counts: np.ndarray
    total: int = field(default=0)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=np.int32)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if len(self.nodes) != len(self.counts):
            raise ValueError("nodes and counts must align")
        if self.total == 0:
            self.total = int(self.counts.sum())

    @property
    def vocab_size(self) -> int:
        return len(self.nodes)

    def count_of(self, node: int) -> int:
        i = np.searchsorted(self.nodes, node)
        if i < len(self.nodes) and self.nodes[i] == node:
            return int(self.counts[i])
        return 0

    def to_dict(self) -> dict[int, int]:
        return {int(n): int(c) for n, c in zip(self.nodes, self.counts)}

    def dense_counts(self, size: int) -> np.ndarray:
        """Counts as a length-``size`` array with zeros for absent nodes."""
        dense = np.zeros(size, dtype=np.int64)
        dense[self.nodes] = self.counts
        return dense


def vocab_stats(corpus: WalkCorpus) -> VocabStats:
    """Exact occurrence counts over a non-empty corpus."""
    if corpus.total_tokens == 0:
        raise ValueError("cannot compute vocabulary statistics of an empty corpus")
    dense = np.bincount(corpus.tokens)
    nodes = np.nonzero(dense)[0].astype(np.int32)
    return VocabStats(nodes, dense[nodes], int(corpus.total_tokens))


def _validate_walkable(g: Graph):
    if g.num_nodes == 0:
        raise ValueError("cannot sample walks from an empty graph")
    isolated = np.nonzero(g.degrees == 0)[0]
    if len(isolated):
        raise ValueError(
            f"graph has {len(isolated)} isolated node(s) (e.g. id {int(isolated[0])}); "
            "preprocess it first"
        )


def biased_weights(g: Graph, prev: int, cur: int, p: float, q: float) -> np.ndarray:
    """Unnormalized second-order transition weights over neighbors(cur).

    1/p for stepping back to ``prev``, 1 for neighbors adjacent to ``prev``,
    1/q for neighbors two hops from ``prev``.
    """
    nbrs = g.neighbors(cur)
    prev_nbrs = g.neighbors(prev)
    w = np.full(len(nbrs), 1.0 / q, dtype=np.float64)
    w[np.isin(nbrs, prev_nbrs, assume_unique=True)] = 1.0
    w[nbrs == prev] = 1.0 / p
    return w


def biased_step(g: Graph, prev: int, cur: int, p: float, q: float) -> dict[int, float]:
    """Normalized p/q-biased next-step distribution given the edge (prev, cur)."""
    if not g.has_edge(prev, cur):
        raise ValueError(f"({prev}, {cur}) is not an edge")
    if g.degree(cur) == 0:
        raise ValueError(f"node {cur} has no neighbors")
    w = biased_weights(g, prev, cur, p, q)
    w /= w.sum()
    return {int(n): float(x) for n, x in zip(g.neighbors(cur), w)}


class _EdgeAliasTables:
    """Flat alias tables, one per directed edge (prev -> cur), each sized
    deg(cur). Lets lockstep walkers draw biased steps in O(1)."""

    def __init__(self, g: Graph, p: float, q: float):
        num_directed = len(g.flat_neighbors)
        heads = g.flat_neighbors
        sizes = g.degrees[heads]
        self.offsets = np.zeros(num_directed + 1, dtype=np.int64)
        np.cumsum(sizes, out=self.offsets[1:])
        self.prob = np.empty(self.offsets[-1], dtype=np.float64)
        self.alias = np.empty(self.offsets[-1], dtype=np.int32)
        tails = np.repeat(np.arange(g.num_nodes, dtype=np.int32), g.degrees)
        for e in range(num_directed):
            w = biased_weights(g, int(tails[e]), int(heads[e]), p, q)
            prob, alias = alias_setup(w)
            self.prob[self.offsets[e]:self.offsets[e + 1]] = prob
            self.alias[self.offsets[e]:self.offsets[e + 1]] = alias


def _uniform_pass(g: Graph, starts: np.ndarray, length: int,
                  rng: np.random.Generator) -> np.ndarray:
    walks = np.empty((len(starts), length), dtype=np.int32)
    walks[:, 0] = starts
    cur = starts.astype(np.int64)
    for step in range(1, length):
        j = rng.integers(0, g.degrees[cur])
        cur = g.flat_neighbors[g.indptr[cur] + j].astype(np.int64)
        walks[:, step] = cur
    return walks


def _biased_pass(g: Graph, starts: np.ndarray, length: int, tables: _EdgeAliasTables,
                 rng: np.random.Generator) -> np.ndarray:
    walks = np.empty((len(starts), length), dtype=np.int32)
    walks[:, 0] = starts
    if length == 1:
        return walks
    # first step has no predecessor: uniform over neighbors
    cur = starts.astype(np.int64)
    j = rng.integers(0, g.degrees[cur])
    prev_edge = g.indptr[cur] + j
    cur = g.flat_neighbors[prev_edge].astype(np.int64)
    walks[:, 1] = cur
    for step in range(2, length):
        deg = g.degrees[cur]
        cell = (rng.random(len(cur)) * deg).astype(np.int64)
        base = tables.offsets[prev_edge]
        take_alias = rng.random(len(cur)) >= tables.prob[base + cell]
        cell[take_alias] = tables.alias[base + cell[take_alias]]
        prev_edge = g.indptr[cur] + cell
        cur = g.flat_neighbors[prev_edge].astype(np.int64)
        walks[:, step] = cur
    return walks


def sample_walks(g: Graph, cfg: WalkConfig) -> WalkCorpus:
    """Sample ``walks_per_node`` truncated walks of ``walk_length`` nodes from
    every node.

    Starts are shuffled per pass; with p = q = 1 every step is uniform over
    neighbors, otherwise the second-order p/q bias applies (the first step of
    each walk is uniform since there is no predecessor). Deterministic given
    (graph, config, seed).
    """
    _validate_walkable(g)
    rng = np.random.default_rng(cfg.seed)
    uniform = cfg.p == 1.0 and cfg.q == 1.0
    tables = None if uniform else _EdgeAliasTables(g, cfg.p, cfg.q)
    blocks = []
    for _ in range(cfg.walks_per_node):
        starts = rng.permutation(g.num_nodes).astype(np.int32)
        if uniform:
            blocks.append(_uniform_pass(g, starts, cfg.walk_length, rng))
        else:
            blocks.append(_biased_pass(g, starts, cfg.walk_length, tables, rng))
    tokens = np.concatenate([b.reshape(-1) for b in blocks])
    n_walks = cfg.walks_per_node * g.num_nodes
    offsets = np.arange(n_walks + 1, dtype=np.int64) * cfg.walk_length
    return WalkCorpus(tokens, offsets, origin="uniform" if uniform else "biased")


def top_fraction_nodes(stats: VocabStats, retain_fraction: float) -> np.ndarray:
    """The ceil(retain_fraction * vocab) most frequent nodes, ties broken by
    lower node id."""
    if not 0 < retain_fraction <= 1:
        raise ValueError(f"retain_fraction must be in (0, 1], got {retain_fraction}")
    k = math.ceil(retain_fraction * stats.vocab_size)
    order = np.lexsort((stats.nodes, -stats.counts))
    return np.sort(stats.nodes[order[:k]])


def prune_walks(corpus: WalkCorpus, stats: VocabStats, retain_fraction: float) -> WalkCorpus:
    """Delete every occurrence of nodes outside the top retain_fraction of
    ``stats`` from every walk; walks that become empty are dropped."""
    kept_nodes = top_fraction_nodes(stats, retain_fraction)
    size = int(max(stats.nodes.max(initial=-1), corpus.tokens.max(initial=-1))) + 1
    keep = np.zeros(size, dtype=bool)
    keep[kept_nodes] = True
    mask = keep[corpus.tokens]
    new_lengths = np.add.reduceat(mask, corpus.offsets[:-1]) if len(corpus) else np.empty(0, np.int64)
    new_lengths = new_lengths[new_lengths > 0]
    offsets = np.zeros(len(new_lengths) + 1, dtype=np.int64)
    np.cumsum(new_lengths, out=offsets[1:])
    return WalkCorpus(corpus.tokens[mask], offsets, origin=f"pruned({retain_fraction:g})")


def skip_transform(corpus: WalkCorpus, k: int) -> WalkCorpus:
    """Emit, for each walk and each offset o in [0, k], the subsequence of
    every (k+1)-th token starting at o. k = 0 is the identity."""
    if k < 0:
        raise ValueError(f"skip offset must be >= 0, got {k}")
    if k == 0:
        return WalkCorpus(corpus.tokens, corpus.offsets, origin="skipped(0)")
    pieces = []
    for walk in corpus:
        for o in range(k + 1):
            sub = walk[o::k + 1]
            if len(sub):
                pieces.append(sub)
    lengths = np.array([len(s) for s in pieces], dtype=np.int64)
    offsets = np.zeros(len(pieces) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    tokens = np.concatenate(pieces) if pieces else np.empty(0, np.int32)
    return WalkCorpus(tokens, offsets, origin=f"skipped({k})")


def save_corpus(corpus: WalkCorpus, g: Graph, path: str):
    """Write one walk per line as space-separated external node names."""
    with open(path, "w", encoding="utf-8") as fh:
        for walk in corpus:
            fh.write(" ".join(g.names[t] for t in walk))
            fh.write("\n")


def load_corpus(path: str, g: Graph, origin: str = "file") -> WalkCorpus:
    """Read a corpus file written by :func:`save_corpus`."""
    walks = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            names = line.split()
            if not names:
                continue
            try:
                walks.append([g.name_to_id[n] for n in names])
            except KeyError as exc:
                raise ValueError(f"line {lineno}: unknown node name {exc.args[0]!r}") from None
    return WalkCorpus.from_walks(walks, origin=origin)
