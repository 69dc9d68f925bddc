"""Skip-gram with negative sampling over walk corpora.

The training objective for a (center u, context v+) pair with K noise draws:

    log sigmoid(<phi'(v+), phi(u)>) + sum_k log sigmoid(-<phi'(v_k), phi(u)>)

maximized by SGD with a linearly decaying learning rate. Includes the
level-scheduled training over frequency-pruned corpora and the multi-level
skip pipeline with PCA merging.
"""

from __future__ import annotations

import concurrent.futures
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import _sgns_py
from ._backend import backend_name, get_train_shard
from .alias import alias_setup, alias_draw
from .dimred import pca
from .graph import Graph
from .walker import (WalkConfig, WalkCorpus, VocabStats, prune_walks, sample_walks,
                     skip_transform, vocab_stats)

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    dim: int = 128
    window: int = 10
    negatives: int = 5
    alpha: float = 0.025
    alpha_min: float = 0.0001
    iterations: int = 5
    sample_threshold: float = 0.1
    min_count: int = 0
    noise_exponent: float = 1.0
    seed: int = 0
    shrink_window: bool = True  # draw the effective window uniformly from {1..window}

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.negatives < 1:
            raise ValueError(f"negatives must be >= 1, got {self.negatives}")
        if not 0 < self.alpha_min <= self.alpha:
            raise ValueError(f"need 0 < alpha_min <= alpha, got alpha={self.alpha}, "
                             f"alpha_min={self.alpha_min}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.sample_threshold < 0:
            raise ValueError(f"sample_threshold must be >= 0, got {self.sample_threshold}")
        if self.min_count < 0:
            raise ValueError(f"min_count must be >= 0, got {self.min_count}")


@dataclass
class LevelSpec:
    retain_fraction: float
    iterations: int
    alpha: float | None = None  # None: use the TrainConfig rate


@dataclass
class LevelSchedule:
    """Ordered retain levels; fractions strictly increasing and ending at 1.0."""

    levels: list[LevelSpec]

    def __post_init__(self):
        if not self.levels:
            raise ValueError("schedule must have at least one level")
        fracs = [lv.retain_fraction for lv in self.levels]
        if any(not 0 < f <= 1 for f in fracs):
            raise ValueError(f"retain fractions must be in (0, 1], got {fracs}")
        if any(b <= a for a, b in zip(fracs, fracs[1:])):
            raise ValueError(f"retain fractions must be strictly increasing, got {fracs}")
        if fracs[-1] != 1.0:
            raise ValueError(f"schedule must end at retain fraction 1.0, got {fracs[-1]}")
        if any(lv.iterations < 1 for lv in self.levels):
            raise ValueError("every level needs iterations >= 1")

    @classmethod
    def parse(cls, text: str) -> "LevelSchedule":
        """Parse "0.1:10,0.2:5,0.4:3,1.0:1" (optionally fraction:iters:alpha)."""
        levels = []
        for part in text.split(","):
            fields = part.strip().split(":")
            if len(fields) not in (2, 3):
                raise ValueError(f"bad schedule entry {part!r}, expected fraction:iterations")
            frac, iters = float(fields[0]), int(fields[1])
            alpha = float(fields[2]) if len(fields) == 3 else None
            levels.append(LevelSpec(frac, iters, alpha))
        return cls(levels)

    def __str__(self):
        return ",".join(
            f"{lv.retain_fraction:g}:{lv.iterations}" + (f":{lv.alpha:g}" if lv.alpha else "")
            for lv in self.levels)


@dataclass
class EmbeddingModel:
    """Input embeddings ``phi`` and output projections ``phi_prime``, rows
    indexed by node id."""

    phi: np.ndarray
    phi_prime: np.ndarray
    dim: int
    vocab: np.ndarray  # sorted node ids covered by the model

    def copy(self) -> "EmbeddingModel":
        return EmbeddingModel(self.phi.copy(), self.phi_prime.copy(), self.dim,
                              self.vocab.copy())


@dataclass
class EpochReport:
    processed_tokens: int = 0
    pairs: int = 0


def init_model(vocab, dim: int, seed: int) -> EmbeddingModel:
    """Random model: phi rows uniform in [-0.5/dim, 0.5/dim], phi_prime zero."""
    vocab = np.unique(np.asarray(list(vocab), dtype=np.int32))
    if len(vocab) == 0:
        raise ValueError("cannot initialize a model over an empty vocabulary")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    rows = int(vocab.max()) + 1
    rng = np.random.default_rng(seed)
    bound = 0.5 / dim
    phi = rng.uniform(-bound, bound, size=(rows, dim)).astype(np.float32)
    phi_prime = np.zeros((rows, dim), dtype=np.float32)
    return EmbeddingModel(phi, phi_prime, dim, vocab)


def sigmoid(x):
    """Logistic sigmoid with inputs clamped to [-16, 16]."""
    return 1.0 / (1.0 + np.exp(-np.clip(x, -16.0, 16.0)))


class NoiseTable:
    """Alias-method sampler over ``counts ** exponent``."""

    def __init__(self, stats: VocabStats, exponent: float = 1.0):
        if stats.vocab_size == 0:
            raise ValueError("noise distribution needs a non-empty vocabulary")
        weights = stats.counts.astype(np.float64) ** exponent
        self.prob, self.alias = alias_setup(weights)
        self.nodes = stats.nodes.astype(np.int32)

    def draw(self, rng: np.random.Generator) -> int:
        return int(self.nodes[alias_draw(self.prob, self.alias, rng)])

    def draw_many(self, size: int, rng: np.random.Generator) -> np.ndarray:
        cells = (rng.random(size) * len(self.prob)).astype(np.int64)
        coins = rng.random(size)
        take = coins >= self.prob[cells]
        cells[take] = self.alias[cells[take]]
        return self.nodes[cells]


def draw_noise(stats: VocabStats, exponent: float, rng: np.random.Generator) -> int:
    """Sample one node with probability proportional to count**exponent."""
    return NoiseTable(stats, exponent).draw(rng)


def pair_update(model: EmbeddingModel, center: int, context: int, negatives,
                lr: float) -> None:
    """Single SGD step on the negative-sampling objective, in place.

    The center row moves along the gradient computed from the projection rows
    as they were before this call's own updates to them.
    """
    if lr <= 0:
        if lr == 0:
            return
        raise ValueError(f"lr must be > 0, got {lr}")
    _sgns_py.apply_pair(model.phi, model.phi_prime, center, context, list(negatives), lr)


def negative_sampling_objective(model: EmbeddingModel, pairs, stats: VocabStats,
                                negatives: int, exponent: float,
                                rng: np.random.Generator) -> float:
    """Monte-Carlo estimate of the training objective on given (center,
    context) pairs, higher is better."""
    table = NoiseTable(stats, exponent)
    total = 0.0
    for u, v in pairs:
        f = float(model.phi_prime[v].astype(np.float64) @ model.phi[u].astype(np.float64))
        total += float(np.log(sigmoid(f)))
        for neg in table.draw_many(negatives, rng):
            f = float(model.phi_prime[neg].astype(np.float64) @ model.phi[u].astype(np.float64))
            total += float(np.log(sigmoid(-f)))
    return total / max(len(pairs), 1)


def softmax_probability(model: EmbeddingModel, center: int) -> np.ndarray:
    """Full softmax P(v | center) over the vocabulary (reference scorer for
    tests; never used in training)."""
    scores = model.phi_prime[model.vocab].astype(np.float64) @ model.phi[center].astype(np.float64)
    scores -= scores.max()
    e = np.exp(scores)
    return e / e.sum()


def _keep_probabilities(dense_counts: np.ndarray, total: int, threshold: float) -> np.ndarray:
    """Subsampling keep probability min(1, sqrt(threshold / frequency));
    threshold 0 disables subsampling entirely."""
    keep = np.ones(len(dense_counts), dtype=np.float64)
    if threshold > 0:
        present = dense_counts > 0
        freq = dense_counts[present] / total
        keep[present] = np.minimum(1.0, np.sqrt(threshold / freq))
    return keep


def learning_rate_at(progress: float, alpha: float, alpha_min: float) -> float:
    """Linear decay from alpha at progress 0 to alpha_min at progress 1."""
    return max(alpha_min, alpha - (alpha - alpha_min) * progress)


def _derive_seed(*keys: int) -> int:
    seq = np.random.SeedSequence([int(k) % (2 ** 63) for k in keys])
    return int(seq.generate_state(1, np.uint64)[0])


class _KernelInputs:
    """Arrays shared by every epoch of one train() call."""

    def __init__(self, model: EmbeddingModel, corpus: WalkCorpus, stats: VocabStats,
                 cfg: TrainConfig):
        if corpus.total_tokens and int(corpus.tokens.max()) >= model.phi.shape[0]:
            raise ValueError("corpus vocabulary exceeds the model's rows")
        rows = model.phi.shape[0]
        dense = stats.dense_counts(rows)
        self.keep_mask = (dense >= max(cfg.min_count, 1)).astype(np.uint8)
        self.keep_prob = _keep_probabilities(dense, stats.total, cfg.sample_threshold)
        self.use_subsample = 1 if cfg.sample_threshold > 0 else 0
        weights = stats.counts.astype(np.float64) ** cfg.noise_exponent
        self.noise_prob, self.noise_alias = alias_setup(weights)
        self.noise_nodes = stats.nodes.astype(np.int32)
        token_eligible = self.keep_mask[corpus.tokens].astype(np.int64)
        self.epoch_tokens = int(token_eligible.sum())
        self.walk_tokens = np.add.reduceat(token_eligible, corpus.offsets[:-1]) \
            if len(corpus) else np.zeros(0, dtype=np.int64)


def train_epoch(model: EmbeddingModel, corpus: WalkCorpus, stats: VocabStats,
                cfg: TrainConfig, progress: tuple[float, float] = (0.0, 1.0),
                threads: int = 1, stream_key: int = 0,
                _inputs: _KernelInputs | None = None,
                backend: str | None = None) -> EpochReport:
    """One pass over the corpus.

    ``progress`` locates this epoch inside the whole run's linear learning
    rate decay: (0.0, 1.0) means the epoch spans the full schedule.
    """
    if not 0.0 <= progress[0] < progress[1] <= 1.0:
        raise ValueError(f"progress must satisfy 0 <= start < end <= 1, got {progress}")
    inputs = _inputs or _KernelInputs(model, corpus, stats, cfg)
    span = progress[1] - progress[0]
    total_tokens = int(round(inputs.epoch_tokens / span)) if inputs.epoch_tokens else 0
    token_base = int(round(progress[0] * total_tokens))
    kernel = get_train_shard(backend)

    n_walks = len(corpus)
    report = EpochReport()
    if n_walks == 0:
        return report
    use_threads = min(threads, n_walks)
    if use_threads <= 1:
        processed, pairs = kernel(
            model.phi, model.phi_prime, corpus.tokens, corpus.offsets, 0, n_walks,
            inputs.keep_mask, inputs.keep_prob, inputs.use_subsample,
            inputs.noise_prob, inputs.noise_alias, inputs.noise_nodes,
            cfg.window, cfg.negatives, 1 if cfg.shrink_window else 0,
            cfg.alpha, cfg.alpha_min, total_tokens, token_base,
            _derive_seed(cfg.seed, stream_key, 0))
        report.processed_tokens += processed
        report.pairs += pairs
        return report

    # hogwild: disjoint walk shards, unsynchronized row updates
    cum = np.concatenate([[0], np.cumsum(inputs.walk_tokens)])
    targets = np.linspace(0, cum[-1], use_threads + 1)
    bounds = np.searchsorted(cum, targets)
    bounds[0], bounds[-1] = 0, n_walks

    def run(shard: int):
        lo, hi = int(bounds[shard]), int(bounds[shard + 1])
        if lo >= hi:
            return 0, 0
        return kernel(
            model.phi, model.phi_prime, corpus.tokens, corpus.offsets, lo, hi,
            inputs.keep_mask, inputs.keep_prob, inputs.use_subsample,
            inputs.noise_prob, inputs.noise_alias, inputs.noise_nodes,
            cfg.window, cfg.negatives, 1 if cfg.shrink_window else 0,
            cfg.alpha, cfg.alpha_min, total_tokens, token_base + int(cum[lo]),
            _derive_seed(cfg.seed, stream_key, shard + 1))

    with concurrent.futures.ThreadPoolExecutor(max_workers=use_threads) as pool:
        for processed, pairs in pool.map(run, range(use_threads)):
            report.processed_tokens += processed
            report.pairs += pairs
    return report


def train(model: EmbeddingModel, corpus: WalkCorpus, cfg: TrainConfig,
          stats: VocabStats | None = None, threads: int = 1,
          backend: str | None = None) -> EmbeddingModel:
    """Run ``cfg.iterations`` epochs with one shared linear decay schedule.

    ``threads`` > 1 opts into lock-free parallel updates (not bit-reproducible);
    the default single worker is fully deterministic given the seed.
    """
    stats = stats if stats is not None else vocab_stats(corpus)
    inputs = _KernelInputs(model, corpus, stats, cfg)
    n = cfg.iterations
    for epoch in range(n):
        train_epoch(model, corpus, stats, cfg, progress=(epoch / n, (epoch + 1) / n),
                    threads=threads, stream_key=epoch, _inputs=inputs, backend=backend)
        if not (np.isfinite(model.phi).all() and np.isfinite(model.phi_prime).all()):
            raise FloatingPointError(f"non-finite parameters after epoch {epoch}")
    return model


def train_deepwalk(g: Graph, walk_cfg: WalkConfig, cfg: TrainConfig,
                   threads: int = 1, corpus: WalkCorpus | None = None) -> EmbeddingModel:
    """Sample walks (uniform or p/q-biased per walk_cfg) and train one model."""
    corpus = corpus if corpus is not None else sample_walks(g, walk_cfg)
    model = init_model(np.arange(g.num_nodes), cfg.dim, cfg.seed)
    return train(model, corpus, cfg, threads=threads)


def train_halk(g: Graph, walk_cfg: WalkConfig, cfg: TrainConfig, schedule: LevelSchedule,
               threads: int = 1, corpus: WalkCorpus | None = None) -> EmbeddingModel:
    """Coarse-to-fine training over frequency-pruned corpora.

    Walks are sampled once; each level retains the schedule's fraction of the
    most frequent nodes (ranked on the original corpus), trains its stated
    number of epochs at its own rate, and updates the single shared model.
    """
    corpus = corpus if corpus is not None else sample_walks(g, walk_cfg)
    return train_halk_from_corpus(corpus, cfg, schedule, vocab=np.arange(g.num_nodes),
                                  threads=threads)


def train_halk_from_corpus(corpus: WalkCorpus, cfg: TrainConfig, schedule: LevelSchedule,
                           vocab=None, threads: int = 1) -> EmbeddingModel:
    base_stats = vocab_stats(corpus)
    vocab = vocab if vocab is not None else base_stats.nodes
    model = init_model(vocab, cfg.dim, cfg.seed)
    for li, level in enumerate(schedule.levels):
        level_corpus = prune_walks(corpus, base_stats, level.retain_fraction)
        if level_corpus.total_tokens == 0:
            logger.warning("level %d (retain %g) pruned the corpus to nothing, skipping",
                           li, level.retain_fraction)
            continue
        level_cfg = replace(cfg, iterations=level.iterations,
                            alpha=level.alpha if level.alpha is not None else cfg.alpha,
                            seed=_derive_seed(cfg.seed, 7, li))
        train(model, level_corpus, level_cfg, threads=threads)
    return model


def train_walklets(g: Graph, walk_cfg: WalkConfig, cfg: TrainConfig, skip_max: int,
                   final_dim: int, threads: int = 1,
                   corpus: WalkCorpus | None = None) -> EmbeddingModel:
    """Train one model per skip level 0..skip_max, concatenate the phi blocks
    column-wise and reduce to ``final_dim`` via PCA when wider."""
    if skip_max < 0:
        raise ValueError(f"skip_max must be >= 0, got {skip_max}")
    width = (skip_max + 1) * cfg.dim
    if final_dim > width:
        raise ValueError(f"final_dim {final_dim} exceeds concatenated width {width}")
    corpus = corpus if corpus is not None else sample_walks(g, walk_cfg)
    vocab = np.arange(g.num_nodes)
    blocks = []
    for level in range(skip_max + 1):
        level_corpus = skip_transform(corpus, level)
        level_stats = vocab_stats(level_corpus)
        level_cfg = replace(cfg, seed=_derive_seed(cfg.seed, 11, level))
        model = init_model(vocab, cfg.dim, level_cfg.seed)
        train(model, level_corpus, level_cfg, stats=level_stats, threads=threads)
        block = model.phi[:g.num_nodes].copy()
        missing = np.setdiff1d(vocab, level_stats.nodes)
        if len(missing):
            logger.warning("%d node(s) absent from skip level %d, zero-filling their block",
                           len(missing), level)
            block[missing] = 0.0
        blocks.append(block)
    combined = np.hstack(blocks)
    if combined.shape[1] > final_dim:
        combined = pca(combined, final_dim)
    phi = np.ascontiguousarray(combined, dtype=np.float32)
    return EmbeddingModel(phi, np.zeros_like(phi), final_dim, vocab.astype(np.int32))


def save_embeddings(model: EmbeddingModel, names, path: str):
    """Text format: first line "|V| d", then one line per node, external name
    followed by the phi row."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(model.vocab)} {model.dim}\n")
        for node in model.vocab:
            row = " ".join(f"{x:.9g}" for x in model.phi[node])
            fh.write(f"{names[node]} {row}\n")


def load_embeddings(path: str) -> tuple[list[str], np.ndarray]:
    """Read the text embedding format; returns (names, float32 matrix)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError("embedding file must start with a '|V| d' header")
        count, dim = int(header[0]), int(header[1])
        names, rows = [], []
        for lineno, line in enumerate(fh, start=2):
            tokens = line.split()
            if not tokens:
                continue
            if len(tokens) != dim + 1:
                raise ValueError(f"line {lineno}: expected name + {dim} floats, "
                                 f"got {len(tokens)} tokens")
            names.append(tokens[0])
            rows.append(np.array(tokens[1:], dtype=np.float32))
    if len(names) != count:
        raise ValueError(f"header declares {count} rows, file has {len(names)}")
    return names, np.vstack(rows) if rows else np.zeros((0, dim), dtype=np.float32)


__all__ = [
    "TrainConfig", "LevelSpec", "LevelSchedule", "EmbeddingModel", "EpochReport",
    "init_model", "sigmoid", "NoiseTable", "draw_noise", "pair_update",
    "negative_sampling_objective", "softmax_probability", "learning_rate_at",
    "train_epoch", "train", "train_deepwalk", "train_halk", "train_halk_from_corpus",
    "train_walklets", "save_embeddings", "load_embeddings", "backend_name",
]
