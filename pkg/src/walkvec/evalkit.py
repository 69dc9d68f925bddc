"""Evaluation protocols: multi-label node classification with one-vs-rest
logistic regression, link prediction scored by AUC, and shortest-path-length
regression with MAE/MRE against trivial and random baselines."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit
from scipy.stats import rankdata

from .edgeops import edge_features
from .graph import Graph, LabelTable, _bfs_array
from .sgns import EmbeddingModel, init_model

logger = logging.getLogger(__name__)


@dataclass
class SplitSpec:
    train_fraction: float = 0.9
    num_repeats: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if self.num_repeats < 1:
            raise ValueError(f"num_repeats must be >= 1, got {self.num_repeats}")


@dataclass
class EvalReport:
    """Per-split metric values plus run metadata."""

    metrics: dict[str, list[float]] = field(default_factory=dict)
    metadata: dict[str, str] = field(default_factory=dict)

    def add(self, name: str, value: float):
        self.metrics.setdefault(name, []).append(float(value))

    def mean(self, name: str) -> float:
        return float(np.mean(self.metrics[name]))

    def std(self, name: str) -> float:
        values = self.metrics[name]
        return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0

    def to_machine_lines(self) -> list[str]:
        return [f"metric={name} mean={self.mean(name):.6f} std={self.std(name):.6f} "
                f"n={len(values)}" for name, values in self.metrics.items()]

    def to_table(self) -> str:
        lines = ["metric            mean      std       n"]
        for name, values in self.metrics.items():
            lines.append(f"{name:<16} {self.mean(name):>9.4f} {self.std(name):>9.4f} "
                         f"{len(values):>5d}")
        return "\n".join(lines)

    def to_csv(self, path: str):
        names = list(self.metrics)
        n = max(len(v) for v in self.metrics.values())
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("split," + ",".join(names) + "\n")
            for i in range(n):
                row = [str(self.metrics[m][i]) if i < len(self.metrics[m]) else ""
                       for m in names]
                fh.write(f"{i}," + ",".join(row) + "\n")


def _fit_binary_logreg(x: np.ndarray, y01: np.ndarray, l2: float, max_iter: int,
                       gtol: float = 1e-5):
    """L2-regularized logistic regression by L-BFGS (bias unpenalized).

    Returns (weights, bias, objective_trace). Degenerate one-class targets
    get a zero weight vector and a smoothed log-odds bias (prior predictor).
    """
    x = np.asarray(x, dtype=np.float64)
    y01 = np.asarray(y01, dtype=np.float64)
    n, d = x.shape
    n_pos = int(y01.sum())
    if n_pos == 0 or n_pos == n:
        prior = (n_pos + 0.5) / (n + 1.0)
        logger.warning("class with %d/%d positives in the train split, predicting the prior",
                       n_pos, n)
        return np.zeros(d), float(np.log(prior / (1 - prior))), []
    sign = 2.0 * y01 - 1.0

    def objective(theta):
        w, b = theta[:d], theta[d]
        margin = -sign * (x @ w + b)
        loss = np.logaddexp(0.0, margin).sum() + 0.5 * l2 * (w @ w)
        pull = -sign * expit(margin)
        grad = np.concatenate([x.T @ pull + l2 * w, [pull.sum()]])
        return loss, grad

    trace: list[float] = []
    result = minimize(objective, np.zeros(d + 1), jac=True, method="L-BFGS-B",
                      callback=lambda theta: trace.append(float(objective(theta)[0])),
                      options={"maxiter": max_iter, "gtol": gtol, "ftol": 1e-14})
    return result.x[:d], float(result.x[d]), trace


class OneVsRestLogistic:
    """Per-class L2-regularized logistic scorers over a fixed label universe."""

    def __init__(self, weights: np.ndarray, biases: np.ndarray,
                 objective_traces: list[list[float]]):
        self.weights = weights        # (num_classes, d)
        self.biases = biases          # (num_classes,)
        self.objective_traces = objective_traces
        self.num_classes = len(biases)

    def predict_scores(self, x: np.ndarray) -> np.ndarray:
        """Per-class probability scores, shape (n, num_classes)."""
        return expit(np.asarray(x, dtype=np.float64) @ self.weights.T + self.biases)


def train_logreg_ovr(features: np.ndarray, label_sets, num_classes: int,
                     l2: float = 1.0, max_iter: int = 200) -> OneVsRestLogistic:
    """Fit one binary logistic regression per class (one row per sample,
    ``label_sets[i]`` the class-id set of row i)."""
    features = np.asarray(features, dtype=np.float64)
    if len(features) != len(label_sets):
        raise ValueError("features and label_sets must have the same length")
    weights = np.zeros((num_classes, features.shape[1]))
    biases = np.zeros(num_classes)
    traces = []
    for c in range(num_classes):
        y = np.array([1.0 if c in s else 0.0 for s in label_sets])
        weights[c], biases[c], trace = _fit_binary_logreg(features, y, l2, max_iter)
        traces.append(trace)
    return OneVsRestLogistic(weights, biases, traces)


def predict_top_k(clf: OneVsRestLogistic, features: np.ndarray, k_per_sample) -> list[set[int]]:
    """For each sample, the k highest-scoring classes (ties to lower class id)."""
    scores = clf.predict_scores(features)
    out = []
    for row, k in zip(scores, k_per_sample):
        k = int(k)
        if k > clf.num_classes:
            raise ValueError(f"k={k} exceeds the {clf.num_classes}-class universe")
        order = np.lexsort((np.arange(len(row)), -row))
        out.append(set(int(c) for c in order[:k]))
    return out


def _confusion_counts(predicted, truth, num_classes):
    tp = np.zeros(num_classes, dtype=np.int64)
    fp = np.zeros(num_classes, dtype=np.int64)
    fn = np.zeros(num_classes, dtype=np.int64)
    if len(predicted) != len(truth):
        raise ValueError("predicted and truth must have the same sample count")
    for pred, true in zip(predicted, truth):
        for c in pred & true:
            tp[c] += 1
        for c in pred - true:
            fp[c] += 1
        for c in true - pred:
            fn[c] += 1
    return tp, fp, fn


def macro_f1(predicted, truth, num_classes: int) -> float:
    """Unweighted mean of per-class F1; classes with no TP/FP/FN count as 0."""
    tp, fp, fn = _confusion_counts(predicted, truth, num_classes)
    denom = 2 * tp + fp + fn
    f1 = np.divide(2 * tp, denom, out=np.zeros(num_classes, dtype=np.float64),
                   where=denom > 0)
    return float(f1.mean())


def micro_f1(predicted, truth, num_classes: int) -> float:
    """F1 over pooled TP/FP/FN counts."""
    tp, fp, fn = _confusion_counts(predicted, truth, num_classes)
    denom = 2 * tp.sum() + fp.sum() + fn.sum()
    return float(2 * tp.sum() / denom) if denom else 0.0


def node_classification_eval(model: EmbeddingModel, labels: LabelTable, spec: SplitSpec,
                             l2: float = 1.0, max_iter: int = 200) -> EvalReport:
    """Repeated random train/test splits of the labeled nodes; per split, fit
    one-vs-rest logistic regression on phi rows and predict, for each test
    node, as many classes as it truly has.

    The split sequence is a pure function of ``spec``, so two embedding
    methods evaluated under one spec see identical splits.
    """
    nodes = np.array(labels.nodes, dtype=np.int64)
    if nodes.max(initial=-1) >= model.phi.shape[0]:
        raise ValueError("labeled node outside the model's vocabulary")
    features = model.phi[nodes].astype(np.float64)
    label_sets = [labels.assignments[int(n)] for n in nodes]
    rng = np.random.default_rng(spec.seed)
    n = len(nodes)
    n_train = min(max(int(round(spec.train_fraction * n)), 1), n - 1)
    report = EvalReport(metadata={"task": "node-classification",
                                  "train_fraction": str(spec.train_fraction),
                                  "repeats": str(spec.num_repeats), "l2": str(l2)})
    for _ in range(spec.num_repeats):
        perm = rng.permutation(n)
        tr, te = perm[:n_train], perm[n_train:]
        clf = train_logreg_ovr(features[tr], [label_sets[i] for i in tr],
                               labels.num_classes, l2=l2, max_iter=max_iter)
        truth = [label_sets[i] for i in te]
        predicted = predict_top_k(clf, features[te], [len(t) for t in truth])
        report.add("macro_f1", macro_f1(predicted, truth, labels.num_classes))
        report.add("micro_f1", micro_f1(predicted, truth, labels.num_classes))
    return report


@dataclass
class LinkPredDataset:
    residual_graph: Graph
    positives: np.ndarray  # (n, 2) removed edges
    negatives: np.ndarray  # (n, 2) sampled non-edges


def make_lp_dataset(g: Graph, removal_fraction: float, seed: int) -> LinkPredDataset:
    """Remove a random edge fraction (positives) and sample an equal number of
    uniform non-edges (negatives).

    A removal that would leave an endpoint with no edges is rejected and
    another edge drawn, so the residual graph still gives walk coverage to
    every node.
    """
    if not 0 < removal_fraction < 1:
        raise ValueError(f"removal_fraction must be in (0, 1), got {removal_fraction}")
    edges = np.array(g.edges(), dtype=np.int64)
    if len(edges) == 0:
        raise ValueError("graph has no edges")
    target = int(round(removal_fraction * len(edges)))
    n = g.num_nodes
    max_negatives = n * (n - 1) // 2 - g.num_edges
    if target > max_negatives:
        raise ValueError(f"graph too dense: need {target} non-edges, only "
                         f"{max_negatives} exist")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(edges))
    degrees = g.degrees.copy()
    removed_mask = np.zeros(len(edges), dtype=bool)
    removed = 0
    for idx in order:
        if removed == target:
            break
        u, v = edges[idx]
        if degrees[u] > 1 and degrees[v] > 1:
            removed_mask[idx] = True
            degrees[u] -= 1
            degrees[v] -= 1
            removed += 1
    if removed < target:
        raise ValueError(f"could only remove {removed}/{target} edges without "
                         "isolating a node")
    positives = edges[removed_mask]
    residual = Graph(g.names, [tuple(e) for e in edges[~removed_mask]])

    seen: set[tuple[int, int]] = set()
    negatives = []
    while len(negatives) < target:
        batch = rng.integers(0, n, size=(max(1024, 2 * (target - len(negatives))), 2))
        for u, v in batch:
            if len(negatives) >= target:
                break
            u, v = (int(u), int(v)) if u < v else (int(v), int(u))
            if u == v or (u, v) in seen or g.has_edge(u, v):
                continue
            seen.add((u, v))
            negatives.append((u, v))
    return LinkPredDataset(residual, positives, np.array(negatives, dtype=np.int64))


def auc(scores, labels) -> float:
    """Probability that a random positive outscores a random negative, ties
    counted half (rank-sum formulation)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int(np.sum(labels == 1))
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    ranks = rankdata(scores)
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


def link_prediction_eval(model: EmbeddingModel, ds: LinkPredDataset, op: str,
                         l2: float = 1.0, split: SplitSpec | None = None,
                         max_iter: int = 200) -> EvalReport:
    """Binary logistic regression on edge features of the removed-edge
    positives vs sampled non-edges; AUC on the held-out pairs (the split is
    stratified: positives and negatives are split separately)."""
    split = split or SplitSpec(train_fraction=0.5, num_repeats=1, seed=0)
    pos_x = edge_features(op, model.phi.astype(np.float64), ds.positives)
    neg_x = edge_features(op, model.phi.astype(np.float64), ds.negatives)
    rng = np.random.default_rng(split.seed)
    report = EvalReport(metadata={"task": "link-prediction", "operator": op,
                                  "l2": str(l2), "repeats": str(split.num_repeats)})
    for _ in range(split.num_repeats):
        tr_parts, te_parts, te_labels = [], [], []
        for x, label in ((pos_x, 1), (neg_x, 0)):
            perm = rng.permutation(len(x))
            cut = min(max(int(round(split.train_fraction * len(x))), 1), len(x) - 1)
            tr_parts.append((x[perm[:cut]], label))
            te_parts.append(x[perm[cut:]])
            te_labels.append(np.full(len(x) - cut, label))
        x_train = np.vstack([p[0] for p in tr_parts])
        y_train = np.concatenate([np.full(len(p[0]), p[1]) for p in tr_parts])
        w, b, _ = _fit_binary_logreg(x_train, y_train, l2, max_iter)
        x_test = np.vstack(te_parts)
        scores = expit(x_test @ w + b)
        report.add("auc", auc(scores, np.concatenate(te_labels)))
    return report


@dataclass
class ShortestPathDataset:
    pairs: np.ndarray       # (n, 2)
    distances: np.ndarray   # (n,) hop counts >= 1
    distance_counts: dict[int, int]


def make_sp_dataset(g: Graph, num_pairs: int, max_hops: int, seed: int,
                    per_distance_cap: int | None = None) -> ShortestPathDataset:
    """Sample node pairs with exact hop distances via BFS from random sources,
    up to ``max_hops``. The optional per-distance cap bounds how many pairs a
    single distance value may contribute, mitigating hop-count imbalance."""
    if num_pairs < 1:
        raise ValueError(f"num_pairs must be >= 1, got {num_pairs}")
    if max_hops < 1:
        raise ValueError(f"max_hops must be >= 1, got {max_hops}")
    rng = np.random.default_rng(seed)
    counts: dict[int, int] = {}
    seen: set[tuple[int, int]] = set()
    pairs, dists = [], []
    for src in rng.permutation(g.num_nodes):
        dist = _bfs_array(g, int(src), max_hops)
        reached = np.nonzero(dist > 0)[0]
        reached = reached[rng.permutation(len(reached))]
        for v in reached:
            d = int(dist[v])
            if per_distance_cap is not None and counts.get(d, 0) >= per_distance_cap:
                continue
            key = (int(src), int(v)) if src < v else (int(v), int(src))
            if key in seen:
                continue
            seen.add(key)
            counts[d] = counts.get(d, 0) + 1
            pairs.append(key)
            dists.append(d)
        if len(pairs) >= num_pairs:
            break
    if len(pairs) < num_pairs:
        logger.warning("only %d of %d requested pairs available within %d hops",
                       len(pairs), num_pairs, max_hops)
    perm = rng.permutation(len(pairs))[:num_pairs]
    pairs_arr = np.array(pairs, dtype=np.int64)[perm]
    dists_arr = np.array(dists, dtype=np.int64)[perm]
    final_counts = {int(d): int(c) for d, c in
                    zip(*np.unique(dists_arr, return_counts=True))}
    return ShortestPathDataset(pairs_arr, dists_arr, final_counts)


def _linreg_mae_mre(x_train, y_train, x_test, y_test):
    a_train = np.hstack([x_train, np.ones((len(x_train), 1))])
    a_test = np.hstack([x_test, np.ones((len(x_test), 1))])
    coef, *_ = np.linalg.lstsq(a_train, y_train, rcond=None)
    pred = a_test @ coef
    err = np.abs(pred - y_test)
    return float(err.mean()), float((err / y_test).mean())


def shortest_path_eval(model: EmbeddingModel, dataset: ShortestPathDataset, op: str,
                       split: SplitSpec | None = None) -> EvalReport:
    """Linear regression from edge features to hop count; test MAE and MRE,
    plus a trivial baseline (constant train-mean distance) and a random
    baseline (same regression over freshly random embeddings)."""
    split = split or SplitSpec(train_fraction=0.5, num_repeats=1, seed=0)
    features = edge_features(op, model.phi.astype(np.float64), dataset.pairs)
    random_model = init_model(model.vocab, model.dim, split.seed + 104729)
    random_features = edge_features(op, random_model.phi.astype(np.float64), dataset.pairs)
    y = dataset.distances.astype(np.float64)
    rng = np.random.default_rng(split.seed)
    report = EvalReport(metadata={"task": "shortest-path", "operator": op,
                                  "pairs": str(len(y)), "repeats": str(split.num_repeats)})
    n = len(y)
    cut = min(max(int(round(split.train_fraction * n)), 1), n - 1)
    for _ in range(split.num_repeats):
        perm = rng.permutation(n)
        tr, te = perm[:cut], perm[cut:]
        mae, mre = _linreg_mae_mre(features[tr], y[tr], features[te], y[te])
        const = y[tr].mean()
        err = np.abs(const - y[te])
        mae_r, mre_r = _linreg_mae_mre(random_features[tr], y[tr],
                                       random_features[te], y[te])
        report.add("mae", mae)
        report.add("mre", mre)
        report.add("mae_trivial", float(err.mean()))
        report.add("mre_trivial", float((err / y[te]).mean()))
        report.add("mae_random", mae_r)
        report.add("mre_random", mre_r)
    return report
