"""Command-line front end: walk sampling, embedding, and the three
evaluation protocols, with presets mirroring the published parameter tables.

Commands: walk, embed, eval-nc, eval-lp, eval-sp. Every run resolves a full
RunConfig (defaults < preset < config file < explicit flags), validates it,
and echoes it as flat key=value lines so the run can be reproduced exactly.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import evalkit, sgns, walker
from .edgeops import OPERATORS
from .graph import Graph, load_edge_list, load_labels, preprocess

logger = logging.getLogger(__name__)

METHODS = ("deepwalk", "node2vec", "halk", "walklets")

PRESETS = {
    "deepwalk-repro": dict(method="deepwalk", walks=80, length=40, window=10, dim=128,
                           iterations=5, negatives=5, sample=0.1, alpha=0.025,
                           alpha_min=0.0001, min_count=0),
    "node2vec-repro": dict(method="node2vec", walks=10, length=80, window=10, dim=128,
                           p=0.25, q=0.25, iterations=5, negatives=5, sample=0.1,
                           alpha=0.025, alpha_min=0.0001, min_count=0),
    "walklets-repro": dict(method="walklets", walks=1000, length=11, walklets_k=2,
                           window=10, dim=128, iterations=5, negatives=5, sample=0.1,
                           alpha=0.025, alpha_min=0.001, min_count=0),
    "halk-default": dict(method="halk", walks=80, length=40, window=10, dim=128,
                         negatives=5, sample=0.1, alpha=0.025, alpha_min=0.001,
                         min_count=0, halk_schedule="0.1:10,0.2:5,0.4:3,1.0:1"),
}


@dataclass
class RunConfig:
    command: str = ""
    input: str = ""
    labels: str = ""
    output: str = ""
    embeddings: str = ""
    corpus: str = ""
    pairs: str = ""
    method: str = "deepwalk"
    # walk parameters
    walks: int = 80
    length: int = 40
    p: float = 1.0
    q: float = 1.0
    # training parameters
    dim: int = 128
    window: int = 10
    negatives: int = 5
    alpha: float = 0.025
    alpha_min: float = 0.0001
    iterations: int = 5
    sample: float = 0.1
    min_count: int = 0
    noise_exponent: float = 1.0
    halk_schedule: str = "0.1:10,0.2:5,0.4:3,1.0:1"
    walklets_k: int = 2
    # evaluation parameters
    train_fraction: float = 0.9
    repeats: int = 10
    l2: float = 1.0
    op: str = "hadamard"
    removal_fraction: float = 0.5
    sp_pairs: int = 50000
    max_hops: int = 6
    distance_cap: int = 0  # 0: unlimited
    csv: str = ""
    export_pairs: str = ""
    # execution
    seed: int = 0
    threads: int = 1
    deterministic: bool = False

    def validate(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.op not in OPERATORS:
            raise ValueError(f"op must be one of {OPERATORS}, got {self.op!r}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if not 0 < self.removal_fraction < 1:
            raise ValueError(f"removal_fraction must be in (0, 1), got {self.removal_fraction}")
        if self.walklets_k < 0:
            raise ValueError(f"walklets_k must be >= 0, got {self.walklets_k}")
        self.walk_config()   # range checks live in the owning dataclasses
        self.train_config()
        if self.method == "halk":
            self.schedule()
        if self.command in ("eval-nc", "eval-lp", "eval-sp"):
            self.split_spec()

    def walk_config(self) -> walker.WalkConfig:
        p, q = (self.p, self.q) if self.method == "node2vec" else (1.0, 1.0)
        return walker.WalkConfig(walks_per_node=self.walks, walk_length=self.length,
                                 p=p, q=q, seed=self.seed)

    def train_config(self) -> sgns.TrainConfig:
        return sgns.TrainConfig(dim=self.dim, window=self.window, negatives=self.negatives,
                                alpha=self.alpha, alpha_min=self.alpha_min,
                                iterations=self.iterations, sample_threshold=self.sample,
                                min_count=self.min_count, noise_exponent=self.noise_exponent,
                                seed=self.seed)

    def schedule(self) -> sgns.LevelSchedule:
        return sgns.LevelSchedule.parse(self.halk_schedule)

    def split_spec(self) -> evalkit.SplitSpec:
        return evalkit.SplitSpec(train_fraction=self.train_fraction,
                                 num_repeats=self.repeats, seed=self.seed)

    def effective_threads(self) -> int:
        return 1 if self.deterministic else self.threads

    def to_lines(self) -> list[str]:
        return [f"{f.name}={getattr(self, f.name)}" for f in fields(self)]


def _parse_typed(name: str, text: str, target_type) -> object:
    if target_type is bool:
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"config key {name}: expected true/false, got {text!r}")
    return target_type(text)


def load_config(path: str) -> dict:
    """Read a flat key=value config file; unknown keys are rejected."""
    known = {f.name: f.type for f in fields(RunConfig)}
    types = {f.name: type(getattr(RunConfig(), f.name)) for f in fields(RunConfig)}
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _parse_typed(key, value.strip(), types[key])
    return values


def resolve_config(args: argparse.Namespace, command: str) -> RunConfig:
    cfg = RunConfig(command=command)
    overlays = []
    if getattr(args, "preset", None):
        overlays.append(dict(PRESETS[args.preset]))
    if getattr(args, "config", None):
        overlays.append(load_config(args.config))
    field_names = {f.name for f in fields(RunConfig)}
    cli_values = {k: v for k, v in vars(args).items() if k in field_names and v is not None}
    overlays.append(cli_values)
    for overlay in overlays:
        file_command = overlay.pop("command", None)
        if file_command and file_command != command:
            raise ValueError(f"config was written for command {file_command!r}, "
                             f"not {command!r}")
        for key, value in overlay.items():
            setattr(cfg, key, value)
    if cfg.deterministic:
        cfg.threads = 1
    cfg.validate()
    return cfg


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--input", help="edge list file")
    sub.add_argument("--labels", help="label file (node name + class names)")
    sub.add_argument("--output", help="output path")
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--preset", choices=sorted(PRESETS))
    sub.add_argument("--seed", type=int)
    sub.add_argument("--threads", type=int)
    sub.add_argument("--deterministic", action="store_const", const=True, default=None,
                     help="force a single worker (bit-reproducible runs)")
    sub.add_argument("--method", choices=METHODS)
    sub.add_argument("--walks", type=int, help="walks per node")
    sub.add_argument("--length", type=int, help="walk length in nodes")
    sub.add_argument("--p", type=float, help="return parameter (node2vec)")
    sub.add_argument("--q", type=float, help="in-out parameter (node2vec)")
    sub.add_argument("--dim", type=int)
    sub.add_argument("--window", type=int)
    sub.add_argument("--negatives", type=int)
    sub.add_argument("--alpha", type=float)
    sub.add_argument("--alpha-min", dest="alpha_min", type=float)
    sub.add_argument("--iterations", type=int)
    sub.add_argument("--sample", type=float, help="frequency subsampling threshold (0 disables)")
    sub.add_argument("--min-count", dest="min_count", type=int)
    sub.add_argument("--noise-exponent", dest="noise_exponent", type=float)
    sub.add_argument("--halk-schedule", dest="halk_schedule",
                     help='retain levels, e.g. "0.1:10,0.2:5,0.4:3,1.0:1"')
    sub.add_argument("--walklets-k", dest="walklets_k", type=int, help="max skip offset")


def _add_eval(sub: argparse.ArgumentParser):
    sub.add_argument("--embeddings", help="embedding file to evaluate")
    sub.add_argument("--train-fraction", dest="train_fraction", type=float)
    sub.add_argument("--repeats", type=int)
    sub.add_argument("--l2", type=float, help="L2 strength of the evaluation classifier")
    sub.add_argument("--op", choices=OPERATORS, help="edge feature operator")
    sub.add_argument("--csv", help="write one row per split to this CSV file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walkvec",
                                     description="Random-walk node embeddings and evaluation")
    commands = parser.add_subparsers(dest="command", required=True)

    walk = commands.add_parser("walk", help="sample a walk corpus to a file")
    _add_common(walk)

    embed = commands.add_parser("embed", help="train embeddings and write them out")
    _add_common(embed)
    embed.add_argument("--corpus", help="reuse a previously sampled walk corpus file")

    nc = commands.add_parser("eval-nc", help="node classification (one-vs-rest logistic "
                                             "regression, Macro/Micro-F1)")
    _add_common(nc)
    _add_eval(nc)

    lp = commands.add_parser("eval-lp", help="link prediction AUC on removed edges")
    _add_common(lp)
    _add_eval(lp)
    lp.add_argument("--removal-fraction", dest="removal_fraction", type=float)
    lp.add_argument("--pairs", help="evaluate a pairs file against --embeddings "
                                    "instead of running end to end")
    lp.add_argument("--export-pairs", dest="export_pairs",
                    help="write the residual edge list and labeled pairs with this "
                         "path prefix, then stop")

    sp = commands.add_parser("eval-sp", help="shortest-path length regression (MAE/MRE)")
    _add_common(sp)
    _add_eval(sp)
    sp.add_argument("--sp-pairs", dest="sp_pairs", type=int, help="number of node pairs")
    sp.add_argument("--max-hops", dest="max_hops", type=int)
    sp.add_argument("--distance-cap", dest="distance_cap", type=int,
                    help="max pairs per distance value (0: unlimited)")
    return parser


def _load_graph(cfg: RunConfig) -> Graph:
    if not cfg.input:
        raise ValueError("--input edge list is required")
    g = load_edge_list(cfg.input)
    g, report = preprocess(g)
    logger.info("loaded %s (removed %d self-loops, %d isolates)", g,
                report.self_loops_removed, report.isolates_removed)
    return g


def _embeddings_for_graph(path: str, g: Graph) -> sgns.EmbeddingModel:
    names, matrix = sgns.load_embeddings(path)
    dim = matrix.shape[1]
    phi = np.zeros((g.num_nodes, dim), dtype=np.float32)
    vocab = []
    for name, row in zip(names, matrix):
        node = g.name_to_id.get(name)
        if node is None:
            continue
        phi[node] = row
        vocab.append(node)
    if not vocab:
        raise ValueError(f"no embedding row matches a node of {cfg_input_name(g)}")
    return sgns.EmbeddingModel(phi, np.zeros_like(phi), dim,
                               np.array(sorted(vocab), dtype=np.int32))


def cfg_input_name(g: Graph) -> str:
    return f"graph with {g.num_nodes} nodes"


def _train_method(cfg: RunConfig, g: Graph,
                  corpus: walker.WalkCorpus | None = None) -> sgns.EmbeddingModel:
    walk_cfg = cfg.walk_config()
    train_cfg = cfg.train_config()
    threads = cfg.effective_threads()
    if cfg.method in ("deepwalk", "node2vec"):
        return sgns.train_deepwalk(g, walk_cfg, train_cfg, threads=threads, corpus=corpus)
    if cfg.method == "halk":
        return sgns.train_halk(g, walk_cfg, train_cfg, cfg.schedule(), threads=threads,
                               corpus=corpus)
    return sgns.train_walklets(g, walk_cfg, train_cfg, cfg.walklets_k, cfg.dim,
                               threads=threads, corpus=corpus)


def _echo_config(cfg: RunConfig, sidecar_base: str | None):
    for line in cfg.to_lines():
        print(line)
    if sidecar_base:
        with open(sidecar_base + ".config", "w", encoding="utf-8") as fh:
            fh.write("\n".join(cfg.to_lines()) + "\n")


def _write_report(cfg: RunConfig, report: evalkit.EvalReport):
    lines = [f"# {line}" for line in cfg.to_lines()]
    lines += report.to_machine_lines()
    lines += ["", report.to_table()]
    text = "\n".join(lines) + "\n"
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(text, end="")
    if cfg.csv:
        report.to_csv(cfg.csv)


def cmd_walk(cfg: RunConfig) -> int:
    g = _load_graph(cfg)
    corpus = walker.sample_walks(g, cfg.walk_config())
    if not cfg.output:
        raise ValueError("--output corpus path is required")
    walker.save_corpus(corpus, g, cfg.output)
    _echo_config(cfg, cfg.output)
    print(f"wrote {len(corpus)} walks ({corpus.total_tokens} tokens) to {cfg.output}")
    return 0


def cmd_embed(cfg: RunConfig) -> int:
    g = _load_graph(cfg)
    corpus = walker.load_corpus(cfg.corpus, g) if cfg.corpus else None
    model = _train_method(cfg, g, corpus)
    if not cfg.output:
        raise ValueError("--output embedding path is required")
    sgns.save_embeddings(model, g.names, cfg.output)
    _echo_config(cfg, cfg.output)
    print(f"wrote {len(model.vocab)} x {model.dim} embeddings to {cfg.output} "
          f"(backend: {sgns.backend_name()})")
    return 0


def cmd_eval_nc(cfg: RunConfig) -> int:
    g = _load_graph(cfg)
    if not cfg.labels:
        raise ValueError("--labels file is required")
    labels = load_labels(cfg.labels, g, skip_unknown=True)
    if not cfg.embeddings:
        raise ValueError("--embeddings file is required (produce one with `embed`)")
    model = _embeddings_for_graph(cfg.embeddings, g)
    report = evalkit.node_classification_eval(model, labels, cfg.split_spec(), l2=cfg.l2)
    report.metadata.update(method=cfg.method, dataset=cfg.input)
    _write_report(cfg, report)
    return 0


def _write_lp_export(cfg: RunConfig, g: Graph, ds: evalkit.LinkPredDataset):
    residual_path = cfg.export_pairs + ".residual.edges"
    pairs_path = cfg.export_pairs + ".pairs"
    with open(residual_path, "w", encoding="utf-8") as fh:
        for u, v in ds.residual_graph.edges():
            fh.write(f"{ds.residual_graph.names[u]} {ds.residual_graph.names[v]}\n")
    with open(pairs_path, "w", encoding="utf-8") as fh:
        for u, v in ds.positives:
            fh.write(f"{g.names[u]} {g.names[v]} 1\n")
        for u, v in ds.negatives:
            fh.write(f"{g.names[u]} {g.names[v]} 0\n")
    print(f"wrote {residual_path} and {pairs_path}")


def _eval_lp_from_pairs(cfg: RunConfig) -> int:
    names, matrix = sgns.load_embeddings(cfg.embeddings)
    index = {name: i for i, name in enumerate(names)}
    pairs, labels = [], []
    with open(cfg.pairs, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                continue
            if len(tokens) != 3:
                raise ValueError(f"{cfg.pairs}:{lineno}: expected 'name name label'")
            try:
                pairs.append((index[tokens[0]], index[tokens[1]]))
            except KeyError as exc:
                raise ValueError(f"{cfg.pairs}:{lineno}: no embedding for {exc.args[0]!r}") from None
            labels.append(int(tokens[2]))
    pairs = np.array(pairs, dtype=np.int64)
    labels = np.array(labels, dtype=np.int64)
    model = sgns.EmbeddingModel(matrix, np.zeros_like(matrix), matrix.shape[1],
                                np.arange(len(names), dtype=np.int32))
    ds = evalkit.LinkPredDataset(residual_graph=None, positives=pairs[labels == 1],
                                 negatives=pairs[labels == 0])
    report = evalkit.link_prediction_eval(model, ds, cfg.op, l2=cfg.l2,
                                          split=cfg.split_spec())
    report.metadata.update(method="external", dataset=cfg.pairs, operator=cfg.op)
    _write_report(cfg, report)
    return 0


def cmd_eval_lp(cfg: RunConfig) -> int:
    if cfg.pairs:
        if not cfg.embeddings:
            raise ValueError("--pairs evaluation needs --embeddings")
        return _eval_lp_from_pairs(cfg)
    g = _load_graph(cfg)
    ds = evalkit.make_lp_dataset(g, cfg.removal_fraction, cfg.seed)
    if cfg.export_pairs:
        _write_lp_export(cfg, g, ds)
        return 0
    model = _train_method(cfg, ds.residual_graph)
    report = evalkit.link_prediction_eval(model, ds, cfg.op, l2=cfg.l2,
                                          split=cfg.split_spec())
    report.metadata.update(method=cfg.method, dataset=cfg.input, operator=cfg.op)
    _write_report(cfg, report)
    return 0


def cmd_eval_sp(cfg: RunConfig) -> int:
    g = _load_graph(cfg)
    if not cfg.embeddings:
        raise ValueError("--embeddings file is required (produce one with `embed`)")
    model = _embeddings_for_graph(cfg.embeddings, g)
    cap = cfg.distance_cap if cfg.distance_cap > 0 else None
    dataset = evalkit.make_sp_dataset(g, cfg.sp_pairs, cfg.max_hops, cfg.seed,
                                      per_distance_cap=cap)
    report = evalkit.shortest_path_eval(model, dataset, cfg.op, split=cfg.split_spec())
    report.metadata.update(method=cfg.method, dataset=cfg.input, operator=cfg.op)
    _write_report(cfg, report)
    return 0


COMMANDS = {
    "walk": cmd_walk,
    "embed": cmd_embed,
    "eval-nc": cmd_eval_nc,
    "eval-lp": cmd_eval_lp,
    "eval-sp": cmd_eval_sp,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args, args.command)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
