"""walkvec: random-walk node embeddings and their evaluation.

Walk strategies: uniform, p/q-biased, skip-transformed multi-level, and
hierarchical frequency-pruned. Training is skip-gram with negative sampling
on a compiled kernel (NumPy fallback selected at import). Evaluation covers
node classification, link prediction and shortest-path approximation.
"""

from ._backend import backend_name
from .dimred import fit_pca, pca
from .edgeops import OPERATORS, edge_feature, edge_features
from .graph import (EdgeListError, Graph, LabelTable, PreprocessReport, bfs_distances,
                    load_edge_list, load_labels, preprocess)
from .sgns import (EmbeddingModel, LevelSchedule, LevelSpec, TrainConfig, draw_noise,
                   init_model, load_embeddings, pair_update, save_embeddings, sigmoid,
                   train, train_deepwalk, train_epoch, train_halk, train_walklets)
from .walker import (VocabStats, WalkConfig, WalkCorpus, biased_step, load_corpus,
                     prune_walks, sample_walks, save_corpus, skip_transform, vocab_stats)

__version__ = "0.1.0"

__all__ = [
    "backend_name", "fit_pca", "pca", "OPERATORS", "edge_feature", "edge_features",
    "EdgeListError", "Graph", "LabelTable", "PreprocessReport", "bfs_distances",
    "load_edge_list", "load_labels", "preprocess", "EmbeddingModel", "LevelSchedule",
    "LevelSpec", "TrainConfig", "draw_noise", "init_model", "load_embeddings",
    "pair_update", "save_embeddings", "sigmoid", "train", "train_deepwalk",
    "train_epoch", "train_halk", "train_walklets", "VocabStats", "WalkConfig",
    "WalkCorpus", "biased_step", "load_corpus", "prune_walks", "sample_walks",
    "save_corpus", "skip_transform", "vocab_stats", "__version__",
]
