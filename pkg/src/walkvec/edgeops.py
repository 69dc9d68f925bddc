"""Binary operators turning two node vectors into one edge feature vector."""

from __future__ import annotations

import numpy as np

OPERATORS = ("l1", "l2", "sub", "concat", "avg", "hadamard")


def edge_feature(op: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Combine vectors ``a`` and ``b`` element-wise per the named operator.

    Output has dimension 2d for "concat" (b appended after a), d otherwise.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if op == "l1":
        return np.abs(a - b)
    if op == "l2":
        return (a - b) ** 2
    if op == "sub":
        return a - b
    if op == "concat":
        return np.concatenate([a, b], axis=-1)
    if op == "avg":
        return (a + b) / 2
    if op == "hadamard":
        return a * b
    raise ValueError(f"unknown edge operator {op!r}; choose from {OPERATORS}")


def edge_features(op: str, embeddings: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    """Edge features for many node pairs at once.

    Pairs are ordered by ascending node id first, so the order-sensitive
    operators (sub, concat) are deterministic on undirected pairs.
    """
    pairs = np.asarray(pairs)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    return edge_feature(op, embeddings[lo], embeddings[hi])
