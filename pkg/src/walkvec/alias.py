"""Alias method for O(1) sampling from a discrete distribution."""

from __future__ import annotations

import numpy as np


def alias_setup(weights) -> tuple[np.ndarray, np.ndarray]:
    """Build alias tables for the distribution proportional to ``weights``.

    Returns (prob, alias): ``prob[i]`` is the probability of keeping cell i,
    ``alias[i]`` the cell used otherwise. Weights must be non-negative with a
    positive sum.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or len(w) == 0:
        raise ValueError("weights must be a non-empty 1-d array")
    if np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be non-negative with positive sum")
    n = len(w)
    scaled = w * (n / w.sum())
    prob = np.zeros(n, dtype=np.float64)
    alias = np.zeros(n, dtype=np.int32)
    smaller = [i for i in range(n) if scaled[i] < 1.0]
    larger = [i for i in range(n) if scaled[i] >= 1.0]
    while smaller and larger:
        small = smaller.pop()
        large = larger.pop()
        prob[small] = scaled[small]
        alias[small] = large
        scaled[large] -= 1.0 - scaled[small]
        if scaled[large] < 1.0:
            smaller.append(large)
        else:
            larger.append(large)
    # leftovers are 1.0 up to float error
    for i in larger + smaller:
        prob[i] = 1.0
    return prob, alias


def alias_draw(prob: np.ndarray, alias: np.ndarray, rng: np.random.Generator) -> int:
    """Draw one cell index from the alias tables."""
    i = int(rng.random() * len(prob))
    return i if rng.random() < prob[i] else int(alias[i])


def alias_draw_many(prob: np.ndarray, alias: np.ndarray, size: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Vectorized draw of ``size`` cell indices."""
    cells = (rng.random(size) * len(prob)).astype(np.int64)
    coins = rng.random(size)
    take_alias = coins >= prob[cells]
    cells[take_alias] = alias[cells[take_alias]]
    return cells
