"""Pure NumPy training kernel.

Fallback for environments without the compiled extension, and the reference
the compiled kernel is checked against. Both kernels consume the same linear
congruential RNG stream and perform updates in the same order, so they agree
up to float accumulation order (dot products here go through BLAS, the
compiled loop accumulates sequentially, both in double precision).
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_MULT = 6364136223846793005
_INC = 1442695040888963407
_U53 = 1.0 / (1 << 53)
MAX_NEGATIVE_RESAMPLES = 100
SIGMOID_CLAMP = 16.0


def _sigmoid(x: float) -> float:
    if x > SIGMOID_CLAMP:
        x = SIGMOID_CLAMP
    elif x < -SIGMOID_CLAMP:
        x = -SIGMOID_CLAMP
    return 1.0 / (1.0 + math.exp(-x))


def apply_pair(phi, phi_prime, center: int, context: int, negatives, lr: float) -> None:
    """One gradient-ascent step of the negative-sampling objective for the
    pair (center, context), in place.

    The center row update uses the projection rows as they were before their
    own update within this call.
    """
    phi_u = phi[center].astype(np.float64)
    accum = np.zeros_like(phi_u)
    row = phi_prime[context]
    f = float(row.astype(np.float64) @ phi_u)
    g = (1.0 - _sigmoid(f)) * lr
    accum += g * row
    row += g * phi_u
    for neg in negatives:
        row = phi_prime[neg]
        f = float(row.astype(np.float64) @ phi_u)
        g = -_sigmoid(f) * lr
        accum += g * row
        row += g * phi_u
    phi[center] += accum


def train_shard(phi, phi_prime, tokens, offsets, start_walk, end_walk,
                keep_mask, keep_prob, use_subsample,
                noise_prob, noise_alias, noise_nodes,
                window, negatives, shrink_window,
                alpha, alpha_min, total_tokens, token_base, seed):
    """Train on walks [start_walk, end_walk) of the corpus.

    Returns (processed_tokens, pair_count). Deterministic given the seed.
    """
    state = seed & _MASK64
    processed = 0
    pair_count = 0
    n_noise = len(noise_prob)
    for w in range(start_walk, end_walk):
        frac = (token_base + processed) / total_tokens if total_tokens else 1.0
        lr = alpha - (alpha - alpha_min) * frac
        if lr < alpha_min:
            lr = alpha_min
        sen = []
        for tok in tokens[offsets[w]:offsets[w + 1]]:
            tok = int(tok)
            if not keep_mask[tok]:
                continue
            processed += 1
            if use_subsample:
                state = (state * _MULT + _INC) & _MASK64
                if (state >> 11) * _U53 >= keep_prob[tok]:
                    continue
            sen.append(tok)
        slen = len(sen)
        for i in range(slen):
            if shrink_window:
                state = (state * _MULT + _INC) & _MASK64
                b = 1 + (state >> 32) % window
            else:
                b = window
            lo = i - b if i - b > 0 else 0
            hi = i + b + 1 if i + b + 1 < slen else slen
            for j in range(lo, hi):
                if j == i:
                    continue
                v_pos = sen[j]
                negs = []
                for _ in range(negatives):
                    for _attempt in range(MAX_NEGATIVE_RESAMPLES):
                        state = (state * _MULT + _INC) & _MASK64
                        cell = int((state >> 11) * _U53 * n_noise)
                        state = (state * _MULT + _INC) & _MASK64
                        if (state >> 11) * _U53 >= noise_prob[cell]:
                            cell = noise_alias[cell]
                        cand = int(noise_nodes[cell])
                        if cand != v_pos:
                            negs.append(cand)
                            break
                apply_pair(phi, phi_prime, sen[i], v_pos, negs, lr)
                pair_count += 1
    return processed, pair_count
