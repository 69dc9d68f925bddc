# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled training kernel.

Mirrors _sgns_py.train_shard: same LCG stream, same update order, double
precision accumulation. Releases the GIL so shards can run hogwild-style on
shared matrices from multiple threads.
"""

from libc.math cimport exp
from libc.stdlib cimport free, malloc

import numpy as np

cdef unsigned long long MULT = 6364136223846793005ULL
cdef unsigned long long INC = 1442695040888963407ULL
cdef double U53 = 1.0 / 9007199254740992.0  # 2^-53
cdef int MAX_NEGATIVE_RESAMPLES = 100
cdef double SIGMOID_CLAMP = 16.0


cdef inline unsigned long long lcg_next(unsigned long long state) nogil:
    return state * MULT + INC


cdef inline double to_unit(unsigned long long state) nogil:
    return <double>(state >> 11) * U53


cdef inline double sigmoid(double x) nogil:
    if x > SIGMOID_CLAMP:
        x = SIGMOID_CLAMP
    elif x < -SIGMOID_CLAMP:
        x = -SIGMOID_CLAMP
    return 1.0 / (1.0 + exp(-x))


cdef inline void pair_step(float[:, ::1] phi, float[:, ::1] phi_prime,
                           int u, int v_pos, int* negs, int n_negs,
                           double lr, double* accum, int dim) nogil:
    cdef int c, k, row
    cdef double f, g
    for c in range(dim):
        accum[c] = 0.0
    # positive context, then each negative; center row updated last from the
    # projection rows as read before their own update
    row = v_pos
    f = 0.0
    for c in range(dim):
        f += <double>phi[u, c] * <double>phi_prime[row, c]
    g = (1.0 - sigmoid(f)) * lr
    for c in range(dim):
        accum[c] += g * <double>phi_prime[row, c]
    for c in range(dim):
        phi_prime[row, c] = <float>(<double>phi_prime[row, c] + g * <double>phi[u, c])
    for k in range(n_negs):
        row = negs[k]
        f = 0.0
        for c in range(dim):
            f += <double>phi[u, c] * <double>phi_prime[row, c]
        g = -sigmoid(f) * lr
        for c in range(dim):
            accum[c] += g * <double>phi_prime[row, c]
        for c in range(dim):
            phi_prime[row, c] = <float>(<double>phi_prime[row, c] + g * <double>phi[u, c])
    for c in range(dim):
        phi[u, c] = <float>(<double>phi[u, c] + accum[c])


def train_shard(float[:, ::1] phi, float[:, ::1] phi_prime,
                int[::1] tokens, long long[::1] offsets,
                long long start_walk, long long end_walk,
                unsigned char[::1] keep_mask, double[::1] keep_prob, int use_subsample,
                double[::1] noise_prob, int[::1] noise_alias, int[::1] noise_nodes,
                int window, int negatives, int shrink_window,
                double alpha, double alpha_min,
                unsigned long long total_tokens, unsigned long long token_base,
                unsigned long long seed):
    """Train on walks [start_walk, end_walk); returns (processed_tokens, pairs)."""
    cdef int dim = phi.shape[1]
    cdef long long max_len = 0, w, t
    for w in range(start_walk, end_walk):
        if offsets[w + 1] - offsets[w] > max_len:
            max_len = offsets[w + 1] - offsets[w]

    cdef int* sen = <int*>malloc(max_len * sizeof(int) if max_len else sizeof(int))
    cdef int* negs = <int*>malloc(negatives * sizeof(int) if negatives else sizeof(int))
    cdef double* accum = <double*>malloc(dim * sizeof(double))
    if sen == NULL or negs == NULL or accum == NULL:
        free(sen); free(negs); free(accum)
        raise MemoryError()

    cdef unsigned long long state = seed
    cdef unsigned long long processed = 0
    cdef unsigned long long pair_count = 0
    cdef long long n_noise = noise_prob.shape[0]
    cdef long long slen, i, j, lo, hi, b, cell
    cdef int tok, v_pos, cand, n_negs, k, attempt
    cdef double lr, frac

    with nogil:
        for w in range(start_walk, end_walk):
            frac = (<double>(token_base + processed)) / <double>total_tokens if total_tokens else 1.0
            lr = alpha - (alpha - alpha_min) * frac
            if lr < alpha_min:
                lr = alpha_min
            slen = 0
            for t in range(offsets[w], offsets[w + 1]):
                tok = tokens[t]
                if not keep_mask[tok]:
                    continue
                processed += 1
                if use_subsample:
                    state = lcg_next(state)
                    if to_unit(state) >= keep_prob[tok]:
                        continue
                sen[slen] = tok
                slen += 1
            for i in range(slen):
                if shrink_window:
                    state = lcg_next(state)
                    b = 1 + <long long>((state >> 32) % <unsigned long long>window)
                else:
                    b = window
                lo = i - b if i - b > 0 else 0
                hi = i + b + 1 if i + b + 1 < slen else slen
                for j in range(lo, hi):
                    if j == i:
                        continue
                    v_pos = sen[j]
                    n_negs = 0
                    for k in range(negatives):
                        for attempt in range(MAX_NEGATIVE_RESAMPLES):
                            state = lcg_next(state)
                            cell = <long long>(to_unit(state) * <double>n_noise)
                            state = lcg_next(state)
                            if to_unit(state) >= noise_prob[cell]:
                                cell = noise_alias[cell]
                            cand = noise_nodes[cell]
                            if cand != v_pos:
                                negs[n_negs] = cand
                                n_negs += 1
                                break
                    pair_step(phi, phi_prime, sen[i], v_pos, negs, n_negs, lr, accum, dim)
                    pair_count += 1

    free(sen)
    free(negs)
    free(accum)
    return int(processed), int(pair_count)
