"""Numba-compiled twins of the kernels in ``_numpy``."""

import numpy as np
from numba import njit


@njit(cache=True)
def nearest_center(x, centers):
    m, d = x.shape
    k = centers.shape[0]
    labels = np.empty(m, dtype=np.int64)
    dists = np.empty(m, dtype=np.float64)
    for i in range(m):
        best = 0
        best_d = np.inf
        for c in range(k):
            acc = 0.0
            for j in range(d):
                t = x[i, j] - centers[c, j]
                acc += t * t
            if acc < best_d:
                best_d = acc
                best = c
        labels[i] = best
        dists[i] = best_d
    return labels, dists


@njit(cache=True)
def accumulate_clusters(x, labels, k):
    m, d = x.shape
    sums = np.zeros((k, d))
    counts = np.zeros(k, dtype=np.int64)
    for i in range(m):
        c = labels[i]
        counts[c] += 1
        for j in range(d):
            sums[c, j] += x[i, j]
    return sums, counts


@njit(cache=True)
def vlad_residuals(x, centers):
    m, d = x.shape
    k = centers.shape[0]
    out = np.zeros((k, d))
    for i in range(m):
        best = 0
        best_d = np.inf
        for c in range(k):
            acc = 0.0
            for j in range(d):
                t = x[i, j] - centers[c, j]
                acc += t * t
            if acc < best_d:
                best_d = acc
                best = c
        for j in range(d):
            out[best, j] += x[i, j] - centers[best, j]
    return out


@njit(cache=True)
def vlad_residuals_assigned(x, labels, centers):
    m, d = x.shape
    out = np.zeros((centers.shape[0], d))
    for i in range(m):
        c = labels[i]
        for j in range(d):
            out[c, j] += x[i, j] - centers[c, j]
    return out


@njit(cache=True)
def hamming_distances(code, codes):
    n_bits, n = codes.shape
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        dot = 0
        for l in range(n_bits):
            dot += int(code[l]) * int(codes[l, i])
        out[i] = (n_bits - dot) // 2
    return out


@njit(cache=True)
def dcc_sweeps(codes, target, gram, max_sweeps):
    n_rows, n_cols = codes.shape
    sweeps = 0
    for _ in range(max_sweeps):
        changed = False
        for l in range(n_rows):
            for n in range(n_cols):
                acc = 0.0
                for l2 in range(n_rows):
                    if l2 != l:
                        acc += gram[l, l2] * codes[l2, n]
                new = 1.0 if target[l, n] - acc >= 0.0 else -1.0
                if new != codes[l, n]:
                    codes[l, n] = new
                    changed = True
        sweeps += 1
        if not changed:
            break
    return sweeps
