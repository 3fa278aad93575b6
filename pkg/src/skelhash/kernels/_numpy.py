"""Pure-numpy implementations of the hot inner-loop kernels.

These are the reference semantics; the numba twins in ``_numba`` must
agree with them up to floating-point reduction order.
"""

import numpy as np


def nearest_center(x, centers):
    """Assign each row of ``x`` to its nearest center (squared euclidean).

    Ties go to the lowest center index. Returns ``(labels, sqdists)``.
    """
    diff = x[:, None, :] - centers[None, :, :]
    d2 = np.einsum("mkd,mkd->mk", diff, diff)
    labels = np.argmin(d2, axis=1).astype(np.int64)
    return labels, d2[np.arange(x.shape[0]), labels]


def accumulate_clusters(x, labels, k):
    """Per-cluster row sums and cardinalities for the Lloyd update step."""
    sums = np.zeros((k, x.shape[1]))
    np.add.at(sums, labels, x)
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    return sums, counts


def vlad_residuals(x, centers):
    """Sum of (row - nearest center) per center, in row order."""
    out = np.zeros_like(centers)
    if x.shape[0]:
        labels, _ = nearest_center(x, centers)
        np.add.at(out, labels, x - centers[labels])
    return out


def vlad_residuals_assigned(x, labels, centers):
    """Like ``vlad_residuals`` but with a precomputed assignment."""
    out = np.zeros_like(centers)
    if x.shape[0]:
        np.add.at(out, labels, x - centers[labels])
    return out


def hamming_distances(code, codes):
    """Hamming distances from one +/-1 code (L,) to the columns of codes (L, N)."""
    dots = code.astype(np.int64) @ codes.astype(np.int64)
    return (np.int64(code.shape[0]) - dots) // 2


def dcc_sweeps(codes, target, gram, max_sweeps):
    """Cyclic row updates ``codes[l] = sgn(target[l] - gram[l,-l] @ codes[-l])``.

    Updates ``codes`` in place (float +/-1 entries, sgn(0) = +1) and stops
    early once a full sweep changes nothing. Returns the sweep count.
    """
    n_rows = codes.shape[0]
    sweeps = 0
    for _ in range(max_sweeps):
        changed = False
        for l in range(n_rows):
            coupled = gram[l] @ codes - gram[l, l] * codes[l]
            row = np.where(target[l] - coupled >= 0.0, 1.0, -1.0)
            if not np.array_equal(row, codes[l]):
                codes[l] = row
                changed = True
        sweeps += 1
        if not changed:
            break
    return sweeps
