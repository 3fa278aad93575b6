"""Cluster codebooks over offset features, noise repair, and local aggregation.

For every feature family the pooled training features are clustered
``runs`` times with differently seeded k-means. A training feature that
falls in a cluster smaller than a cardinality threshold is treated as
capture noise and replaced by the previous frame's feature of the same
family. A sequence descriptor is then the concatenation, over all
(family, cluster, run) blocks, of the summed residuals between the
sequence's features and their assigned cluster center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, DataError
from .offsets import FAMILY_COUNT, FAMILY_DIMS, FRAME_FEATURE_DIM, SequenceFeatures


def descriptor_dim(clusters, runs):
    """Length of the aggregated descriptor: 78 * clusters * runs."""
    return FRAME_FEATURE_DIM * clusters * runs


@dataclass(frozen=True)
class KMeansRun:
    """One Lloyd clustering run.

    ``distortions`` holds the summed squared distances recorded at each
    assignment step; Lloyd guarantees the sequence is non-increasing.
    """

    centers: np.ndarray
    labels: np.ndarray
    counts: np.ndarray
    distortions: tuple[float, ...]


def _kmeanspp_init(x, k, rng):
    m = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(m)]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(m))
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total,
                                      side="right"))
            idx = min(idx, m - 1)
        centers[i] = x[idx]
        d2 = np.minimum(d2, ((x - centers[i]) ** 2).sum(axis=1))
    return centers


def lloyd_kmeans(x, k, seed, max_iter=100, tol=1e-6):
    """Seeded k-means++ followed by Lloyd iterations.

    Stops when the relative distortion improvement drops below ``tol``
    or after ``max_iter`` iterations. Empty clusters are re-seeded to
    the point farthest from its current center.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DataError("clustering input must be a non-empty 2-d array")
    if not 1 <= k <= x.shape[0]:
        raise ConfigError(f"cluster count {k} outside 1..{x.shape[0]}")
    rng = np.random.default_rng(seed)
    centers = _kmeanspp_init(x, k, rng)
    distortions = []
    prev = None
    for _ in range(max_iter):
        labels, d2 = kernels.nearest_center(x, centers)
        distortion = float(d2.sum())
        distortions.append(distortion)
        sums, counts = kernels.accumulate_clusters(x, labels, k)
        new_centers = centers.copy()
        filled = counts > 0
        new_centers[filled] = sums[filled] / counts[filled, None]
        empty = np.flatnonzero(~filled)
        if empty.size:
            spare = d2.copy()
            for c in empty:
                far = int(np.argmax(spare))
                new_centers[c] = x[far]
                spare[far] = 0.0
        centers = new_centers
        if prev is not None and prev - distortion <= tol * prev:
            break
        prev = distortion
    labels, _ = kernels.nearest_center(x, centers)
    _, counts = kernels.accumulate_clusters(x, labels, k)
    return KMeansRun(centers, labels, counts, tuple(distortions))


@dataclass(frozen=True)
class CodebookSet:
    """Cluster centers per feature family and clustering run.

    ``centers[s]`` has shape ``(runs, clusters, FAMILY_DIMS[s])``.
    """

    centers: tuple[np.ndarray, ...]
    clusters: int
    runs: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(self.centers))
        if len(self.centers) != FAMILY_COUNT:
            raise ConfigError(f"expected {FAMILY_COUNT} center arrays")
        for s, c in enumerate(self.centers):
            if c.shape != (self.runs, self.clusters, FAMILY_DIMS[s]):
                raise ConfigError(
                    f"family {s + 1} centers have shape {c.shape}, expected "
                    f"({self.runs}, {self.clusters}, {FAMILY_DIMS[s]})"
                )
            if not np.isfinite(c).all():
                raise ConfigError(f"family {s + 1} centers contain non-finite values")


@dataclass(frozen=True)
class ClusterAssignment:
    """Recorded cluster memberships of the pooled training features.

    ``labels[s][t]`` assigns each pooled family-``s`` feature to a cluster
    of run ``t``; ``counts[s][t]`` are the cluster cardinalities at
    clustering time (kept unchanged by the noise repair). ``offsets[s]``
    delimits each training sequence's slice of the pooled family, so a
    feature's predecessor within its own sequence is the previous row.
    """

    labels: tuple[np.ndarray, ...]
    counts: tuple[np.ndarray, ...]
    offsets: tuple[np.ndarray, ...]

    def sequence_slice(self, s, index):
        off = self.offsets[s]
        return slice(int(off[index]), int(off[index + 1]))


def _pool(features, s):
    parts = [f.arrays[s] for f in features]
    offsets = np.zeros(len(features) + 1, dtype=np.int64)
    np.cumsum([p.shape[0] for p in parts], out=offsets[1:])
    if offsets[-1] == 0:
        return np.empty((0, FAMILY_DIMS[s])), offsets
    return np.concatenate(parts, axis=0), offsets


def build_codebooks(features, clusters, runs, seed):
    """Cluster the pooled training features ``runs`` times per family.

    Run ``t`` of every family uses seed ``seed + t`` so runs are
    reproducible and independent.

    Returns
    -------
    (CodebookSet, ClusterAssignment)
    """
    if not features:
        raise DataError("no training feature sets given")
    if runs < 1:
        raise ConfigError(f"clustering run count must be >= 1, got {runs}")
    all_centers = []
    all_labels = []
    all_counts = []
    all_offsets = []
    for s in range(FAMILY_COUNT):
        pooled, offsets = _pool(features, s)
        if pooled.shape[0] == 0:
            raise DataError(f"feature family {s + 1} has no training features")
        if clusters > pooled.shape[0]:
            raise ConfigError(
                f"cluster count {clusters} exceeds the {pooled.shape[0]} "
                f"training features of family {s + 1}"
            )
        run_results = [lloyd_kmeans(pooled, clusters, seed + t) for t in range(runs)]
        all_centers.append(np.stack([r.centers for r in run_results]))
        all_labels.append(np.stack([r.labels for r in run_results]))
        all_counts.append(np.stack([r.counts for r in run_results]))
        all_offsets.append(offsets)
    codebooks = CodebookSet(tuple(all_centers), clusters, runs, seed)
    assignment = ClusterAssignment(tuple(all_labels), tuple(all_counts),
                                   tuple(all_offsets))
    return codebooks, assignment


def denoise(features, codebooks, assignment, epsilon):
    """Replace features that fall in small clusters by previous-frame ones.

    A pooled feature is noisy when, in any clustering run, its cluster
    has fewer than ``epsilon`` members. Noisy features are overwritten
    with the same family's feature from the previous frame of the same
    sequence (first-frame features stay unchanged; replacements read the
    previous frame's original value, single pass). Replaced features are
    re-assigned to their nearest center per run; recorded cardinalities
    are kept as clustered.

    Returns
    -------
    (list of SequenceFeatures, ClusterAssignment)
        Repaired per-sequence features and the updated assignment.
    """
    new_features = [list(f.arrays) for f in features]
    new_labels = []
    for s in range(FAMILY_COUNT):
        pooled, offsets = _pool(features, s)
        labels = assignment.labels[s]
        counts = assignment.counts[s]
        if labels.shape[1] != pooled.shape[0] or \
                not np.array_equal(offsets, assignment.offsets[s]):
            raise ConfigError(
                f"assignment does not match the given features (family {s + 1})"
            )
        noisy = np.zeros(pooled.shape[0], dtype=bool)
        for t in range(codebooks.runs):
            noisy |= counts[t][labels[t]] < epsilon
        first = np.zeros(pooled.shape[0], dtype=bool)
        starts = offsets[:-1][offsets[:-1] < offsets[-1]]
        first[starts] = True
        replace_idx = np.flatnonzero(noisy & ~first)
        labels_s = labels.copy()
        if replace_idx.size:
            repaired = pooled.copy()
            repaired[replace_idx] = pooled[replace_idx - 1]
            rows = np.ascontiguousarray(repaired[replace_idx])
            for t in range(codebooks.runs):
                nearest, _ = kernels.nearest_center(rows, codebooks.centers[s][t])
                labels_s[t, replace_idx] = nearest
            for i in range(len(features)):
                lo, hi = int(offsets[i]), int(offsets[i + 1])
                new_features[i][s] = repaired[lo:hi]
        new_labels.append(labels_s)
    repaired_features = [
        SequenceFeatures(tuple(arrays), f.tau, f.sequence_id)
        for arrays, f in zip(new_features, features)
    ]
    repaired_assignment = ClusterAssignment(
        tuple(new_labels), assignment.counts, assignment.offsets
    )
    return repaired_features, repaired_assignment


def aggregate(seq_features, codebooks, assignment=None, sequence=None):
    """Aggregate one sequence's features into its residual descriptor.

    Block (family s, cluster k, run t) sums ``feature - center`` over the
    sequence's family-``s`` features assigned to cluster ``k`` of run
    ``t``; blocks are laid out family-major, then cluster, then run.
    With ``assignment`` (training) the recorded memberships are used and
    ``sequence`` must give this sequence's index; without it (testing)
    every feature goes to its nearest center.
    """
    if (assignment is None) != (sequence is None):
        raise ConfigError("assignment and sequence index must be given together")
    blocks = []
    for s in range(FAMILY_COUNT):
        x = np.ascontiguousarray(seq_features.arrays[s], dtype=np.float64)
        centers = codebooks.centers[s]
        if x.shape[1] != centers.shape[2]:
            raise ConfigError(
                f"family {s + 1} features have dim {x.shape[1]}, codebook "
                f"expects {centers.shape[2]}"
            )
        per_run = np.empty((codebooks.runs, codebooks.clusters, x.shape[1]))
        for t in range(codebooks.runs):
            if assignment is None:
                per_run[t] = kernels.vlad_residuals(x, centers[t])
            else:
                rows = assignment.sequence_slice(s, sequence)
                labels = assignment.labels[s][t][rows]
                if labels.shape[0] != x.shape[0]:
                    raise ConfigError(
                        f"recorded assignment covers {labels.shape[0]} "
                        f"family-{s + 1} features, sequence has {x.shape[0]}"
                    )
                per_run[t] = kernels.vlad_residuals_assigned(x, labels, centers[t])
        # cluster-major, run-minor block order
        blocks.append(per_run.transpose(1, 0, 2).reshape(-1))
    return np.concatenate(blocks)


def power_normalize(y):
    """Elementwise signed square root: sgn(y) * |y|^(1/2)."""
    y = np.asarray(y, dtype=np.float64)
    return np.sign(y) * np.sqrt(np.abs(y))
