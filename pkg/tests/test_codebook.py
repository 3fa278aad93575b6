import itertools

import numpy as np
import pytest

from skelhash.codebook import (
    CodebookSet,
    aggregate,
    build_codebooks,
    denoise,
    descriptor_dim,
    lloyd_kmeans,
    power_normalize,
)
from skelhash.errors import ConfigError, DataError
from skelhash.offsets import FAMILY_DIMS, SequenceFeatures, sequence_features

from conftest import random_sequence


def features_from_rows(rows_per_family, tau=2, seq_id="synthetic"):
    """Build a SequenceFeatures directly from per-family row arrays."""
    arrays = tuple(
        np.asarray(rows_per_family[s], dtype=float).reshape(-1, FAMILY_DIMS[s])
        for s in range(9)
    )
    return SequenceFeatures(arrays, tau, seq_id)


def constant_family_rows(value, counts):
    return [np.full((counts, FAMILY_DIMS[s]), value) for s in range(9)]


def brute_force_lloyd(x, centers):
    """Plain Lloyd from fixed initial centers, run to convergence."""
    centers = centers.copy()
    for _ in range(200):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        new = centers.copy()
        for k in range(centers.shape[0]):
            members = x[labels == k]
            if len(members):
                new[k] = members.mean(axis=0)
        if np.allclose(new, centers):
            break
        centers = new
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return centers, float(d2.min(axis=1).sum())


class TestLloydKMeans:
    def test_repeated_distinct_points_recovered(self, rng):
        points = rng.normal(size=(4, 6)) * 5
        x = np.repeat(points, 7, axis=0)
        run = lloyd_kmeans(x, 4, seed=1)
        ours = run.centers[np.argsort(run.centers[:, 0])]
        expected = points[np.argsort(points[:, 0])]
        assert np.allclose(ours, expected, atol=0)
        assert run.distortions[-1] == pytest.approx(0.0, abs=1e-20)

    def test_two_blobs_match_exhaustive_lloyd(self, rng):
        # oracle: run plain Lloyd from every pair of points, keep the best
        blob_a = rng.normal(size=(20, 3)) * 0.1 + (10, 0, 0)
        blob_b = rng.normal(size=(20, 3)) * 0.1 - (10, 0, 0)
        x = np.vstack([blob_a, blob_b])
        best = (None, np.inf)
        for i, j in itertools.combinations(range(len(x)), 2):
            centers, distortion = brute_force_lloyd(x, x[[i, j]])
            if distortion < best[1]:
                best = (centers, distortion)
        run = lloyd_kmeans(x, 2, seed=3)
        ours = run.centers[np.argsort(run.centers[:, 0])]
        oracle = best[0][np.argsort(best[0][:, 0])]
        assert np.allclose(ours, oracle, atol=1e-9)

    def test_distortion_monotone(self, rng):
        x = rng.normal(size=(200, 5))
        run = lloyd_kmeans(x, 8, seed=0)
        drops = np.diff(run.distortions)
        assert (drops <= 1e-9).all()

    def test_deterministic(self, rng):
        x = rng.normal(size=(100, 4))
        a = lloyd_kmeans(x, 5, seed=42)
        b = lloyd_kmeans(x, 5, seed=42)
        assert np.array_equal(a.centers, b.centers)
        assert np.array_equal(a.labels, b.labels)

    def test_k_larger_than_data(self, rng):
        with pytest.raises(ConfigError):
            lloyd_kmeans(rng.normal(size=(3, 2)), 5, seed=0)


class TestBuildCodebooks:
    def test_shapes_and_counts(self, rng):
        feats = [sequence_features(random_sequence(rng, frames=12), 2)
                 for _ in range(4)]
        codebooks, assignment = build_codebooks(feats, clusters=3, runs=2, seed=0)
        for s in range(9):
            assert codebooks.centers[s].shape == (2, 3, FAMILY_DIMS[s])
            assert assignment.labels[s].shape[0] == 2
            assert assignment.counts[s].sum(axis=1).tolist() == \
                [assignment.offsets[s][-1]] * 2

    def test_determinism_bit_exact(self, rng):
        feats = [sequence_features(random_sequence(rng, frames=10), 2)
                 for _ in range(3)]
        a, _ = build_codebooks(feats, 4, 3, seed=9)
        b, _ = build_codebooks(feats, 4, 3, seed=9)
        for s in range(9):
            assert np.array_equal(a.centers[s], b.centers[s])

    def test_too_few_features(self, rng):
        feats = [sequence_features(random_sequence(rng, frames=3), 2)]
        with pytest.raises(ConfigError, match="exceeds"):
            build_codebooks(feats, clusters=10, runs=1, seed=0)

    def test_empty_family_is_data_error(self, rng):
        # one-frame sequences have no interframe features at all
        feats = [sequence_features(random_sequence(rng, frames=1), 2)]
        with pytest.raises(DataError, match="family"):
            build_codebooks(feats, clusters=1, runs=1, seed=0)


class TestDenoise:
    def _clustered_features(self, rng):
        # family rows drawn from two far-apart blobs plus a tiny outlier pair
        seqs = []
        for i in range(3):
            rows = [
                np.vstack([
                    rng.normal(size=(4, FAMILY_DIMS[s])) + 50,
                    rng.normal(size=(4, FAMILY_DIMS[s])) - 50,
                ])
                for s in range(9)
            ]
            seqs.append(features_from_rows(rows, seq_id=f"s{i}"))
        # plant outliers in the last sequence, rows 3 and 7 of family 1
        arrays = list(seqs[2].arrays)
        planted = arrays[0].copy()
        planted[3] = 500.0
        planted[7] = 500.0
        arrays[0] = planted
        seqs[2] = SequenceFeatures(tuple(arrays), 2, "s2")
        return seqs

    def test_zero_threshold_changes_nothing(self, rng):
        feats = self._clustered_features(rng)
        codebooks, assignment = build_codebooks(feats, 3, 2, seed=1)
        repaired, new_assignment = denoise(feats, codebooks, assignment, 0)
        for f0, f1 in zip(feats, repaired):
            for a0, a1 in zip(f0.arrays, f1.arrays):
                assert np.array_equal(a0, a1)
        for s in range(9):
            assert np.array_equal(assignment.labels[s], new_assignment.labels[s])

    def test_small_cluster_members_replaced(self, rng):
        feats = self._clustered_features(rng)
        codebooks, assignment = build_codebooks(feats, 3, 1, seed=1)
        counts = assignment.counts[0][0]
        outlier_cluster = int(np.argmin(counts))
        assert counts[outlier_cluster] == 2
        repaired, new_assignment = denoise(feats, codebooks, assignment, 5)
        # both planted rows replaced by the previous row's original feature
        original = feats[2].arrays[0]
        fixed = repaired[2].arrays[0]
        assert np.array_equal(fixed[3], original[2])
        assert np.array_equal(fixed[7], original[6])
        # untouched rows stay identical
        others = [i for i in range(8) if i not in (3, 7)]
        assert np.array_equal(fixed[others], original[others])
        # replaced rows re-assigned to their true nearest center
        start = assignment.offsets[0][2]
        for row_idx in (3, 7):
            row = fixed[row_idx]
            d2 = ((codebooks.centers[0][0] - row) ** 2).sum(axis=1)
            assert new_assignment.labels[0][0][start + row_idx] == d2.argmin()
        # cardinalities keep their clustered values
        assert np.array_equal(new_assignment.counts[0], assignment.counts[0])

    def test_consecutive_noisy_rows_use_original_values(self, rng):
        # single pass: each replacement reads the previous frame's ORIGINAL
        # feature even when that frame is itself noisy
        seqs = []
        for i in range(2):
            rows = [
                np.vstack([
                    rng.normal(size=(6, FAMILY_DIMS[s])) + 30,
                    rng.normal(size=(6, FAMILY_DIMS[s])) - 30,
                ])
                for s in range(9)
            ]
            seqs.append(features_from_rows(rows, seq_id=f"s{i}"))
        arrays = list(seqs[1].arrays)
        planted = arrays[0].copy()
        planted[4] = 500.0
        planted[5] = 510.0  # adjacent noisy pair
        arrays[0] = planted
        seqs[1] = SequenceFeatures(tuple(arrays), 2, "s1")
        codebooks, assignment = build_codebooks(seqs, 3, 1, seed=6)
        assert sorted(assignment.counts[0][0].tolist())[0] == 2
        repaired, _ = denoise(seqs, codebooks, assignment, 5)
        fixed = repaired[1].arrays[0]
        assert np.array_equal(fixed[4], planted[3])   # previous original row
        assert np.array_equal(fixed[5], planted[4])   # original, not repaired

    def test_first_frame_left_unchanged(self, rng):
        # outlier planted at the very first row of a sequence block
        seqs = []
        for i in range(2):
            rows = [
                np.vstack([
                    rng.normal(size=(5, FAMILY_DIMS[s])) + 30,
                    rng.normal(size=(5, FAMILY_DIMS[s])) - 30,
                ])
                for s in range(9)
            ]
            seqs.append(features_from_rows(rows, seq_id=f"s{i}"))
        arrays = list(seqs[1].arrays)
        planted = arrays[0].copy()
        planted[0] = 400.0
        arrays[0] = planted
        seqs[1] = SequenceFeatures(tuple(arrays), 2, "s1")
        codebooks, assignment = build_codebooks(seqs, 3, 1, seed=2)
        repaired, _ = denoise(seqs, codebooks, assignment, 5)
        assert np.array_equal(repaired[1].arrays[0][0], planted[0])

    def test_large_clusters_untouched(self, rng):
        feats = self._clustered_features(rng)
        codebooks, assignment = build_codebooks(feats, 3, 2, seed=1)
        repaired, _ = denoise(feats, codebooks, assignment, 3)
        # family 1 clusters into the two blobs plus the planted pair, so
        # with epsilon=3 only that pair sits below threshold; every row of
        # the outlier-free sequences is in a large cluster and untouched
        for t in range(2):
            assert sorted(assignment.counts[0][t].tolist())[0] == 2
        for i in range(2):
            assert np.array_equal(feats[i].arrays[0], repaired[i].arrays[0])


class TestAggregate:
    def test_zero_residuals(self, rng):
        # features exactly at the centers: descriptor must be all zeros
        rows = constant_family_rows(2.5, counts=4)
        feats = features_from_rows(rows)
        centers = tuple(
            np.full((1, 2, FAMILY_DIMS[s]), 0.0) for s in range(9)
        )
        for s in range(9):
            centers[s][:, 0, :] = 2.5
            centers[s][:, 1, :] = 99.0
        codebooks = CodebookSet(centers, clusters=2, runs=1, seed=0)
        y = aggregate(feats, codebooks)
        assert y.shape == (descriptor_dim(2, 1),)
        assert np.count_nonzero(y) == 0

    def test_default_dimension_is_8970(self):
        assert descriptor_dim(23, 5) == 8970

    def test_single_feature_single_cluster(self, rng):
        rows = [rng.normal(size=(1, FAMILY_DIMS[s])) for s in range(9)]
        feats = features_from_rows(rows)
        centers = tuple(rng.normal(size=(1, 1, FAMILY_DIMS[s])) for s in range(9))
        codebooks = CodebookSet(centers, clusters=1, runs=1, seed=0)
        y = aggregate(feats, codebooks)
        expected = np.concatenate([
            (rows[s] - centers[s][0, 0]).ravel() for s in range(9)
        ])
        assert np.allclose(y, expected, atol=0)

    def test_matches_brute_force(self, rng):
        feats = features_from_rows(
            [rng.normal(size=(11, FAMILY_DIMS[s])) for s in range(9)]
        )
        centers = tuple(rng.normal(size=(2, 3, FAMILY_DIMS[s])) for s in range(9))
        codebooks = CodebookSet(centers, clusters=3, runs=2, seed=0)
        y = aggregate(feats, codebooks)
        expected = []
        for s in range(9):
            blocks = np.zeros((3, 2, FAMILY_DIMS[s]))
            for k in range(3):
                for t in range(2):
                    for row in feats.arrays[s]:
                        d2 = ((centers[s][t] - row) ** 2).sum(axis=1)
                        if d2.argmin() == k:
                            blocks[k, t] += row - centers[s][t][k]
            expected.append(blocks.ravel())
        assert np.allclose(y, np.concatenate(expected), atol=1e-12)

    def test_unused_cluster_block_exactly_zero(self, rng):
        rows = constant_family_rows(1.0, counts=3)
        feats = features_from_rows(rows)
        centers = tuple(np.zeros((1, 2, FAMILY_DIMS[s])) for s in range(9))
        for s in range(9):
            centers[s][:, 0, :] = 1.2   # near the data
            centers[s][:, 1, :] = 80.0  # never nearest
        codebooks = CodebookSet(centers, clusters=2, runs=1, seed=0)
        y = aggregate(feats, codebooks)
        offset = 0
        for s in range(9):
            d = FAMILY_DIMS[s]
            near_block = y[offset:offset + d]
            far_block = y[offset + d:offset + 2 * d]
            assert np.count_nonzero(far_block) == 0
            assert np.count_nonzero(near_block) == d
            offset += 2 * d

    def test_dimension_mismatch(self, rng):
        feats = features_from_rows(
            [rng.normal(size=(2, FAMILY_DIMS[s])) for s in range(9)]
        )
        centers = list(rng.normal(size=(1, 2, FAMILY_DIMS[s])) for s in range(9))
        centers[0] = rng.normal(size=(1, 2, 5))
        with pytest.raises(ConfigError):
            CodebookSet(tuple(centers), clusters=2, runs=1, seed=0)

    def test_training_assignment_path(self, rng):
        seqs = [random_sequence(rng, frames=8, seq_id=f"s{i}") for i in range(3)]
        feats = [sequence_features(s, 2) for s in seqs]
        codebooks, assignment = build_codebooks(feats, 3, 2, seed=4)
        # with no replacement, recorded assignment equals nearest-center
        for i in range(3):
            trained = aggregate(feats[i], codebooks, assignment, i)
            fresh = aggregate(feats[i], codebooks)
            assert np.allclose(trained, fresh, atol=0)


class TestPowerNormalize:
    def test_fixed_points(self):
        assert np.array_equal(power_normalize([0.0, 1.0, -1.0]), [0.0, 1.0, -1.0])

    def test_direct_values(self):
        assert np.array_equal(power_normalize([4.0, -9.0]), [2.0, -3.0])

    def test_preserves_signs_and_magnitude_order(self, rng):
        y = rng.normal(size=300) * 10
        z = power_normalize(y)
        assert np.array_equal(np.sign(z), np.sign(y))
        assert np.argmax(np.abs(z)) == np.argmax(np.abs(y))
        order_y = np.argsort(np.abs(y), kind="stable")
        order_z = np.argsort(np.abs(z), kind="stable")
        assert np.array_equal(order_y, order_z)
