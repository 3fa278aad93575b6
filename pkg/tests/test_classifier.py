import numpy as np
import pytest

from skelhash.classify import TrainedModel, encode, hamming_nn, predict
from skelhash.codebook import CodebookSet, descriptor_dim
from skelhash.errors import CompatibilityError
from skelhash.offsets import FAMILY_DIMS
from skelhash.solver import SolverParams

from conftest import random_sequence


def tiny_model(rng, clusters=2, runs=1, bits=4, atoms=3, n_train=5,
               labels=None, codes=None):
    dim = descriptor_dim(clusters, runs)
    centers = tuple(
        rng.standard_normal((runs, clusters, FAMILY_DIMS[s])) for s in range(9)
    )
    codebooks = CodebookSet(centers, clusters, runs, seed=0)
    if codes is None:
        codes = np.where(rng.standard_normal((bits, n_train)) >= 0, 1, -1)
    if labels is None:
        labels = 1 + (np.arange(n_train) % 3)
    return TrainedModel(
        codebooks=codebooks,
        projection=rng.standard_normal((atoms, bits)),
        dictionary=rng.standard_normal((atoms, dim)),
        codes=codes.astype(np.int8),
        train_labels=np.asarray(labels, dtype=np.int64),
        solver=SolverParams(code_length=bits, atoms=atoms),
        tau=2,
        epsilon=0,
        class_count=3,
    )


class TestEncode:
    def test_positive_scale_invariance(self, rng):
        model = tiny_model(rng)
        y = rng.standard_normal(model.descriptor_dim())
        base = encode(y, model)
        for c in (1e-6, 0.5, 3.0, 99.0):
            assert np.array_equal(encode(c * y, model), base)

    def test_hand_computed_code(self):
        rng = np.random.default_rng(4)
        model = tiny_model(rng, bits=2, atoms=2)
        y = rng.standard_normal(model.descriptor_dim())
        v = model.projection.T @ (model.dictionary @ y)
        expected = np.array([1 if x >= 0 else -1 for x in v], dtype=np.int8)
        assert np.array_equal(encode(y, model), expected)

    def test_output_is_signs_of_length_code(self, rng):
        model = tiny_model(rng, bits=7)
        code = encode(rng.standard_normal(model.descriptor_dim()), model)
        assert code.shape == (7,)
        assert set(np.unique(code)) <= {-1, 1}

    def test_dimension_mismatch(self, rng):
        model = tiny_model(rng)
        with pytest.raises(CompatibilityError, match="descriptor length"):
            encode(np.zeros(10), model)

    def test_sgn_zero_is_plus_one(self, rng):
        model = tiny_model(rng)
        code = encode(np.zeros(model.descriptor_dim()), model)
        assert np.array_equal(code, np.ones_like(code))


class TestHammingNN:
    def test_exact_match_wins(self, rng):
        model = tiny_model(rng, bits=4, n_train=3,
                           labels=[3, 1, 2],
                           codes=np.array([[1, 1, 1, -1],
                                           [1, -1, -1, -1],
                                           [-1, 1, -1, 1]]).T)
        assert hamming_nn(np.array([1, -1, -1, -1]), model) == 1

    def test_matches_brute_force(self, rng):
        model = tiny_model(rng, bits=8, n_train=20)
        for _ in range(10):
            code = np.where(rng.standard_normal(8) >= 0, 1, -1).astype(np.int8)
            dists = [
                int(np.sum(code != model.codes[:, i]))
                for i in range(model.codes.shape[1])
            ]
            expected = model.train_labels[int(np.argmin(dists))]
            assert hamming_nn(code, model) == expected

    def test_tie_breaks_to_lowest_index(self, rng):
        codes = np.array([
            [1, 1, 1, 1],    # distance 1 from query
            [1, 1, 1, 1],    # same code, same distance
            [-1, -1, -1, -1],
        ]).T
        model = tiny_model(rng, bits=4, n_train=3, labels=[2, 3, 1], codes=codes)
        query = np.array([1, 1, 1, -1], dtype=np.int8)
        assert hamming_nn(query, model) == 2

    def test_distance_properties(self, rng):
        from skelhash.kernels import hamming_distances
        codes = np.where(rng.standard_normal((16, 30)) >= 0, 1, -1).astype(np.int8)
        for i in range(5):
            d_self = hamming_distances(codes[:, i].copy(), codes)
            assert d_self[i] == 0
            assert d_self.max() <= 16
        a, b = codes[:, 0].copy(), codes[:, 1].copy()
        assert hamming_distances(a, b[:, None])[0] == \
            hamming_distances(b, a[:, None])[0]


class TestPredict:
    def test_deterministic(self, rng):
        model = tiny_model(rng)
        seq = random_sequence(rng, frames=6)
        assert predict(seq, model) == predict(seq, model)

    def test_stage_name_attached(self, rng):
        model = tiny_model(rng)
        bad_model = TrainedModel(
            codebooks=model.codebooks,
            projection=model.projection,
            dictionary=model.dictionary,
            codes=model.codes,
            train_labels=model.train_labels,
            solver=model.solver,
            tau=2,
            epsilon=0,
            class_count=3,
        )
        # break the codebook/descriptor agreement behind the model's back
        object.__setattr__(
            bad_model, "codebooks",
            CodebookSet(
                tuple(np.zeros((1, 3, FAMILY_DIMS[s])) for s in range(9)),
                clusters=3, runs=1, seed=0,
            ),
        )
        seq = random_sequence(rng, frames=6)
        with pytest.raises(CompatibilityError, match=r"\[encoding\]"):
            predict(seq, bad_model)

    def test_short_sequences_still_classify(self, rng):
        # a sequence no longer than tau has only intraframe features
        model = tiny_model(rng)
        for frames in (1, 2):
            seq = random_sequence(rng, frames=frames)
            assert predict(seq, model) in (1, 2, 3)

    def test_self_retrieval_end_to_end(self, rng):
        # full pipeline: train on clean synthetic data with epsilon=0,
        # every training sequence must retrieve its own label
        from skelhash.config import RunConfig
        from skelhash.pipeline import fit
        from skelhash.synthetic import make_dataset
        ds = make_dataset(classes=3, subjects=2, episodes=1, frames=18, seed=5)
        cfg = RunConfig(clusters=4, kmeans_runs=2, epsilon=0, code_length=12,
                        atoms=16, max_iter=10)
        model, _ = fit(ds, cfg)
        for seq in ds.sequences:
            assert predict(seq, model) == seq.label
