"""Binary-code encoding and Hamming nearest-neighbor classification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .codebook import CodebookSet, aggregate, descriptor_dim, power_normalize
from .errors import CompatibilityError, SkelHashError
from .offsets import sequence_features
from .solver import SolverParams


@dataclass(frozen=True)
class TrainedModel:
    """Everything inference needs: codebooks, code maps, training codes.

    ``codes`` holds one +/-1 column per training sequence;
    ``train_labels`` the matching 1-based class ids.
    """

    codebooks: CodebookSet
    projection: np.ndarray    # (atoms, code_length)
    dictionary: np.ndarray    # (atoms, descriptor_dim)
    codes: np.ndarray         # (code_length, n_train) int8
    train_labels: np.ndarray  # (n_train,) int64
    solver: SolverParams
    tau: int
    epsilon: int
    class_count: int
    class_names: tuple[str, ...] | None = None
    format_version: int = 1

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int8)
        labels = np.asarray(self.train_labels, dtype=np.int64)
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "train_labels", labels)
        dim = descriptor_dim(self.codebooks.clusters, self.codebooks.runs)
        if self.dictionary.shape != (self.solver.atoms, dim):
            raise CompatibilityError(
                f"dictionary shape {self.dictionary.shape} does not match "
                f"(atoms={self.solver.atoms}, descriptor_dim={dim})"
            )
        if self.projection.shape != (self.solver.atoms, self.solver.code_length):
            raise CompatibilityError(
                f"projection shape {self.projection.shape} does not match "
                f"(atoms, code_length)"
            )
        if codes.shape != (self.solver.code_length, labels.shape[0]) or \
                labels.shape[0] == 0:
            raise CompatibilityError(
                "training codes must have one column per training label"
            )
        if not np.isin(codes, (-1, 1)).all():
            raise CompatibilityError("training codes must be +/-1 valued")

    @property
    def code_length(self):
        return self.solver.code_length

    def descriptor_dim(self):
        return descriptor_dim(self.codebooks.clusters, self.codebooks.runs)


def encode(descriptor, model):
    """Hash a power-normalized descriptor: sgn(W^T T y), sgn(0) = +1."""
    y = np.asarray(descriptor, dtype=np.float64).ravel()
    if y.shape[0] != model.dictionary.shape[1]:
        raise CompatibilityError(
            f"descriptor length {y.shape[0]} does not match the model's "
            f"{model.dictionary.shape[1]}"
        )
    v = model.projection.T @ (model.dictionary @ y)
    return np.where(v >= 0, 1, -1).astype(np.int8)


def hamming_nn(code, model):
    """Label of the Hamming-nearest training code (lowest index on ties)."""
    code = np.asarray(code, dtype=np.int8).ravel()
    if code.shape[0] != model.code_length:
        raise CompatibilityError(
            f"code length {code.shape[0]} does not match the model's "
            f"{model.code_length}"
        )
    dists = kernels.hamming_distances(code, model.codes)
    return int(model.train_labels[int(np.argmin(dists))])


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except SkelHashError as exc:
        raise type(exc)(f"[{name}] {exc}") from exc


def predict(seq, model):
    """Classify a raw action sequence with a trained model.

    Features are aggregated against nearest centers (no noise repair at
    test time), power-normalized, hashed, and matched to the nearest
    training code. Stage names are attached to any pipeline error.
    """
    feats = _stage("feature-extraction", sequence_features, seq, model.tau)
    descriptor = _stage("aggregation", aggregate, feats, model.codebooks)
    descriptor = _stage("normalization", power_normalize, descriptor)
    code = _stage("encoding", encode, descriptor, model)
    return _stage("classification", hamming_nn, code, model)
