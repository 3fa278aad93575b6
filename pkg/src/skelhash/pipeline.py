"""End-to-end training pipeline: features -> codebooks -> descriptors -> model."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .classify import TrainedModel
from .codebook import aggregate, build_codebooks, denoise, power_normalize
from .errors import DataError
from .offsets import sequence_features
from .solver import train


def fit(dataset, config, seed=None):
    """Train a model on every sequence of ``dataset``.

    ``seed`` overrides ``config.seed`` (used by cross-validation folds).
    All sequences must be labeled.
    """
    run_seed = config.seed if seed is None else seed
    for seq in dataset.sequences:
        if seq.label is None:
            raise DataError(
                f"training sequence {seq.sequence_id!r} has no label"
            )
    features = [sequence_features(seq, config.tau) for seq in dataset.sequences]
    codebooks, assignment = build_codebooks(
        features, config.clusters, config.kmeans_runs, run_seed
    )
    if config.epsilon > 0:
        features, assignment = denoise(features, codebooks, assignment,
                                       config.epsilon)
    descriptors = np.stack([
        power_normalize(aggregate(features[i], codebooks, assignment, i))
        for i in range(len(features))
    ], axis=1)
    labels = np.array([seq.label for seq in dataset.sequences], dtype=np.int64)
    params = config.solver_params()
    if seed is not None:
        params = replace(params, seed=seed)
    state = train(descriptors, labels, params, dataset.class_count)
    model = TrainedModel(
        codebooks=codebooks,
        projection=state.projection,
        dictionary=state.dictionary,
        codes=np.asarray(state.codes, dtype=np.int8),
        train_labels=labels,
        solver=params,
        tau=config.tau,
        epsilon=config.epsilon,
        class_count=dataset.class_count,
        class_names=dataset.class_names,
    )
    return model, state
