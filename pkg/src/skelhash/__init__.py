"""Skeleton action recognition: aggregated offset features + binary codes."""

from .classify import TrainedModel, encode, hamming_nn, predict
from .codebook import (
    CodebookSet,
    aggregate,
    build_codebooks,
    denoise,
    descriptor_dim,
    power_normalize,
)
from .config import RunConfig
from .errors import (
    CompatibilityError,
    ConfigError,
    DataError,
    NumericError,
    ParseError,
    SkelHashError,
)
from .model_io import load_model, save_model
from .offsets import (
    frame_offset_features,
    interframe_offset,
    intraframe_offset,
    sequence_features,
)
from .pipeline import fit
from .skeleton import (
    ActionSequence,
    Dataset,
    JointMap,
    load_canonical,
    load_dataset,
    load_raw,
    save_canonical,
)
from .solver import SolverParams, train

__version__ = "0.1.0"

__all__ = [
    "ActionSequence", "CodebookSet", "CompatibilityError", "ConfigError",
    "DataError", "Dataset", "JointMap", "NumericError", "ParseError",
    "RunConfig", "SkelHashError", "SolverParams", "TrainedModel",
    "aggregate", "build_codebooks", "denoise", "descriptor_dim", "encode",
    "fit", "frame_offset_features", "hamming_nn", "interframe_offset",
    "intraframe_offset", "load_canonical", "load_dataset", "load_model",
    "load_raw", "power_normalize", "predict", "save_canonical", "save_model",
    "sequence_features", "train",
]
