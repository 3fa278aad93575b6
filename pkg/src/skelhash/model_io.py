"""Deterministic binary container for trained models.

Layout: a fixed magic string, a little-endian u32 format version, then a
sequence of length-prefixed named records (name, kind tag, payload).
The writer emits fields in a fixed order with fixed dtypes, so saving
the same model twice produces byte-identical files and a save/load/save
round-trip is exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .classify import TrainedModel
from .codebook import CodebookSet
from .errors import CompatibilityError, ParseError
from .offsets import FAMILY_COUNT
from .solver import SolverParams

MAGIC = b"SKELHASH-MODEL\n"
FORMAT_VERSION = 1

_KIND_INT = 0
_KIND_FLOAT = 1
_KIND_STR = 2
_KIND_ARRAY = 3

_DTYPES = {0: "<f8", 1: "<i8", 2: "|i1"}
_DTYPE_CODES = {np.dtype("<f8"): 0, np.dtype("<i8"): 1, np.dtype("int8"): 2}

_INT_FIELDS = ("class_count", "tau", "epsilon", "clusters", "runs",
               "codebook_seed", "code_length", "atoms", "max_iter", "seed")
_FLOAT_FIELDS = ("lambda1", "lambda2", "lambda3", "mu0", "rho", "mu_max",
                 "tol", "ridge")


def _write_record(out, name, kind, payload):
    encoded = name.encode("utf-8")
    out.write(struct.pack("<I", len(encoded)))
    out.write(encoded)
    out.write(struct.pack("<B", kind))
    out.write(payload)


def _array_payload(arr, dtype):
    arr = np.ascontiguousarray(arr, dtype=dtype)
    head = struct.pack("<BB", _DTYPE_CODES[np.dtype(dtype)], arr.ndim)
    dims = struct.pack(f"<{arr.ndim}q", *arr.shape) if arr.ndim else b""
    return head + dims + arr.tobytes()


def save_model(model, path):
    """Write a trained model; returns the path."""
    path = Path(path)
    with open(path, "wb") as out:
        out.write(MAGIC)
        out.write(struct.pack("<I", FORMAT_VERSION))
        scalars = {
            "class_count": model.class_count,
            "tau": model.tau,
            "epsilon": model.epsilon,
            "clusters": model.codebooks.clusters,
            "runs": model.codebooks.runs,
            "codebook_seed": model.codebooks.seed,
            "code_length": model.solver.code_length,
            "atoms": model.solver.atoms,
            "max_iter": model.solver.max_iter,
            "seed": model.solver.seed,
            "lambda1": model.solver.lambda1,
            "lambda2": model.solver.lambda2,
            "lambda3": model.solver.lambda3,
            "mu0": model.solver.mu0,
            "rho": model.solver.rho,
            "mu_max": model.solver.mu_max,
            "tol": model.solver.tol,
            "ridge": model.solver.ridge,
        }
        for name in _INT_FIELDS:
            _write_record(out, name, _KIND_INT, struct.pack("<q", int(scalars[name])))
        for name in _FLOAT_FIELDS:
            _write_record(out, name, _KIND_FLOAT,
                          struct.pack("<d", float(scalars[name])))
        if model.class_names is not None:
            names = "\n".join(model.class_names).encode("utf-8")
            _write_record(out, "class_names", _KIND_STR,
                          struct.pack("<I", len(names)) + names)
        _write_record(out, "train_labels", _KIND_ARRAY,
                      _array_payload(model.train_labels, "<i8"))
        _write_record(out, "codes", _KIND_ARRAY,
                      _array_payload(model.codes, "int8"))
        _write_record(out, "projection", _KIND_ARRAY,
                      _array_payload(model.projection, "<f8"))
        _write_record(out, "dictionary", _KIND_ARRAY,
                      _array_payload(model.dictionary, "<f8"))
        for s in range(FAMILY_COUNT):
            _write_record(out, f"centers_{s + 1}", _KIND_ARRAY,
                          _array_payload(model.codebooks.centers[s], "<f8"))
    return path


class _Reader:
    def __init__(self, data, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n):
        if self.pos + n > len(self.data):
            raise ParseError(f"{self.path}: truncated model file")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    @property
    def done(self):
        return self.pos >= len(self.data)


def _read_records(reader):
    records = {}
    while not reader.done:
        (name_len,) = reader.unpack("<I")
        name = reader.take(name_len).decode("utf-8")
        (kind,) = reader.unpack("<B")
        if kind == _KIND_INT:
            (value,) = reader.unpack("<q")
        elif kind == _KIND_FLOAT:
            (value,) = reader.unpack("<d")
        elif kind == _KIND_STR:
            (str_len,) = reader.unpack("<I")
            value = reader.take(str_len).decode("utf-8")
        elif kind == _KIND_ARRAY:
            code, ndim = reader.unpack("<BB")
            if code not in _DTYPES:
                raise ParseError(f"{reader.path}: unknown array dtype {code}")
            shape = reader.unpack(f"<{ndim}q") if ndim else ()
            dtype = np.dtype(_DTYPES[code])
            count = int(np.prod(shape, dtype=np.int64)) if shape else 1
            value = np.frombuffer(reader.take(count * dtype.itemsize),
                                  dtype=dtype).reshape(shape).copy()
        else:
            raise ParseError(f"{reader.path}: unknown record kind {kind}")
        records[name] = value
    return records


def load_model(path):
    """Read a model file written by :func:`save_model`."""
    path = Path(path)
    data = path.read_bytes()
    if not data.startswith(MAGIC):
        raise ParseError(f"{path}: not a model file (bad magic)")
    reader = _Reader(data[len(MAGIC):], path)
    (version,) = reader.unpack("<I")
    if version != FORMAT_VERSION:
        raise CompatibilityError(
            f"{path}: model format version {version} is not supported "
            f"(expected {FORMAT_VERSION})"
        )
    rec = _read_records(reader)
    required = set(_INT_FIELDS) | set(_FLOAT_FIELDS) | {
        "train_labels", "codes", "projection", "dictionary",
    } | {f"centers_{s + 1}" for s in range(FAMILY_COUNT)}
    missing = required - rec.keys()
    if missing:
        raise ParseError(f"{path}: missing model fields: {sorted(missing)}")
    params = SolverParams(
        lambda1=rec["lambda1"], lambda2=rec["lambda2"], lambda3=rec["lambda3"],
        code_length=rec["code_length"], atoms=rec["atoms"], mu0=rec["mu0"],
        rho=rec["rho"], mu_max=rec["mu_max"], max_iter=rec["max_iter"],
        tol=rec["tol"], ridge=rec["ridge"], seed=rec["seed"],
    )
    codebooks = CodebookSet(
        tuple(rec[f"centers_{s + 1}"] for s in range(FAMILY_COUNT)),
        clusters=rec["clusters"], runs=rec["runs"], seed=rec["codebook_seed"],
    )
    names = rec.get("class_names")
    return TrainedModel(
        codebooks=codebooks,
        projection=rec["projection"],
        dictionary=rec["dictionary"],
        codes=rec["codes"],
        train_labels=rec["train_labels"],
        solver=params,
        tau=rec["tau"],
        epsilon=rec["epsilon"],
        class_count=rec["class_count"],
        class_names=tuple(names.split("\n")) if names else None,
        format_version=version,
    )
