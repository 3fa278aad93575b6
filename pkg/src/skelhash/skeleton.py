"""Fifteen-joint skeleton data model, sequence formats, and dataset loading.

A skeleton frame is a (15, 3) array of joint positions in the canonical
index order below; an action sequence stacks frames into a (J, 15, 3)
array. Raw capture formats with more joints (e.g. 20-joint Kinect files)
are reduced to the canonical model through a :class:`JointMap`.

Canonical joint order (0-based index: name):
    0 head, 1 neck, 2 spine,
    3 left_shoulder, 4 left_elbow, 5 left_hand,
    6 right_shoulder, 7 right_elbow, 8 right_hand,
    9 left_hip, 10 left_knee, 11 left_foot,
    12 right_hip, 13 right_knee, 14 right_foot
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, ParseError

JOINT_NAMES = (
    "head", "neck", "spine",
    "left_shoulder", "left_elbow", "left_hand",
    "right_shoulder", "right_elbow", "right_hand",
    "left_hip", "left_knee", "left_foot",
    "right_hip", "right_knee", "right_foot",
)
JOINT_COUNT = 15
JOINT_INDEX = {name: i for i, name in enumerate(JOINT_NAMES)}

SEQUENCE_MAGIC = "LAKS-SKEL"
SEQUENCE_FORMAT_VERSION = 1
VALUES_PER_FRAME = JOINT_COUNT * 3

# Filenames like a01_s07_e02.txt carry action/subject/episode numbers.
DEFAULT_NAME_PATTERN = r"a(?P<action>\d+)_s(?P<subject>\d+)_e(?P<episode>\d+)"

DATASET_FORMATS = ("canonical", "msr-like")

# Default 20->15 reduction, assuming the Kinect SDK v1 joint order
# (hip center, spine, shoulder center, head, then left arm, right arm,
# left leg, right leg with wrist/ankle rows unused). Source indices are
# 1-based. Override with a joint-map config file when the capture
# ordering differs; the distribution ships configs/msr20_jointmap.cfg
# with this same table.
MSR20_SOURCE_JOINTS = (4, 3, 2, 5, 6, 8, 9, 10, 12, 13, 14, 16, 17, 18, 20)


def _render_value(v):
    # Exact decimal round-trip with at least six significant digits.
    return np.format_float_positional(
        v, unique=True, fractional=False, min_digits=6, trim="k"
    )


@dataclass(frozen=True)
class ActionSequence:
    """An ordered sequence of skeleton frames with optional annotations.

    Parameters
    ----------
    joints : ndarray, shape (frames, 15, 3)
        Joint positions, canonical index order, all finite.
    label : int or None
        1-based action class id.
    subject : int or None
        Performer id, used by the evaluation protocols.
    sequence_id : str
        Free-form identifier (usually the source file stem).
    """

    joints: np.ndarray
    label: int | None = None
    subject: int | None = None
    sequence_id: str = ""

    def __post_init__(self):
        joints = np.array(self.joints, dtype=np.float64)
        if joints.ndim != 3 or joints.shape[1:] != (JOINT_COUNT, 3):
            raise DataError(
                f"sequence {self.sequence_id!r}: joints must have shape "
                f"(frames, {JOINT_COUNT}, 3), got {joints.shape}"
            )
        if joints.shape[0] < 1:
            raise DataError(f"sequence {self.sequence_id!r}: needs at least one frame")
        if not np.isfinite(joints).all():
            raise DataError(f"sequence {self.sequence_id!r}: non-finite joint values")
        joints.flags.writeable = False
        object.__setattr__(self, "joints", joints)
        if self.label is not None and self.label < 1:
            raise DataError(f"sequence {self.sequence_id!r}: label must be >= 1")

    @property
    def frame_count(self):
        return self.joints.shape[0]


@dataclass(frozen=True)
class Dataset:
    """A labeled collection of action sequences."""

    sequences: tuple[ActionSequence, ...]
    class_count: int
    class_names: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "sequences", tuple(self.sequences))
        if len(self.sequences) < 1:
            raise DataError("dataset must contain at least one sequence")
        if self.class_count < 1:
            raise DataError("class_count must be >= 1")
        for seq in self.sequences:
            if seq.label is not None and seq.label > self.class_count:
                raise DataError(
                    f"sequence {seq.sequence_id!r}: label {seq.label} exceeds "
                    f"class count {self.class_count}"
                )
        if self.class_names is not None:
            object.__setattr__(self, "class_names", tuple(self.class_names))

    def subset(self, indices):
        """Dataset restricted to the given sequence indices (same classes)."""
        return Dataset(
            tuple(self.sequences[i] for i in indices),
            self.class_count,
            self.class_names,
        )

    def subjects(self):
        """Sorted distinct subject ids; raises if any sequence lacks one."""
        ids = set()
        for seq in self.sequences:
            if seq.subject is None:
                raise ConfigError(
                    f"sequence {seq.sequence_id!r} has no subject id; "
                    "subject-based protocols need one"
                )
            ids.add(seq.subject)
        return sorted(ids)


@dataclass(frozen=True)
class JointMap:
    """Reduction from a raw capture's joint rows to the 15 canonical joints.

    ``sources`` holds one 1-based source row index per canonical joint.
    """

    source_joint_count: int
    sources: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(int(s) for s in self.sources))
        if len(self.sources) != JOINT_COUNT:
            raise ConfigError(
                f"joint map must list {JOINT_COUNT} source indices, "
                f"got {len(self.sources)}"
            )
        for s in self.sources:
            if not 1 <= s <= self.source_joint_count:
                raise ConfigError(
                    f"joint map source index {s} outside "
                    f"1..{self.source_joint_count}"
                )

    @classmethod
    def identity(cls):
        return cls(JOINT_COUNT, tuple(range(1, JOINT_COUNT + 1)))

    @classmethod
    def msr20_default(cls):
        return cls(20, MSR20_SOURCE_JOINTS)

    def row_indices(self):
        """0-based source row indices, canonical order."""
        return np.array(self.sources, dtype=np.int64) - 1


def load_joint_map(path):
    """Parse a joint-map config file.

    The file is flat key-value text::

        source_joint_count = 20
        map = 4 3 2 5 6 8 9 10 12 13 14 16 17 18 20

    ``map`` lists the 1-based source row of each canonical joint, in
    canonical order.
    """
    path = Path(path)
    count = None
    sources = None
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "source_joint_count":
            count = int(value)
        elif key == "map":
            sources = tuple(int(tok) for tok in value.split())
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    if count is None or sources is None:
        raise ConfigError(f"{path}: must define source_joint_count and map")
    return JointMap(count, sources)


def _parse_frame_line(path, lineno, line, expected):
    tokens = line.split()
    if len(tokens) != expected:
        raise ParseError(
            f"{path}:{lineno}: expected {expected} values, got {len(tokens)}"
        )
    try:
        values = [float(tok) for tok in tokens]
    except ValueError as exc:
        raise ParseError(f"{path}:{lineno}: {exc}") from None
    if not all(np.isfinite(values)):
        raise ParseError(f"{path}:{lineno}: non-finite joint value")
    return values


def load_canonical(path):
    """Load a sequence from the canonical text format.

    The first line is ``LAKS-SKEL 1 <frame_count>``; each following line
    holds the 45 coordinates of one frame (joints in canonical order,
    ``x y z`` each).
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or not lines[0].strip():
        raise ParseError(f"{path}:1: empty file")
    header = lines[0].split()
    if len(header) != 3 or header[0] != SEQUENCE_MAGIC:
        raise ParseError(f"{path}:1: expected header '{SEQUENCE_MAGIC} 1 <frames>'")
    try:
        version = int(header[1])
        frame_count = int(header[2])
    except ValueError:
        raise ParseError(f"{path}:1: non-integer version or frame count") from None
    if version != SEQUENCE_FORMAT_VERSION:
        raise ParseError(f"{path}:1: unsupported format version {version}")
    if frame_count < 1:
        raise ParseError(f"{path}:1: frame count must be >= 1")
    frames = np.empty((frame_count, JOINT_COUNT, 3))
    for i in range(frame_count):
        lineno = i + 2
        if lineno > len(lines):
            raise ParseError(f"{path}:{lineno}: missing frame line")
        values = _parse_frame_line(path, lineno, lines[i + 1], VALUES_PER_FRAME)
        frames[i] = np.reshape(values, (JOINT_COUNT, 3))
    for extra, raw in enumerate(lines[frame_count + 1:], frame_count + 2):
        if raw.strip():
            raise ParseError(f"{path}:{extra}: unexpected content after last frame")
    return ActionSequence(frames, sequence_id=path.stem)


def save_canonical(seq, path):
    """Write a sequence in the canonical text format (see load_canonical)."""
    path = Path(path)
    out = [f"{SEQUENCE_MAGIC} {SEQUENCE_FORMAT_VERSION} {seq.frame_count}"]
    for frame in seq.joints:
        out.append(" ".join(_render_value(v) for v in frame.ravel()))
    path.write_text("\n".join(out) + "\n")
    return path


def load_raw(path, joint_map):
    """Load a raw capture file and reduce it to the canonical 15 joints.

    The raw layout is one line per joint row (``x y z`` with an optional
    trailing confidence column, which is discarded), ``source_joint_count``
    rows per frame, frames concatenated.
    """
    path = Path(path)
    rows = []
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        if not raw.strip():
            continue
        tokens = raw.split()
        if len(tokens) not in (3, 4):
            raise ParseError(
                f"{path}:{lineno}: expected 3 or 4 values per joint row, "
                f"got {len(tokens)}"
            )
        rows.append(_parse_frame_line(path, lineno, " ".join(tokens[:3]), 3))
    if not rows:
        raise ParseError(f"{path}:1: empty file")
    per_frame = joint_map.source_joint_count
    if len(rows) % per_frame:
        raise ParseError(
            f"{path}: {len(rows)} joint rows is not a multiple of "
            f"{per_frame} rows per frame"
        )
    frames = np.asarray(rows).reshape(-1, per_frame, 3)
    canonical = frames[:, joint_map.row_indices(), :]
    return ActionSequence(canonical, sequence_id=path.stem)


def load_dataset(root, fmt="canonical", joint_map=None, pattern=None):
    """Load every sequence file under a directory.

    Labels and subjects come from filenames matching ``pattern`` (default
    ``aXX_sYY_eZZ``); the class count is the maximum action number seen.
    Files that fail to parse are skipped and reported.

    Returns
    -------
    (Dataset, list of str)
        The dataset and one message per skipped file.
    """
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"dataset directory {root} does not exist")
    if fmt not in DATASET_FORMATS:
        raise ConfigError(f"unknown dataset format {fmt!r}; expected one of "
                          f"{', '.join(DATASET_FORMATS)}")
    if fmt == "msr-like" and joint_map is None:
        joint_map = JointMap.msr20_default()
    regex = re.compile(pattern or DEFAULT_NAME_PATTERN)
    problems = []
    sequences = []
    for entry in sorted(p for p in root.iterdir() if p.is_file()):
        match = regex.search(entry.name)
        if not match:
            problems.append(f"{entry.name}: name does not match pattern, skipped")
            continue
        try:
            if fmt == "canonical":
                seq = load_canonical(entry)
            else:
                seq = load_raw(entry, joint_map)
        except DataError as exc:
            problems.append(str(exc))
            continue
        sequences.append(replace(
            seq,
            label=int(match.group("action")),
            subject=int(match.group("subject")),
        ))
    if not sequences:
        raise DataError(
            f"no sequences loaded from {root} ({len(problems)} files skipped)"
        )
    class_count = max(seq.label for seq in sequences)
    return Dataset(tuple(sequences), class_count), problems
