"""The nine per-frame joint-offset features.

Five interframe features track how a body component (three joints of one
limb or the head/neck/spine column) moved over a gap of ``tau`` frames;
four intraframe features fan out from a basic joint to its typically
farthest joints within a single frame. Families 1..8 live in R^9, family
9 in R^6, so one frame contributes 78 feature dimensions in total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

# Interframe joint triples (0-based canonical indices).
INTERFRAME_TRIPLES = (
    (0, 1, 2),     # head, neck, spine
    (3, 4, 5),     # left shoulder, elbow, hand
    (6, 7, 8),     # right shoulder, elbow, hand
    (9, 10, 11),   # left hip, knee, foot
    (12, 13, 14),  # right hip, knee, foot
)

# Intraframe fans: (basic joint, offset joints); value is basic - offset.
INTRAFRAME_FANS = (
    (2, (0, 5, 8)),    # spine -> head, left hand, right hand
    (12, (0, 5, 11)),  # right hip -> head, left hand, left foot
    (9, (0, 8, 14)),   # left hip -> head, right hand, right foot
    (0, (5, 8)),       # head -> left hand, right hand
)

FAMILY_COUNT = 9
INTERFRAME_FAMILIES = 5
FAMILY_DIMS = (9, 9, 9, 9, 9, 9, 9, 9, 6)
FRAME_FEATURE_DIM = sum(FAMILY_DIMS)  # 78


@dataclass(frozen=True)
class SequenceFeatures:
    """All nine offset-feature families of one sequence, frame ordered.

    ``arrays[s]`` has shape ``(n_s, FAMILY_DIMS[s])``: the interframe
    families (s < 5) have ``max(frames - tau, 0)`` rows (frames 1..tau
    have no interframe offset), the intraframe families have one row per
    frame.
    """

    arrays: tuple[np.ndarray, ...]
    tau: int
    sequence_id: str = ""

    def __post_init__(self):
        if len(self.arrays) != FAMILY_COUNT:
            raise DataError(f"expected {FAMILY_COUNT} feature families")
        object.__setattr__(self, "arrays", tuple(self.arrays))

    def counts(self):
        return tuple(a.shape[0] for a in self.arrays)


def _check_joint(i):
    if not 1 <= i <= 15:
        raise ValueError(f"joint index {i} outside 1..15")


def interframe_offset(seq, joint, frame, tau):
    """Displacement of one joint across a ``tau``-frame gap.

    ``joint`` and ``frame`` are 1-based; requires ``tau < frame <= J``.
    """
    _check_joint(joint)
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    if not tau < frame <= seq.frame_count:
        raise ValueError(
            f"frame {frame} outside {tau + 1}..{seq.frame_count} for tau={tau}"
        )
    return seq.joints[frame - 1, joint - 1] - seq.joints[frame - 1 - tau, joint - 1]


def intraframe_offset(seq, joint, other, frame):
    """Offset from ``joint`` to ``other`` within one frame (1-based indices)."""
    _check_joint(joint)
    _check_joint(other)
    if not 1 <= frame <= seq.frame_count:
        raise ValueError(f"frame {frame} outside 1..{seq.frame_count}")
    return seq.joints[frame - 1, joint - 1] - seq.joints[frame - 1, other - 1]


def frame_offset_features(seq, frame, tau):
    """The nine offset features of one frame (1-based ``frame``).

    Returns a list of nine vectors; the interframe entries (families
    1..5) are ``None`` when ``frame <= tau``.
    """
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    if not 1 <= frame <= seq.frame_count:
        raise ValueError(f"frame {frame} outside 1..{seq.frame_count}")
    j = frame - 1
    features = []
    for triple in INTERFRAME_TRIPLES:
        if frame <= tau:
            features.append(None)
        else:
            features.append(
                (seq.joints[j, triple, :] - seq.joints[j - tau, triple, :]).ravel()
            )
    for base, fan in INTRAFRAME_FANS:
        features.append(
            (seq.joints[j, base] - seq.joints[j, fan, :]).ravel()
        )
    return features


def sequence_features(seq, tau):
    """Compute every frame's offset features for one sequence.

    Interframe families collect frames tau+1..J (empty when the sequence
    is no longer than tau); intraframe families collect every frame.
    """
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    x = seq.joints
    frames = x.shape[0]
    arrays = []
    if frames > tau:
        moved = x[tau:] - x[:-tau]  # (frames - tau, 15, 3)
        for triple in INTERFRAME_TRIPLES:
            arrays.append(moved[:, triple, :].reshape(frames - tau, 9))
    else:
        arrays.extend(np.empty((0, 9)) for _ in INTERFRAME_TRIPLES)
    for base, fan in INTRAFRAME_FANS:
        rel = x[:, base, None, :] - x[:, fan, :]
        arrays.append(rel.reshape(frames, 3 * len(fan)))
    return SequenceFeatures(tuple(arrays), tau, seq.sequence_id)
