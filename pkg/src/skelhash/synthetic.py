"""Synthetic motion sequences for tests, demos, and benchmarks.

Three kinematically distinct motion archetypes (arm wave, squat, march)
are animated on a simple standing pose. Subjects differ in body scale,
phase, and posture; per-sequence jitter keeps repeats from being
identical. Everything is deterministic in the seed.
"""

from __future__ import annotations

import numpy as np

from .skeleton import ActionSequence, Dataset

# Standing pose, canonical joint order, meters-ish units.
BASE_POSE = np.array([
    [0.00, 1.70, 0.00],   # head
    [0.00, 1.55, 0.00],   # neck
    [0.00, 1.20, 0.00],   # spine
    [0.20, 1.50, 0.00],   # left shoulder
    [0.45, 1.30, 0.00],   # left elbow
    [0.70, 1.10, 0.00],   # left hand
    [-0.20, 1.50, 0.00],  # right shoulder
    [-0.45, 1.30, 0.00],  # right elbow
    [-0.70, 1.10, 0.00],  # right hand
    [0.12, 0.90, 0.00],   # left hip
    [0.15, 0.50, 0.00],   # left knee
    [0.18, 0.05, 0.00],   # left foot
    [-0.12, 0.90, 0.00],  # right hip
    [-0.15, 0.50, 0.00],  # right knee
    [-0.18, 0.05, 0.00],  # right foot
], dtype=np.float64)

MOTION_NAMES = ("arm_wave", "squat", "march")


def _animate(action, t, phase):
    """Per-frame joint displacement of one motion archetype at time t."""
    delta = np.zeros((15, 3))
    w = 2.0 * np.pi
    if action == 1:  # arm wave: right arm swings up and down quickly
        swing = np.sin(2.0 * w * t + phase)
        delta[8] = (0.10 * swing, 0.45 * swing, 0.15 * np.cos(2.0 * w * t + phase))
        delta[7] = (0.05 * swing, 0.25 * swing, 0.08 * np.cos(2.0 * w * t + phase))
    elif action == 2:  # squat: whole body bobs vertically
        drop = 0.25 * (1.0 - np.cos(w * t + phase))
        delta[:, 1] = -drop * np.array(
            [1.0, 1.0, 0.9, 1.0, 0.9, 0.8, 1.0, 0.9, 0.8,
             0.7, 0.4, 0.0, 0.7, 0.4, 0.0]
        )
    else:  # march: legs alternate forward/back, arms counter-swing
        step = np.sin(1.5 * w * t + phase)
        delta[10, 2] = 0.25 * step
        delta[11, 2] = 0.35 * step
        delta[13, 2] = -0.25 * step
        delta[14, 2] = -0.35 * step
        delta[5, 2] = -0.15 * step
        delta[8, 2] = 0.15 * step
    return delta


def make_sequence(action, subject, episode=1, frames=40, seed=0,
                  jitter=0.005, noise_frames=0.0):
    """Generate one labeled sequence.

    ``noise_frames`` is the probability that a frame gets a large random
    displacement on a few joints, mimicking capture glitches.
    """
    rng = np.random.default_rng([seed, action, subject, episode])
    scale = 0.9 + 0.02 * subject
    phase = 0.6 * subject + 0.3 * episode
    posture = rng.normal(0.0, 0.01, size=(15, 3))
    joints = np.empty((frames, 15, 3))
    for j in range(frames):
        t = j / frames
        pose = scale * (BASE_POSE + posture + _animate(action, t, phase))
        pose = pose + rng.normal(0.0, jitter, size=(15, 3))
        if noise_frames and rng.random() < noise_frames:
            glitch = rng.choice(15, size=3, replace=False)
            pose[glitch] += rng.normal(0.0, 0.6, size=(3, 3))
        joints[j] = pose
    return ActionSequence(
        joints,
        label=action,
        subject=subject,
        sequence_id=f"a{action:02d}_s{subject:02d}_e{episode:02d}",
    )


def make_dataset(classes=3, subjects=10, episodes=2, frames=40, seed=0,
                 jitter=0.005, noise_frames=0.0):
    """A dataset of ``classes * subjects * episodes`` synthetic sequences."""
    if not 1 <= classes <= len(MOTION_NAMES):
        raise ValueError(f"classes must be 1..{len(MOTION_NAMES)}")
    sequences = [
        make_sequence(action, subject, episode, frames, seed, jitter, noise_frames)
        for action in range(1, classes + 1)
        for subject in range(1, subjects + 1)
        for episode in range(1, episodes + 1)
    ]
    return Dataset(tuple(sequences), classes, MOTION_NAMES[:classes])
