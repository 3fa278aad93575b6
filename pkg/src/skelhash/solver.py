"""Alternating trainer for the supervised hashing model.

Given power-normalized descriptors Y (columns = samples) and one-hot
labels, the trainer learns an analysis dictionary T that sparsifies the
descriptors class-by-class, a projection W, a linear classifier Q over
binary codes, and the codes B themselves, by cycling through closed-form
subproblem solves with augmented-Lagrangian multiplier and penalty
updates. Every subproblem has an exact solution:

* W: ridge-stabilized least squares of B against T Y.
* Q: ridge regression of the labels against B.
* B: discrete cyclic coordinate descent, one code row at a time.
* T: a two-sided linear solve coupling the code-fitting term with the
  per-class auxiliary variables.
* per-class auxiliaries: row-wise group shrinkage (the l2,1 proximal map).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, DataError, NumericError


@dataclass(frozen=True)
class SolverParams:
    """Hyperparameters of the hashing trainer.

    The regularization weights and the code/atom sizes default to the
    reference operating point (lambda1 = lambda2 = 1, lambda3 = 1e-3,
    32-bit codes, 64 atoms); penalty schedule and stopping rule are
    config-overridable.
    """

    lambda1: float = 1.0
    lambda2: float = 1.0
    lambda3: float = 1e-3
    code_length: int = 32
    atoms: int = 64
    mu0: float = 1.0
    rho: float = 1.1
    mu_max: float = 1e6
    max_iter: int = 50
    tol: float = 1e-3
    ridge: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.rho <= 1:
            raise ConfigError("rho must be > 1")
        if not 0 < self.mu0 <= self.mu_max:
            raise ConfigError("need 0 < mu0 <= mu_max")
        for name in ("code_length", "atoms", "max_iter"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.ridge < 0 or self.tol < 0:
            raise ConfigError("ridge and tol must be non-negative")


@dataclass
class SolverState:
    """Trainer variables after (or during) the alternation."""

    projection: np.ndarray   # W, (atoms, code_length)
    classifier: np.ndarray   # Q, (code_length, classes)
    dictionary: np.ndarray   # T, (atoms, feature_dim)
    codes: np.ndarray        # B, (code_length, samples), entries +/-1
    sparse_codes: list       # per class, (atoms, class_size)
    multipliers: list        # per class, (atoms, class_size)
    mu: float
    iterations: int = 0
    objective_trace: list = field(default_factory=list)
    flip_trace: list = field(default_factory=list)


def sgn(v):
    """Sign with sgn(0) = +1, the convention used for all code bits."""
    return np.where(np.asarray(v) >= 0, 1.0, -1.0)


def one_hot(labels, class_count):
    """(class_count, n) one-hot matrix from 1-based labels."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1 or labels.size == 0:
        raise DataError("labels must be a non-empty 1-d sequence")
    if labels.min() < 1 or labels.max() > class_count:
        raise DataError(f"labels must lie in 1..{class_count}")
    out = np.zeros((class_count, labels.size))
    out[labels - 1, np.arange(labels.size)] = 1.0
    return out


def class_columns(labels, class_count):
    """Per-class column index arrays, classes 1..class_count."""
    labels = np.asarray(labels, dtype=np.int64)
    return [np.flatnonzero(labels == c + 1) for c in range(class_count)]


def _check_finite(mat, what):
    if not np.isfinite(mat).all():
        raise NumericError(f"{what} produced non-finite values")
    return mat


def _stabilized(gram, ridge):
    if ridge:
        gram = gram + ridge * float(np.mean(np.diag(gram))) * np.eye(gram.shape[0])
    return gram


def solve_projection(dictionary, feats, codes, ridge):
    """Least-squares fit of the codes: minimizes ||B - W^T T Y||_F^2.

    ``ridge`` scales a mean-diagonal stabilizer added to the Gram matrix
    before inversion (0 disables it).
    """
    z = dictionary @ feats
    gram = _stabilized(z @ z.T, ridge)
    try:
        w = np.linalg.solve(gram, z @ codes.T)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"projection solve failed: {exc}") from None
    return _check_finite(w, "projection solve")


def solve_classifier(codes, labels_onehot, lambda1):
    """Ridge regression of the labels on the codes: (BB^T + l1 I)^-1 B L^T."""
    gram = codes @ codes.T + lambda1 * np.eye(codes.shape[0])
    q = np.linalg.solve(gram, codes @ labels_onehot.T)
    return _check_finite(q, "classifier solve")


def code_target(classifier, labels_onehot, lambda3, projection, dictionary, feats):
    """The linear term driving the code updates: Q L + lambda3 W^T T Y."""
    return classifier @ labels_onehot + lambda3 * (
        projection.T @ (dictionary @ feats)
    )


def solve_codes(classifier, target, codes, max_sweeps=20):
    """Discrete cyclic coordinate descent over the code rows.

    Each row is set to ``sgn(target_row - coupling)`` where the coupling
    comes from the classifier Gram matrix and the other rows; sweeps stop
    once a full pass changes nothing or after ``max_sweeps`` passes. The
    quadratic-minus-linear code objective never increases.
    """
    b = np.array(codes, dtype=np.float64, order="C", copy=True)
    gram = np.ascontiguousarray(classifier @ classifier.T)
    kernels.dcc_sweeps(b, np.ascontiguousarray(target, dtype=np.float64),
                       gram, max_sweeps)
    return b


def dcc_objective(classifier, codes, target):
    """||Q^T B||_F^2 - 2 tr(B^T O): the part of the loss the codes control."""
    return float(np.sum((classifier.T @ codes) ** 2) - 2.0 * np.sum(codes * target))


def _right_solve_gram(mat, feats, ridge):
    """``mat @ inv(Y Y^T + alpha I)`` with alpha = ridge * mean diag(Y Y^T).

    When the feature dimension exceeds the sample count the inverse is
    applied through the matrix-inversion identity on the (n, n) system,
    so the (dim, dim) Gram matrix is never formed.
    """
    dim, n = feats.shape
    alpha = ridge * float(np.sum(feats * feats)) / dim if ridge else 0.0
    if alpha == 0.0 and dim > n:
        raise NumericError(
            "feature Gram matrix is singular (feature dim exceeds sample "
            "count); a positive ridge is required"
        )
    try:
        if dim <= n:
            gram = _stabilized(feats @ feats.T, ridge)
            return np.linalg.solve(gram, mat.T).T
        small = feats.T @ feats + alpha * np.eye(n)
        w = np.linalg.solve(small, (mat @ feats).T)
        return (mat - w.T @ feats.T) / alpha
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"feature Gram solve failed: {exc}") from None


def solve_dictionary(projection, codes, feats, sparse_codes, multipliers,
                     class_cols, mu, lambda3, ridge):
    """Closed-form dictionary update.

    Solves ``(mu I + 2 l3 W W^T) T (Y Y^T) = mu sum_c (T'_c + L_c/mu) Y_c^T
    + 2 l3 W B Y^T`` for T, with the feature Gram ridge-stabilized.
    """
    atoms = projection.shape[0]
    lhs = mu * np.eye(atoms) + 2.0 * lambda3 * (projection @ projection.T)
    rhs = 2.0 * lambda3 * (projection @ codes @ feats.T)
    for c, cols in enumerate(class_cols):
        rhs += mu * (sparse_codes[c] + multipliers[c] / mu) @ feats[:, cols].T
    mid = np.linalg.solve(lhs, rhs)
    out = _right_solve_gram(mid, feats, ridge)
    return _check_finite(out, "dictionary solve")


def shrink_rows(mat, threshold):
    """Row-wise group shrinkage: scale each row by max(|row|-t, 0)/|row|.

    Rows with norm <= ``threshold`` become exactly zero, including the
    vanishing-norm case.
    """
    norms = np.sqrt(np.sum(mat * mat, axis=1))
    scale = np.zeros_like(norms)
    big = norms > threshold
    scale[big] = (norms[big] - threshold) / norms[big]
    return mat * scale[:, None]


def solve_sparse_codes(dictionary, feats_c, multiplier_c, mu, lambda2):
    """Proximal update of one class's auxiliary: shrink rows of T Y_c - L_c/mu."""
    u = dictionary @ feats_c - multiplier_c / mu
    return shrink_rows(u, lambda2 / mu)


def objective(state, feats, labels_onehot, params, class_cols=None):
    """The full relaxed training objective at the current state."""
    if class_cols is None:
        labels = np.argmax(labels_onehot, axis=0) + 1
        class_cols = class_columns(labels, labels_onehot.shape[0])
    q, b = state.classifier, state.codes
    fit = float(np.sum((labels_onehot - q.T @ b) ** 2))
    reg = params.lambda1 * float(np.sum(q * q))
    code_fit = params.lambda3 * float(
        np.sum((b - state.projection.T @ (state.dictionary @ feats)) ** 2)
    )
    aug = 0.0
    for c, cols in enumerate(class_cols):
        tp = state.sparse_codes[c]
        aug += params.lambda2 * float(np.sum(np.sqrt(np.sum(tp * tp, axis=1))))
        gap = tp - state.dictionary @ feats[:, cols] + state.multipliers[c] / state.mu
        aug += 0.5 * state.mu * float(np.sum(gap * gap))
    return fit + reg + code_fit + aug


def train(feats, labels, params, class_count=None):
    """Run the full alternation until the codes settle.

    Parameters
    ----------
    feats : ndarray, shape (feature_dim, n)
        Power-normalized descriptors, one column per training sequence.
    labels : sequence of int
        1-based class labels, one per column.
    params : SolverParams
    class_count : int, optional
        Total classes (defaults to ``max(labels)``).

    Returns
    -------
    SolverState
        Final variables; ``codes`` entries are +/-1. Convergence is
        declared when the fraction of code bits flipped by an iteration
        drops below ``params.tol``. The projection is re-solved once
        after the loop: the update order computes it before the
        dictionary moves, so without the refresh it would be returned
        one dictionary update stale, which breaks test-time encoding.
    """
    feats = np.ascontiguousarray(feats, dtype=np.float64)
    if feats.ndim != 2:
        raise DataError("feature matrix must be 2-d (dim, samples)")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != feats.shape[1]:
        raise DataError("one label per feature column required")
    classes = int(class_count or labels.max())
    lbl = one_hot(labels, classes)
    cols = class_columns(labels, classes)
    dim, n = feats.shape

    rng = np.random.default_rng(params.seed)
    state = SolverState(
        projection=np.zeros((params.atoms, params.code_length)),
        classifier=rng.random((params.code_length, classes)),
        dictionary=rng.random((params.atoms, dim)),
        codes=np.asarray(rng.integers(0, 2, size=(params.code_length, n)) * 2 - 1,
                         dtype=np.float64),
        sparse_codes=[rng.random((params.atoms, c.size)) for c in cols],
        multipliers=[np.zeros((params.atoms, c.size)) for c in cols],
        mu=params.mu0,
    )

    for iteration in range(1, params.max_iter + 1):
        state.projection = solve_projection(state.dictionary, feats, state.codes,
                                            params.ridge)
        state.classifier = solve_classifier(state.codes, lbl, params.lambda1)
        target = code_target(state.classifier, lbl, params.lambda3,
                             state.projection, state.dictionary, feats)
        previous = state.codes
        state.codes = solve_codes(state.classifier, target, previous)
        state.dictionary = solve_dictionary(
            state.projection, state.codes, feats, state.sparse_codes,
            state.multipliers, cols, state.mu, params.lambda3, params.ridge,
        )
        for c in range(classes):
            state.sparse_codes[c] = solve_sparse_codes(
                state.dictionary, feats[:, cols[c]], state.multipliers[c],
                state.mu, params.lambda2,
            )
        state.iterations = iteration
        flipped = float(np.mean(state.codes != previous))
        state.flip_trace.append(flipped)
        state.objective_trace.append(objective(state, feats, lbl, params, cols))
        for c in range(classes):
            state.multipliers[c] = state.multipliers[c] + state.mu * (
                state.sparse_codes[c] - state.dictionary @ feats[:, cols[c]]
            )
        state.mu = min(params.rho * state.mu, params.mu_max)
        if flipped < params.tol:
            break
    state.projection = solve_projection(state.dictionary, feats, state.codes,
                                        params.ridge)
    return state
