"""Evaluation protocols, metrics reports, and the phase-timing benchmark."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .classify import encode, hamming_nn, predict
from .codebook import aggregate, power_normalize
from .errors import ConfigError
from .offsets import sequence_features
from .pipeline import fit

# Per-fold seeds are spread out so fold trainings never share streams.
FOLD_SEED_STRIDE = 104729


def split_cross_subject(dataset, train_subjects=None, split_by="subject"):
    """Train/test index split.

    ``subject`` mode keeps the listed subjects (default: odd ids) for
    training and tests on the rest. ``class-half`` trains on the lower
    half of the action classes, the literal reading of the ambiguous
    protocol phrasing; it is provided for comparability, not accuracy.
    """
    if split_by == "class-half":
        cutoff = (dataset.class_count + 1) // 2
        train = [i for i, s in enumerate(dataset.sequences) if s.label <= cutoff]
        test = [i for i, s in enumerate(dataset.sequences) if s.label > cutoff]
    else:
        subjects = dataset.subjects()
        chosen = set(train_subjects) if train_subjects else \
            {s for s in subjects if s % 2 == 1}
        unknown = chosen - set(subjects)
        if unknown:
            raise ConfigError(f"train subjects {sorted(unknown)} not in dataset")
        train = [i for i, s in enumerate(dataset.sequences)
                 if s.subject in chosen]
        test = [i for i, s in enumerate(dataset.sequences)
                if s.subject not in chosen]
    if not train or not test:
        raise ConfigError("cross-subject split left an empty train or test set")
    return train, test


def loso_folds(dataset):
    """Leave-one-subject-out folds: (held-out subject, train idx, test idx)."""
    subjects = dataset.subjects()
    if len(subjects) < 2:
        raise ConfigError(
            "leave-one-subject-out needs at least two subjects, "
            f"found {len(subjects)}"
        )
    folds = []
    for subject in subjects:
        test = [i for i, s in enumerate(dataset.sequences) if s.subject == subject]
        train = [i for i, s in enumerate(dataset.sequences) if s.subject != subject]
        folds.append((subject, train, test))
    return folds


def confusion_matrix(true_labels, predicted, class_count):
    out = np.zeros((class_count, class_count), dtype=np.int64)
    for t, p in zip(true_labels, predicted):
        out[t - 1, p - 1] += 1
    return out


@dataclass
class MetricsReport:
    """Accuracy, confusion matrix, and per-class breakdown of one run."""

    protocol: str
    confusion: np.ndarray
    class_names: tuple[str, ...] | None = None
    folds: list = field(default_factory=list)
    detail: str = ""

    @property
    def total(self):
        return int(self.confusion.sum())

    @property
    def correct(self):
        return int(np.trace(self.confusion))

    @property
    def accuracy(self):
        return 100.0 * self.correct / self.total

    def per_class(self):
        """(label, correct, count, percent-or-None) per class."""
        rows = []
        for c in range(self.confusion.shape[0]):
            count = int(self.confusion[c].sum())
            correct = int(self.confusion[c, c])
            pct = 100.0 * correct / count if count else None
            rows.append((c + 1, correct, count, pct))
        return rows

    def _class_label(self, c):
        if self.class_names and c - 1 < len(self.class_names):
            return f"{c} {self.class_names[c - 1]}"
        return str(c)

    def to_text(self):
        lines = [f"protocol: {self.protocol}"]
        if self.detail:
            lines.append(self.detail)
        lines.append(
            f"accuracy: {self.accuracy:.2f}%  ({self.correct}/{self.total})"
        )
        if self.folds:
            mean = np.mean([f['accuracy'] for f in self.folds])
            lines.append(f"mean fold accuracy: {mean:.2f}%")
            for f in self.folds:
                lines.append(
                    f"  fold subject {f['subject']}: {f['accuracy']:.2f}% "
                    f"({f['correct']}/{f['total']})"
                )
        lines.append("per-class accuracy:")
        for c, correct, count, pct in self.per_class():
            shown = f"{pct:.2f}%" if pct is not None else "n/a"
            lines.append(f"  {self._class_label(c):<16} {shown:>8} "
                         f"({correct}/{count})")
        lines.append("confusion matrix (rows = true, cols = predicted):")
        for row in self.confusion:
            lines.append("  " + " ".join(f"{v:4d}" for v in row))
        return "\n".join(lines)

    def to_json_dict(self):
        out = {
            "protocol": self.protocol,
            "accuracy": self.accuracy,
            "correct": self.correct,
            "total": self.total,
            "confusion": self.confusion.tolist(),
            "per_class": [
                {"label": c, "correct": correct, "count": count, "accuracy": pct}
                for c, correct, count, pct in self.per_class()
            ],
        }
        if self.folds:
            out["folds"] = self.folds
            out["mean_fold_accuracy"] = float(
                np.mean([f["accuracy"] for f in self.folds])
            )
        return out


def evaluate_split(model, dataset, test_idx):
    true_labels = []
    predicted = []
    for i in test_idx:
        seq = dataset.sequences[i]
        true_labels.append(seq.label)
        predicted.append(predict(seq, model))
    return confusion_matrix(true_labels, predicted, dataset.class_count)


def run_protocol(dataset, config, model=None):
    """Run the configured protocol; returns a MetricsReport.

    Cross-subject: train once (or use ``model``), test the held-out
    subjects. Leave-one-subject-out: retrain per fold (codebooks
    included) with a fold-derived seed, pool the confusion matrix, and
    report per-fold accuracies.
    """
    if config.protocol == "cross-subject":
        train_idx, test_idx = split_cross_subject(
            dataset, config.train_subjects, config.split_by
        )
        if model is None:
            model, _ = fit(dataset.subset(train_idx), config)
        confusion = evaluate_split(model, dataset, test_idx)
        detail = (f"split: {config.split_by}, train={len(train_idx)} "
                  f"test={len(test_idx)} sequences")
        return MetricsReport(config.protocol, confusion,
                             dataset.class_names, detail=detail)
    if model is not None:
        raise ConfigError(
            "leave-one-subject-out retrains per fold; --model cannot be used"
        )
    folds = loso_folds(dataset)
    confusion = np.zeros((dataset.class_count, dataset.class_count),
                         dtype=np.int64)
    fold_rows = []
    for index, (subject, train_idx, test_idx) in enumerate(folds):
        fold_seed = config.seed + FOLD_SEED_STRIDE * (index + 1)
        fold_model, _ = fit(dataset.subset(train_idx), config, seed=fold_seed)
        fold_conf = evaluate_split(fold_model, dataset, test_idx)
        confusion += fold_conf
        fold_rows.append({
            "subject": subject,
            "correct": int(np.trace(fold_conf)),
            "total": int(fold_conf.sum()),
            "accuracy": 100.0 * np.trace(fold_conf) / fold_conf.sum(),
        })
    detail = f"{len(folds)} folds, one held-out subject each"
    return MetricsReport(config.protocol, confusion, dataset.class_names,
                         folds=fold_rows, detail=detail)


@dataclass
class TimingReport:
    """Mean per-sequence wall time of the four testing phases."""

    extraction_ms: float
    aggregation_ms: float
    hashing_ms: float
    classification_ms: float
    sequences: int
    mean_frames: float

    @property
    def total_ms(self):
        return (self.extraction_ms + self.aggregation_ms + self.hashing_ms
                + self.classification_ms)

    def to_text(self):
        lines = [
            f"sequences timed: {self.sequences} "
            f"(mean {self.mean_frames:.1f} frames)",
            "phase                 mean ms/sequence",
            f"feature extraction    {self.extraction_ms:10.3f}",
            f"feature aggregation   {self.aggregation_ms:10.3f}",
            f"hash representation   {self.hashing_ms:10.3f}",
            f"classification        {self.classification_ms:10.3f}",
            f"total                 {self.total_ms:10.3f}",
            "reference totals for this method on published runs: "
            "9.982 / 9.317 / 8.886 ms",
        ]
        return "\n".join(lines)

    def to_json_dict(self):
        return {
            "sequences": self.sequences,
            "mean_frames": self.mean_frames,
            "extraction_ms": self.extraction_ms,
            "aggregation_ms": self.aggregation_ms,
            "hashing_ms": self.hashing_ms,
            "classification_ms": self.classification_ms,
            "total_ms": self.total_ms,
        }


def benchmark_model(model, sequences, warmup=True):
    """Time the four testing phases per sequence, averaged over ``sequences``."""
    if warmup and sequences:
        predict(sequences[0], model)  # JIT warmup stays out of the timings
    phase_totals = np.zeros(4)
    frames = 0
    for seq in sequences:
        t0 = time.perf_counter()
        feats = sequence_features(seq, model.tau)
        t1 = time.perf_counter()
        descriptor = power_normalize(aggregate(feats, model.codebooks))
        t2 = time.perf_counter()
        code = encode(descriptor, model)
        t3 = time.perf_counter()
        hamming_nn(code, model)
        t4 = time.perf_counter()
        phase_totals += (t1 - t0, t2 - t1, t3 - t2, t4 - t3)
        frames += seq.frame_count
    n = max(len(sequences), 1)
    ms = 1000.0 * phase_totals / n
    return TimingReport(ms[0], ms[1], ms[2], ms[3], len(sequences), frames / n)
