"""Utility, cost, and robustness metrics for classifier evaluation.

Confidence here means the predicted probability of the true class for a
correctly classified sample. Three statistics of it are computed: the mean
(AC), its population standard deviation (CD), and the population standard
deviation of the per-class means (CDAC, an imbalance signal). Loss
difference (test minus train) flags over-fitting, and best_iteration locates
the cheapest point of peak accuracy in a training trace.

Tie handling is deterministic everywhere: the predicted class is the lowest
index among maxima, and top-k membership sorts by probability descending
then class index ascending. Standard deviations divide by N (no Bessel
correction), so a single sample gives 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class NoCorrectSamples(ValueError):
    """No sample was classified correctly; confidence metrics are undefined."""


class InsufficientClasses(ValueError):
    """Fewer than two classes have a correctly classified sample."""


@dataclass(frozen=True, eq=False)
class PredictionBatch:
    """Per-sample class probabilities plus ground-truth labels."""

    probs: np.ndarray  # (n, C), rows sum to 1
    labels: np.ndarray  # (n,), ints in [0, C)

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "labels", labels)
        if probs.ndim != 2 or probs.shape[0] < 1 or probs.shape[1] < 2:
            raise ValueError(f"probs must be (n>=1, C>=2), got {probs.shape}")
        if labels.shape != (probs.shape[0],):
            raise ValueError("labels must be one index per row of probs")
        if labels.min() < 0 or labels.max() >= probs.shape[1]:
            raise ValueError("labels must lie in [0, C)")
        if probs.min() < -1e-12 or probs.max() > 1.0 + 1e-12:
            raise ValueError("probabilities must lie in [0, 1]")
        if np.abs(probs.sum(axis=1) - 1.0).max() > 1e-9:
            raise ValueError("probability rows must sum to 1 within 1e-9")

    @property
    def n_samples(self) -> int:
        return self.probs.shape[0]

    @property
    def n_classes(self) -> int:
        return self.probs.shape[1]

    def predicted(self) -> np.ndarray:
        """Predicted class per sample; ties resolve to the lowest index."""
        return np.argmax(self.probs, axis=1)

    def correct_mask(self) -> np.ndarray:
        return self.predicted() == self.labels


def top_k_accuracy(batch: PredictionBatch, k: int) -> float:
    """Percent of samples whose true label is among the k most probable classes."""
    if not (1 <= k <= batch.n_classes):
        raise ValueError(f"k must be in [1, {batch.n_classes}], got {k}")
    # Stable argsort on -probs: probability descending, class index ascending.
    order = np.argsort(-batch.probs, axis=1, kind="stable")[:, :k]
    hits = (order == batch.labels[:, None]).any(axis=1)
    return float(100.0 * hits.sum() / batch.n_samples)


def _correct_confidences(batch: PredictionBatch) -> np.ndarray:
    mask = batch.correct_mask()
    if not mask.any():
        raise NoCorrectSamples("no correctly classified samples")
    idx = np.nonzero(mask)[0]
    return batch.probs[idx, batch.labels[idx]]


def average_confidence(batch: PredictionBatch) -> float:
    """Mean true-class probability over the correctly classified samples."""
    return float(_correct_confidences(batch).mean())


def confidence_deviation(batch: PredictionBatch) -> float:
    """Population std of the true-class probabilities of correct samples."""
    return float(_correct_confidences(batch).std(ddof=0))


def per_class_average_confidence(batch: PredictionBatch) -> np.ndarray:
    """Mean confidence of correct samples per true class; NaN where a class
    has no correct sample (those classes are excluded from CDAC)."""
    mask = batch.correct_mask()
    out = np.full(batch.n_classes, np.nan)
    for c in range(batch.n_classes):
        sel = mask & (batch.labels == c)
        if sel.any():
            out[c] = batch.probs[sel, c].mean()
    return out


def confidence_deviation_across_classes(batch: PredictionBatch) -> float:
    """Population std across classes of the per-class average confidence."""
    per_class = per_class_average_confidence(batch)
    present = per_class[~np.isnan(per_class)]
    if present.size < 2:
        raise InsufficientClasses(
            "CDAC needs correctly classified samples in at least two classes"
        )
    return float(present.std(ddof=0))


@dataclass(frozen=True)
class LossPair:
    train_loss: float
    test_loss: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.train_loss) and np.isfinite(self.test_loss)):
            raise ValueError("losses must be finite")


def loss_difference(pair: LossPair) -> float:
    """test_loss - train_loss; positive values indicate over-fitting."""
    return pair.test_loss - pair.train_loss


def best_iteration(trace) -> tuple[int, float]:
    """(iteration, top1) of the highest accuracy; earliest iteration on ties.

    Accepts a TrainTrace or any sequence of points with .iteration and .top1.
    """
    points: Sequence = getattr(trace, "points", trace)
    if len(points) == 0:
        raise ValueError("trace is empty")
    best = points[0]
    for point in points[1:]:
        if point.top1 > best.top1:
            best = point
    return best.iteration, best.top1


METRIC_REPORT_HEADER = "top1,top5,ac,cd,cdac,ld,best_iter,param_count"


@dataclass(frozen=True)
class MetricReport:
    """The eight evaluation metrics of one completed training trial."""

    top1: float
    top5: float
    ac: float
    cd: float
    cdac: float
    ld: float
    best_iter: int
    param_count: int

    def __post_init__(self) -> None:
        if np.isfinite(self.top1) and np.isfinite(self.top5):
            if not (0.0 <= self.top1 <= self.top5 <= 100.0):
                raise ValueError("need 0 <= top1 <= top5 <= 100")
        if np.isfinite(self.ac) and not (0.0 <= self.ac <= 1.0):
            raise ValueError("ac must be in [0, 1]")
        if (np.isfinite(self.cd) and self.cd < 0) or (
            np.isfinite(self.cdac) and self.cdac < 0
        ):
            raise ValueError("cd and cdac must be >= 0")

    def to_csv_row(self) -> str:
        return (
            f"{self.top1!r},{self.top5!r},{self.ac!r},{self.cd!r},"
            f"{self.cdac!r},{self.ld!r},{self.best_iter},{self.param_count}"
        )

    @classmethod
    def from_csv_row(cls, row: str) -> "MetricReport":
        parts = row.strip().split(",")
        if len(parts) != 8:
            raise ValueError(f"expected 8 fields, got {len(parts)}")
        return cls(
            top1=float(parts[0]),
            top5=float(parts[1]),
            ac=float(parts[2]),
            cd=float(parts[3]),
            cdac=float(parts[4]),
            ld=float(parts[5]),
            best_iter=int(parts[6]),
            param_count=int(parts[7]),
        )

    def to_dict(self) -> dict:
        return {
            "top1": self.top1,
            "top5": self.top5,
            "ac": self.ac,
            "cd": self.cd,
            "cdac": self.cdac,
            "ld": self.ld,
            "best_iter": self.best_iter,
            "param_count": self.param_count,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "MetricReport":
        return cls(**{k: record[k] for k in (
            "top1", "top5", "ac", "cd", "cdac", "ld", "best_iter", "param_count"
        )})
