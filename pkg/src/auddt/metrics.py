"""Detection metrics: ROC curve, AUC, EER, and fixed-threshold confusion stats.

The positive class is spoof throughout. A score is the probability that a
clip is spoof, and a clip is predicted spoof iff score >= threshold (ties go
to spoof). EER is read off the ROC with linear interpolation between adjacent
operating points; AUC is the exact rank statistic with ties half-credited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import EmptyInputError, OneClassError

BONAFIDE = "bonafide"
SPOOF = "spoof"
LABELS = (BONAFIDE, SPOOF)


def _as_bool_labels(labels: Sequence) -> np.ndarray:
    """Map bonafide/spoof labels (strings or bools) to a spoof-mask array."""
    arr = np.asarray(labels)
    if arr.dtype == bool:
        return arr
    mask = np.zeros(arr.shape, dtype=bool)
    for i, lab in enumerate(arr):
        if lab == SPOOF:
            mask[i] = True
        elif lab != BONAFIDE:
            raise ValueError(f"unknown label {lab!r}, expected one of {LABELS}")
    return mask


@dataclass(frozen=True)
class LabeledScores:
    """Parallel score/label vectors; scores in [0, 1], spoof is positive."""

    scores: np.ndarray
    is_spoof: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        is_spoof = np.asarray(self.is_spoof, dtype=bool)
        if scores.ndim != 1 or is_spoof.ndim != 1:
            raise ValueError("scores and labels must be 1-D")
        if scores.shape != is_spoof.shape:
            raise ValueError("scores and labels must have equal length")
        if scores.size == 0:
            raise EmptyInputError("no samples")
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores must be finite")
        if scores.min() < 0.0 or scores.max() > 1.0:
            raise ValueError("scores must lie in [0, 1]")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "is_spoof", is_spoof)

    @classmethod
    def from_labels(cls, scores: Sequence[float], labels: Sequence[str]) -> "LabeledScores":
        return cls(np.asarray(scores, dtype=np.float64), _as_bool_labels(labels))

    @property
    def n_spoof(self) -> int:
        return int(self.is_spoof.sum())

    @property
    def n_bonafide(self) -> int:
        return int((~self.is_spoof).sum())


class RocPoint(NamedTuple):
    threshold: float
    fpr: float
    tpr: float


@dataclass(frozen=True)
class RocCurve:
    """Operating points at strictly decreasing thresholds, (0,0) to (1,1)."""

    points: tuple[RocPoint, ...]


def _require_two_classes(data: LabeledScores) -> None:
    if data.n_spoof == 0 or data.n_bonafide == 0:
        raise OneClassError(
            f"need both classes, got {data.n_spoof} spoof / {data.n_bonafide} bonafide"
        )


def roc_curve(data: LabeledScores) -> RocCurve:
    """ROC with one point per distinct score plus an all-reject anchor.

    The anchor carries threshold +inf and sits at (FPR, TPR) = (0, 0); the
    lowest distinct score predicts everything spoof and lands on (1, 1).
    """
    _require_two_classes(data)
    order = np.argsort(-data.scores, kind="stable")
    s = data.scores[order]
    y = data.is_spoof[order]
    last_of_value = np.r_[np.diff(s) != 0.0, True]
    tps = np.cumsum(y)[last_of_value]
    fps = np.cumsum(~y)[last_of_value]
    thresholds = s[last_of_value]
    tpr = tps / data.n_spoof
    fpr = fps / data.n_bonafide
    points = [RocPoint(math.inf, 0.0, 0.0)]
    points.extend(
        RocPoint(float(t), float(fp), float(tp))
        for t, fp, tp in zip(thresholds, fpr, tpr)
    )
    return RocCurve(tuple(points))


def auc(data: LabeledScores) -> float:
    """Probability a random spoof outscores a random bonafide, ties at 1/2.

    Computed exactly via tie-averaged ranks (Mann-Whitney statistic).
    """
    _require_two_classes(data)
    s = data.scores
    order = np.argsort(s, kind="stable")
    sorted_s = s[order]
    ranks = np.empty(s.size, dtype=np.float64)
    # average 1-based rank within each tie group
    boundaries = np.flatnonzero(np.r_[True, np.diff(sorted_s) != 0.0, True])
    for lo, hi in zip(boundaries[:-1], boundaries[1:]):
        ranks[order[lo:hi]] = 0.5 * (lo + 1 + hi)
    n_s = data.n_spoof
    n_b = data.n_bonafide
    u = ranks[data.is_spoof].sum() - n_s * (n_s + 1) / 2.0
    return float(u / (n_s * n_b))


def eer(data: LabeledScores) -> tuple[float, float]:
    """Equal error rate and its threshold, linearly interpolated on the ROC.

    FNR = 1 - TPR; FPR - FNR is nondecreasing along the curve, so there is a
    unique crossing. When it falls between adjacent points, both rates and
    the threshold are interpolated along the segment. The +inf anchor is
    treated as max score + 1 for threshold interpolation.
    """
    curve = roc_curve(data)
    pts = curve.points
    fpr = np.array([p.fpr for p in pts])
    fnr = 1.0 - np.array([p.tpr for p in pts])
    thr = np.array([p.threshold for p in pts])
    thr[0] = pts[1].threshold + 1.0
    diff = fpr - fnr
    i = int(np.argmax(diff >= 0.0))  # first index with FPR >= FNR; i >= 1
    d_lo, d_hi = diff[i - 1], diff[i]
    alpha = -d_lo / (d_hi - d_lo)  # d_lo < 0 <= d_hi since i is the first crossing
    rate = fpr[i - 1] + alpha * (fpr[i] - fpr[i - 1])
    threshold = thr[i - 1] + alpha * (thr[i] - thr[i - 1])
    return float(rate), float(threshold)


class ConfusionCounts(NamedTuple):
    tp: int
    fp: int
    tn: int
    fn: int


class ConfusionStats(NamedTuple):
    accuracy: float
    tpr: Optional[float]
    tnr: Optional[float]
    counts: ConfusionCounts


def confusion_at_threshold(data: LabeledScores, threshold: float) -> ConfusionStats:
    """Binary metrics at a fixed threshold; one-class inputs degrade cleanly.

    TPR is None when there are no spoof samples, TNR when no bonafide.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    predicted_spoof = data.scores >= threshold
    tp = int(np.sum(predicted_spoof & data.is_spoof))
    fp = int(np.sum(predicted_spoof & ~data.is_spoof))
    fn = int(np.sum(~predicted_spoof & data.is_spoof))
    tn = int(np.sum(~predicted_spoof & ~data.is_spoof))
    n_s = tp + fn
    n_b = tn + fp
    accuracy = (tp + tn) / (n_s + n_b)
    tpr = tp / n_s if n_s else None
    tnr = tn / n_b if n_b else None
    return ConfusionStats(accuracy, tpr, tnr, ConfusionCounts(tp, fp, tn, fn))


@dataclass
class MetricsReport:
    """Per-dataset metric bundle; threshold-free metrics need both classes."""

    dataset_id: str
    n_bonafide: int
    n_spoof: int
    threshold_used: float
    eer: Optional[float] = None
    eer_threshold: Optional[float] = None
    auc: Optional[float] = None
    accuracy: Optional[float] = None
    tpr: Optional[float] = None
    tnr: Optional[float] = None
    skipped_files: int = 0

    _FIELDS = (
        "dataset_id", "n_bonafide", "n_spoof", "threshold_used",
        "eer", "eer_threshold", "auc", "accuracy", "tpr", "tnr",
        "skipped_files",
    )

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self._FIELDS}

    @classmethod
    def from_dict(cls, payload: dict) -> "MetricsReport":
        return cls(**{name: payload[name] for name in cls._FIELDS})


def compute_report(
    dataset_id: str,
    data: LabeledScores,
    threshold: float = 0.5,
    skipped_files: int = 0,
) -> MetricsReport:
    """Evaluate one dataset's scores into a MetricsReport."""
    report = MetricsReport(
        dataset_id=dataset_id,
        n_bonafide=data.n_bonafide,
        n_spoof=data.n_spoof,
        threshold_used=threshold,
        skipped_files=skipped_files,
    )
    stats = confusion_at_threshold(data, threshold)
    report.accuracy = stats.accuracy
    report.tpr = stats.tpr
    report.tnr = stats.tnr
    if data.n_spoof > 0 and data.n_bonafide > 0:
        report.auc = auc(data)
        report.eer, report.eer_threshold = eer(data)
    return report
