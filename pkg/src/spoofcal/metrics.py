"""EER, ECE, accuracy, and reliability-diagram statistics.

Scores throughout are fakeness scores: larger means more likely spoof, and a
sample is called spoof when score >= threshold (inclusive).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .store import atomic_write_text


@dataclass(frozen=True)
class ScoredSet:
    """Per-sample probabilities of spoof with ground-truth labels."""

    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if scores.ndim != 1 or labels.ndim != 1 or scores.shape != labels.shape:
            raise DataError(
                f"scores and labels must be equal-length vectors, got {scores.shape} and {labels.shape}"
            )
        if scores.size < 1:
            raise DataError("need at least one sample")
        if not np.all(np.isfinite(scores)):
            raise DataError("scores contain NaN or infinite values")
        if np.any(scores < 0.0) or np.any(scores > 1.0):
            raise DataError("scores must lie in [0, 1]")
        if not np.all((labels == 0) | (labels == 1)):
            raise DataError("labels must be 0 or 1")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.scores.size


@dataclass(frozen=True)
class BinStat:
    """One reliability-diagram bin; mean_pred/frac_spoof are None when empty."""

    lo: float
    hi: float
    count: int
    mean_pred: float | None
    frac_spoof: float | None


@dataclass(frozen=True)
class MetricsReport:
    eer: float
    eer_threshold: float
    ece: float
    accuracy: float
    n: int
    bins: tuple[BinStat, ...]


def eer(scores, labels) -> tuple[float, float]:
    """Equal error rate and its operating threshold.

    Sweeps thresholds over {-inf} | distinct scores | {+inf} with the decision
    "spoof iff score >= t" and returns (FPR + FNR) / 2 at the threshold
    minimizing |FPR - FNR|; ties prefer smaller (FPR + FNR) / 2, then the
    smaller threshold.  Scores may be arbitrary finite reals (the sweep is
    order-based), so monotone rescalings leave the result unchanged.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if s.ndim != 1 or s.shape != y.shape or s.size < 1:
        raise DataError("scores and labels must be equal-length non-empty vectors")
    if not np.all(np.isfinite(s)):
        raise DataError("scores contain NaN or infinite values")
    spoof = np.sort(s[y == 1])
    bona = np.sort(s[y == 0])
    if len(spoof) == 0 or len(bona) == 0:
        raise DataError("EER needs at least one sample of each class")
    cand = np.concatenate(([-np.inf], np.unique(s), [np.inf]))
    # spoof scores strictly below t are misses; bonafide scores >= t are false alarms
    fnr = np.searchsorted(spoof, cand, side="left") / len(spoof)
    fpr = (len(bona) - np.searchsorted(bona, cand, side="left")) / len(bona)
    gap = np.abs(fpr - fnr)
    half = (fpr + fnr) / 2.0
    best = np.lexsort((cand, half, gap))[0]
    return float(half[best]), float(cand[best])


def ece(scores, labels, n_bins: int = 15) -> tuple[float, tuple[BinStat, ...]]:
    """Expected calibration error over equal-width score bins.

    Bins are [k/n_bins, (k+1)/n_bins) with the last bin closed at 1.0.  The
    result is sum over non-empty bins of (count/N) * |mean_pred - frac_spoof|.
    Per-bin sums accumulate in sample order (np.bincount is a sequential
    loop), so a per-sample reimplementation reproduces the value bit-exactly.
    """
    if n_bins < 1:
        raise DataError(f"n_bins must be >= 1, got {n_bins}")
    ss = ScoredSet(scores=scores, labels=labels)
    s, y = ss.scores, ss.labels
    n = len(ss)
    edges = np.arange(n_bins + 1) / n_bins
    idx = np.searchsorted(edges, s, side="right") - 1
    idx[idx == n_bins] = n_bins - 1  # scores exactly 1.0 belong to the last bin
    count = np.bincount(idx, minlength=n_bins)
    sum_pred = np.bincount(idx, weights=s, minlength=n_bins)
    sum_spoof = np.bincount(idx, weights=y.astype(np.float64), minlength=n_bins)
    total = 0.0
    bins = []
    for k in range(n_bins):
        c = int(count[k])
        if c > 0:
            mean_pred = float(sum_pred[k]) / c
            frac_spoof = float(sum_spoof[k]) / c
            total += (c / n) * abs(mean_pred - frac_spoof)
        else:
            mean_pred = None
            frac_spoof = None
        bins.append(
            BinStat(
                lo=float(edges[k]),
                hi=float(edges[k + 1]),
                count=c,
                mean_pred=mean_pred,
                frac_spoof=frac_spoof,
            )
        )
    return total, tuple(bins)


def accuracy(scores, labels, decision_threshold: float = 0.5) -> float:
    """Fraction of samples whose thresholded decision matches the label."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if s.ndim != 1 or s.shape != y.shape or s.size < 1:
        raise DataError("scores and labels must be equal-length non-empty vectors")
    predicted = s >= decision_threshold
    return float(np.mean(predicted == (y == 1)))


def compute_report(
    scored: ScoredSet, n_bins: int = 15, decision_threshold: float = 0.5
) -> MetricsReport:
    eer_value, threshold = eer(scored.scores, scored.labels)
    ece_value, bins = ece(scored.scores, scored.labels, n_bins=n_bins)
    acc = accuracy(scored.scores, scored.labels, decision_threshold)
    return MetricsReport(
        eer=eer_value,
        eer_threshold=threshold,
        ece=ece_value,
        accuracy=acc,
        n=len(scored),
        bins=bins,
    )


def report_to_dict(report: MetricsReport) -> dict:
    return {
        "eer": report.eer,
        "eer_threshold": report.eer_threshold,
        "ece": report.ece,
        "accuracy": report.accuracy,
        "n": report.n,
        "bins": [
            {
                "lo": b.lo,
                "hi": b.hi,
                "count": b.count,
                "mean_pred": b.mean_pred,
                "frac_spoof": b.frac_spoof,
            }
            for b in report.bins
        ],
    }


def report_from_dict(payload: dict) -> MetricsReport:
    try:
        bins = tuple(
            BinStat(
                lo=float(b["lo"]),
                hi=float(b["hi"]),
                count=int(b["count"]),
                mean_pred=None if b["mean_pred"] is None else float(b["mean_pred"]),
                frac_spoof=None if b["frac_spoof"] is None else float(b["frac_spoof"]),
            )
            for b in payload["bins"]
        )
        return MetricsReport(
            eer=float(payload["eer"]),
            eer_threshold=float(payload["eer_threshold"]),
            ece=float(payload["ece"]),
            accuracy=float(payload["accuracy"]),
            n=int(payload["n"]),
            bins=bins,
        )
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed metrics report: {exc}") from None


def write_metrics_report(report: MetricsReport, path: str | Path) -> None:
    atomic_write_text(path, json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n")


def read_metrics_report(path: str | Path) -> MetricsReport:
    return report_from_dict(json.loads(Path(path).read_text("utf-8")))


def write_bins_csv(bins, path: str | Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lo", "hi", "count", "mean_pred", "frac_spoof"])
    for b in bins:
        writer.writerow(
            [
                repr(b.lo),
                repr(b.hi),
                b.count,
                "" if b.mean_pred is None else repr(b.mean_pred),
                "" if b.frac_spoof is None else repr(b.frac_spoof),
            ]
        )
    atomic_write_text(path, buf.getvalue())


def read_bins_csv(path: str | Path) -> tuple[BinStat, ...]:
    bins = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            bins.append(
                BinStat(
                    lo=float(row["lo"]),
                    hi=float(row["hi"]),
                    count=int(row["count"]),
                    mean_pred=float(row["mean_pred"]) if row["mean_pred"] else None,
                    frac_spoof=float(row["frac_spoof"]) if row["frac_spoof"] else None,
                )
            )
    return tuple(bins)
