"""Entropy-scaled uncertainty and accuracy-vs-coverage rejection curves.

A binary prediction's uncertainty is its entropy scaled by the maximum
attainable value (at y_hat = 0.5), giving a score in [0, 1].  Sweeping a
threshold tau over that score and keeping only samples at or below it trades
coverage for accuracy: the curve records, per tau, the fraction kept and the
accuracy over the kept samples.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .metrics import MetricsReport, ScoredSet, compute_report
from .store import atomic_write_text


@dataclass(frozen=True)
class Prediction:
    """One scored sample.

    Attributes
    ----------
    id : str
        Sample identifier.
    y_hat : float
        Probability of spoof, in [0, 1].
    unit_entropy : float
        Binary entropy of y_hat divided by its maximum, in [0, 1].
    hard_label : int
        1 if y_hat >= decision threshold at construction time, else 0.
    """

    id: str
    y_hat: float
    unit_entropy: float
    hard_label: int


@dataclass(frozen=True)
class CurvePoint:
    """One rejection operating point; accuracy is None when nothing is kept."""

    tau: float
    kept_fraction: float
    accuracy: float | None


@dataclass(frozen=True)
class RejectionCurve:
    points: tuple[CurvePoint, ...]


def unit_entropy_array(y_hat: np.ndarray) -> np.ndarray:
    """Vectorized unit-scaled binary entropy.

    Computes -(p log p + (1-p) log(1-p)) / log 2 with the convention
    0 * log 0 = 0, so the endpoints map to exactly 0.0 and p = 0.5 maps to
    exactly 1.0.

    Raises
    ------
    DataError
        If any input lies outside [0, 1] or is not finite.
    """
    p = np.asarray(y_hat, dtype=np.float64)
    if not np.all(np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise DataError("y_hat values must lie in [0, 1]")
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(p * np.log(p) + q * np.log(q)) / np.log(2.0)
    return np.where((p == 0.0) | (p == 1.0), 0.0, h)


def unit_entropy(y_hat: float) -> float:
    """Unit-scaled binary entropy of a single probability.

    Examples
    --------
    unit_entropy(0.5) == 1.0; unit_entropy(0.0) == unit_entropy(1.0) == 0.0.
    """
    return float(unit_entropy_array(np.array([y_hat]))[0])


def make_predictions(ids, y_hat, decision_threshold: float = 0.5) -> tuple[Prediction, ...]:
    """Bundle probabilities into Prediction records with uncertainties."""
    probs = np.asarray(y_hat, dtype=np.float64)
    ids = list(ids)
    if probs.ndim != 1 or len(ids) != probs.size:
        raise DataError(f"got {len(ids)} ids for {probs.size} probabilities")
    entropies = unit_entropy_array(probs)
    return tuple(
        Prediction(
            id=str(ids[i]),
            y_hat=float(probs[i]),
            unit_entropy=float(entropies[i]),
            hard_label=int(probs[i] >= decision_threshold),
        )
        for i in range(probs.size)
    )


def rejection_curve(
    predictions,
    labels,
    step: float = 0.01,
    decision_threshold: float = 0.5,
) -> RejectionCurve:
    """Sweep tau from 0 to 1 in the given step, keeping unit_entropy <= tau.

    Parameters
    ----------
    predictions : sequence of Prediction
    labels : sequence of int
        Ground truth aligned with predictions (1 = spoof).
    step : float
        Grid spacing; must divide 1 evenly.  The default 0.01 yields 101
        points with taus 0.00, 0.01, ..., 1.00.
    decision_threshold : float
        Probability cut used for the accuracy of the kept samples.

    Returns
    -------
    RejectionCurve
        Per tau: kept fraction and accuracy over kept samples (None when the
        kept set is empty).
    """
    preds = tuple(predictions)
    y = np.asarray(labels, dtype=np.int64)
    if y.ndim != 1 or len(preds) != y.size or y.size < 1:
        raise DataError(f"got {len(preds)} predictions for {y.size} labels")
    steps = round(1.0 / step) if step > 0 else 0
    if steps < 1 or abs(steps * step - 1.0) > 1e-9:
        raise DataError(f"step must divide 1 evenly, got {step}")
    entropies = np.array([p.unit_entropy for p in preds], dtype=np.float64)
    probs = np.array([p.y_hat for p in preds], dtype=np.float64)
    correct = (probs >= decision_threshold) == (y == 1)
    n = y.size
    taus = np.arange(steps + 1) / steps
    points = []
    for tau in taus:
        kept = entropies <= tau
        k = int(np.sum(kept))
        points.append(
            CurvePoint(
                tau=float(tau),
                kept_fraction=k / n,
                accuracy=float(np.mean(correct[kept])) if k > 0 else None,
            )
        )
    return RejectionCurve(points=tuple(points))


def evaluate_all(
    predictions,
    labels,
    n_bins: int = 15,
    step: float = 0.01,
    decision_threshold: float = 0.5,
) -> tuple[MetricsReport, RejectionCurve]:
    """Metrics report and rejection curve from one aligned prediction set."""
    preds = tuple(predictions)
    scored = ScoredSet(scores=[p.y_hat for p in preds], labels=labels)
    report = compute_report(scored, n_bins=n_bins, decision_threshold=decision_threshold)
    curve = rejection_curve(preds, labels, step=step, decision_threshold=decision_threshold)
    return report, curve


def write_rejection_csv(curve: RejectionCurve, path: str | Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tau", "kept_fraction", "accuracy"])
    for p in curve.points:
        writer.writerow(
            [
                repr(p.tau),
                repr(p.kept_fraction),
                "" if p.accuracy is None else repr(p.accuracy),
            ]
        )
    atomic_write_text(path, buf.getvalue())


def read_rejection_csv(path: str | Path) -> RejectionCurve:
    points = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            points.append(
                CurvePoint(
                    tau=float(row["tau"]),
                    kept_fraction=float(row["kept_fraction"]),
                    accuracy=float(row["accuracy"]) if row["accuracy"] else None,
                )
            )
    return RejectionCurve(points=tuple(points))


def write_scores_csv(predictions, labels, path: str | Path) -> None:
    """Per-sample scores file: id, y_hat, unit_entropy, label."""
    preds = tuple(predictions)
    y = np.asarray(labels, dtype=np.int64)
    if len(preds) != y.size:
        raise DataError(f"got {len(preds)} predictions for {y.size} labels")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "y_hat", "unit_entropy", "label"])
    for p, label in zip(preds, y):
        writer.writerow([p.id, repr(p.y_hat), repr(p.unit_entropy), int(label)])
    atomic_write_text(path, buf.getvalue())


def read_scores_csv(path: str | Path) -> tuple[tuple[Prediction, ...], np.ndarray]:
    """Inverse of write_scores_csv; hard labels are rebuilt at threshold 0.5."""
    preds = []
    labels = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            y_hat = float(row["y_hat"])
            preds.append(
                Prediction(
                    id=row["id"],
                    y_hat=y_hat,
                    unit_entropy=float(row["unit_entropy"]),
                    hard_label=int(y_hat >= 0.5),
                )
            )
            labels.append(int(row["label"]))
    return tuple(preds), np.asarray(labels, dtype=np.int64)
