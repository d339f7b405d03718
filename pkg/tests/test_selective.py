"""Unit-scaled entropy and rejection-curve behavior."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spoofcal.errors import DataError
from spoofcal.metrics import ScoredSet, compute_report
from spoofcal.selective import (
    Prediction,
    evaluate_all,
    make_predictions,
    read_rejection_csv,
    read_scores_csv,
    rejection_curve,
    unit_entropy,
    unit_entropy_array,
    write_rejection_csv,
    write_scores_csv,
)


def test_entropy_maximum_at_half():
    assert unit_entropy(0.5) == 1.0


def test_entropy_zero_at_endpoints():
    assert unit_entropy(0.0) == 0.0
    assert unit_entropy(1.0) == 0.0


def test_entropy_spot_value():
    assert abs(unit_entropy(0.9) - 0.46900) <= 1e-4
    assert unit_entropy(0.9) == pytest.approx(0.4689955935892811, abs=1e-12)


def test_entropy_domain_errors():
    with pytest.raises(DataError):
        unit_entropy(-0.01)
    with pytest.raises(DataError):
        unit_entropy(1.01)
    with pytest.raises(DataError):
        unit_entropy(float("nan"))


def test_entropy_symmetric_on_grid():
    grid = np.linspace(0.0, 1.0, 201)
    for p in grid:
        assert abs(unit_entropy(p) - unit_entropy(1.0 - p)) <= 1e-12


def test_entropy_concave_on_grid():
    grid = np.linspace(0.0, 1.0, 101)
    for a in grid[::10]:
        for b in grid[::10]:
            mid = unit_entropy((a + b) / 2.0)
            chord = (unit_entropy(a) + unit_entropy(b)) / 2.0
            assert mid >= chord - 1e-12


def test_entropy_maximal_only_at_half_and_zero_only_at_ends():
    for p in np.linspace(0.0, 1.0, 101):
        value = unit_entropy(p)
        if p not in (0.0, 1.0):
            assert value > 0.0
        if p != 0.5:
            assert value < 1.0


def test_entropy_base_invariance():
    # natural log scaled by ln 2 vs direct log2
    for p in np.linspace(0.01, 0.99, 99):
        direct = -(p * math.log2(p) + (1 - p) * math.log2(1 - p))
        assert abs(unit_entropy(p) - direct) <= 1e-12


def test_make_predictions_fields():
    preds = make_predictions(["a", "b"], [0.9, 0.2])
    assert preds[0].hard_label == 1
    assert preds[1].hard_label == 0
    assert preds[0].unit_entropy == unit_entropy(0.9)


def test_rejection_example():
    preds = make_predictions(["a", "b", "c"], [0.99, 0.8, 0.55])
    entropies = [p.unit_entropy for p in preds]
    assert entropies == pytest.approx([0.0808, 0.7219, 0.9928], abs=5e-4)
    curve = rejection_curve(preds, [1, 0, 1])
    at_half = curve.points[50]
    assert at_half.tau == 0.5
    assert at_half.kept_fraction == pytest.approx(1 / 3)
    assert at_half.accuracy == 1.0


def test_rejection_keeps_everything_when_certain():
    preds = tuple(
        Prediction(id=f"p{i}", y_hat=float(i % 2), unit_entropy=0.0, hard_label=i % 2)
        for i in range(4)
    )
    curve = rejection_curve(preds, [0, 1, 0, 1])
    assert all(pt.kept_fraction == 1.0 for pt in curve.points)
    assert all(pt.accuracy == 1.0 for pt in curve.points)


def test_rejection_tau_grid():
    preds = make_predictions(["a"], [0.3])
    curve = rejection_curve(preds, [0])
    assert len(curve.points) == 101
    taus = [pt.tau for pt in curve.points]
    assert taus == [k / 100 for k in range(101)]
    assert curve.points[-1].tau == 1.0


def test_rejection_full_coverage_at_tau_one():
    rng = np.random.default_rng(5)
    probs = rng.random(50)
    labels = rng.integers(0, 2, size=50)
    preds = make_predictions([f"s{i}" for i in range(50)], probs)
    curve = rejection_curve(preds, labels)
    last = curve.points[-1]
    assert last.kept_fraction == 1.0
    assert last.accuracy == compute_report(ScoredSet(scores=probs, labels=labels)).accuracy


def test_rejection_undefined_accuracy_on_empty_keep():
    preds = make_predictions(["a", "b"], [0.5, 0.5])  # unit entropy exactly 1
    curve = rejection_curve(preds, [0, 1])
    assert curve.points[0].kept_fraction == 0.0
    assert curve.points[0].accuracy is None
    assert curve.points[99].accuracy is None
    assert curve.points[100].accuracy is not None


def test_rejection_step_must_divide_one():
    preds = make_predictions(["a"], [0.2])
    with pytest.raises(DataError):
        rejection_curve(preds, [1], step=0.3)
    curve = rejection_curve(preds, [1], step=0.25)
    assert [pt.tau for pt in curve.points] == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_rejection_length_mismatch():
    preds = make_predictions(["a"], [0.2])
    with pytest.raises(DataError):
        rejection_curve(preds, [1, 0])


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1, max_size=40),
    st.integers(0, 2**31 - 1),
)
def test_kept_fraction_non_decreasing(probs, label_seed):
    rng = np.random.default_rng(label_seed)
    labels = rng.integers(0, 2, size=len(probs))
    preds = make_predictions([f"s{i}" for i in range(len(probs))], probs)
    curve = rejection_curve(preds, labels)
    fractions = [pt.kept_fraction for pt in curve.points]
    assert all(a <= b for a, b in zip(fractions, fractions[1:]))


def test_evaluate_all_consistent_with_parts():
    rng = np.random.default_rng(17)
    probs = rng.random(120)
    labels = rng.integers(0, 2, size=120)
    preds = make_predictions([f"s{i}" for i in range(120)], probs)
    report, curve = evaluate_all(preds, labels)
    standalone = compute_report(ScoredSet(scores=probs, labels=labels))
    assert report == standalone
    assert curve == rejection_curve(preds, labels)
    assert curve.points[-1].accuracy == report.accuracy


def test_rejection_csv_round_trip(tmp_path):
    preds = make_predictions(["a", "b"], [0.5, 0.1])
    curve = rejection_curve(preds, [1, 0])
    path = tmp_path / "curve.rejection.csv"
    write_rejection_csv(curve, path)
    assert read_rejection_csv(path) == curve
    header, first = path.read_text().splitlines()[:2]
    assert header == "tau,kept_fraction,accuracy"
    assert first.split(",")[2] == ""  # tau 0 keeps nothing here


def test_scores_csv_round_trip(tmp_path):
    probs = [0.875, 0.125, 0.5]
    labels = np.array([1, 0, 1])
    preds = make_predictions(["x,1", "y", "z"], probs)  # comma in id must survive
    path = tmp_path / "set.scores.csv"
    write_scores_csv(preds, labels, path)
    back_preds, back_labels = read_scores_csv(path)
    assert back_preds == preds
    assert np.array_equal(back_labels, labels)
