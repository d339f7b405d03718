"""Trainer correctness: oracle minimizer, gradients, determinism, prediction."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import finite_difference_gradient, logistic_1d_oracle, max_mixed_relative_error
from spoofcal.classifier import (
    LinearModel,
    MlpModel,
    ModelMeta,
    TrainConfig,
    ensemble_predict,
    load_model,
    logistic_loss_and_grad,
    mlp_loss_and_grad,
    model_to_dict,
    predict_proba,
    save_model,
    train_logistic,
    train_mlp,
)
from spoofcal.errors import DataError, NumericError
from spoofcal.store import EmbeddingDataset


def dataset_from(X, y, source="unit"):
    X = np.asarray(X, dtype=np.float32)
    return EmbeddingDataset(
        ids=tuple(f"{source}-{i}" for i in range(len(X))),
        features=X,
        labels=np.asarray(y, dtype=np.int64),
        source=source,
    )


def random_dataset(n=80, d=5, seed=0, shift=2.0):
    rng = np.random.default_rng(seed)
    half = n // 2
    X = np.vstack([rng.normal(0, 1, (n - half, d)), rng.normal(shift, 1, (half, d))])
    y = np.r_[np.zeros(n - half, dtype=np.int64), np.ones(half, dtype=np.int64)]
    order = rng.permutation(n)
    return dataset_from(X[order], y[order], source=f"rand{seed}")


def test_symmetric_pair_gives_zero_bias():
    ds = dataset_from([[-1.0], [1.0]], [0, 1])
    model = train_logistic(ds, TrainConfig(lam=1e-4, standardize=False))
    assert abs(model.bias) < 1e-6
    assert model.weights[0] > 0


def test_four_point_problem_matches_convex_oracle():
    xs = [-2.0, -1.0, 1.0, 2.0]
    ys = [0, 0, 1, 1]
    ds = dataset_from([[x] for x in xs], ys)
    model = train_logistic(ds, TrainConfig(lam=0.1, standardize=False))
    w_ref, b_ref, loss_ref = logistic_1d_oracle(xs, ys, lam=0.1)
    assert model.weights[0] == pytest.approx(w_ref, abs=1e-4)
    assert model.bias == pytest.approx(b_ref, abs=1e-4)
    assert model.meta.final_loss == pytest.approx(loss_ref, abs=1e-8)
    assert model.meta.converged


def test_single_class_rejected():
    ds = dataset_from([[0.0], [1.0]], [1, 1])
    with pytest.raises(DataError):
        train_logistic(ds, TrainConfig())
    with pytest.raises(DataError):
        train_mlp(ds, TrainConfig(epochs=1))


def test_logistic_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    for _ in range(5):
        n, d = 5, 4
        X = rng.normal(size=(n, d))
        y = rng.integers(0, 2, size=n).astype(np.float64)
        w0 = rng.normal(size=d)
        b0 = rng.normal()
        lam = 0.05
        _, grad_w, grad_b = logistic_loss_and_grad(w0, b0, X, y, lam)
        analytic = list(grad_w) + [grad_b]

        def loss_flat(v):
            return logistic_loss_and_grad(np.array(v[:d]), v[d], X, y, lam)[0]

        numeric = finite_difference_gradient(loss_flat, list(w0) + [b0], step=1e-5)
        assert max_mixed_relative_error(analytic, numeric) < 1e-5


def test_mlp_gradient_matches_finite_differences():
    rng = np.random.default_rng(4)
    for _ in range(5):
        n, d, h = 5, 3, 4
        X = rng.normal(size=(n, d))
        y = rng.integers(0, 2, size=n).astype(np.float64)
        w1 = rng.normal(size=(d, h))
        b1 = rng.normal(size=h)
        w2 = rng.normal(size=h)
        b2 = rng.normal()
        lam = 0.01
        _, (g1, gb1, g2, gb2) = mlp_loss_and_grad((w1, b1, w2, b2), X, y, lam)
        analytic = list(g1.ravel()) + list(gb1) + list(g2) + [gb2]

        def loss_flat(v):
            v = np.asarray(v)
            p1 = v[: d * h].reshape(d, h)
            p2 = v[d * h : d * h + h]
            p3 = v[d * h + h : d * h + 2 * h]
            p4 = float(v[-1])
            return mlp_loss_and_grad((p1, p2, p3, p4), X, y, lam)[0]

        flat = list(w1.ravel()) + list(b1) + list(w2) + [b2]
        numeric = finite_difference_gradient(loss_flat, flat, step=1e-5)
        assert max_mixed_relative_error(analytic, numeric) < 1e-5


def test_returned_loss_beats_zero_and_random_parameters():
    ds = random_dataset(n=60, d=4, seed=7)
    config = TrainConfig(lam=0.01)
    model = train_logistic(ds, config)
    X = model.standardizer.apply(ds.features.astype(np.float64))
    y = ds.labels.astype(np.float64)
    zero_loss, _, _ = logistic_loss_and_grad(np.zeros(4), 0.0, X, y, config.lam)
    assert model.meta.final_loss <= zero_loss + 1e-12
    rng = np.random.default_rng(99)
    for _ in range(100):
        w = rng.normal(scale=2.0, size=4)
        b = float(rng.normal(scale=2.0))
        loss, _, _ = logistic_loss_and_grad(w, b, X, y, config.lam)
        assert model.meta.final_loss <= loss + 1e-12


def test_standardization_equivariance():
    ds = random_dataset(n=100, d=6, seed=11)
    test = random_dataset(n=40, d=6, seed=12)
    scale = np.array([0.5, 3.0, 10.0, 0.01, 1.0, 7.0], dtype=np.float32)
    scaled_train = dataset_from(ds.features * scale, ds.labels, source="scaled")
    scaled_test = dataset_from(test.features * scale, test.labels, source="scaledt")
    config = TrainConfig(lam=1e-3, standardize=True)
    plain = predict_proba(train_logistic(ds, config), test)
    scaled = predict_proba(train_logistic(scaled_train, config), scaled_test)
    assert np.max(np.abs(plain - scaled)) < 1e-6


def test_training_is_bit_reproducible():
    ds = random_dataset(n=50, d=3, seed=20)
    config = TrainConfig(lam=0.01)
    a = json.dumps(model_to_dict(train_logistic(ds, config)), sort_keys=True)
    b = json.dumps(model_to_dict(train_logistic(ds, config)), sort_keys=True)
    assert a == b

    mlp_config = TrainConfig(lam=0.0, hidden_size=8, step_size=0.1, batch_size=16, epochs=5, seed=3)
    c = json.dumps(model_to_dict(train_mlp(ds, mlp_config)), sort_keys=True)
    d = json.dumps(model_to_dict(train_mlp(ds, mlp_config)), sort_keys=True)
    assert c == d


def test_mlp_learns_xor():
    ds = dataset_from([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]], [0, 1, 1, 0])
    config = TrainConfig(
        lam=0.0, hidden_size=8, step_size=0.3, batch_size=4, epochs=1500, seed=0, standardize=True
    )
    model = train_mlp(ds, config)
    probs = predict_proba(model, ds)
    assert np.all((probs >= 0.5) == np.array([False, True, True, False]))


def test_mlp_zero_epochs_outputs_half():
    ds = random_dataset(n=20, d=3, seed=30)
    model = train_mlp(ds, TrainConfig(hidden_size=4, epochs=0, seed=1))
    assert np.all(predict_proba(model, ds) == 0.5)
    assert np.all(model.layer2_weights == 0.0)
    assert model.layer2_bias == 0.0


def test_mlp_divergence_raises_numeric_error():
    # step sizes around 1e12 explode yet stay finite (saturated sigmoids bound
    # the gradients); 1e150 overflows float64 within the first epoch
    ds = random_dataset(n=30, d=3, seed=31)
    config = TrainConfig(lam=0.0, hidden_size=8, step_size=1e150, batch_size=8, epochs=3, seed=0)
    with pytest.raises(NumericError):
        train_mlp(ds, config)


def test_mlp_seed_changes_model():
    ds = random_dataset(n=40, d=3, seed=32)
    a = train_mlp(ds, TrainConfig(hidden_size=4, epochs=2, seed=0))
    b = train_mlp(ds, TrainConfig(hidden_size=4, epochs=2, seed=1))
    assert not np.array_equal(a.layer1_weights, b.layer1_weights)


def make_linear(w, b, seed=0):
    return LinearModel(
        weights=np.asarray(w, dtype=np.float64),
        bias=float(b),
        standardizer=None,
        meta=ModelMeta(train_seed=seed, lam=0.0, converged=True, iterations=0, final_loss=0.0),
    )


def test_predict_proba_zero_model_is_half():
    ds = random_dataset(n=10, d=2, seed=40)
    model = make_linear([0.0, 0.0], 0.0)
    assert np.all(predict_proba(model, ds) == 0.5)


def test_predict_proba_sigmoid_spot_value():
    ds = dataset_from([[2.0]], [1])
    model = make_linear([1.0], 0.0)
    assert predict_proba(model, ds)[0] == pytest.approx(0.880797, abs=1e-6)
    assert predict_proba(model, ds)[0] == pytest.approx(0.8807970779778823, abs=1e-12)


def test_predict_proba_negation_symmetry():
    ds = random_dataset(n=25, d=3, seed=41)
    model = make_linear([0.3, -1.2, 2.0], 0.7)
    flipped = make_linear([-0.3, 1.2, -2.0], -0.7)
    assert np.max(np.abs(predict_proba(model, ds) + predict_proba(flipped, ds) - 1.0)) < 1e-12


def test_predict_proba_clamps_extremes():
    ds = dataset_from([[1000.0], [-1000.0]], [1, 0])
    model = make_linear([1.0], 0.0)
    probs = predict_proba(model, ds)
    assert probs[0] == 1.0 - 1e-12
    assert probs[1] == 1e-12


def test_predict_proba_dimension_mismatch():
    ds = random_dataset(n=10, d=3, seed=42)
    with pytest.raises(DataError):
        predict_proba(make_linear([1.0], 0.0), ds)


def test_ensemble_single_member_identity():
    ds = random_dataset(n=15, d=2, seed=43)
    model = make_linear([1.0, -1.0], 0.2)
    assert np.array_equal(ensemble_predict([model], ds), predict_proba(model, ds))


def test_ensemble_averages_probabilities():
    ds = dataset_from([[0.0]], [1])
    members = [
        make_linear([0.0], np.log(p / (1 - p))) for p in (0.2, 0.4, 0.9)
    ]
    assert ensemble_predict(members, ds)[0] == pytest.approx(0.5, abs=1e-9)


def test_ensemble_of_identical_members_matches_single():
    ds = random_dataset(n=12, d=2, seed=44)
    model = make_linear([0.5, 0.5], -0.1)
    combined = ensemble_predict([model, model, model], ds)
    assert np.max(np.abs(combined - predict_proba(model, ds))) < 1e-15


def test_ensemble_requires_members():
    ds = random_dataset(n=5, d=2, seed=45)
    with pytest.raises(DataError):
        ensemble_predict([], ds)


def test_model_json_round_trip(tmp_path):
    ds = random_dataset(n=30, d=4, seed=50)
    model = train_logistic(ds, TrainConfig(lam=0.05))
    path = tmp_path / "model.json"
    save_model(model, path)
    back = load_model(path)
    assert np.array_equal(back.weights, model.weights)
    assert back.bias == model.bias
    assert back.meta == model.meta
    assert np.array_equal(back.standardizer.mean, model.standardizer.mean)
    assert np.array_equal(predict_proba(back, ds), predict_proba(model, ds))

    mlp = train_mlp(ds, TrainConfig(hidden_size=4, epochs=2, seed=1))
    save_model(mlp, path)
    back2 = load_model(path)
    assert isinstance(back2, MlpModel)
    assert np.array_equal(predict_proba(back2, ds), predict_proba(mlp, ds))


def test_model_json_floats_survive_text_round_trip(tmp_path):
    ds = random_dataset(n=30, d=4, seed=51)
    model = train_logistic(ds, TrainConfig(lam=0.05))
    path = tmp_path / "model.json"
    save_model(model, path)
    payload = json.loads(path.read_text())
    assert payload["weights"] == model.weights.tolist()  # repr round trip is exact


def test_load_model_rejects_garbage(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"kind": "unknown"}')
    with pytest.raises(DataError):
        load_model(path)
    path.write_text("not json at all")
    with pytest.raises(DataError):
        load_model(path)


def test_train_config_validation():
    with pytest.raises(DataError):
        TrainConfig(lam=-1.0)
    with pytest.raises(DataError):
        TrainConfig(tol=0.0)
    with pytest.raises(DataError):
        TrainConfig(max_iters=0)
    with pytest.raises(DataError):
        TrainConfig(hidden_size=0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_trained_logistic_parameters_always_finite(seed):
    ds = random_dataset(n=24, d=3, seed=seed, shift=4.0)
    model = train_logistic(ds, TrainConfig(lam=1e-4, max_iters=300))
    assert np.all(np.isfinite(model.weights))
    assert np.isfinite(model.bias)
    assert np.isfinite(model.meta.final_loss)
