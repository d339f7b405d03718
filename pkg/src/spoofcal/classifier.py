"""Logistic-regression and two-layer MLP back-ends over embedding datasets.

Both trainers minimize mean binary cross-entropy plus (lambda/2)*||w||^2 on
the non-bias weights.  Logistic training is deterministic full-batch gradient
descent with Armijo backtracking; MLP training is minibatch SGD with momentum
and a seed-derived shuffle.  A fixed (dataset, config) pair always produces
the same model, byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DataError, NumericError
from .store import EmbeddingDataset, atomic_write_text

PROB_EPS = 1e-12  # predict_proba clamp, keeps downstream logs finite
MOMENTUM = 0.9

# Armijo backtracking constants
ARMIJO_C1 = 1e-4
ARMIJO_SHRINK = 0.5
ARMIJO_MAX_HALVINGS = 60


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for both back-ends.

    lam is the L2 coefficient (serialized as "lambda").  hidden_size,
    step_size, batch_size, and epochs apply to the MLP only; their defaults
    are arbitrary implementation choices, not tuned reference values.
    """

    lam: float = 1e-4
    tol: float = 1e-7
    max_iters: int = 10000
    standardize: bool = True
    seed: int = 0
    hidden_size: int = 256
    step_size: float = 0.1
    batch_size: int = 64
    epochs: int = 50

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise DataError(f"lambda must be >= 0, got {self.lam}")
        if self.tol <= 0:
            raise DataError(f"tol must be > 0, got {self.tol}")
        if self.max_iters < 1:
            raise DataError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.hidden_size < 1:
            raise DataError(f"hidden_size must be >= 1, got {self.hidden_size}")
        if self.step_size <= 0:
            raise DataError(f"step_size must be > 0, got {self.step_size}")
        if self.batch_size < 1:
            raise DataError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise DataError(f"epochs must be >= 0, got {self.epochs}")


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        if mean.shape != std.shape or mean.ndim != 1:
            raise DataError("standardizer mean/std must be equal-length vectors")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(std))):
            raise DataError("standardizer statistics must be finite")
        if np.any(std <= 0.0):
            raise DataError("standardizer std entries must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.std


def fit_standardizer(X: np.ndarray) -> Standardizer:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)  # constant columns pass through unscaled
    return Standardizer(mean=mean, std=std)


@dataclass(frozen=True)
class ModelMeta:
    train_seed: int
    lam: float
    converged: bool
    iterations: int
    final_loss: float


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    standardizer: Standardizer | None
    meta: ModelMeta

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise DataError(f"weights must be a non-empty vector, got shape {w.shape}")
        if not (np.all(np.isfinite(w)) and np.isfinite(self.bias)):
            raise DataError("model parameters must be finite")
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.weights.size

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        Z = self.standardizer.apply(X) if self.standardizer is not None else X
        return Z @ self.weights + self.bias


@dataclass(frozen=True)
class MlpModel:
    """D x H -> ReLU -> H x 1 network producing a single logit."""

    layer1_weights: np.ndarray
    layer1_bias: np.ndarray
    layer2_weights: np.ndarray
    layer2_bias: float
    standardizer: Standardizer | None
    meta: ModelMeta

    def __post_init__(self) -> None:
        w1 = np.asarray(self.layer1_weights, dtype=np.float64)
        b1 = np.asarray(self.layer1_bias, dtype=np.float64)
        w2 = np.asarray(self.layer2_weights, dtype=np.float64)
        if w1.ndim != 2 or w1.shape[1] < 1:
            raise DataError(f"layer1 weights must be D x H, got shape {w1.shape}")
        h = w1.shape[1]
        if b1.shape != (h,) or w2.shape != (h,):
            raise DataError("layer shapes disagree on hidden size")
        finite = (
            np.all(np.isfinite(w1))
            and np.all(np.isfinite(b1))
            and np.all(np.isfinite(w2))
            and np.isfinite(self.layer2_bias)
        )
        if not finite:
            raise DataError("model parameters must be finite")
        object.__setattr__(self, "layer1_weights", w1)
        object.__setattr__(self, "layer1_bias", b1)
        object.__setattr__(self, "layer2_weights", w2)

    @property
    def dim(self) -> int:
        return self.layer1_weights.shape[0]

    @property
    def hidden_size(self) -> int:
        return self.layer1_weights.shape[1]

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        Z = self.standardizer.apply(X) if self.standardizer is not None else X
        hidden = np.maximum(Z @ self.layer1_weights + self.layer1_bias, 0.0)
        return hidden @ self.layer2_weights + self.layer2_bias


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Overflow-safe logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _mean_cross_entropy(z: np.ndarray, y: np.ndarray) -> float:
    # log(1 + e^z) - y*z rewritten to avoid overflow for |z| large
    return float(np.mean(np.maximum(z, 0.0) - y * z + np.log1p(np.exp(-np.abs(z)))))


def logistic_loss_and_grad(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, lam: float
) -> tuple[float, np.ndarray, float]:
    """Mean cross-entropy + (lam/2)||w||^2 and its gradient (bias unpenalized)."""
    z = X @ w + b
    loss = _mean_cross_entropy(z, y) + 0.5 * lam * float(w @ w)
    residual = (sigmoid(z) - y) / y.size
    grad_w = X.T @ residual + lam * w
    grad_b = float(np.sum(residual))
    return loss, grad_w, grad_b


def _logistic_loss(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, lam: float) -> float:
    z = X @ w + b
    return _mean_cross_entropy(z, y) + 0.5 * lam * float(w @ w)


def _prepare(train: EmbeddingDataset, config: TrainConfig):
    if train.n_spoof == 0 or train.n_bonafide == 0:
        raise DataError("training set must contain both classes")
    X = train.features.astype(np.float64)
    standardizer = fit_standardizer(X) if config.standardize else None
    if standardizer is not None:
        X = standardizer.apply(X)
    y = train.labels.astype(np.float64)
    return X, y, standardizer


def train_logistic(train: EmbeddingDataset, config: TrainConfig) -> LinearModel:
    """Fit logistic regression by full-batch gradient descent.

    Each step takes the Armijo-accepted multiple of the negative gradient,
    warm-starting the step length at twice the previous accepted value.
    Stops when the gradient infinity norm drops to config.tol, when
    config.max_iters steps have been taken, or when the line search stalls.
    """
    X, y, standardizer = _prepare(train, config)
    w = np.zeros(X.shape[1])
    b = 0.0
    loss, grad_w, grad_b = logistic_loss_and_grad(w, b, X, y, config.lam)
    if not np.isfinite(loss):
        raise NumericError(f"non-finite initial loss {loss}")
    alpha = 1.0
    iterations = 0
    converged = _grad_inf_norm(grad_w, grad_b) <= config.tol
    while not converged and iterations < config.max_iters:
        gg = float(grad_w @ grad_w) + grad_b * grad_b
        step = alpha * 2.0
        accepted = False
        for _ in range(ARMIJO_MAX_HALVINGS):
            w_new = w - step * grad_w
            b_new = b - step * grad_b
            loss_new = _logistic_loss(w_new, b_new, X, y, config.lam)
            # sufficient decrease along the steepest-descent direction
            if loss_new <= loss - ARMIJO_C1 * step * gg:
                accepted = True
                break
            step *= ARMIJO_SHRINK
        if not accepted:
            break  # no productive step length at float precision
        w, b, loss, alpha = w_new, b_new, loss_new, step
        iterations += 1
        loss, grad_w, grad_b = logistic_loss_and_grad(w, b, X, y, config.lam)
        if not (np.isfinite(loss) and np.all(np.isfinite(grad_w)) and np.isfinite(grad_b)):
            raise NumericError("non-finite loss or gradient during optimization")
        converged = _grad_inf_norm(grad_w, grad_b) <= config.tol
    meta = ModelMeta(
        train_seed=config.seed,
        lam=config.lam,
        converged=bool(converged),
        iterations=iterations,
        final_loss=loss,
    )
    return LinearModel(weights=w, bias=float(b), standardizer=standardizer, meta=meta)


def _grad_inf_norm(grad_w: np.ndarray, grad_b: float) -> float:
    return max(float(np.max(np.abs(grad_w))), abs(grad_b))


def mlp_init(dim: int, hidden: int, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """He-scaled random layer 1; layer 2 zero so the initial output is 0.5."""
    rng = np.random.default_rng(seed)
    w1 = rng.normal(0.0, np.sqrt(2.0 / dim), size=(dim, hidden))
    return w1, np.zeros(hidden), np.zeros(hidden), 0.0


def mlp_loss_and_grad(
    params: tuple[np.ndarray, np.ndarray, np.ndarray, float],
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
) -> tuple[float, tuple[np.ndarray, np.ndarray, np.ndarray, float]]:
    """Loss and analytic gradients for the two-layer network."""
    w1, b1, w2, b2 = params
    pre = X @ w1 + b1
    hidden = np.maximum(pre, 0.0)
    z = hidden @ w2 + b2
    loss = _mean_cross_entropy(z, y) + 0.5 * lam * (float((w1 * w1).sum()) + float(w2 @ w2))
    residual = (sigmoid(z) - y) / y.size
    grad_w2 = hidden.T @ residual + lam * w2
    grad_b2 = float(np.sum(residual))
    back = np.outer(residual, w2) * (pre > 0.0)
    grad_w1 = X.T @ back + lam * w1
    grad_b1 = back.sum(axis=0)
    return loss, (grad_w1, grad_b1, grad_w2, grad_b2)


def train_mlp(train: EmbeddingDataset, config: TrainConfig) -> MlpModel:
    """Fit the two-layer network by minibatch SGD with momentum.

    Initialization and the per-epoch shuffle both derive from config.seed, so
    training is bit-reproducible.  Raises NumericError if the full-data loss
    goes non-finite (e.g. a divergent step size).
    """
    X, y, standardizer = _prepare(train, config)
    n, dim = X.shape
    rng = np.random.default_rng(config.seed)
    w1 = rng.normal(0.0, np.sqrt(2.0 / dim), size=(dim, config.hidden_size))
    b1 = np.zeros(config.hidden_size)
    w2 = np.zeros(config.hidden_size)
    b2 = 0.0
    v1 = np.zeros_like(w1)
    vb1 = np.zeros_like(b1)
    v2 = np.zeros_like(w2)
    vb2 = 0.0
    updates = 0
    loss, _ = mlp_loss_and_grad((w1, b1, w2, b2), X, y, config.lam)
    # overflow inside the loop is legal intermediate state; the epoch-end
    # finiteness check is the contract, so suppress the transient warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(config.epochs):
            order = rng.permutation(n)
            for start in range(0, n, config.batch_size):
                batch = order[start : start + config.batch_size]
                _, (g1, gb1, g2, gb2) = mlp_loss_and_grad(
                    (w1, b1, w2, b2), X[batch], y[batch], config.lam
                )
                v1 = MOMENTUM * v1 - config.step_size * g1
                vb1 = MOMENTUM * vb1 - config.step_size * gb1
                v2 = MOMENTUM * v2 - config.step_size * g2
                vb2 = MOMENTUM * vb2 - config.step_size * gb2
                w1 = w1 + v1
                b1 = b1 + vb1
                w2 = w2 + v2
                b2 = b2 + vb2
                updates += 1
            loss, _ = mlp_loss_and_grad((w1, b1, w2, b2), X, y, config.lam)
            if not np.isfinite(loss):
                raise NumericError(f"non-finite loss after {updates} updates")
    meta = ModelMeta(
        train_seed=config.seed,
        lam=config.lam,
        converged=True,
        iterations=updates,
        final_loss=float(loss),
    )
    return MlpModel(
        layer1_weights=w1,
        layer1_bias=b1,
        layer2_weights=w2,
        layer2_bias=float(b2),
        standardizer=standardizer,
        meta=meta,
    )


def predict_proba(model: LinearModel | MlpModel, data: EmbeddingDataset) -> np.ndarray:
    """P(spoof) per sample, clamped to [PROB_EPS, 1 - PROB_EPS]."""
    if data.dim != model.dim:
        raise DataError(f"data dimension {data.dim} does not match model dimension {model.dim}")
    z = model.decision_scores(data.features.astype(np.float64))
    return np.clip(sigmoid(z), PROB_EPS, 1.0 - PROB_EPS)


def ensemble_predict(models, data: EmbeddingDataset) -> np.ndarray:
    """Arithmetic mean of member probabilities, sample by sample."""
    models = list(models)
    if not models:
        raise DataError("ensemble needs at least one model")
    return np.mean(np.stack([predict_proba(m, data) for m in models]), axis=0)


def model_to_dict(model: LinearModel | MlpModel) -> dict:
    meta = {
        "train_seed": model.meta.train_seed,
        "lambda": model.meta.lam,
        "converged": model.meta.converged,
        "iterations": model.meta.iterations,
        "final_loss": model.meta.final_loss,
    }
    std = None
    if model.standardizer is not None:
        std = {"mean": model.standardizer.mean.tolist(), "std": model.standardizer.std.tolist()}
    if isinstance(model, LinearModel):
        return {
            "kind": "logistic",
            "weights": model.weights.tolist(),
            "bias": model.bias,
            "standardizer": std,
            "meta": meta,
        }
    return {
        "kind": "mlp",
        "activation": "relu",
        "layer1_weights": model.layer1_weights.tolist(),
        "layer1_bias": model.layer1_bias.tolist(),
        "layer2_weights": model.layer2_weights.tolist(),
        "layer2_bias": model.layer2_bias,
        "standardizer": std,
        "meta": meta,
    }


def model_from_dict(payload: dict) -> LinearModel | MlpModel:
    try:
        meta_raw = payload["meta"]
        meta = ModelMeta(
            train_seed=int(meta_raw["train_seed"]),
            lam=float(meta_raw["lambda"]),
            converged=bool(meta_raw["converged"]),
            iterations=int(meta_raw["iterations"]),
            final_loss=float(meta_raw["final_loss"]),
        )
        std = None
        if payload.get("standardizer") is not None:
            std = Standardizer(
                mean=np.asarray(payload["standardizer"]["mean"], dtype=np.float64),
                std=np.asarray(payload["standardizer"]["std"], dtype=np.float64),
            )
        kind = payload["kind"]
        if kind == "logistic":
            return LinearModel(
                weights=np.asarray(payload["weights"], dtype=np.float64),
                bias=float(payload["bias"]),
                standardizer=std,
                meta=meta,
            )
        if kind == "mlp":
            return MlpModel(
                layer1_weights=np.asarray(payload["layer1_weights"], dtype=np.float64),
                layer1_bias=np.asarray(payload["layer1_bias"], dtype=np.float64),
                layer2_weights=np.asarray(payload["layer2_weights"], dtype=np.float64),
                layer2_bias=float(payload["layer2_bias"]),
                standardizer=std,
                meta=meta,
            )
        raise DataError(f"unknown model kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed model file: {exc}") from None


def save_model(model: LinearModel | MlpModel, path: str | Path) -> None:
    atomic_write_text(path, json.dumps(model_to_dict(model), indent=2, sort_keys=True) + "\n")


def load_model(path: str | Path) -> LinearModel | MlpModel:
    try:
        payload = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(payload)


def with_seed(config: TrainConfig, seed: int) -> TrainConfig:
    return replace(config, seed=seed)
