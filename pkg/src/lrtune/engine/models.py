"""Softmax-linear and one-hidden-layer ReLU models with analytic gradients.

The training loss is mean softmax cross-entropy plus an explicit (coupled)
L2 term, weight_decay * 0.5 * ||theta||^2 over all parameters, so the
analytic gradient of every parameter is the data term plus weight_decay *
theta exactly. Softmax is computed through logsumexp with the row max
subtracted, so probabilities are finite for any finite logits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..metrics import PredictionBatch
from ..rng import labeled_rng

ARCH_SOFTMAX_LINEAR = "softmax_linear"
ARCH_MLP = "mlp"

INIT_XAVIER = "xavier"
INIT_GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class ModelSpec:
    arch: str = ARCH_SOFTMAX_LINEAR
    hidden_units: int | None = None
    init: str = INIT_XAVIER
    init_sigma: float = 0.01  # gaussian init only
    weight_decay: float = 0.0

    def __post_init__(self) -> None:
        if self.arch not in (ARCH_SOFTMAX_LINEAR, ARCH_MLP):
            raise ValueError(f"unknown arch {self.arch!r}")
        if self.arch == ARCH_MLP and (self.hidden_units is None or self.hidden_units < 1):
            raise ValueError("mlp needs hidden_units >= 1")
        if self.init not in (INIT_XAVIER, INIT_GAUSSIAN):
            raise ValueError(f"unknown init {self.init!r}")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")


@dataclass(eq=False)
class ModelState:
    spec: ModelSpec
    n_features: int
    n_classes: int
    params: dict[str, np.ndarray]

    def copy(self) -> "ModelState":
        return ModelState(
            self.spec, self.n_features, self.n_classes,
            {k: v.copy() for k, v in self.params.items()},
        )

    def param_sq_norm(self) -> float:
        return float(sum(np.sum(v * v) for v in self.params.values()))

    def param_norm(self) -> float:
        return float(np.sqrt(self.param_sq_norm()))


def _init_weight(rng: np.random.Generator, spec: ModelSpec, fan_in: int,
                 fan_out: int) -> np.ndarray:
    if spec.init == INIT_XAVIER:
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=(fan_in, fan_out))
    return rng.normal(0.0, spec.init_sigma, size=(fan_in, fan_out))


def init_model(spec: ModelSpec, n_features: int, n_classes: int, seed: int) -> ModelState:
    """Fresh parameters, deterministic from the seed; biases start at zero."""
    rng = labeled_rng(seed, "init")
    if spec.arch == ARCH_SOFTMAX_LINEAR:
        params = {
            "w": _init_weight(rng, spec, n_features, n_classes),
            "b": np.zeros(n_classes),
        }
    else:
        h = spec.hidden_units
        params = {
            "w1": _init_weight(rng, spec, n_features, h),
            "b1": np.zeros(h),
            "w2": _init_weight(rng, spec, h, n_classes),
            "b2": np.zeros(n_classes),
        }
    return ModelState(spec, n_features, n_classes, params)


def _check_features(model: ModelState, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.n_features:
        raise ValueError(
            f"features must be (n, {model.n_features}), got {features.shape}"
        )
    return features


def _scores(model: ModelState, features: np.ndarray):
    """Logits plus the hidden pre-activation (None for the linear model)."""
    p = model.params
    if model.spec.arch == ARCH_SOFTMAX_LINEAR:
        return features @ p["w"] + p["b"], None
    z1 = features @ p["w1"] + p["b1"]
    hidden = np.maximum(z1, 0.0)
    return hidden @ p["w2"] + p["b2"], z1


def _softmax(logits: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        shifted = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=1, keepdims=True)


def _cross_entropy(logits: np.ndarray, labels: np.ndarray) -> float:
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_norm = np.log(np.exp(shifted).sum(axis=1))
        true = shifted[np.arange(len(labels)), labels]
        return float(np.mean(log_norm - true))


def predict_proba(model: ModelState, features: np.ndarray) -> np.ndarray:
    """Raw class-probability matrix (no batch validation; may be non-finite
    if the parameters have diverged)."""
    logits, _ = _scores(model, _check_features(model, features))
    return _softmax(logits)


def forward(model: ModelState, features: np.ndarray, labels: np.ndarray
            ) -> tuple[PredictionBatch, float]:
    """Probabilities and the regularized mean loss for one batch."""
    features = _check_features(model, features)
    labels = np.asarray(labels, dtype=np.int64)
    logits, _ = _scores(model, features)
    loss = _cross_entropy(logits, labels)
    loss += 0.5 * model.spec.weight_decay * model.param_sq_norm()
    return PredictionBatch(_softmax(logits), labels), loss


def data_loss(model: ModelState, features: np.ndarray, labels: np.ndarray) -> float:
    """Regularized mean loss without constructing a PredictionBatch (safe for
    diverged parameters, where it returns nan/inf)."""
    features = _check_features(model, features)
    labels = np.asarray(labels, dtype=np.int64)
    logits, _ = _scores(model, features)
    loss = _cross_entropy(logits, labels)
    return loss + 0.5 * model.spec.weight_decay * model.param_sq_norm()


def forward_backward(model: ModelState, features: np.ndarray, labels: np.ndarray
                     ) -> tuple[float, dict[str, np.ndarray]]:
    """Loss plus analytic gradients of every parameter, sharing one pass."""
    features = _check_features(model, features)
    labels = np.asarray(labels, dtype=np.int64)
    n = features.shape[0]
    p = model.params
    wd = model.spec.weight_decay

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        logits, z1 = _scores(model, features)
        loss = _cross_entropy(logits, labels)
        loss += 0.5 * wd * model.param_sq_norm()

        d_logits = _softmax(logits)
        d_logits[np.arange(n), labels] -= 1.0
        d_logits /= n

        if model.spec.arch == ARCH_SOFTMAX_LINEAR:
            grads = {
                "w": features.T @ d_logits + wd * p["w"],
                "b": d_logits.sum(axis=0) + wd * p["b"],
            }
        else:
            hidden = np.maximum(z1, 0.0)
            d_hidden = d_logits @ p["w2"].T
            d_z1 = d_hidden * (z1 > 0.0)
            grads = {
                "w1": features.T @ d_z1 + wd * p["w1"],
                "b1": d_z1.sum(axis=0) + wd * p["b1"],
                "w2": hidden.T @ d_logits + wd * p["w2"],
                "b2": d_logits.sum(axis=0) + wd * p["b2"],
            }
    return loss, grads


def backward(model: ModelState, features: np.ndarray, labels: np.ndarray
             ) -> dict[str, np.ndarray]:
    """Analytic gradients of the regularized loss."""
    return forward_backward(model, features, labels)[1]
