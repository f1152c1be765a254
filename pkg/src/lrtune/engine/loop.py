"""The mini training engine: schedule-driven mini-batch gradient descent
with trace collection and divergence marking.

One epoch is floor(n_train / batch_size) iterations; the training order is
reshuffled once per epoch from a labeled sub-seed and the ragged final batch
is dropped, so epoch arithmetic stays exact. Evaluation happens before the
update at every eval_interval-th iteration and once more after the last
update, at t = max_iter.

A run is marked diverged the first time the batch loss goes non-finite, the
parameter norm passes 1e12, or the batch loss spikes past 25x the initial
full-train loss. The spike trigger exists because bounded [0, 1] features
under softmax cross-entropy keep both loss and parameters finite at absurd
rates (a blown-up ReLU layer simply dies and freezes), so the first two
conditions alone never fire. The 25x factor is measured: healthy rates stay
under ~1.5x, cyclic policies legitimately bump a few x mid-cycle, and
runaway rates on weight-decayed models exceed 80x. An unregularized network
that a huge rate has lobotomized can idle in a limit cycle below the
threshold; that run is dead rather than divergent, and accuracy-based
exclusion catches it downstream. A diverged run keeps running and recording
so the trace stays complete, but ranking puts it last.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from ..metrics import PredictionBatch, top_k_accuracy
from ..rng import labeled_rng
from ..schedules import LRPolicy, lr_at
from .data import Dataset
from .models import (
    ModelSpec,
    ModelState,
    data_loss,
    forward_backward,
    init_model,
    predict_proba,
)
from .optim import Optimizer, OptimizerSpec

PARAM_NORM_LIMIT = 1e12
DIVERGENCE_LOSS_FACTOR = 25.0

TRACE_HEADER = "iter,lr,train_loss,test_loss,top1,top5"


@dataclass(frozen=True)
class TrainConfig:
    policy: LRPolicy
    batch_size: int
    max_iter: int
    eval_interval: int
    seed: int

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")
        if self.eval_interval < 1:
            raise ValueError("eval_interval must be >= 1")
        if self.max_iter > 0 and self.eval_interval > self.max_iter:
            raise ValueError("eval_interval must fit into max_iter at least once")


@dataclass(frozen=True)
class TracePoint:
    iteration: int
    lr: float
    train_loss: float
    test_loss: float
    top1: float
    top5: float


@dataclass
class TrainTrace:
    points: list[TracePoint] = field(default_factory=list)
    diverged: bool = False
    diverged_at: int | None = None

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(TRACE_HEADER + "\n")
        for p in self.points:
            out.write(
                f"{p.iteration},{p.lr!r},{p.train_loss!r},{p.test_loss!r},"
                f"{p.top1!r},{p.top5!r}\n"
            )
        return out.getvalue()


def _evaluate(model: ModelState, train_set: Dataset, test_set: Dataset
              ) -> tuple[float, float, float, float]:
    """(train_loss, test_loss, top1, top5) at the current parameters.

    top-k is measured on the test split; k caps at the class count so small
    problems (C < 5) report top-C as "top5". Non-finite probabilities (a
    diverged model) score 0.
    """
    train_loss = float(data_loss(model, train_set.features, train_set.labels))
    test_loss = float(data_loss(model, test_set.features, test_set.labels))
    probs = predict_proba(model, test_set.features)
    if not np.all(np.isfinite(probs)):
        return train_loss, test_loss, 0.0, 0.0
    batch = PredictionBatch(probs, test_set.labels)
    top1 = top_k_accuracy(batch, 1)
    top5 = top_k_accuracy(batch, min(5, test_set.n_classes))
    return train_loss, test_loss, top1, top5


def train(
    config: TrainConfig,
    model_spec: ModelSpec,
    optimizer_spec: OptimizerSpec,
    train_set: Dataset,
    test_set: Dataset,
) -> TrainTrace:
    """Run the full training loop; deterministic given the config seed."""
    trace, _ = train_with_model(config, model_spec, optimizer_spec, train_set, test_set)
    return trace


def train_with_model(
    config: TrainConfig,
    model_spec: ModelSpec,
    optimizer_spec: OptimizerSpec,
    train_set: Dataset,
    test_set: Dataset,
) -> tuple[TrainTrace, ModelState]:
    """train() but also hands back the final model, for metric evaluation."""
    n = train_set.n_samples
    if config.batch_size > n:
        raise ValueError(f"batch_size {config.batch_size} exceeds n_train {n}")
    per_epoch = n // config.batch_size

    model = init_model(model_spec, train_set.n_features, train_set.n_classes,
                       config.seed)
    optimizer = Optimizer(optimizer_spec)
    trace = TrainTrace()

    loss_ceiling = math.inf
    if config.max_iter > 0:
        baseline = data_loss(model, train_set.features, train_set.labels)
        chance = math.log(train_set.n_classes)
        loss_ceiling = DIVERGENCE_LOSS_FACTOR * max(baseline, chance)

    order = np.arange(n)
    for t in range(config.max_iter):
        if t % config.eval_interval == 0:
            trace.points.append(
                TracePoint(t, lr_at(config.policy, t),
                           *_evaluate(model, train_set, test_set))
            )
        pos = t % per_epoch
        if pos == 0:
            order = labeled_rng(config.seed, "shuffle", t // per_epoch).permutation(n)
        batch = order[pos * config.batch_size : (pos + 1) * config.batch_size]

        lr = lr_at(config.policy, t)
        loss, grads = forward_backward(
            model, train_set.features[batch], train_set.labels[batch]
        )
        if not trace.diverged and (not np.isfinite(loss) or loss > loss_ceiling):
            trace.diverged = True
            trace.diverged_at = t
        model.params = optimizer.step(model.params, grads, lr)
        if not trace.diverged and model.param_sq_norm() > PARAM_NORM_LIMIT**2:
            trace.diverged = True
            trace.diverged_at = t

    trace.points.append(
        TracePoint(config.max_iter, lr_at(config.policy, config.max_iter),
                   *_evaluate(model, train_set, test_set))
    )
    return trace, model
