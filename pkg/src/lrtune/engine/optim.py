"""Gradient-descent update rules: plain SGD, classical momentum, Nesterov.

All three apply theta <- theta - lr * step_direction with velocity state
held by the optimizer object; velocity starts at zero. With momentum 0 the
momentum and Nesterov variants reduce exactly to SGD.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SGD = "sgd"
MOMENTUM = "momentum"
NESTEROV = "nesterov"


@dataclass(frozen=True)
class OptimizerSpec:
    kind: str = SGD
    momentum: float = 0.0  # ignored by plain sgd

    def __post_init__(self) -> None:
        if self.kind not in (SGD, MOMENTUM, NESTEROV):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")
        if not (0.0 <= self.momentum < 1.0):
            raise ValueError("momentum must be in [0, 1)")


class Optimizer:
    """Holds velocity state; step() is purely functional over the params."""

    def __init__(self, spec: OptimizerSpec):
        self.spec = spec
        self._velocity: dict[str, np.ndarray] | None = None

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
             lr: float) -> dict[str, np.ndarray]:
        """One update; returns new parameter arrays, inputs untouched."""
        if not (lr > 0.0):
            raise ValueError(f"lr must be > 0, got {lr}")
        if self.spec.kind == SGD:
            return {k: params[k] - lr * grads[k] for k in params}

        mu = self.spec.momentum
        if self._velocity is None:
            self._velocity = {k: np.zeros_like(v) for k, v in params.items()}
        new_params: dict[str, np.ndarray] = {}
        for k in params:
            v = mu * self._velocity[k] - lr * grads[k]
            self._velocity[k] = v
            if self.spec.kind == MOMENTUM:
                new_params[k] = params[k] + v
            else:  # nesterov: look ahead along the fresh velocity
                new_params[k] = params[k] + mu * v - lr * grads[k]
        return new_params


def step(optimizer: Optimizer, params: dict[str, np.ndarray],
         grads: dict[str, np.ndarray], lr: float) -> dict[str, np.ndarray]:
    return optimizer.step(params, grads, lr)
