"""Gradient descent on 2-D analytic surfaces under a schedule.

Two surfaces cover the interesting regimes: a quadratic bowl
f(x) = 0.5 x^T H x whose stability threshold is exactly lr < 2/lambda_max(H),
and a double well f(x, y) = (x^2 - 1)^2 + y^2 with minima at (+-1, 0) where
the schedule decides which basin a run lands in.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .schedules import LRPolicy, lr_at

TRAJECTORY_HEADER = "t,x,y,f,lr"


@dataclass(frozen=True, eq=False)
class QuadraticSurface:
    """f(x) = 0.5 x^T H x with H symmetric positive-definite."""

    hessian: np.ndarray

    def __post_init__(self) -> None:
        h = np.asarray(self.hessian, dtype=np.float64)
        object.__setattr__(self, "hessian", h)
        if h.shape != (2, 2) or not np.allclose(h, h.T):
            raise ValueError("hessian must be a symmetric 2x2 matrix")
        if np.linalg.eigvalsh(h).min() <= 0:
            raise ValueError("hessian must be positive-definite")

    def value(self, point: np.ndarray) -> float:
        return float(0.5 * point @ self.hessian @ point)

    def gradient(self, point: np.ndarray) -> np.ndarray:
        return self.hessian @ point

    def lambda_max(self) -> float:
        return float(np.linalg.eigvalsh(self.hessian).max())


@dataclass(frozen=True)
class DoubleWellSurface:
    """f(x, y) = (x^2 - 1)^2 + y^2; minima at (-1, 0) and (1, 0)."""

    minima = ((-1.0, 0.0), (1.0, 0.0))

    def value(self, point: np.ndarray) -> float:
        x, y = point
        return float((x * x - 1.0) ** 2 + y * y)

    def gradient(self, point: np.ndarray) -> np.ndarray:
        x, y = point
        return np.array([4.0 * x * (x * x - 1.0), 2.0 * y])


@dataclass(frozen=True)
class TrajectoryPoint:
    t: int
    x: float
    y: float
    f: float
    lr: float


@dataclass
class Trajectory:
    points: list[TrajectoryPoint] = field(default_factory=list)

    def final_point(self) -> np.ndarray:
        last = self.points[-1]
        return np.array([last.x, last.y])

    def positions(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.points])

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(TRAJECTORY_HEADER + "\n")
        for p in self.points:
            out.write(f"{p.t},{p.x!r},{p.y!r},{p.f!r},{p.lr!r}\n")
        return out.getvalue()


def simulate(surface, policy: LRPolicy, x0, n_iterations: int) -> Trajectory:
    """Plain gradient descent x <- x - lr(t) * grad f(x) for t = 0..T-1.

    Records T+1 points: the point recorded at t is the position before the
    update of iteration t, tagged with the rate that update uses; the final
    point carries lr(T). Divergence is not an error here, it is simply
    visible in the trajectory.
    """
    if n_iterations < 1:
        raise ValueError("n_iterations must be >= 1")
    x = np.asarray(x0, dtype=np.float64).copy()
    if x.shape != (2,):
        raise ValueError(f"x0 must be a 2-vector, got shape {x.shape}")
    traj = Trajectory()
    for t in range(n_iterations):
        lr = lr_at(policy, t)
        traj.points.append(TrajectoryPoint(t, float(x[0]), float(x[1]),
                                           surface.value(x), lr))
        x = x - lr * surface.gradient(x)
    traj.points.append(
        TrajectoryPoint(n_iterations, float(x[0]), float(x[1]), surface.value(x),
                        lr_at(policy, n_iterations))
    )
    return traj


def converged_to(trajectory: Trajectory, target, tol: float) -> bool:
    """True iff the final point lies within Euclidean tol of target."""
    if tol <= 0:
        raise ValueError("tol must be > 0")
    target = np.asarray(target, dtype=np.float64)
    return bool(np.linalg.norm(trajectory.final_point() - target) <= tol)


def make_surface(name: str, hessian=None):
    """Surface factory for config/CLI use: 'quadratic' or 'double-well'."""
    key = name.lower().replace("_", "-")
    if key == "double-well":
        return DoubleWellSurface()
    if key == "quadratic":
        return QuadraticSurface(np.eye(2) if hessian is None else hessian)
    raise ValueError(f"unknown surface {name!r}")
