"""Learning-rate schedule functions.

Thirteen schedule kinds share one evaluator:

    lr(t) = |k0 - k1| * g(t) + min(k0, k1)

where g(t) in [0, 1] is the per-kind shape function. The constant schedule
stores k1 = k0, the decaying kinds (STEP, NSTEP, EXP, INV, POLY) store
k1 = 0 so lr(t) = k0 * g(t), and the cyclic kinds oscillate between the two
bounds. For triangle/sin cycles k0 < k1 and each cycle starts at the minimum;
the cosine cycle has k0 > k1 and starts at the maximum.

``l`` is the step length for STEP and the half-cycle length for the cyclic
kinds (triangle/sin repeat every 2*l iterations, cosine every l). Iteration
indices are integers starting at 0, and all floor/mod arithmetic is done in
exact integer arithmetic before any float enters, so cycle boundaries are
never off by one and periodicity is bitwise exact.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum


class ScheduleDomainError(ValueError):
    """Iteration index outside the schedule's domain."""


class LRFunctionKind(str, Enum):
    """The closed set of schedule kinds."""

    FIX = "FIX"
    STEP = "STEP"
    NSTEP = "NSTEP"
    EXP = "EXP"
    INV = "INV"
    POLY = "POLY"
    TRI = "TRI"
    TRI2 = "TRI2"
    TRIEXP = "TRIEXP"
    SIN = "SIN"
    SIN2 = "SIN2"
    SINEXP = "SINEXP"
    COS = "COS"


DECAYING_KINDS = frozenset(
    {
        LRFunctionKind.STEP,
        LRFunctionKind.NSTEP,
        LRFunctionKind.EXP,
        LRFunctionKind.INV,
        LRFunctionKind.POLY,
    }
)
TRIANGLE_SIN_KINDS = frozenset(
    {
        LRFunctionKind.TRI,
        LRFunctionKind.TRI2,
        LRFunctionKind.TRIEXP,
        LRFunctionKind.SIN,
        LRFunctionKind.SIN2,
        LRFunctionKind.SINEXP,
    }
)
CYCLIC_KINDS = TRIANGLE_SIN_KINDS | {LRFunctionKind.COS}

_GAMMA_KINDS = frozenset(
    {
        LRFunctionKind.STEP,
        LRFunctionKind.NSTEP,
        LRFunctionKind.EXP,
        LRFunctionKind.INV,
        LRFunctionKind.TRIEXP,
        LRFunctionKind.SINEXP,
    }
)
_L_KINDS = frozenset({LRFunctionKind.STEP}) | CYCLIC_KINDS


@dataclass(frozen=True)
class LRPolicy:
    """A schedule kind plus its concrete parameter values.

    Unused parameters for a given kind are left as None. ``max_iter`` is the
    POLY horizon (the schedule reaches 0 there and is undefined beyond it).
    """

    kind: LRFunctionKind
    k0: float
    k1: float | None = None
    gamma: float | None = None
    p: float | None = None
    l: int | None = None
    milestones: tuple[int, ...] | None = None
    max_iter: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", LRFunctionKind(self.kind))
        if self.milestones is not None:
            object.__setattr__(self, "milestones", tuple(self.milestones))
        # canonicalize the implied k1 values so equal policies compare equal:
        # decaying kinds pin k1 = 0, the constant kind pins k1 = k0
        if self.kind in DECAYING_KINDS and self.k1 == 0.0:
            object.__setattr__(self, "k1", None)
        if self.kind is LRFunctionKind.FIX and self.k1 == self.k0:
            object.__setattr__(self, "k1", None)

    # -- convenience constructors ------------------------------------
    @classmethod
    def fix(cls, k0: float) -> "LRPolicy":
        return cls(LRFunctionKind.FIX, k0)

    @classmethod
    def step(cls, k0: float, gamma: float, l: int) -> "LRPolicy":
        return cls(LRFunctionKind.STEP, k0, gamma=gamma, l=l)

    @classmethod
    def nstep(cls, k0: float, gamma: float, milestones) -> "LRPolicy":
        return cls(LRFunctionKind.NSTEP, k0, gamma=gamma, milestones=tuple(milestones))

    @classmethod
    def exp(cls, k0: float, gamma: float) -> "LRPolicy":
        return cls(LRFunctionKind.EXP, k0, gamma=gamma)

    @classmethod
    def inv(cls, k0: float, gamma: float, p: float) -> "LRPolicy":
        return cls(LRFunctionKind.INV, k0, gamma=gamma, p=p)

    @classmethod
    def poly(cls, k0: float, p: float, max_iter: int) -> "LRPolicy":
        return cls(LRFunctionKind.POLY, k0, p=p, max_iter=max_iter)

    @classmethod
    def tri(cls, k0: float, k1: float, l: int) -> "LRPolicy":
        return cls(LRFunctionKind.TRI, k0, k1=k1, l=l)

    @classmethod
    def tri2(cls, k0: float, k1: float, l: int) -> "LRPolicy":
        return cls(LRFunctionKind.TRI2, k0, k1=k1, l=l)

    @classmethod
    def triexp(cls, k0: float, k1: float, gamma: float, l: int) -> "LRPolicy":
        return cls(LRFunctionKind.TRIEXP, k0, k1=k1, gamma=gamma, l=l)

    @classmethod
    def sin(cls, k0: float, k1: float, l: int) -> "LRPolicy":
        return cls(LRFunctionKind.SIN, k0, k1=k1, l=l)

    @classmethod
    def sin2(cls, k0: float, k1: float, l: int) -> "LRPolicy":
        return cls(LRFunctionKind.SIN2, k0, k1=k1, l=l)

    @classmethod
    def sinexp(cls, k0: float, k1: float, gamma: float, l: int) -> "LRPolicy":
        return cls(LRFunctionKind.SINEXP, k0, k1=k1, gamma=gamma, l=l)

    @classmethod
    def cos(cls, k0: float, k1: float, l: int) -> "LRPolicy":
        return cls(LRFunctionKind.COS, k0, k1=k1, l=l)

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        """Flat key/value record; unused fields are omitted."""
        out: dict = {"kind": self.kind.value, "k0": self.k0}
        if self.kind in CYCLIC_KINDS:
            out["k1"] = self.k1
        if self.kind in _GAMMA_KINDS:
            out["gamma"] = self.gamma
        if self.kind in (LRFunctionKind.INV, LRFunctionKind.POLY):
            out["p"] = self.p
        if self.kind in _L_KINDS:
            out["l"] = self.l
        if self.kind is LRFunctionKind.NSTEP:
            out["milestones"] = list(self.milestones or ())
        if self.kind is LRFunctionKind.POLY:
            out["max_iter"] = self.max_iter
        return out

    @classmethod
    def from_dict(cls, record: dict) -> "LRPolicy":
        known = {"kind", "k0", "k1", "gamma", "p", "l", "milestones", "max_iter"}
        unknown = set(record) - known
        if unknown:
            raise ValueError(f"unknown policy fields: {sorted(unknown)}")
        if "kind" not in record or "k0" not in record:
            raise ValueError("policy record needs at least 'kind' and 'k0'")
        kwargs = {k: v for k, v in record.items() if k != "kind" and v is not None}
        if "milestones" in kwargs:
            kwargs["milestones"] = tuple(int(m) for m in kwargs["milestones"])
        if "l" in kwargs:
            kwargs["l"] = int(kwargs["l"])
        if "max_iter" in kwargs:
            kwargs["max_iter"] = int(kwargs["max_iter"])
        return cls(LRFunctionKind(record["kind"]), **kwargs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "LRPolicy":
        return cls.from_dict(json.loads(text))

    def label(self) -> str:
        """Compact human-readable form, e.g. ``TRI(k0=0.001, k1=0.006, l=2000)``."""
        parts = [f"{k}={v}" for k, v in self.to_dict().items() if k != "kind"]
        return f"{self.kind.value}({', '.join(parts)})"


@dataclass(frozen=True)
class SchedulePoint:
    t: int
    lr: float


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[str, ...] = field(default=())


def _effective_k1(policy: LRPolicy) -> float:
    if policy.kind is LRFunctionKind.FIX:
        return policy.k0
    if policy.kind in DECAYING_KINDS:
        return 0.0
    return float(policy.k1)


def validate(policy: LRPolicy) -> ValidationResult:
    """Check every parameter constraint for the policy's kind.

    Violations are returned as data, not raised: the tuner deliberately
    probes out-of-range values (e.g. FIX at 1.0) and lets divergence
    detection speak for them.
    """
    v: list[str] = []
    kind = policy.kind

    if not (0.0 < policy.k0 < 1.0):
        v.append("k0 must be in (0, 1)")

    if kind in CYCLIC_KINDS:
        if policy.k1 is None:
            v.append("k1 is required for cyclic kinds")
        else:
            if not (0.0 <= policy.k1 < 1.0):
                v.append("k1 must be in [0, 1)")
            if kind in TRIANGLE_SIN_KINDS and not (policy.k0 < policy.k1):
                v.append("k0 < k1 required")
            if kind is LRFunctionKind.COS and not (policy.k0 > policy.k1):
                v.append("k0 > k1 required")
    elif policy.k1 not in (None, 0.0) and not (
        kind is LRFunctionKind.FIX and policy.k1 == policy.k0
    ):
        v.append("k1 is unused for this kind (must be absent, 0, or k0 for FIX)")

    if kind in _GAMMA_KINDS:
        if policy.gamma is None:
            v.append("gamma is required")
        elif kind is LRFunctionKind.INV:
            if not (policy.gamma > 0.0):
                v.append("gamma must be > 0")
        elif not (0.0 < policy.gamma < 1.0):
            v.append("gamma must be in (0, 1)")

    if kind in (LRFunctionKind.INV, LRFunctionKind.POLY):
        if policy.p is None or not (policy.p > 0.0):
            v.append("p must be > 0")

    if kind in _L_KINDS:
        if policy.l is None or policy.l <= 0 or int(policy.l) != policy.l:
            v.append("l must be a positive integer")

    if kind is LRFunctionKind.NSTEP:
        ms = policy.milestones
        if not ms:
            v.append("milestones are required")
        else:
            if any(m <= 0 for m in ms):
                v.append("milestones must all be > 0")
            if any(b <= a for a, b in zip(ms, ms[1:])):
                v.append("milestones must be strictly increasing")

    if kind is LRFunctionKind.POLY:
        if policy.max_iter is None or policy.max_iter <= 0:
            v.append("max_iter must be a positive integer")

    return ValidationResult(ok=not v, violations=tuple(v))


def _check_evaluable(policy: LRPolicy) -> None:
    """Structural requirements without which lr_at cannot compute at all."""
    kind = policy.kind
    if kind in CYCLIC_KINDS and policy.k1 is None:
        raise ScheduleDomainError(f"{kind.value} needs k1")
    if kind in _GAMMA_KINDS and policy.gamma is None:
        raise ScheduleDomainError(f"{kind.value} needs gamma")
    if kind in (LRFunctionKind.INV, LRFunctionKind.POLY) and policy.p is None:
        raise ScheduleDomainError(f"{kind.value} needs p")
    if kind in _L_KINDS and (policy.l is None or policy.l <= 0):
        raise ScheduleDomainError(f"{kind.value} needs a positive l")
    if kind is LRFunctionKind.NSTEP and not policy.milestones:
        raise ScheduleDomainError("NSTEP needs milestones")
    if kind is LRFunctionKind.POLY and (policy.max_iter is None or policy.max_iter <= 0):
        raise ScheduleDomainError("POLY needs a positive max_iter")


def _tri_shape(t_mod: int, l: int) -> float:
    # t_mod in [0, 2l): rises 0 -> 1 over the first half-cycle, falls back.
    return (2.0 / math.pi) * abs(math.asin(math.sin(math.pi * t_mod / (2.0 * l))))


def _sin_shape(t_mod: int, l: int) -> float:
    return abs(math.sin(math.pi * t_mod / (2.0 * l)))


def _g(policy: LRPolicy, t: int) -> float:
    kind = policy.kind
    if kind is LRFunctionKind.FIX:
        return 0.0
    if kind is LRFunctionKind.STEP:
        return policy.gamma ** (t // policy.l)
    if kind is LRFunctionKind.NSTEP:
        return policy.gamma ** bisect_right(policy.milestones, t)
    if kind is LRFunctionKind.EXP:
        return policy.gamma**t
    if kind is LRFunctionKind.INV:
        return 1.0 / (1.0 + t * policy.gamma) ** policy.p
    if kind is LRFunctionKind.POLY:
        return (1.0 - t / policy.max_iter) ** policy.p
    l = policy.l
    if kind is LRFunctionKind.TRI:
        return _tri_shape(t % (2 * l), l)
    if kind is LRFunctionKind.TRI2:
        return 0.5 ** (t // (2 * l)) * _tri_shape(t % (2 * l), l)
    if kind is LRFunctionKind.TRIEXP:
        return policy.gamma**t * _tri_shape(t % (2 * l), l)
    if kind is LRFunctionKind.SIN:
        return _sin_shape(t % (2 * l), l)
    if kind is LRFunctionKind.SIN2:
        return 0.5 ** (t // (2 * l)) * _sin_shape(t % (2 * l), l)
    if kind is LRFunctionKind.SINEXP:
        return policy.gamma**t * _sin_shape(t % (2 * l), l)
    if kind is LRFunctionKind.COS:
        return 0.5 * (1.0 + math.cos(2.0 * math.pi * (t % l) / l))
    raise ScheduleDomainError(f"unknown kind {kind!r}")


def lr_at(policy: LRPolicy, t: int) -> float:
    """The learning rate applied during iteration t (t = 0, 1, 2, ...).

    Raises ScheduleDomainError for t < 0, and for POLY beyond max_iter,
    where the closed form would go negative or undefined.
    """
    t = int(t)
    if t < 0:
        raise ScheduleDomainError(f"iteration index must be >= 0, got {t}")
    _check_evaluable(policy)
    if policy.kind is LRFunctionKind.POLY and t > policy.max_iter:
        raise ScheduleDomainError(
            f"POLY is undefined beyond max_iter={policy.max_iter}, got t={t}"
        )
    k0 = policy.k0
    k1 = _effective_k1(policy)
    return abs(k0 - k1) * _g(policy, t) + min(k0, k1)


def schedule_series(policy: LRPolicy, t_end: int, stride: int = 1) -> list[SchedulePoint]:
    """Sample the schedule at t = 0, stride, 2*stride, ... up to t_end."""
    if t_end <= 0:
        raise ValueError(f"t_end must be > 0, got {t_end}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    return [SchedulePoint(t, lr_at(policy, t)) for t in range(0, t_end + 1, stride)]


_PARAM_COUNT = {
    LRFunctionKind.FIX: 1,
    LRFunctionKind.EXP: 2,
    LRFunctionKind.STEP: 3,
    LRFunctionKind.INV: 3,
    LRFunctionKind.TRI: 3,
    LRFunctionKind.TRI2: 3,
    LRFunctionKind.SIN: 3,
    LRFunctionKind.SIN2: 3,
    LRFunctionKind.COS: 3,
    LRFunctionKind.TRIEXP: 4,
    LRFunctionKind.SINEXP: 4,
}


def param_count(policy: LRPolicy, max_iter_is_budget: bool = False) -> int:
    """Number of free parameters of the policy's kind (a tuning-cost proxy).

    NSTEP counts n + 2 for n milestones. POLY counts 4, or 3 when its
    max_iter is pinned to the training budget and thus not free.
    """
    if policy.kind is LRFunctionKind.NSTEP:
        return len(policy.milestones or ()) + 2
    if policy.kind is LRFunctionKind.POLY:
        return 3 if max_iter_is_budget else 4
    return _PARAM_COUNT[policy.kind]
