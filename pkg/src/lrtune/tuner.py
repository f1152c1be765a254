"""The tuning pipeline: constant-rate range discovery, cyclic-bound
derivation, epoch-based schedule candidates, grid execution, and ranking.

The range test sweeps constant rates in two phases. Phase 1 walks the given
grid from the largest value downward (rates are cheap to rule out at the top,
where they diverge) and stops once accuracy has dropped persistently, i.e.
two consecutive values score below (1 - delta) of the best seen. Phase 2
lays a geometric zoom grid across the surviving values and probes those too.
A value qualifies for the good range when its best probe accuracy is within
the same delta of the overall best; the good range is the [min, max] of the
qualifying values.

Grid trials all run with the same seed so results differ only in the policy.
Ranking is a total order: accuracy descending, then iterations-to-best
ascending (cheapest peak wins ties), then loss difference ascending, then
the canonical policy JSON; diverged trials always sort after live ones.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .engine import (
    Dataset,
    ModelSpec,
    OptimizerSpec,
    TrainConfig,
    train_with_model,
)
from .engine.models import predict_proba
from .metrics import (
    InsufficientClasses,
    MetricReport,
    NoCorrectSamples,
    PredictionBatch,
    average_confidence,
    best_iteration,
    confidence_deviation,
    confidence_deviation_across_classes,
)
from .schedules import LRPolicy, param_count


class AllDiverged(RuntimeError):
    """Every probed rate diverged; no range can be reported."""


class InsufficientRange(ValueError):
    """The probe results cannot support a non-degenerate [lo, hi] range."""


@dataclass(frozen=True)
class TrialSetup:
    """Everything a trial needs except the policy under test."""

    train_set: Dataset
    test_set: Dataset
    model_spec: ModelSpec
    optimizer_spec: OptimizerSpec
    batch_size: int
    epochs: int
    eval_interval: int | None = None  # None: evaluate once per epoch
    seed: int = 0

    def __post_init__(self) -> None:
        if not (1 <= self.batch_size <= self.train_set.n_samples):
            raise ValueError(
                f"batch_size must be in [1, {self.train_set.n_samples}]"
            )
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")

    @property
    def iterations_per_epoch(self) -> int:
        return self.train_set.n_samples // self.batch_size

    def train_config(self, policy: LRPolicy, epochs: int | None = None) -> TrainConfig:
        n_epochs = self.epochs if epochs is None else epochs
        per_epoch = self.iterations_per_epoch
        return TrainConfig(
            policy=policy,
            batch_size=self.batch_size,
            max_iter=n_epochs * per_epoch,
            eval_interval=self.eval_interval or per_epoch,
            seed=self.seed,
        )


@dataclass(frozen=True)
class TrialResult:
    policy: LRPolicy
    report: MetricReport
    diverged: bool
    wall_time: float
    error: str | None = None


@dataclass(frozen=True)
class RangeTestReport:
    tested_values: tuple[float, ...]  # ascending
    epochs_probed: tuple[int, ...]
    accuracy_by_value_and_epoch: np.ndarray  # (len(values), len(epochs)) percent
    good_range: tuple[float, float]
    reduction_percent: float
    diverged_values: tuple[float, ...] = field(default=())


def run_trial(setup: TrialSetup, policy: LRPolicy,
              epochs: int | None = None) -> TrialResult:
    """Train one policy and fold the trace into a MetricReport.

    top1/top5/best_iter come from the best trace point; LD comes from the
    latest trace point with finite losses (for a healthy run, the final
    evaluation); the confidence metrics are computed from the final model on
    the test split and go NaN if the model is degenerate. Failures never
    propagate: they come back as a diverged result with an error message.
    """
    start = time.perf_counter()
    try:
        config = setup.train_config(policy, epochs)
        # a POLY horizon pinned to the budget is not a free parameter
        budget_pinned = policy.max_iter == config.max_iter
        trace, model = train_with_model(
            config, setup.model_spec, setup.optimizer_spec,
            setup.train_set, setup.test_set,
        )
        best_iter, best_top1 = best_iteration(trace)
        top5_at_best = next(
            p.top5 for p in trace.points if p.iteration == best_iter
        )
        ld = math.nan
        for point in reversed(trace.points):
            if math.isfinite(point.train_loss) and math.isfinite(point.test_loss):
                ld = point.test_loss - point.train_loss
                break

        ac = cd = cdac = math.nan
        probs = predict_proba(model, setup.test_set.features)
        if np.all(np.isfinite(probs)):
            batch = PredictionBatch(probs, setup.test_set.labels)
            try:
                ac = average_confidence(batch)
                cd = confidence_deviation(batch)
            except NoCorrectSamples:
                pass
            try:
                cdac = confidence_deviation_across_classes(batch)
            except (NoCorrectSamples, InsufficientClasses):
                pass

        report = MetricReport(
            top1=best_top1,
            top5=top5_at_best,
            ac=ac,
            cd=cd,
            cdac=cdac,
            ld=ld,
            best_iter=best_iter,
            param_count=param_count(policy, max_iter_is_budget=budget_pinned),
        )
        return TrialResult(policy, report, trace.diverged,
                           time.perf_counter() - start)
    except Exception as exc:  # recorded, never aborts a grid
        report = MetricReport(
            top1=0.0, top5=0.0, ac=math.nan, cd=math.nan, cdac=math.nan,
            ld=math.nan, best_iter=0, param_count=param_count(policy),
        )
        return TrialResult(policy, report, True, time.perf_counter() - start,
                           error=f"{type(exc).__name__}: {exc}")


def run_grid(policies, setup: TrialSetup, epochs: int | None = None,
             workers: int = 1) -> list[TrialResult]:
    """One TrialResult per policy, in input order, all on the same seed."""
    policies = list(policies)
    if workers <= 1 or len(policies) <= 1:
        return [run_trial(setup, p, epochs) for p in policies]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_trial, setup, p, epochs) for p in policies]
        return [f.result() for f in futures]


def run_repeated(setup: TrialSetup, policy: LRPolicy, repeats: int,
                 epochs: int | None = None) -> list[TrialResult]:
    """The same trial at seeds seed, seed+1, ..., for cross-seed variance.

    Kept separate from run_grid on purpose: grid comparisons isolate the
    policy by sharing one seed, variance estimation is a follow-up question
    about the policy you already picked.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    return [
        run_trial(replace(setup, seed=setup.seed + i), policy, epochs)
        for i in range(repeats)
    ]


def _rank_key(result: TrialResult) -> tuple:
    top1 = result.report.top1
    ld = result.report.ld
    return (
        -(top1 if math.isfinite(top1) else -math.inf),
        result.report.best_iter,
        ld if math.isfinite(ld) else math.inf,
        result.policy.to_json(),
    )


def rank_policies(results, n: int) -> list[TrialResult]:
    """Top n results; diverged trials only fill in after every live one."""
    if n < 1:
        raise ValueError("n must be >= 1")
    alive = sorted((r for r in results if not r.diverged), key=_rank_key)
    dead = sorted((r for r in results if r.diverged), key=_rank_key)
    ranked = alive[:n]
    if len(ranked) < n:
        ranked.extend(dead[: n - len(ranked)])
    return ranked


def search_space_reduction(lo: float, hi: float,
                           domain: tuple[float, float] = (0.0, 1.0)) -> float:
    """Percent of the search domain eliminated by narrowing to [lo, hi]."""
    d_lo, d_hi = domain
    if not (d_lo <= lo < hi <= d_hi):
        raise ValueError(
            f"need domain.lo <= lo < hi <= domain.hi, got "
            f"lo={lo}, hi={hi}, domain=({d_lo}, {d_hi})"
        )
    return (1.0 - (hi - lo) / (d_hi - d_lo)) * 100.0


def derive_clr_bounds(fix_range: tuple[float, float]) -> list[tuple[float, float]]:
    """Cyclic (k0, k1) candidates seeded from a good constant-rate range.

    The lower bound is pushed down one or two decades (a smaller floor does
    not miss the high-accuracy region) and the upper bound optionally up one
    decade; candidates that leave (0, 1) or lose k0 < k1 are dropped.
    """
    lo, hi = fix_range
    if not (0.0 < lo < hi):
        raise ValueError(f"need 0 < lo < hi, got ({lo}, {hi})")
    raw = [(lo / 10.0, hi), (lo / 100.0, hi), (lo, hi), (lo / 10.0, 10.0 * hi)]
    out: list[tuple[float, float]] = []
    for k0, k1 in raw:
        if 0.0 < k0 < k1 < 1.0 and (k0, k1) not in out:
            out.append((k0, k1))
    return out


def candidate_schedules(n_train: int, batch_size: int, multiples) -> list[int]:
    """Half-cycle/step lengths as multiples of the iterations per epoch."""
    if not (1 <= batch_size <= n_train):
        raise ValueError("need 1 <= batch_size <= n_train")
    per_epoch = n_train // batch_size
    return sorted({int(m) * per_epoch for m in multiples})


def _probe_value(setup: TrialSetup, value: float, epochs: tuple[int, ...]
                 ) -> tuple[np.ndarray, bool]:
    """Accuracy at each probe epoch for a constant rate, plus divergence.

    One run at max(epochs) epochs with per-epoch evaluation covers every
    probe point. The rate is probed as given, valid or not; divergence
    detection is the arbiter for out-of-range values.
    """
    per_epoch = setup.iterations_per_epoch
    config = TrainConfig(
        policy=LRPolicy.fix(value),
        batch_size=setup.batch_size,
        max_iter=max(epochs) * per_epoch,
        eval_interval=per_epoch,
        seed=setup.seed,
    )
    trace, _ = train_with_model(
        config, setup.model_spec, setup.optimizer_spec,
        setup.train_set, setup.test_set,
    )
    by_iter = {p.iteration: p.top1 for p in trace.points}
    return np.array([by_iter[e * per_epoch] for e in epochs]), trace.diverged


def fix_range_test(
    setup: TrialSetup,
    epochs_to_probe,
    value_grid,
    delta: float = 0.02,
    zoom_points: int = 8,
    domain: tuple[float, float] = (0.0, 1.0),
) -> RangeTestReport:
    """Find the constant-rate interval whose accuracy is near-best."""
    epochs = tuple(sorted(int(e) for e in epochs_to_probe))
    coarse = sorted(float(v) for v in value_grid)
    if not epochs:
        raise ValueError("epochs_to_probe must be non-empty")
    if len(coarse) < 2:
        raise InsufficientRange(
            "value_grid needs at least two values to define a range"
        )
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must be in (0, 1)")

    accuracy: dict[float, np.ndarray] = {}
    diverged: set[float] = set()

    def probe(value: float) -> None:
        accs, did_diverge = _probe_value(setup, value, epochs)
        accuracy[value] = accs
        if did_diverge:
            diverged.add(value)

    # Phase 1: walk the coarse grid downward; stop after a persistent drop.
    best_seen = -math.inf
    consecutive_drops = 0
    for value in reversed(coarse):
        probe(value)
        if value in diverged:
            continue
        best_here = float(accuracy[value].max())
        best_seen = max(best_seen, best_here)
        if best_here < (1.0 - delta) * best_seen:
            consecutive_drops += 1
            if consecutive_drops >= 2:
                break
        else:
            consecutive_drops = 0

    survivors = [
        v for v in accuracy
        if v not in diverged and accuracy[v].max() >= (1.0 - delta) * best_seen
    ]
    if not survivors:
        raise AllDiverged("every probed rate diverged")

    # Phase 2: geometric zoom across the surviving values.
    zoom_lo, zoom_hi = min(survivors), max(survivors)
    if zoom_lo == zoom_hi:
        half_decade = math.sqrt(10.0)
        zoom_lo = max(zoom_lo / half_decade, min(coarse))
        zoom_hi = min(zoom_hi * half_decade, max(coarse))
    if zoom_lo < zoom_hi:
        for value in np.geomspace(zoom_lo, zoom_hi, zoom_points):
            value = float(value)
            if all(not math.isclose(value, v, rel_tol=1e-9) for v in accuracy):
                probe(value)

    live = {v: a for v, a in accuracy.items() if v not in diverged}
    if not live:
        raise AllDiverged("every probed rate diverged")
    best_overall = max(float(a.max()) for a in live.values())
    qualifying = [
        v for v, a in live.items() if a.max() >= (1.0 - delta) * best_overall
    ]
    lo, hi = min(qualifying), max(qualifying)
    if not lo < hi:
        raise InsufficientRange(
            f"only one rate ({lo}) qualifies; cannot report a range"
        )

    tested = tuple(sorted(accuracy))
    matrix = np.vstack([accuracy[v] for v in tested])
    return RangeTestReport(
        tested_values=tested,
        epochs_probed=epochs,
        accuracy_by_value_and_epoch=matrix,
        good_range=(lo, hi),
        reduction_percent=search_space_reduction(lo, hi, domain),
        diverged_values=tuple(sorted(diverged)),
    )


# -- results CSV ------------------------------------------------------

RESULTS_HEADER = (
    "kind,k0,k1,gamma,p,l,milestones,max_iter,"
    "top1,top5,ac,cd,cdac,ld,best_iter,param_count,diverged"
)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trial_results_to_csv(results) -> str:
    lines = [RESULTS_HEADER]
    for r in results:
        d = r.policy.to_dict()
        milestones = ";".join(str(m) for m in d.get("milestones", [])) or ""
        rep = r.report
        lines.append(",".join([
            d["kind"],
            _cell(d.get("k0")),
            _cell(d.get("k1")),
            _cell(d.get("gamma")),
            _cell(d.get("p")),
            _cell(d.get("l")),
            milestones,
            _cell(d.get("max_iter")),
            _cell(rep.top1), _cell(rep.top5), _cell(rep.ac), _cell(rep.cd),
            _cell(rep.cdac), _cell(rep.ld), str(rep.best_iter),
            str(rep.param_count), str(int(r.diverged)),
        ]))
    return "\n".join(lines) + "\n"


def trial_results_from_csv(text: str) -> list[TrialResult]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != RESULTS_HEADER:
        raise ValueError("results CSV must start with the standard header")
    out: list[TrialResult] = []
    for line in lines[1:]:
        cols = line.split(",")
        if len(cols) != 17:
            raise ValueError(f"expected 17 columns, got {len(cols)}: {line!r}")
        record: dict = {"kind": cols[0]}
        for name, cell in zip(("k0", "k1", "gamma", "p"), cols[1:5]):
            if cell:
                record[name] = float(cell)
        if cols[5]:
            record["l"] = int(float(cols[5]))
        if cols[6]:
            record["milestones"] = [int(m) for m in cols[6].split(";")]
        if cols[7]:
            record["max_iter"] = int(float(cols[7]))
        policy = LRPolicy.from_dict(record)
        report = MetricReport(
            top1=float(cols[8]), top5=float(cols[9]), ac=float(cols[10]),
            cd=float(cols[11]), cdac=float(cols[12]), ld=float(cols[13]),
            best_iter=int(cols[14]), param_count=int(cols[15]),
        )
        out.append(TrialResult(policy, report, diverged=bool(int(cols[16])),
                               wall_time=0.0))
    return out
