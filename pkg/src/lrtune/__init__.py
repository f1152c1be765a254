"""lrtune: learning-rate policy benchmarking at desk scale.

Thirteen schedule functions behind one evaluator, confidence/cost/robustness
metrics, a deterministic mini training engine, a 2-D surface simulator, a
range-test/grid/rank tuning pipeline, and a persistent result store that
recommends starting policies for new jobs.
"""

from .metrics import (
    InsufficientClasses,
    LossPair,
    MetricReport,
    NoCorrectSamples,
    PredictionBatch,
    average_confidence,
    best_iteration,
    confidence_deviation,
    confidence_deviation_across_classes,
    loss_difference,
    per_class_average_confidence,
    top_k_accuracy,
)
from .schedules import (
    LRFunctionKind,
    LRPolicy,
    ScheduleDomainError,
    SchedulePoint,
    ValidationResult,
    lr_at,
    param_count,
    schedule_series,
    validate,
)
from .store import PolicyStore, StoreCorrupt, TrialRecord
from .surface import (
    DoubleWellSurface,
    QuadraticSurface,
    Trajectory,
    converged_to,
    make_surface,
    simulate,
)
from .tuner import (
    AllDiverged,
    InsufficientRange,
    RangeTestReport,
    TrialResult,
    TrialSetup,
    candidate_schedules,
    derive_clr_bounds,
    fix_range_test,
    rank_policies,
    run_grid,
    run_repeated,
    run_trial,
    search_space_reduction,
)

__version__ = "0.1.0"

__all__ = [
    "AllDiverged",
    "DoubleWellSurface",
    "InsufficientClasses",
    "InsufficientRange",
    "LRFunctionKind",
    "LRPolicy",
    "LossPair",
    "MetricReport",
    "NoCorrectSamples",
    "PolicyStore",
    "PredictionBatch",
    "QuadraticSurface",
    "RangeTestReport",
    "ScheduleDomainError",
    "SchedulePoint",
    "StoreCorrupt",
    "Trajectory",
    "TrialRecord",
    "TrialResult",
    "TrialSetup",
    "ValidationResult",
    "average_confidence",
    "best_iteration",
    "candidate_schedules",
    "confidence_deviation",
    "confidence_deviation_across_classes",
    "converged_to",
    "derive_clr_bounds",
    "fix_range_test",
    "loss_difference",
    "lr_at",
    "make_surface",
    "param_count",
    "per_class_average_confidence",
    "rank_policies",
    "run_grid",
    "run_repeated",
    "run_trial",
    "schedule_series",
    "search_space_reduction",
    "simulate",
    "top_k_accuracy",
    "validate",
]
