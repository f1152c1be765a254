"""The full tuning loop on synthetic blobs, end to end.

1. Range-test constant rates (coarse decades, then a zoom grid).
2. Derive cyclic (k0, k1) candidates from the good constant range.
3. Run the candidate grid with identical seeds and rank the results.
4. Persist everything to a policy store and ask it for a recommendation,
   first for the exact same job, then for a job it has never seen.

Run:  python demos/tuning_pipeline.py
"""

import tempfile
from pathlib import Path

from lrtune import (
    LRPolicy,
    MetricReport,
    PolicyStore,
    TrialRecord,
    TrialSetup,
    candidate_schedules,
    derive_clr_bounds,
    fix_range_test,
    rank_policies,
    run_grid,
)
from lrtune.engine import ModelSpec, OptimizerSpec, synth_blobs

DATASET_ID = "blobs(sep=6,C=3,d=20)"
MODEL_ID = "mlp-32"
TASK = "classification-3"


def main() -> None:
    train_set, test_set = synth_blobs(seed=2024, n_per_class=1000, n_classes=3,
                                      n_features=20, separation=6.0)
    setup = TrialSetup(
        train_set=train_set,
        test_set=test_set,
        model_spec=ModelSpec(arch="mlp", hidden_units=32, weight_decay=0.0005),
        optimizer_spec=OptimizerSpec("momentum", 0.9),
        batch_size=50,
        epochs=3,
        seed=42,
    )

    print("== step 1: constant-rate range test")
    report = fix_range_test(setup, epochs_to_probe=[1, 2],
                            value_grid=[1e-4, 1e-3, 1e-2, 1e-1, 1.0])
    for value, accs in zip(report.tested_values,
                           report.accuracy_by_value_and_epoch):
        flag = "  DIVERGED" if value in report.diverged_values else ""
        print(f"   rate {value:<10.5g} best acc {accs.max():6.2f}%{flag}")
    lo, hi = report.good_range
    print(f"   good range [{lo:g}, {hi:g}] cuts the [0, 1] search space by "
          f"{report.reduction_percent:.2f}%\n")

    print("== step 2: cyclic bounds and half-cycle candidates")
    bounds = derive_clr_bounds((lo, hi))
    half_cycles = candidate_schedules(train_set.n_samples, setup.batch_size,
                                      multiples=[1, 2])
    print(f"   (k0, k1) candidates: {[(f'{a:g}', f'{b:g}') for a, b in bounds]}")
    print(f"   half-cycle lengths:  {half_cycles}\n")

    print("== step 3: grid over constant + cyclic policies")
    policies = [LRPolicy.fix(lo), LRPolicy.fix(hi), LRPolicy.fix(10.0)]
    policies += [LRPolicy.tri(k0, k1, l) for k0, k1 in bounds
                 for l in half_cycles]
    results = run_grid(policies, setup, workers=2)
    ranked = rank_policies(results, len(results))
    print(f"   {'policy':<38}{'top1':>7}{'best@':>8}{'LD':>9}  diverged")
    for r in ranked:
        print(f"   {r.policy.label():<38}{r.report.top1:>7.2f}"
              f"{r.report.best_iter:>8}{r.report.ld:>9.4f}  {r.diverged}")
    print()

    print("== step 4: store results, then ask for recommendations")
    store_path = Path(tempfile.mkdtemp()) / "trials.jsonl"
    store = PolicyStore(store_path)
    for r in results:
        if r.diverged:
            continue
        store.put_result(TrialRecord(
            dataset_id=DATASET_ID, model_id=MODEL_ID, task=TASK,
            policy=r.policy, report=r.report, seed=setup.seed,
        ))
    print(f"   stored {len(store)} records at {store_path}")

    tier, records = store.recommend_detailed(DATASET_ID, MODEL_ID, TASK, 3)
    print(f"   same job      -> tier {tier}: "
          f"{[r.policy.label() for r in records]}")
    tier, records = store.recommend_detailed("unseen-images", "resnet", TASK, 3)
    print(f"   same task     -> tier {tier}: "
          f"{[r.policy.label() for r in records]}")
    tier, records = store.recommend_detailed("unseen", "unseen", "regression", 3)
    print(f"   unknown job   -> tier {tier}: run a fresh range test")


if __name__ == "__main__":
    main()
