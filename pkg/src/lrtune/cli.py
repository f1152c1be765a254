"""Command-line frontend.

Verbs: schedule, train, range-test, grid, rank, simulate, store-query,
store-recommend. Every output is CSV, to --out or stdout; every run with the
same argv and input files produces byte-identical output. Exit codes: 0
success, 1 validation/usage error, 2 I/O error.

Policies are given either as explicit flags (--kind/--k0/...) on `schedule`
or as a literal `kind:k0[:k1[:gamma[:p]]]` (e.g. ``fix:0.025``,
``triexp:0.05:0.3:0.94``) with --l, --milestones and --max-iter supplied
separately where the kind needs them.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import engine, surface, tuner
from .metrics import METRIC_REPORT_HEADER
from .schedules import LRPolicy, schedule_series, validate
from .store import PolicyStore, TrialRecord

STORE_ENV_VAR = "LRTUNE_STORE"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class CliError(Exception):
    """Validation-level failure; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise CliError(message)


def parse_policy_literal(text: str, l: int | None = None, milestones=None,
                         max_iter: int | None = None) -> LRPolicy:
    """``kind:k0[:k1[:gamma[:p]]]``; empty slots stay unset."""
    parts = text.split(":")
    kind = parts[0].strip().upper()
    slots = []
    for cell in parts[1:5]:
        cell = cell.strip()
        slots.append(float(cell) if cell else None)
    slots += [None] * (4 - len(slots))
    k0, k1, gamma, p = slots
    if k0 is None:
        raise CliError(f"policy literal {text!r} is missing k0")
    return LRPolicy.from_dict({
        "kind": kind, "k0": k0, "k1": k1, "gamma": gamma, "p": p,
        "l": l, "milestones": milestones, "max_iter": max_iter,
    })


def _parse_milestones(text: str | None):
    if not text:
        return None
    return [int(m) for m in text.replace(";", ",").split(",") if m.strip()]


def _require_valid(policy: LRPolicy) -> None:
    result = validate(policy)
    if not result.ok:
        raise CliError(
            f"invalid {policy.kind.value} policy: " + "; ".join(result.violations)
        )


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_quote(text: str) -> str:
    return '"' + text.replace('"', '""') + '"'


# -- dataset/model/optimizer assembly ---------------------------------

def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", choices=["blobs", "idx", "cifar"], default="blobs")
    p.add_argument("--blobs-n-per-class", type=int, default=500)
    p.add_argument("--blobs-classes", type=int, default=3)
    p.add_argument("--blobs-dim", type=int, default=20)
    p.add_argument("--blobs-separation", type=float, default=6.0)
    p.add_argument("--idx-train-images")
    p.add_argument("--idx-train-labels")
    p.add_argument("--idx-test-images")
    p.add_argument("--idx-test-labels")
    p.add_argument("--cifar-train", nargs="+")
    p.add_argument("--cifar-test", nargs="+")
    p.add_argument("--limit-train", type=int, help="use only the first N train samples")
    p.add_argument("--limit-test", type=int, help="use only the first N test samples")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=["softmax-linear", "mlp"],
                   default="softmax-linear")
    p.add_argument("--hidden", type=int, default=100)
    p.add_argument("--init", choices=["xavier", "gaussian"], default="xavier")
    p.add_argument("--init-sigma", type=float, default=0.01)
    p.add_argument("--weight-decay", type=float, default=0.0)
    p.add_argument("--optimizer", choices=["sgd", "momentum", "nesterov"],
                   default="sgd")
    p.add_argument("--momentum", type=float, default=0.9)


def _add_policy_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--policy", required=True,
                   help="literal kind:k0[:k1[:gamma[:p]]]")
    p.add_argument("--l", type=int)
    p.add_argument("--milestones", help="comma-separated iteration counts")
    p.add_argument("--max-iter", type=int, help="POLY horizon")


def _build_datasets(args) -> tuple[engine.Dataset, engine.Dataset]:
    if args.data == "blobs":
        train_set, test_set = engine.synth_blobs(
            seed=args.seed,
            n_per_class=args.blobs_n_per_class,
            n_classes=args.blobs_classes,
            n_features=args.blobs_dim,
            separation=args.blobs_separation,
        )
    elif args.data == "idx":
        needed = (args.idx_train_images, args.idx_train_labels,
                  args.idx_test_images, args.idx_test_labels)
        if any(v is None for v in needed):
            raise CliError("--data idx needs all four --idx-* paths")
        train_set = engine.load_idx(args.idx_train_images, args.idx_train_labels)
        test_set = engine.load_idx(args.idx_test_images, args.idx_test_labels,
                                   n_classes=train_set.n_classes, split="test")
    else:
        if not args.cifar_train or not args.cifar_test:
            raise CliError("--data cifar needs --cifar-train and --cifar-test")
        train_set = engine.load_cifar_bin(args.cifar_train)
        test_set = engine.load_cifar_bin(args.cifar_test, split="test")
    if args.limit_train:
        train_set = train_set.take(args.limit_train)
    if args.limit_test:
        test_set = test_set.take(args.limit_test)
    return train_set, test_set


def _build_model_spec(args) -> engine.ModelSpec:
    arch = "softmax_linear" if args.model == "softmax-linear" else "mlp"
    return engine.ModelSpec(
        arch=arch,
        hidden_units=args.hidden if arch == "mlp" else None,
        init=args.init,
        init_sigma=args.init_sigma,
        weight_decay=args.weight_decay,
    )


def _build_optimizer_spec(args) -> engine.OptimizerSpec:
    mu = args.momentum if args.optimizer != "sgd" else 0.0
    return engine.OptimizerSpec(kind=args.optimizer, momentum=mu)


# -- verbs --------------------------------------------------------------

def _cmd_schedule(args) -> int:
    policy = LRPolicy.from_dict({
        "kind": args.kind.upper(), "k0": args.k0, "k1": args.k1,
        "gamma": args.gamma, "p": args.p, "l": args.l,
        "milestones": _parse_milestones(args.milestones),
        "max_iter": args.max_iter,
    })
    _require_valid(policy)
    points = schedule_series(policy, args.t_end, args.stride)
    lines = ["t,lr"] + [f"{p.t},{p.lr!r}" for p in points]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_train(args) -> int:
    policy = parse_policy_literal(args.policy, args.l,
                                  _parse_milestones(args.milestones),
                                  args.max_iter or args.iters)
    _require_valid(policy)
    train_set, test_set = _build_datasets(args)
    config = engine.TrainConfig(
        policy=policy, batch_size=args.batch_size, max_iter=args.iters,
        eval_interval=args.eval_interval, seed=args.seed,
    )
    trace = engine.train(config, _build_model_spec(args),
                         _build_optimizer_spec(args), train_set, test_set)
    _emit(trace.to_csv(), args.out)
    if trace.diverged:
        print(f"# diverged at iteration {trace.diverged_at}", file=sys.stderr)
    return EXIT_OK


def _cmd_range_test(args) -> int:
    train_set, test_set = _build_datasets(args)
    setup = tuner.TrialSetup(
        train_set=train_set, test_set=test_set,
        model_spec=_build_model_spec(args),
        optimizer_spec=_build_optimizer_spec(args),
        batch_size=args.batch_size, epochs=max(args.epochs), seed=args.seed,
    )
    report = tuner.fix_range_test(
        setup, args.epochs, args.values, delta=args.delta,
        zoom_points=args.zoom_points,
    )
    header = "value,diverged," + ",".join(f"acc_epoch_{e}" for e in report.epochs_probed)
    lines = [header]
    for i, value in enumerate(report.tested_values):
        accs = ",".join(repr(a) for a in report.accuracy_by_value_and_epoch[i])
        lines.append(f"{value!r},{int(value in report.diverged_values)},{accs}")
    lines.append("")
    lines.append("good_lo,good_hi,reduction_percent")
    lo, hi = report.good_range
    lines.append(f"{lo!r},{hi!r},{report.reduction_percent!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _load_grid_spec(path: str) -> dict:
    spec = json.loads(Path(path).read_text())
    for key in ("dataset_id", "model_id", "task", "dataset", "model",
                "optimizer", "trial", "policies"):
        if key not in spec:
            raise CliError(f"grid spec is missing {key!r}")
    return spec


def _setup_from_grid_spec(spec: dict, seed_override: int | None) -> tuner.TrialSetup:
    ds = spec["dataset"]
    trial = spec["trial"]
    seed = seed_override if seed_override is not None else trial.get("seed", 0)
    if ds["type"] == "blobs":
        train_set, test_set = engine.synth_blobs(
            seed=ds.get("seed", seed), n_per_class=ds["n_per_class"],
            n_classes=ds["classes"], n_features=ds["dim"],
            separation=ds["separation"],
        )
    elif ds["type"] == "idx":
        train_set = engine.load_idx(ds["train_images"], ds["train_labels"])
        test_set = engine.load_idx(ds["test_images"], ds["test_labels"],
                                   n_classes=train_set.n_classes, split="test")
    else:
        raise CliError(f"unknown dataset type {ds['type']!r}")
    if "limit_train" in ds:
        train_set = train_set.take(ds["limit_train"])
    if "limit_test" in ds:
        test_set = test_set.take(ds["limit_test"])
    model = spec["model"]
    model_spec = engine.ModelSpec(
        arch=model.get("arch", "softmax_linear"),
        hidden_units=model.get("hidden_units"),
        init=model.get("init", "xavier"),
        init_sigma=model.get("init_sigma", 0.01),
        weight_decay=model.get("weight_decay", 0.0),
    )
    opt = spec["optimizer"]
    optimizer_spec = engine.OptimizerSpec(
        kind=opt.get("kind", "sgd"), momentum=opt.get("momentum", 0.0)
    )
    return tuner.TrialSetup(
        train_set=train_set, test_set=test_set, model_spec=model_spec,
        optimizer_spec=optimizer_spec, batch_size=trial["batch_size"],
        epochs=trial["epochs"], eval_interval=trial.get("eval_interval"),
        seed=seed,
    )


def _cmd_grid(args) -> int:
    spec = _load_grid_spec(args.spec_file)
    setup = _setup_from_grid_spec(spec, args.seed)
    policies = [LRPolicy.from_dict(p) for p in spec["policies"]]
    results = tuner.run_grid(policies, setup, workers=args.workers)
    _emit(tuner.trial_results_to_csv(results), args.out)
    store_path = args.store or os.environ.get(STORE_ENV_VAR)
    if store_path:
        store = PolicyStore(store_path)
        for r in results:
            if r.diverged:
                continue  # TrialRecord carries no divergence flag
            store.put_result(TrialRecord(
                dataset_id=spec["dataset_id"], model_id=spec["model_id"],
                task=spec["task"], policy=r.policy, report=r.report,
                seed=setup.seed,
            ))
    return EXIT_OK


def _cmd_rank(args) -> int:
    results = tuner.trial_results_from_csv(Path(args.results).read_text())
    ranked = tuner.rank_policies(results, args.n)
    _emit(tuner.trial_results_to_csv(ranked), args.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    policy = parse_policy_literal(args.policy, args.l,
                                  _parse_milestones(args.milestones),
                                  args.max_iter)
    _require_valid(policy)
    if args.surface == "quadratic":
        hessian = np.array([[args.hxx, args.hxy], [args.hxy, args.hyy]])
        surf = surface.QuadraticSurface(hessian)
    else:
        surf = surface.DoubleWellSurface()
    x0 = [float(v) for v in args.x0.split(",")]
    traj = surface.simulate(surf, policy, x0, args.t)
    _emit(traj.to_csv(), args.out)
    return EXIT_OK


def _store_from_args(args) -> PolicyStore:
    path = args.store or os.environ.get(STORE_ENV_VAR)
    if not path:
        raise CliError(f"no store path: pass --store or set {STORE_ENV_VAR}")
    return PolicyStore(path)


def _cmd_store_query(args) -> int:
    store = _store_from_args(args)
    records = store.query(args.dataset, args.model, args.task)
    lines = ["id,dataset_id,model_id,task,policy," + METRIC_REPORT_HEADER]
    for r in records:
        lines.append(
            f"{r.record_id},{r.dataset_id},{r.model_id},{r.task},"
            f"{_csv_quote(r.policy.to_json())}," + r.report.to_csv_row()
        )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_store_recommend(args) -> int:
    store = _store_from_args(args)
    tier, records = store.recommend_detailed(args.dataset, args.model,
                                             args.task, args.n)
    lines = ["tier,policy,top1,best_iter"]
    for r in records:
        lines.append(f"{tier},{_csv_quote(r.policy.to_json())},{r.report.top1!r},"
                     f"{r.report.best_iter}")
    _emit("\n".join(lines) + "\n", args.out)
    if tier is None:
        print("# no stored records match; run a range test", file=sys.stderr)
    return EXIT_OK


# -- parser -------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="lrtune",
                     description="Learning-rate policy benchmarking toolkit")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("schedule", help="evaluate a schedule as CSV")
    p.add_argument("--kind", required=True)
    p.add_argument("--k0", type=float, required=True)
    p.add_argument("--k1", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--l", type=int)
    p.add_argument("--milestones")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--t-end", type=int, required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("train", help="train once and emit the trace CSV")
    _add_policy_flags(p)
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--iters", type=int, required=True, help="training iterations")
    p.add_argument("--batch-size", type=int, default=100)
    p.add_argument("--eval-interval", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("range-test",
                       help="sweep constant rates for a good range")
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--values", type=float, nargs="+", required=True)
    p.add_argument("--epochs", type=int, nargs="+", default=[1, 2, 4])
    p.add_argument("--delta", type=float, default=0.02)
    p.add_argument("--zoom-points", type=int, default=8)
    p.add_argument("--batch-size", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_range_test)

    p = sub.add_parser("grid", help="run every policy in a grid spec file")
    p.add_argument("--spec-file", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, help="override the grid file's trial seed")
    p.add_argument("--store", help=f"also record results (default ${STORE_ENV_VAR})")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("rank", help="rank a grid results CSV")
    p.add_argument("--results", required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("simulate", help="gradient descent on a 2-D surface")
    p.add_argument("--surface", choices=["quadratic", "double-well"],
                   default="double-well")
    p.add_argument("--hxx", type=float, default=1.0)
    p.add_argument("--hxy", type=float, default=0.0)
    p.add_argument("--hyy", type=float, default=1.0)
    p.add_argument("--policy", required=True)
    p.add_argument("--l", type=int)
    p.add_argument("--milestones")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--x0", default="-2.5,0.5")
    p.add_argument("--t", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("store-query", help="list matching stored records")
    p.add_argument("--store")
    p.add_argument("--dataset")
    p.add_argument("--model")
    p.add_argument("--task")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_store_query)

    p = sub.add_parser("store-recommend",
                       help="recommend starting policies from the store")
    p.add_argument("--store")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_store_recommend)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # argparse --help
            return int(exc.code or 0)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
