"""Training-loop behavior: determinism, evaluation schedule, epoch
arithmetic, divergence marking, and the convex monotone smoke test."""

import pytest

import lrtune.engine.loop as loop_module
from lrtune.engine import (
    ModelSpec,
    OptimizerSpec,
    TrainConfig,
    synth_blobs,
    train,
)
from lrtune.schedules import LRPolicy
from oracles import nearest_center_accuracy


@pytest.fixture(scope="module")
def blobs():
    return synth_blobs(seed=7, n_per_class=100, n_classes=3, n_features=10,
                       separation=8.0)


def _config(policy, max_iter=120, eval_interval=40, batch_size=20, seed=3):
    return TrainConfig(policy=policy, batch_size=batch_size, max_iter=max_iter,
                       eval_interval=eval_interval, seed=seed)


class TestTraceShape:
    def test_zero_iterations_single_eval(self, blobs):
        trace = train(_config(LRPolicy.fix(0.1), max_iter=0, eval_interval=1),
                      ModelSpec(), OptimizerSpec(), *blobs)
        assert len(trace.points) == 1
        assert trace.points[0].iteration == 0
        assert not trace.diverged

    def test_eval_points_and_final(self, blobs):
        trace = train(_config(LRPolicy.fix(0.1)), ModelSpec(), OptimizerSpec(),
                      *blobs)
        assert [p.iteration for p in trace.points] == [0, 40, 80, 120]

    def test_lr_column_matches_schedule(self, blobs):
        policy = LRPolicy.tri(0.01, 0.06, 50)
        trace = train(_config(policy), ModelSpec(), OptimizerSpec(), *blobs)
        from lrtune.schedules import lr_at
        for point in trace.points:
            assert point.lr == lr_at(policy, point.iteration)

    def test_csv_format(self, blobs):
        trace = train(_config(LRPolicy.fix(0.1), max_iter=40),
                      ModelSpec(), OptimizerSpec(), *blobs)
        lines = trace.to_csv().strip().split("\n")
        assert lines[0] == "iter,lr,train_loss,test_loss,top1,top5"
        assert len(lines) == 1 + len(trace.points)
        assert lines[1].startswith("0,0.1,")


class TestDeterminism:
    def test_identical_configs_identical_traces(self, blobs):
        cfg = _config(LRPolicy.tri2(0.01, 0.06, 30))
        spec = ModelSpec(arch="mlp", hidden_units=8)
        opt = OptimizerSpec("momentum", 0.9)
        a = train(cfg, spec, opt, *blobs)
        b = train(cfg, spec, opt, *blobs)
        assert a.points == b.points
        assert a.diverged == b.diverged

    def test_different_seed_changes_trace(self, blobs):
        spec = ModelSpec(arch="mlp", hidden_units=8)
        a = train(_config(LRPolicy.fix(0.05), seed=1), spec, OptimizerSpec(), *blobs)
        b = train(_config(LRPolicy.fix(0.05), seed=2), spec, OptimizerSpec(), *blobs)
        assert a.points != b.points


class TestEpochArithmetic:
    def test_one_shuffle_per_epoch(self, blobs, monkeypatch):
        calls = []
        real = loop_module.labeled_rng

        def spy(seed, *labels):
            if labels and labels[0] == "shuffle":
                calls.append(labels[1])
            return real(seed, *labels)

        monkeypatch.setattr(loop_module, "labeled_rng", spy)
        # n=240, batch=20 -> 12 iterations per epoch; 30 iterations = 3 epochs
        train(_config(LRPolicy.fix(0.05), max_iter=30, eval_interval=10),
              ModelSpec(), OptimizerSpec(), *blobs)
        assert calls == [0, 1, 2]

    def test_batch_larger_than_dataset_rejected(self, blobs):
        with pytest.raises(ValueError):
            train(_config(LRPolicy.fix(0.05), batch_size=500),
                  ModelSpec(), OptimizerSpec(), *blobs)


class TestDivergence:
    def test_huge_rate_marks_diverged(self, blobs):
        trace = train(_config(LRPolicy.fix(10.0)),
                      ModelSpec(arch="mlp", hidden_units=8, weight_decay=0.0005),
                      OptimizerSpec("momentum", 0.9), *blobs)
        assert trace.diverged
        assert trace.diverged_at is not None
        assert len(trace.points) == 4  # the run still records everything

    def test_sane_rate_not_marked(self, blobs):
        trace = train(_config(LRPolicy.fix(0.05)),
                      ModelSpec(arch="mlp", hidden_units=8, weight_decay=0.0005),
                      OptimizerSpec("momentum", 0.9), *blobs)
        assert not trace.diverged


class TestLearning:
    def test_easy_blobs_reach_nearest_center_accuracy(self):
        train_set, test_set = synth_blobs(seed=5, n_per_class=100, n_classes=2,
                                          n_features=8, separation=10.0)
        oracle_acc = nearest_center_accuracy(
            train_set.features, train_set.labels,
            test_set.features, test_set.labels,
        )
        trace = train(
            TrainConfig(policy=LRPolicy.fix(0.1), batch_size=20, max_iter=500,
                        eval_interval=100, seed=0),
            ModelSpec(), OptimizerSpec(), train_set, test_set,
        )
        assert oracle_acc >= 99.0
        assert trace.points[-1].top1 >= 95.0

    def test_convex_loss_monotone_at_small_rate(self, blobs):
        # weight decay 0, lr 1e-3, softmax-linear: full-train loss must not
        # increase across evaluations
        trace = train(
            TrainConfig(policy=LRPolicy.fix(1e-3), batch_size=20, max_iter=240,
                        eval_interval=24, seed=1),
            ModelSpec(weight_decay=0.0), OptimizerSpec(), *blobs,
        )
        losses = [p.train_loss for p in trace.points]
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_top5_caps_at_class_count(self, blobs):
        trace = train(_config(LRPolicy.fix(0.05), max_iter=40),
                      ModelSpec(), OptimizerSpec(), *blobs)
        assert all(p.top5 == 100.0 for p in trace.points)  # C=3 so top-3


class TestConfigValidation:
    def test_eval_interval_must_fit(self):
        with pytest.raises(ValueError):
            TrainConfig(policy=LRPolicy.fix(0.1), batch_size=10, max_iter=5,
                        eval_interval=10, seed=0)

    def test_batch_size_positive(self):
        with pytest.raises(ValueError):
            TrainConfig(policy=LRPolicy.fix(0.1), batch_size=0, max_iter=10,
                        eval_interval=5, seed=0)
