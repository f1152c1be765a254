"""CLI behavior: verb dispatch, CSV outputs, exit codes, reproducibility."""

import json

import pytest

from lrtune.cli import build_parser, parse_policy_literal, run
from lrtune.schedules import LRPolicy, lr_at

VERBS = ["schedule", "train", "range-test", "grid", "rank", "simulate",
         "store-query", "store-recommend"]


class TestPolicyLiteral:
    def test_fix(self):
        assert parse_policy_literal("fix:0.025") == LRPolicy.fix(0.025)

    def test_triexp_full_slots(self):
        policy = parse_policy_literal("triexp:0.05:0.3:0.94", l=100)
        assert policy == LRPolicy.triexp(0.05, 0.3, 0.94, 100)

    def test_inv_skips_empty_slot(self):
        policy = parse_policy_literal("inv:0.01:0:0.0001:0.75")
        assert policy.gamma == 0.0001 and policy.p == 0.75

    def test_nstep_with_milestones(self):
        policy = parse_policy_literal("nstep:0.05:0:0.1", milestones=[150, 180])
        assert policy == LRPolicy.nstep(0.05, 0.1, [150, 180])


class TestScheduleVerb:
    def test_tri_csv_rows(self, capsys):
        code = run(["schedule", "--kind", "TRI", "--k0", "0.001", "--k1",
                    "0.006", "--l", "2000", "--t-end", "4000", "--stride",
                    "1000"])
        assert code == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "t,lr"
        assert len(lines) == 6  # header + 5 sample rows
        policy = LRPolicy.tri(0.001, 0.006, 2000)
        for line in lines[1:]:
            t_str, lr_str = line.split(",")
            assert float(lr_str) == lr_at(policy, int(t_str))

    def test_invalid_policy_exits_1(self, capsys):
        code = run(["schedule", "--kind", "TRI", "--k0", "0.006", "--k1",
                    "0.001", "--l", "2000", "--t-end", "100"])
        assert code == 1
        assert "k0 < k1" in capsys.readouterr().err

    def test_missing_required_flag_exits_1(self, capsys):
        assert run(["schedule", "--kind", "FIX", "--k0", "0.01"]) == 1

    def test_out_file(self, tmp_path):
        out = tmp_path / "sched.csv"
        code = run(["schedule", "--kind", "FIX", "--k0", "0.01",
                    "--t-end", "10", "--stride", "5", "--out", str(out)])
        assert code == 0
        assert out.read_text() == "t,lr\n0,0.01\n5,0.01\n10,0.01\n"


class TestSimulateVerb:
    def test_double_well_default_row_count(self, capsys):
        code = run(["simulate", "--surface", "double-well", "--policy",
                    "fix:0.025", "--t", "200"])
        assert code == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "t,x,y,f,lr"
        assert len(lines) == 202  # header + 201 trajectory points

    def test_reproducible_output(self, tmp_path):
        argv = ["simulate", "--surface", "double-well", "--policy",
                "triexp:0.05:0.3:0.94", "--l", "100", "--t", "200"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(argv + ["--out", str(a)]) == 0
        assert run(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestTrainVerb:
    def test_blobs_trace(self, tmp_path):
        out = tmp_path / "trace.csv"
        code = run([
            "train", "--policy", "fix:0.05", "--data", "blobs",
            "--blobs-n-per-class", "50", "--blobs-classes", "3",
            "--blobs-dim", "8", "--blobs-separation", "8",
            "--model", "softmax-linear", "--iters", "36", "--batch-size", "10",
            "--eval-interval", "12", "--seed", "5", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "iter,lr,train_loss,test_loss,top1,top5"
        assert len(lines) == 5  # evals at 0, 12, 24, plus final at 36

    def test_byte_identical_reruns(self, tmp_path):
        argv = [
            "train", "--policy", "tri:0.01:0.06", "--l", "12", "--data",
            "blobs", "--blobs-n-per-class", "50", "--blobs-dim", "8",
            "--iters", "24", "--batch-size", "10", "--eval-interval", "12",
            "--seed", "9",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(argv + ["--out", str(a)]) == 0
        assert run(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestGridRankAndStore:
    @pytest.fixture
    def grid_spec(self, tmp_path):
        spec = {
            "dataset_id": "blobs-unit",
            "model_id": "mlp-8",
            "task": "classification-3",
            "dataset": {"type": "blobs", "seed": 7, "n_per_class": 50,
                        "classes": 3, "dim": 8, "separation": 8.0},
            "model": {"arch": "mlp", "hidden_units": 8,
                      "weight_decay": 0.0005},
            "optimizer": {"kind": "momentum", "momentum": 0.9},
            "trial": {"batch_size": 10, "epochs": 2, "seed": 11},
            "policies": [
                LRPolicy.fix(0.05).to_dict(),
                LRPolicy.tri(0.01, 0.06, 12).to_dict(),
                LRPolicy.fix(10.0).to_dict(),
            ],
        }
        path = tmp_path / "grid.json"
        path.write_text(json.dumps(spec))
        return path

    def test_grid_rank_store_round_trip(self, grid_spec, tmp_path, capsys):
        results_csv = tmp_path / "results.csv"
        store_path = tmp_path / "store.jsonl"
        assert run(["grid", "--spec-file", str(grid_spec), "--out",
                    str(results_csv), "--store", str(store_path)]) == 0
        text = results_csv.read_text()
        assert text.count("\n") == 4  # header + three policies
        assert ",1" in text.splitlines()[3]  # FIX(10) row flagged diverged

        ranked_csv = tmp_path / "ranked.csv"
        assert run(["rank", "--results", str(results_csv), "--n", "2",
                    "--out", str(ranked_csv)]) == 0
        ranked = ranked_csv.read_text().strip().split("\n")
        assert len(ranked) == 3
        assert not ranked[1].endswith(",1")  # best entry is not diverged

        # diverged trials are not persisted; the two live ones are
        assert run(["store-query", "--store", str(store_path),
                    "--dataset", "blobs-unit"]) == 0
        assert len(capsys.readouterr().out.strip().split("\n")) == 3

        assert run(["store-recommend", "--store", str(store_path),
                    "--dataset", "blobs-unit", "--model", "mlp-8",
                    "--task", "classification-3", "--n", "1"]) == 0
        out = capsys.readouterr().out.strip().split("\n")
        assert out[0] == "tier,policy,top1,best_iter"
        assert out[1].startswith("1,")

    def test_grid_reproducible(self, grid_spec, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(["grid", "--spec-file", str(grid_spec), "--out", str(a)]) == 0
        assert run(["grid", "--spec-file", str(grid_spec), "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_store_output_is_valid_csv(self, grid_spec, tmp_path, capsys):
        import csv
        import io

        store_path = tmp_path / "store.jsonl"
        assert run(["grid", "--spec-file", str(grid_spec),
                    "--out", str(tmp_path / "r.csv"),
                    "--store", str(store_path)]) == 0
        assert run(["store-recommend", "--store", str(store_path),
                    "--dataset", "blobs-unit", "--model", "mlp-8",
                    "--task", "classification-3", "--n", "2"]) == 0
        rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
        assert rows[0] == ["tier", "policy", "top1", "best_iter"]
        for row in rows[1:]:
            LRPolicy.from_json(row[1])  # the quoted JSON cell parses back

    def test_store_env_var(self, grid_spec, tmp_path, monkeypatch, capsys):
        store_path = tmp_path / "env-store.jsonl"
        monkeypatch.setenv("LRTUNE_STORE", str(store_path))
        assert run(["grid", "--spec-file", str(grid_spec),
                    "--out", str(tmp_path / "r.csv")]) == 0
        assert store_path.exists()
        assert run(["store-query", "--dataset", "blobs-unit"]) == 0
        assert len(capsys.readouterr().out.strip().split("\n")) == 3


class TestExitCodes:
    def test_unknown_verb(self, capsys):
        assert run(["frobnicate"]) == 1

    def test_unknown_flag(self, capsys):
        assert run(["schedule", "--bogus", "1"]) == 1

    def test_missing_input_file_is_io_error(self, tmp_path):
        assert run(["rank", "--results", str(tmp_path / "missing.csv")]) == 2

    def test_no_store_path(self, capsys, monkeypatch):
        monkeypatch.delenv("LRTUNE_STORE", raising=False)
        assert run(["store-query", "--dataset", "x"]) == 1

    @pytest.mark.parametrize("verb", VERBS)
    def test_help_exits_zero(self, verb, capsys):
        assert run([verb, "--help"]) == 0
        assert "--help" in capsys.readouterr().out

    def test_top_level_help(self, capsys):
        assert run(["--help"]) == 0
        text = capsys.readouterr().out
        for verb in VERBS:
            assert verb in text


def test_parser_lists_all_verbs():
    parser = build_parser()
    text = parser.format_help()
    for verb in VERBS:
        assert verb in text
