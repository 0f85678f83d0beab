import json
import os
import tempfile
from contextlib import redirect_stderr
from io import StringIO

from django.core.management import CommandError, call_command
from django.test import SimpleTestCase

from apps.bench.models import CSV_COLUMNS
from apps.common.exceptions import ConfigError, NumericalError, SelfCheckError
from apps.common.management.base import EXIT_NUMERICAL, EXIT_SELF_CHECK, EXIT_USAGE, exit_code_for, parse_int_list
from apps.common.management.commands.bench import Command as BenchCommand
from apps.graphs.io import load_jsonl, load_with_split
from apps.trainer.checkpoint import load_checkpoint
from apps.trainer.evaluation import evaluate

TINY = ["sep_dim=6", "pred_dim=6", "sep_layers=1", "pred_layers=2", "batch_size=8", "num_rounds=2",
        "learning_rate=0.01"]


class ExitCodeTest(SimpleTestCase):
    def test_success_mapping(self):
        self.assertEqual(exit_code_for(ConfigError("x")), EXIT_USAGE)
        self.assertEqual(exit_code_for(NumericalError("x")), EXIT_NUMERICAL)
        self.assertEqual(exit_code_for(SelfCheckError("x")), EXIT_SELF_CHECK)

    def test_success_parse_int_list(self):
        self.assertEqual(parse_int_list("8, 32,128", "--batch-sizes"), [8, 32, 128])

    def test_fail_parse_int_list(self):
        with self.assertRaises(ConfigError):
            parse_int_list("8,x", "--batch-sizes")
        with self.assertRaises(ConfigError):
            parse_int_list("", "--seeds")

    def test_fail_bad_argument_type_is_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            _call_raw("bench", "--seed", "abc")
        self.assertEqual(ctx.exception.returncode, EXIT_USAGE)

    def test_fail_missing_required_argument_is_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            _call_raw("eval", data="toy.jsonl")
        self.assertEqual(ctx.exception.returncode, EXIT_USAGE)

    def test_fail_command_line_argument_error_exits_1(self):
        with redirect_stderr(StringIO()) as stderr, self.assertRaises(SystemExit) as ctx:
            BenchCommand().run_from_argv(["manage.py", "bench", "--seed", "abc"])
        self.assertEqual(ctx.exception.code, EXIT_USAGE)
        self.assertIn("--seed", stderr.getvalue())


class GenDataCommandTest(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        super().setUp()

    def tearDown(self):
        self.tmp.cleanup()
        super().tearDown()

    def test_success_writes_dataset_and_summary(self):
        path = os.path.join(self.tmp.name, "data", "toy.jsonl")
        summary = _call("gen_data", out=path, seed=3, overrides=["num_graphs=20"])

        with open(path, encoding="utf-8") as f:
            lines = [line for line in f if line.strip()]
        self.assertEqual(len(lines), 20)
        self.assertEqual(summary["num_graphs"], 20)
        self.assertEqual(summary["num_labeled"], 20)
        self.assertEqual(sum(summary["label_counts"].values()), 20)
        self.assertTrue(os.path.exists(summary["splits"]))

        graphs = load_jsonl(path)
        self.assertEqual(summary["max_nodes"], max(g.num_nodes for g in graphs))

    def test_success_deterministic(self):
        a = os.path.join(self.tmp.name, "a.jsonl")
        b = os.path.join(self.tmp.name, "b.jsonl")
        _call("gen_data", out=a, seed=5, overrides=["num_graphs=15"])
        _call("gen_data", out=b, seed=5, overrides=["num_graphs=15"])
        with open(a, "rb") as fa, open(b, "rb") as fb:
            self.assertEqual(fa.read(), fb.read())

    def test_fail_invalid_spec(self):
        with self.assertRaises(CommandError) as ctx:
            _call("gen_data", out=os.path.join(self.tmp.name, "x.jsonl"), overrides=["spurious_bias=1.5"])
        self.assertEqual(ctx.exception.returncode, EXIT_USAGE)


class TrainCommandTest(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.data = os.path.join(self.tmp.name, "toy.jsonl")
        self.ckpt = os.path.join(self.tmp.name, "run", "model.json")
        _call("gen_data", out=self.data, seed=1, overrides=["num_graphs=24"])
        super().setUp()

    def tearDown(self):
        self.tmp.cleanup()
        super().tearDown()

    def test_success_smoke(self):
        out = _call("train", data=self.data, out=self.ckpt, seed=0, overrides=TINY)
        self.assertTrue(os.path.exists(self.ckpt))
        with open(out["history"], encoding="utf-8") as f:
            history = json.load(f)
        self.assertEqual(len(history["epochs"]), out["epochs"])
        self.assertNotIn("wall_time", history["epochs"][0])

    def test_success_with_timings(self):
        history_path = os.path.join(self.tmp.name, "h.json")
        _call("train", data=self.data, out=self.ckpt, history=history_path, with_timings=True,
              overrides=TINY + ["num_rounds=1"])
        with open(history_path, encoding="utf-8") as f:
            self.assertIn("wall_time", json.load(f)["epochs"][0])

    def test_success_eval_matches_library(self):
        _call("train", data=self.data, out=self.ckpt, seed=0, overrides=TINY)
        out = _call("eval", ckpt=self.ckpt, data=self.data, split="test")

        model, config = load_checkpoint(self.ckpt)
        graphs, splits = load_with_split(self.data)
        record = evaluate(model, graphs, splits.test, config.task, config.mask_mode, config.log_target,
                          config.mask_threshold)
        self.assertEqual(out, record.to_dict())

    def test_success_explain(self):
        _call("train", data=self.data, out=self.ckpt, overrides=TINY + ["num_rounds=1"])
        masks_path = os.path.join(self.tmp.name, "masks.jsonl")
        _call("explain", ckpt=self.ckpt, data=self.data, out=masks_path)

        graphs = load_jsonl(self.data)
        with open(masks_path, encoding="utf-8") as f:
            rows = [json.loads(line) for line in f]
        self.assertEqual([r["graph_index"] for r in rows], list(range(len(graphs))))
        for row, graph in zip(rows, graphs):
            self.assertEqual(len(row["mask"]), graph.num_nodes)
            self.assertTrue(all(0.0 <= v <= 1.0 for v in row["mask"]))
            self.assertEqual(len(row["topk"]), len(graph.rationale_truth))

    def test_success_history_deterministic(self):
        first = os.path.join(self.tmp.name, "first.json")
        second = os.path.join(self.tmp.name, "second.json")
        _call("train", data=self.data, out=self.ckpt, history=first, seed=4, overrides=TINY)
        _call("train", data=self.data, out=self.ckpt, history=second, seed=4, overrides=TINY)
        with open(first, "rb") as fa, open(second, "rb") as fb:
            self.assertEqual(fa.read(), fb.read())

    def test_fail_feature_width_mismatch(self):
        _call("train", data=self.data, out=self.ckpt, overrides=TINY + ["num_rounds=1"])
        narrow = os.path.join(self.tmp.name, "narrow.jsonl")
        _call("gen_data", out=narrow, overrides=["num_graphs=5", "feature_dim=4"])
        with self.assertRaises(CommandError) as ctx:
            _call("eval", ckpt=self.ckpt, data=narrow, split="all")
        self.assertEqual(ctx.exception.returncode, EXIT_USAGE)
        self.assertIn("F=6", str(ctx.exception))
        self.assertIn("F=4", str(ctx.exception))

    def test_fail_missing_data(self):
        missing = os.path.join(self.tmp.name, "nope.jsonl")
        with self.assertRaises(CommandError) as ctx:
            _call("train", data=missing, out=self.ckpt, overrides=TINY)
        self.assertEqual(ctx.exception.returncode, EXIT_USAGE)
        self.assertIn(missing, str(ctx.exception))

    def test_fail_unknown_config_key(self):
        with self.assertRaises(CommandError) as ctx:
            _call("train", data=self.data, out=self.ckpt, overrides=["learning_rat=0.1"])
        self.assertEqual(ctx.exception.returncode, EXIT_USAGE)
        self.assertFalse(os.path.exists(self.ckpt))

    def test_fail_unknown_config_file_key(self):
        config_path = os.path.join(self.tmp.name, "config.json")
        with open(config_path, "w", encoding="utf-8") as f:
            json.dump({"alpha": 1.0, "colour": "red"}, f)
        with self.assertRaises(CommandError) as ctx:
            _call("train", config=config_path, data=self.data, out=self.ckpt)
        self.assertEqual(ctx.exception.returncode, EXIT_USAGE)


class GradCheckCommandTest(SimpleTestCase):
    def test_success_passes(self):
        out = _call("grad_check", seed=0, dim=4, overrides=["pred_layers=2", "sep_layers=1"])
        self.assertTrue(out["passed"])
        self.assertLess(out["max_rel_err"], 1e-4)
        self.assertEqual(out["num_graphs"], 3)

    def test_success_concat(self):
        out = _call("grad_check", seed=1, dim=4, overrides=["agg=\"concat\"", "pred_layers=1", "sep_layers=1"])
        self.assertEqual(out["agg"], "concat")
        self.assertTrue(out["passed"])


class BenchCommandTest(SimpleTestCase):
    def test_success_csv_rows(self):
        text = _call_raw("bench", batch_sizes="2,3", reps=1, seed=0)
        lines = text.strip().split("\n")
        self.assertEqual(lines[0], ",".join(CSV_COLUMNS))
        self.assertEqual([line.split(",")[0] for line in lines[1:]], ["2", "3"])
        self.assertTrue(all(float(line.split(",")[3]) < 1e-9 for line in lines[1:]))

    def test_fail_bad_batch_sizes(self):
        with self.assertRaises(CommandError) as ctx:
            _call_raw("bench", batch_sizes="2,a", reps=1)
        self.assertEqual(ctx.exception.returncode, EXIT_USAGE)


class SweepCommandTest(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.data = os.path.join(self.tmp.name, "toy.jsonl")
        _call("gen_data", out=self.data, seed=2, overrides=["num_graphs=20"])
        super().setUp()

    def tearDown(self):
        self.tmp.cleanup()
        super().tearDown()

    def test_success_summary(self):
        out = _call("sweep", data=self.data, seeds="1,2", compare_alpha0=True, overrides=TINY + ["num_rounds=1"])
        self.assertEqual(out["seeds"], [1, 2])
        self.assertEqual([run["seed"] for run in out["grea"]["runs"]], [1, 2])
        self.assertEqual(out["alpha0"]["runs"][0]["seed"], 1)
        self.assertEqual(out["config"]["num_rounds"], 1)
        self.assertIn("accuracy", out["grea"]["mean"])


# === Utility ===
def _call_raw(name: str, *args, **options) -> str:
    stdout = StringIO()
    call_command(name, *args, stdout=stdout, **options)
    return stdout.getvalue()


def _call(name: str, **options) -> dict:
    return json.loads(_call_raw(name, **options))
