"""Smoke test for the hoi command-line tool: python test_cli.py <path-to-hoi>."""

import csv
import json
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

HOI = None


def run(*args):
    return subprocess.run([HOI, *map(str, args)], capture_output=True, text=True, timeout=600)


class CliSmoke(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.dir = Path(cls.tmp.name)
        cls.hold = cls.dir / "hold.json"
        res = run("gen-demo", "--task", "hold", "--out", cls.hold)
        assert res.returncode == 0, res.stderr

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_help_on_every_subcommand(self):
        for sub in ["gen-demo", "train", "eval", "extract-cg", "replay", "rectify"]:
            res = run(sub, "--help")
            self.assertEqual(res.returncode, 0, sub)
            self.assertIn("--", res.stdout)

    def test_extract_cg_prints_edges(self):
        res = run("extract-cg", "--data", self.hold)
        self.assertEqual(res.returncode, 0, res.stderr)
        lines = res.stdout.strip().splitlines()
        self.assertEqual(len(lines), 60)
        self.assertTrue(all(line == "1 0 0" for line in lines))

    def test_replay_reports_penetration(self):
        out = self.dir / "replay.csv"
        res = run("replay", "--data", self.hold, "--out", out)
        self.assertEqual(res.returncode, 0, res.stderr)
        self.assertIn("max_penetration", res.stdout)
        with open(out) as f:
            rows = list(csv.DictReader(f))
        self.assertEqual(len(rows), 60)
        self.assertTrue(all(float(r["penetration"]) <= 1e-2 for r in rows))

    def test_eval_replay_is_perfect(self):
        out = self.dir / "eval.json"
        frames = self.dir / "frames.csv"
        res = run("eval", "--replay", "--data", self.hold, "--repeats", 2, "--out", out,
                  "--frames", frames)
        self.assertEqual(res.returncode, 0, res.stderr)
        report = json.loads(out.read_text())
        self.assertEqual(report["succ"], 1.0)
        self.assertEqual(report["episodes"], 2)
        self.assertTrue(frames.exists())

    def test_train_eval_rectify(self):
        cfg = self.dir / "cfg.json"
        cfg.write_text(json.dumps({"sequence": str(self.hold),
                                   "ppo": {"iterations": 2, "env_count": 2, "horizon": 16,
                                           "minibatch": 32, "epochs": 1, "hidden": [16]}}))
        out = self.dir / "run"
        res = run("train", "--config", cfg, "--seed", 3, "--out", out)
        self.assertEqual(res.returncode, 0, res.stderr)
        ckpt = out / "checkpoint_final.json"
        self.assertTrue(ckpt.exists(), sorted(p.name for p in out.iterdir()))
        res = run("eval", "--checkpoint", ckpt, "--data", self.hold, "--repeats", 1)
        self.assertEqual(res.returncode, 0, res.stderr)
        self.assertIn("succ", json.loads(res.stdout))
        rect = self.dir / "rect.json"
        res = run("rectify", "--checkpoint", ckpt, "--data", self.hold, "--out", rect)
        self.assertEqual(res.returncode, 0, res.stderr)
        self.assertTrue(rect.exists())
        res = run("extract-cg", "--data", rect)
        self.assertEqual(res.returncode, 0, res.stderr)

    def test_usage_errors_exit_2(self):
        self.assertEqual(run().returncode, 2)
        self.assertEqual(run("train").returncode, 2)
        self.assertEqual(run("gen-demo", "--task", "juggle", "--out", "x.json").returncode, 2)
        self.assertEqual(run("eval", "--data", self.hold).returncode, 2)

    def test_invalid_input_exits_1_with_message(self):
        bad = self.dir / "bad.json"
        bad.write_text('{"fps": 30}')
        res = run("extract-cg", "--data", bad)
        self.assertEqual(res.returncode, 1)
        self.assertIn("error [", res.stderr)
        cfg = self.dir / "unknown.json"
        cfg.write_text('{"bogus": 1}')
        res = run("train", "--config", cfg, "--data", self.hold, "--out", self.dir / "x")
        self.assertEqual(res.returncode, 1)
        self.assertIn("unknown key", res.stderr)


if __name__ == "__main__":
    HOI = sys.argv.pop(1)
    unittest.main()
