import json

import numpy as np
import pytest

import contour_seeker as cs
from contour_seeker.cli import main
from contour_seeker.traceio import read_csv


def run_config(tmp_path, name="run.json", **overrides):
    doc = {
        "simulator": {"builtin": "example1"},
        "strategy": {"kind": "rcc", "delta": 0.05},
        "level": -0.9,
        "n0": 9,
        "N": 11,
        "candidates_per_combo": 30,
        "seed": 5,
        "fit": {"n_starts": 2, "max_fev": 250},
        "out": str(tmp_path / "out"),
    }
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


class TestRun:
    def test_minimal_campaign(self, tmp_path, capsys):
        cfg = run_config(tmp_path)
        assert main(["run", str(cfg)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["iterations"] == 2
        header, rows = read_csv(tmp_path / "out" / "trace.csv")
        assert len(rows) == 2
        resolved = json.loads((tmp_path / "out" / "config.json").read_text())
        # defaults are materialized
        assert resolved["strategy"]["rho"] == 2.0
        assert resolved["transform"] == "identity"

    def test_n0_not_below_budget(self, tmp_path, capsys):
        cfg = run_config(tmp_path, n0=11, N=11)
        assert main(["run", str(cfg)]) == 2
        err = json.loads(capsys.readouterr().err)
        assert "n0" in err["message"] and "N" in err["message"]

    def test_missing_field_named(self, tmp_path, capsys):
        doc = {"simulator": {"builtin": "example1"}, "n0": 9, "N": 11, "out": str(tmp_path / "o")}
        path = tmp_path / "run.json"
        path.write_text(json.dumps(doc))
        assert main(["run", str(path)]) == 2
        err = json.loads(capsys.readouterr().err)
        assert "level" in err["message"]

    def test_rerun_byte_identical(self, tmp_path, capsys):
        cfg_a = run_config(tmp_path, name="run_a.json", out=str(tmp_path / "a"))
        cfg_b = run_config(tmp_path, name="run_b.json", out=str(tmp_path / "b"))
        assert main(["run", str(cfg_a)]) == 0
        assert main(["run", str(cfg_b)]) == 0
        capsys.readouterr()
        for name in ("trace.csv", "design.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_flag_overrides(self, tmp_path, capsys):
        cfg = run_config(tmp_path, out=str(tmp_path / "o1"))
        assert main(["run", str(cfg), "--strategy", "ecl", "--seed", "9",
                     "--out", str(tmp_path / "o2")]) == 0
        capsys.readouterr()
        resolved = json.loads((tmp_path / "o2" / "config.json").read_text())
        assert resolved["strategy"]["kind"] == "ecl"
        assert resolved["seed"] == 9

    def test_one_shot_strategy(self, tmp_path, capsys):
        cfg = run_config(tmp_path, strategy="one_shot", N=10)
        assert main(["run", str(cfg)]) == 0
        _, rows = read_csv(tmp_path / "out" / "design.csv")
        assert len(rows) == 10
        _, trows = read_csv(tmp_path / "out" / "trace.csv")
        assert trows == []

    def test_bad_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{nope")
        assert main(["run", str(path)]) == 2


@pytest.fixture
def model_path(tmp_path, small_model):
    path = tmp_path / "model.json"
    cs.save_model(small_model, path)
    return path


class TestSuggest:
    def test_generated_candidates(self, model_path, capsys):
        assert main(["suggest", "--model", str(model_path), "--strategy", "rcc",
                     "--level", "-0.9", "--per-combo", "50", "--seed", "4"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert 0.0 <= doc["point"]["x"][0] <= 1.0
        assert doc["point"]["z"][0] in (1, 2, 3)
        assert doc["report"]["region"] in ("A1", "A2", "fallback")

    def test_strategies_deterministic(self, model_path, capsys):
        argv = ["suggest", "--model", str(model_path), "--strategy", "ecl",
                "--level", "-0.9", "--per-combo", "50", "--seed", "4"]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        assert capsys.readouterr().out == first

    def test_candidates_file(self, model_path, tmp_path, capsys):
        path = tmp_path / "cands.csv"
        path.write_text("x_1,z_1\n0.1,1\n0.5,2\n0.9,3\n")
        assert main(["suggest", "--model", str(model_path), "--candidates", str(path),
                     "--strategy", "lcb", "--level", "-0.9"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["report"]["chosen_index"] in (0, 1, 2)

    def test_empty_candidates_file(self, model_path, tmp_path, capsys):
        path = tmp_path / "cands.csv"
        path.write_text("x_1,z_1\n")
        assert main(["suggest", "--model", str(model_path), "--candidates", str(path),
                     "--level", "-0.9"]) == 2

    def test_level_required(self, model_path, capsys):
        assert main(["suggest", "--model", str(model_path)]) == 2


class TestFit:
    def make_space_file(self, tmp_path):
        path = tmp_path / "space.json"
        path.write_text(json.dumps({"quant_bounds": [[0.0, 1.0]], "qual_levels": [2]}))
        return path

    def test_minimal_fit(self, tmp_path, capsys):
        space = self.make_space_file(tmp_path)
        data = tmp_path / "data.csv"
        data.write_text("x_1,z_1,y\n0.2,1,1.0\n0.8,2,2.0\n")
        out = tmp_path / "model.json"
        assert main(["fit", "--data", str(data), "--space", str(space),
                     "--out", str(out), "--starts", "2", "--max-fev", "150"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert "nll" in doc and out.exists()

    def test_duplicate_rows_rejected_with_indices(self, tmp_path, capsys):
        space = self.make_space_file(tmp_path)
        data = tmp_path / "data.csv"
        data.write_text("x_1,z_1,y\n0.2,1,1.0\n0.8,2,2.0\n0.2,1,3.0\n")
        assert main(["fit", "--data", str(data), "--space", str(space),
                     "--out", str(tmp_path / "m.json")]) == 2
        err = json.loads(capsys.readouterr().err)
        assert "(0, 2)" in err["message"]

    def test_refit_reproduces_nll(self, tmp_path, capsys):
        space = self.make_space_file(tmp_path)
        data = tmp_path / "data.csv"
        data.write_text("x_1,z_1,y\n0.1,1,1.0\n0.5,2,2.0\n0.9,1,0.5\n")
        argv = ["fit", "--data", str(data), "--space", str(space),
                "--out", str(tmp_path / "m.json"), "--seed", "3", "--starts", "2",
                "--max-fev", "150"]
        assert main(argv) == 0
        nll_1 = json.loads(capsys.readouterr().out)["nll"]
        assert main(argv) == 0
        nll_2 = json.loads(capsys.readouterr().out)["nll"]
        assert nll_1 == nll_2


class TestBench:
    def bench_config(self, tmp_path):
        doc = {
            "simulator": {"builtin": "example1"},
            "strategies": [{"kind": "rcc", "delta": 0.05}, "one_shot"],
            "levels": [-0.9],
            "budgets": [10],
            "n0": 9,
            "replicates": 2,
            "candidates_per_combo": 10,
            "ref_per_combo": 60,
            "eps": 0.05,
            "seed": 2,
            "fit": {"n_starts": 2, "max_fev": 200},
            "out": str(tmp_path / "bench"),
        }
        path = tmp_path / "bench.json"
        path.write_text(json.dumps(doc))
        return path

    def test_smoke_grid(self, tmp_path, capsys):
        cfg = self.bench_config(tmp_path)
        assert main(["bench", "--config", str(cfg)]) == 0
        capsys.readouterr()
        header, rows = read_csv(tmp_path / "bench" / "results.csv")
        assert header[:4] == ["strategy", "a", "N", "replicate"]
        assert len(rows) == 4
        sheader, srows = read_csv(tmp_path / "bench" / "summary.csv")
        assert len(srows) == 2  # one row per (strategy, N, a)
        one_shot = [r for r in srows if r[0] == "one_shot"][0]
        assert float(one_shot[sheader.index("rel_efficiency")]) == pytest.approx(1.0)

    def test_replicates_flag(self, tmp_path, capsys):
        cfg = self.bench_config(tmp_path)
        assert main(["bench", "--config", str(cfg), "--replicates", "1",
                     "--out", str(tmp_path / "bench1")]) == 0
        capsys.readouterr()
        _, rows = read_csv(tmp_path / "bench1" / "results.csv")
        assert len(rows) == 2


class TestVerify:
    def test_smoke(self, tmp_path, capsys):
        doc = {
            "space": {"quant_bounds": [[0.0, 1.0]], "qual_levels": [3]},
            "params": {"mu": 0.0, "sigma2": [1.0, 0.5], "theta0": [5.0],
                       "theta": [[[5.0, 5.0, 5.0]]]},
            "level": 0.0,
            "alpha": 0.1,
            "draws": 10,
            "per_combo": 10,
            "n_train": 6,
            "seed": 0,
            "out": str(tmp_path / "verify"),
        }
        path = tmp_path / "verify.json"
        path.write_text(json.dumps(doc))
        assert main(["verify", "--config", str(path)]) == 0
        capsys.readouterr()
        header, rows = read_csv(tmp_path / "verify" / "coverage.csv")
        assert "theorem1_violations" in header
        coverage = float(rows[0][header.index("coverage")])
        assert 0.0 <= coverage <= 1.0


class TestModuleEntry:
    def test_python_dash_m(self, tmp_path):
        import subprocess
        import sys
        cfg = run_config(tmp_path, out=str(tmp_path / "pm"))
        proc = subprocess.run([sys.executable, "-m", "contour_seeker", "run", str(cfg)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
