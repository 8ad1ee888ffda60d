import json
import os
import subprocess
import sys

import pytest

from qdisco.cli import main
from qdisco.datasets import data_path
from qdisco.hardware import load_calibration
from qdisco.problem import parse_problem_json

RING6 = str(data_path("problem_ring6.json"))
TRIANGLE = str(data_path("problem_triangle.json"))
HEX16 = str(data_path("qpu_hex16.json"))
T7 = str(data_path("qpu_t7_a.json"))
VA = str(data_path("scenario_va.json"))
VB = str(data_path("scenario_vb.json"))


def run_cli(args, **kwargs):
    return subprocess.run(
        [sys.executable, "-m", "qdisco.cli", *args],
        capture_output=True,
        text=True,
        **kwargs,
    )


class TestSimulate:
    def test_emits_result_json(self, capsys):
        code = main(
            ["simulate", "--problem", TRIANGLE, "--layers", "1", "--shots", "200", "--seed", "3"]
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["num_qubits"] == 3
        assert sum(doc["counts"].values()) == 200

    def test_explicit_angles(self, capsys):
        code = main(
            [
                "simulate",
                "--problem",
                TRIANGLE,
                "--layers",
                "1",
                "--gammas",
                "0.5",
                "--betas",
                "0.3",
                "--shots",
                "100",
                "--seed",
                "1",
            ]
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["gammas"] == [0.5]
        assert "optimization" not in doc

    def test_mismatched_angles_exit_2(self, capsys):
        code = main(
            [
                "simulate",
                "--problem",
                TRIANGLE,
                "--layers",
                "2",
                "--gammas",
                "0.5",
                "--betas",
                "0.3,0.2",
                "--seed",
                "1",
            ]
        )
        assert code == 2


class TestCompile:
    def test_two_regions_on_heavy_hex(self, capsys):
        code = main(
            [
                "compile",
                "--problem",
                RING6,
                "--qpu",
                HEX16,
                "--eta",
                "0.01",
                "--regions",
                "2",
                "--seed",
                "0",
            ]
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["placements"]) == 2
        qubit_sets = [set(p["region"]["qubits"]) for p in doc["placements"]]
        assert not (qubit_sets[0] & qubit_sets[1])

    def test_bad_eta_is_usage_error(self):
        proc = run_cli(
            ["compile", "--problem", RING6, "--qpu", HEX16, "--eta", "1.5"]
        )
        assert proc.returncode == 2
        assert "--eta" in proc.stderr

    def test_isomorphic_regions_flag(self, capsys):
        code = main(
            [
                "compile",
                "--problem",
                RING6,
                "--qpu",
                HEX16,
                "--eta",
                "0.01",
                "--regions",
                "2",
                "--isomorphic-regions",
                "--seed",
                "0",
            ]
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["placements"]) == 2
        edge_counts = {len(p["region"]["edges"]) for p in doc["placements"]}
        assert len(edge_counts) == 1  # isomorphic regions share their shape

    def test_missing_file_is_usage_error(self, capsys):
        code = main(["compile", "--problem", "nope.json", "--qpu", HEX16])
        assert code == 2


class TestPartition:
    def test_writes_subproblem_files(self, tmp_path):
        out = tmp_path / "parts"
        code = main(
            [
                "partition",
                "--problem",
                str(data_path("problem_v15.json")),
                "--capacities",
                "4,5,6",
                "--seed",
                "2",
                "-o",
                str(out),
            ]
        )
        assert code == 0
        doc = json.loads((out / "partition.json").read_text())
        assert sorted(doc["part_sizes"]) == [4, 5, 6]
        # emitted subproblem files re-load through the problem loader
        for i in range(3):
            sub = parse_problem_json((out / f"subproblem_{i}.json").read_text())
            assert sub.kind == "maxcut"

    def test_infeasible_capacities_domain_error(self, capsys):
        code = main(
            [
                "partition",
                "--problem",
                str(data_path("problem_v15.json")),
                "--capacities",
                "4,5",
                "--seed",
                "2",
            ]
        )
        assert code == 1


class TestPlanAndRun:
    def test_plan_va_shape(self, capsys):
        code = main(["plan", "--config", VA])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["num_regions"] == 6
        assert doc["speedup"]["speedup"] == pytest.approx(6.0)

    def test_run_vb_shape(self, tmp_path):
        out = tmp_path / "run"
        code = main(["run", "--config", VB, "-o", str(out)])
        assert code == 0
        doc = json.loads((out / "result.json").read_text())
        sizes = sorted(l["size"] for l in doc["plan"]["tree"]["children"])
        assert sizes == [4, 5, 6]
        assert (out / "run_meta.json").exists()

    def test_run_rerun_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", VB, "-o", str(a)]) == 0
        assert main(["run", "--config", VB, "-o", str(b)]) == 0
        assert (a / "result.json").read_bytes() == (b / "result.json").read_bytes()

    def test_seed_override_changes_payload(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", VB, "-o", str(a), "--seed", "1"]) == 0
        assert main(["run", "--config", VB, "-o", str(b), "--seed", "2"]) == 0
        assert (a / "result.json").read_bytes() != (b / "result.json").read_bytes()

    def test_labs_problem_runs_direct(self, tmp_path, capsys):
        cfg = {
            "problem": str(data_path("problem_labs6.json")),
            "fleet": [{"calibration": str(data_path("qpu_hex16.json"))}],
            "eta": 0.01,
            "p": 1,
            "shots": 128,
            "seed": 4,
            "noise": False,
            "optimizer": {"max_evaluations": 60},
        }
        cfg_path = tmp_path / "labs.json"
        cfg_path.write_text(json.dumps(cfg))
        code = main(["run", "--config", str(cfg_path)])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["plan"]["num_leaves"] == 1
        assert doc["result"]["cut_value"] is None
        assert doc["result"]["cost"] >= 7.0  # LABS n=6 ground energy


class TestBenchmark:
    def test_csv_rows_match_layer_range(self, tmp_path):
        out = tmp_path / "bench"
        code = main(
            [
                "benchmark",
                "--problem",
                TRIANGLE,
                "--qpu",
                T7,
                "--layers",
                "1..3",
                "--mref",
                "100",
                "--m",
                "20",
                "--shots",
                "64",
                "--max-evaluations",
                "40",
                "--seed",
                "7",
                "-o",
                str(out),
            ]
        )
        assert code == 0
        rows = (out / "benchmark_scores.csv").read_text().strip().splitlines()
        assert rows[0] == "layer,h_score"
        assert len(rows) == 4  # header + 3 layers
        doc = json.loads((out / "benchmark_hscore.json").read_text())
        assert set(doc["layers"]) == {"1", "2", "3"}
        for rep in doc["layers"].values():
            assert 0.0 <= rep["h_score"] <= 2.0


class TestSeedHandling:
    def test_env_seed_fallback(self, tmp_path, capsys):
        env = dict(os.environ, QDISCO_SEED="123")
        a = run_cli(
            ["simulate", "--problem", TRIANGLE, "--layers", "1", "--shots", "50"], env=env
        )
        b = run_cli(
            [
                "simulate",
                "--problem",
                TRIANGLE,
                "--layers",
                "1",
                "--shots",
                "50",
                "--seed",
                "123",
            ]
        )
        assert a.returncode == b.returncode == 0
        assert a.stdout == b.stdout


class TestEmittedFormatsRoundTrip:
    def test_bundled_calibrations_load(self):
        for name in ("qpu_hex16.json", "qpu_t7_a.json", "qpu_alpha7.json"):
            qpu = load_calibration(data_path(name).read_text())
            assert load_calibration(qpu.serialize()) == qpu

    def test_bundled_problems_load(self):
        for name in ("problem_ring6.json", "problem_v15.json", "problem_labs6.json"):
            inst = parse_problem_json(data_path(name).read_text())
            assert inst.num_spins >= 2


class TestUsageErrors:
    def test_unknown_subcommand(self):
        proc = run_cli(["frobnicate"])
        assert proc.returncode == 2

    def test_unknown_flag(self):
        proc = run_cli(["simulate", "--problem", TRIANGLE, "--frotz", "1"])
        assert proc.returncode == 2
