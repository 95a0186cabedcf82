import json
import math

import pytest
from click.testing import CliRunner

from cli import cli
from graphstate import graph_stabilizers, path_graph


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def invoke(runner):
    def run(*args):
        result = runner.invoke(cli, [str(a) for a in args])
        report = json.loads(result.stdout) if result.stdout.strip().startswith("{") else None
        return result, report

    return run


class TestValidate:
    def test_valid(self, invoke, instances_dir):
        result, report = invoke("validate", instances_dir / "edge_stabilizer.json")
        assert result.exit_code == 0
        assert report["valid"] is True
        assert report["stabilizer"]["generators"] == ["+XZ", "+ZX"]
        assert report["command"] == "validate"

    def test_imaginary_phase(self, invoke, instances_dir):
        result, report = invoke("validate", instances_dir / "imaginary_stabilizer.json")
        assert result.exit_code == 1
        assert report["error"]["error"] == "ImaginaryPhase"
        assert report["error"]["index"] == 0

    def test_noncommuting(self, invoke, instances_dir):
        result, report = invoke("validate", instances_dir / "noncommuting_stabilizer.json")
        assert result.exit_code == 1
        assert report["error"]["pair"] == [0, 1]

    def test_missing_file(self, invoke, tmp_path):
        result, report = invoke("validate", tmp_path / "absent.json")
        assert result.exit_code == 2
        assert report["error"]["error"] == "FileNotFoundError"

    def test_malformed_json(self, invoke, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        result, _ = invoke("validate", path)
        assert result.exit_code == 2


class TestTestCommand:
    def test_zero_zero_state(self, invoke, instances_dir):
        result, report = invoke("test", "00", instances_dir / "edge_stabilizer.json", "--rounds", 400)
        assert result.exit_code == 0
        assert report["test"]["exact"] == pytest.approx(0.625)
        assert report["identity"]["holds"] is True
        assert report["gentle"]["holds"] is True
        assert report["closeness"]["holds"] is True

    def test_graph_state_always_passes(self, invoke, instances_dir):
        state = json.dumps({"graph": {"n": 2, "edges": [[0, 1]]}})
        result, report = invoke("test", state, instances_dir / "edge_stabilizer.json", "--rounds", 200)
        assert result.exit_code == 0
        assert report["test"]["sampled_rate"] == 1.0

    def test_zero_rounds(self, invoke, instances_dir):
        result, report = invoke("test", "00", instances_dir / "edge_stabilizer.json", "--rounds", 0)
        assert result.exit_code == 0
        assert report["test"]["sampled_rate"] is None

    def test_wrong_size(self, invoke, instances_dir):
        result, report = invoke("test", "000", instances_dir / "edge_stabilizer.json", "--rounds", 1)
        assert result.exit_code == 1
        assert report["error"]["error"] == "DimensionMismatch"

    def test_dense_cap(self, invoke, instances_dir):
        result, report = invoke(
            "test", "mixed", instances_dir / "edge_stabilizer.json", "--rounds", 1, "--dense-cap", 1
        )
        assert result.exit_code == 1
        assert report["error"]["error"] == "DenseCapExceeded"

    def test_pure_state_above_mixed_cap(self, invoke, tmp_path):
        path = path_graph(11)
        stabilizer = tmp_path / "path11.json"
        stabilizer.write_text(json.dumps(graph_stabilizers(path).to_dict()))
        state = json.dumps({"graph": path.to_dict()})
        result, report = invoke("test", state, stabilizer, "--rounds", 20)
        assert result.exit_code == 0
        assert report["test"]["exact"] == pytest.approx(1.0)
        assert report["test"]["sampled_rate"] == 1.0
        for check in ("identity", "gentle", "closeness"):
            assert report[check]["skipped"]["error"] == "DenseCapExceeded"


class TestParams:
    def test_defaults(self, invoke):
        result, report = invoke("params")
        assert result.exit_code == 0
        assert report["protocol"]["q"] == pytest.approx(1 / 97)
        assert report["protocol"]["gap_dominates_printed_bound"] is True

    def test_qma(self, invoke):
        result, report = invoke("params", "--qma")
        assert result.exit_code == 0
        assert report["qma"]["q_star"] == pytest.approx(1 / 145)
        assert report["qma"]["Delta2"] == pytest.approx(1 / 870)

    def test_bad_promise(self, invoke):
        result, report = invoke("params", "--a", 0.3, "--b", 0.5)
        assert result.exit_code == 1
        assert report["error"]["error"] == "ParameterError"


class TestProtocol:
    def test_yes_instance(self, invoke, instances_dir):
        result, report = invoke("protocol", instances_dir / "toy_yes.json", "--rounds", 200)
        assert result.exit_code == 0
        assert report["breakdown"]["p_acc"] == pytest.approx(1.0)
        assert report["honest"]["completeness"]["holds"] is True
        assert report["test_branch_identity"]["holds"] is True
        assert report["monte_carlo"]["rate"] == 1.0

    def test_mbqc_mode(self, invoke, instances_dir):
        result, report = invoke("protocol", instances_dir / "toy_yes.json", "--mode", "mbqc", "--rounds", 100)
        assert result.exit_code == 0
        assert report["mode"] == "mbqc"
        assert report["breakdown"]["p_acc"] == pytest.approx(1.0)

    def test_unknown_strategy(self, invoke, instances_dir):
        result, _ = invoke("protocol", instances_dir / "toy_yes.json", "--strategy", "bogus", "--rounds", 1)
        assert result.exit_code == 2

    def test_no_instance_soundness(self, invoke, instances_dir):
        result, report = invoke("protocol", instances_dir / "toy_no.json", "--rounds", 200)
        assert result.exit_code == 0
        assert report["strategy"]["kind"] == "optimal"
        assert report["soundness"]["holds"] is True
        assert report["breakdown"]["b_exact"] == pytest.approx((0.25 + math.sin(math.pi / 8) ** 2) / 2)

    def test_epsilon_override(self, invoke, instances_dir):
        result, report = invoke("protocol", instances_dir / "toy_yes.json", "--epsilon", 0.1, "--rounds", 0)
        assert result.exit_code == 0
        assert report["params"]["epsilon"] == pytest.approx(0.1)


class TestHstab:
    def test_bell(self, invoke, instances_dir):
        result, report = invoke("hstab", instances_dir / "hstab_bell.json", "--samples", 100, "--rounds", 100)
        assert result.exit_code == 0
        assert report["h_stab"] == pytest.approx(0.5)
        assert report["sampling_oracle"]["holds"] is True
        assert report["classification"] == "outside promise"

    def test_identity(self, invoke, instances_dir):
        result, report = invoke("hstab", instances_dir / "hstab_identity.json", "--samples", 10, "--rounds", 0)
        assert result.exit_code == 0
        assert report["h_stab"] == pytest.approx(1.0)
        assert report["classification"] == "yes"

    def test_prover_stays_in_codespace(self, invoke, tmp_path):
        instance = tmp_path / "orthogonal.json"
        instance.write_text(json.dumps({"stabilizer": {"n": 2, "generators": ["+ZI"]}, "M": {"projector": "11"}}))
        result, report = invoke("hstab", instance, "--samples", 10, "--rounds", 0)
        assert result.exit_code == 0
        assert report["h_stab"] == pytest.approx(0.0, abs=1e-12)
        assert report["classification"] == "no"
        assert report["verifier"]["pass_probability"] == pytest.approx(1.0)

    def test_bad_promise(self, invoke, instances_dir):
        result, report = invoke("hstab", instances_dir / "hstab_bad_promise.json")
        assert result.exit_code == 1
        assert report["error"]["error"] == "ParameterError"


class TestRuns:
    def test_same_seed_same_report(self, runner, instances_dir):
        args = ["test", "+0", str(instances_dir / "edge_stabilizer.json"), "--rounds", "300", "--seed", "9"]
        assert runner.invoke(cli, args).stdout == runner.invoke(cli, args).stdout

    def test_seed_is_echoed(self, invoke):
        _, report = invoke("params", "--seed", 42)
        assert report["seed"] == 42
        assert report["config"]["seed"] == 42

    def test_sweep(self, invoke):
        result, report = invoke("sweep", "identity", "--cases", 20, "--n-max", 3)
        assert result.exit_code == 0
        assert report["violations"] == 0
        assert report["sweeps"]["identity"]["cases"] == 20

    def test_out_file(self, runner, tmp_path):
        target = tmp_path / "report.json"
        result = runner.invoke(cli, ["params", "--out", str(target)])
        assert result.exit_code == 0
        assert result.stdout == ""
        assert json.loads(target.read_text())["command"] == "params"

    def test_history(self, runner, instances_dir, tmp_path):
        url = f"sqlite:///{tmp_path / 'runs.db'}"
        runner.invoke(cli, ["validate", str(instances_dir / "edge_stabilizer.json"), "--db", url])
        runner.invoke(cli, ["test", "00", str(instances_dir / "edge_stabilizer.json"), "--rounds", "10", "--db", url])
        result = runner.invoke(cli, ["history", "--db", url, "--command", "test"])
        assert result.exit_code == 0
        runs = json.loads(result.stdout)["runs"]
        assert len(runs) == 1
        assert runs[0]["command"] == "test"
        assert runs[0]["check_count"] >= 1

    def test_history_needs_database(self, runner):
        result = runner.invoke(cli, ["history"])
        assert result.exit_code == 2
