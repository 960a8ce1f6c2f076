import copy
import csv
import io
import json
from pathlib import Path

import pytest

from condinf.cli import main
from condinf.scenario import Scenario, ScenarioError, run_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

GROWTH = json.loads((SCENARIOS / "deterministic_growth.json").read_text())


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestVerify:
    @pytest.mark.parametrize(
        "name, code",
        [
            ("running_max_tree", 0),
            ("deterministic_growth", 1),
            ("malformed_partition", 2),
            ("lazy_walk_functionals", 0),
            ("squared_integral", 0),
            ("convex_hull_walk", 0),
            ("masked_reconstruction", 0),
        ],
    )
    def test_exit_codes(self, name, code, capsys):
        assert run(["verify", "--scenario", str(SCENARIOS / f"{name}.json")], capsys)[0] == code

    def test_failure_carries_witness(self, capsys):
        code, out, err = run(["verify", "--scenario", str(SCENARIOS / "deterministic_growth.json")], capsys)
        rep = json.loads(out)
        bad = {c["name"]: c["witness"] for c in rep["checks"] if c["verdict"] == "fail"}
        assert bad["recovery_i"] == {"t": 0, "atom": [0, 1, 2, 3], "U_t": "0", "cond_inf": "2"}
        assert "FAIL recovery_i" in err

    def test_checks_override(self, capsys):
        code, out, _ = run(["verify", "--scenario", str(SCENARIOS / "lazy_walk_functionals.json"), "--checks", "sticky"], capsys)
        assert code == 0 and [c["name"] for c in json.loads(out)["checks"]] == ["sticky"]

    def test_reports_are_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            assert main(["verify", "--scenario", str(SCENARIOS / "running_max_tree.json"), "--out", str(p)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_timing_is_opt_in(self, capsys):
        _, out, _ = run(["verify", "--scenario", str(SCENARIOS / "running_max_tree.json")], capsys)
        assert "seconds" not in out
        _, out, _ = run(["verify", "--scenario", str(SCENARIOS / "running_max_tree.json"), "--timing"], capsys)
        assert all("seconds" in c for c in json.loads(out)["checks"])

    @pytest.mark.parametrize("kind", ["witness_ii", "witness_iii"])
    def test_witness_round_trip(self, kind, tmp_path, capsys):
        _, out, _ = run(["verify", "--scenario", str(SCENARIOS / "deterministic_growth.json")], capsys)
        source = {"witness_ii": "no_sure_improvement", "witness_iii": "conditional_improvement"}[kind]
        w = next(c["witness"] for c in json.loads(out)["checks"] if c["name"] == source)
        scen = copy.deepcopy(GROWTH)
        scen["checks"] = [{"name": kind, "tau": w["tau"], "Y": w["Y"]}]
        path = tmp_path / "w.json"
        path.write_text(json.dumps(scen))
        assert main(["verify", "--scenario", str(path)]) == 0
        scen["checks"][0]["Y"] = ["0"] * 4
        path.write_text(json.dumps(scen))
        assert main(["verify", "--scenario", str(path)]) == 1

    def test_bad_json_and_missing_file(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert run(["verify", "--scenario", str(p)], capsys)[0] == 2
        assert run(["verify", "--scenario", str(tmp_path / "absent.json")], capsys)[0] == 2

    def test_output_path_from_scenario(self, tmp_path, capsys):
        scen = dict(GROWTH, output=str(tmp_path / "rep.json"))
        p = tmp_path / "s.json"
        p.write_text(json.dumps(scen))
        assert main(["verify", "--scenario", str(p)]) == 1
        assert json.loads((tmp_path / "rep.json").read_text())["passed"] is False


class TestScenario:
    def test_generator_needs_seed(self):
        with pytest.raises(ScenarioError, match="seed"):
            Scenario({"space": {"generator": "gen_space", "m": 3, "T": 1}, "checks": []})

    def test_unknown_builder_is_a_schema_error(self):
        with pytest.raises(ScenarioError, match="schema"):
            Scenario({"space": {"generator": "lazy_walk_1d", "depth": 2}, "process": {"builder": "nope"}, "checks": []})

    def test_builder_needs_base(self):
        data = copy.deepcopy(GROWTH)
        data["process"] = {"builder": "running_max"}
        with pytest.raises(ScenarioError, match="base"):
            Scenario(data)

    def test_unknown_check(self):
        data = dict(GROWTH, checks=["nope"])
        with pytest.raises(ScenarioError):
            run_scenario(data)

    def test_non_adapted_grid(self):
        data = copy.deepcopy(GROWTH)
        data["process"]["grid"][1] = ["0", "1", "1", "1"]
        with pytest.raises(ScenarioError, match="adapted"):
            Scenario(data)

    def test_non_monotone_process_becomes_failure(self):
        data = copy.deepcopy(GROWTH)
        data["process"]["grid"] = [["2"] * 4, ["1"] * 4, ["0"] * 4]
        rep = run_scenario(data)
        assert not rep.passed and "error" in rep.failures[0].witness

    def test_power_set_visited_sites(self):
        rep = run_scenario(
            {
                "lattice": {"lattice": "power_set", "ground": ["-2", "-1", "0", "1", "2"]},
                "space": {"generator": "lazy_walk_1d", "depth": 2},
                "process": {"builder": "visited_sites"},
                "checks": ["ncr"],
            }
        )
        assert rep.passed

    def test_inf_process_builder(self):
        data = {
            "space": {"probs": ["1/2", "1/2"], "partitions": [[[0, 1]], [[0], [1]]]},
            "process": {"builder": "inf_process", "X": ["3", "inf"]},
            "checks": ["ncr", {"name": "validate", "monotone": True}],
        }
        sc = Scenario(data)
        assert sc.process.grid[0] == (3, 3)
        assert sc.run().passed


class TestFuzz:
    def test_pci_campaign(self, capsys):
        code, out, _ = run(["fuzz", "--suite", "pci", "--cases", "40", "--seed", "1"], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["summary"]["cases"] == 40 and rep["summary"]["failures"] == 0

    def test_replay_is_byte_identical(self, capsys):
        argv = ["fuzz", "--suite", "ncr_equiv", "--cases", "30", "--seed", "5", "--lattice", "power_set"]
        assert run(argv, capsys)[1] == run(argv, capsys)[1]

    def test_bad_suite(self, capsys):
        assert run(["fuzz", "--suite", "nope"], capsys)[0] == 2


class TestSimulate:
    def test_ely_level_one(self, capsys):
        code, out, _ = run(["simulate", "--paths", "300", "--n", "1"], capsys)
        (c,) = json.loads(out)["checks"]
        assert code == 0 and c["witness"]["estimate"] == 1.0

    def test_ny_constant_function(self, capsys):
        code, out, _ = run(["simulate", "--paths", "300", "--check", "ny", "--f", "const:1"], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["summary"]["max_abs_deviation"] == 0

    def test_csv_output(self, capsys):
        code, out, _ = run(["simulate", "--paths", "300", "--n", "2,4", "--format", "csv"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [r["n"] for r in rows] == ["2.0", "4.0"]
        assert {"estimate", "stderr", "oracle", "verdict"} <= set(rows[0])

    def test_deterministic(self, capsys):
        argv = ["simulate", "--paths", "500", "--seed", "4"]
        assert run(argv, capsys)[1] == run(argv, capsys)[1]

    def test_jumpy_is_not_asserted(self, capsys):
        code, out, _ = run(["simulate", "--model", "jumpy", "--paths", "300", "--steps", "200"], capsys)
        assert code == 0
        assert all(c["asserted"] is False for c in json.loads(out)["checks"])

    @pytest.mark.parametrize("argv", [["simulate", "--log-step", "0.5"], ["simulate", "--check", "ny", "--f", "nope"], ["simulate", "--paths", "x"]])
    def test_bad_arguments(self, argv, capsys):
        assert run(argv + ["--paths", "10"] if "--paths" not in argv else argv, capsys)[0] == 2
