import csv
import io
import json
import subprocess
import sys

import pytest

from shiftlab import __version__
from shiftlab.cli import EXIT_BUDGET, EXIT_CONFIG, EXIT_OK, main


@pytest.fixture
def files(tmp_path):
    def write(name, doc):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return str(p)

    return {
        "golden": write("golden.json", {"n": 2, "rows": [[1, 1], [1, 0]]}),
        "full2": write("full2.json", {"n": 2, "rows": [[1, 1], [1, 1]]}),
        "ex53": write("ex53.json", {"n": 3, "rows": [[1, 1, 0], [0, 0, 1], [1, 1, 0]]}),
        "count": write("count.json", {"kind": "symbol_count"}),
        "trans": write("trans.json", {"kind": "transition_count", "l": 1}),
        "stoch": write("stoch.json", {"rows": [["1/2", "1/2"], [1, 0]]}),
        "pot": write("pot.json", {"range": 1, "table": {"0": 0, "1": "0"}}),
        "dir": tmp_path,
    }


def run_json(capsys, argv):
    code = main(argv + ["--format", "json"])
    out = capsys.readouterr().out
    assert code == EXIT_OK, out
    doc = json.loads(out)
    assert doc["version"] == __version__ and doc["command"] == argv[0]
    return doc["result"]


class TestCommands:
    def test_validate(self, capsys, files):
        res = run_json(capsys, ["validate", "--matrix", files["golden"]])
        assert res == {"n": 2, "period": 1, "irreducible": True, "aperiodic": True, "full_shift": False}

    def test_measure_stochastic(self, capsys, files):
        res = run_json(capsys, ["measure", "--matrix", files["golden"], "--stochastic", files["stoch"],
                                "--cylinder", "01"])
        assert res["value"] == "1/3"

    def test_measure_alpha(self, capsys, files):
        res = run_json(capsys, ["measure", "--matrix", files["full2"], "--alpha", "1/3", "--cylinder", "001"])
        assert res["value"] == "2/27" and res["measure"] == "bernoulli"

    def test_measure_parry(self, capsys, files):
        res = run_json(capsys, ["measure", "--matrix", files["golden"], "--cylinder", "0"])
        assert res["measure"] == "parry"
        assert res["value_float"] == pytest.approx(0.7236067977, abs=1e-9)

    def test_gibbs(self, capsys, files):
        res = run_json(capsys, ["gibbs", "--matrix", files["golden"], "--potential", files["pot"]])
        assert res["perron_eigenvalue_shifted"] == pytest.approx((1 + 5 ** 0.5) / 2, abs=1e-12)

    def test_successor(self, capsys, files):
        res = run_json(capsys, ["successor", "--matrix", files["full2"], "--cylinder", "00110"])
        assert res["successor"]["prefix"] == "10001"
        res = run_json(capsys, ["successor", "--matrix", files["full2"], "--tail-period", "1"])
        assert res["successor"] == "Maximal"

    def test_orbit_csv(self, capsys, files):
        assert main(["orbit", "--matrix", files["full2"], "--cylinder", "111000", "--steps", "19"]) == 0
        lines = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
        rows = list(csv.reader(lines))
        assert rows[0] == ["k", "head"] and len(rows) == 21

    def test_weights(self, capsys, files):
        res = run_json(capsys, ["weights", "--matrix", files["golden"], "--counts", "2,1", "--next", "0"])
        assert res["weight"] == 3
        res = run_json(capsys, ["weights", "--matrix", files["full2"], "--counts", "3,2", "--cylinder", "01"])
        assert res["weight"] == res["pascal_weight"] == 10 and res["ratio"] == "3/10"

    def test_transitive(self, capsys, files):
        res = run_json(capsys, ["transitive", "--matrix", files["ex53"]])
        assert res["status"] == "Proven"
        res = run_json(capsys, ["transitive", "--matrix", files["ex53"], "--cocycle", files["count"]])
        assert not res["transitive"] and sorted(res["classes"]) == [[0, 1], [2]]

    def test_cocycle(self, capsys, files):
        res = run_json(capsys, ["cocycle", "--cocycle", files["count"], "--matrix", files["full2"],
                                "--x", "0110", "--x2", "1010"])
        assert res["member"] is True
        res = run_json(capsys, ["cocycle", "--cocycle", files["trans"], "--matrix", files["full2"],
                                "--x", "0110", "--x2", "1010"])
        assert res["member"] is False

    def test_cocycle_two_sided(self, capsys, files):
        res = run_json(capsys, ["cocycle", "--cocycle", files["count"], "--matrix", files["full2"],
                                "--x", "010", "--x2", "000", "--two-sided"])
        assert res["member"] is False

    def test_series_default_csv(self, capsys, files):
        assert main(["ratio-limit", "--matrix", files["full2"], "--alpha", "1/3", "--cylinder", "0",
                     "--seed", "1", "--n", "50"]) == 0
        out = capsys.readouterr().out
        assert out.startswith(f"# shiftlab {__version__}\n# config: ")
        assert "n,value" in out

    def test_definetti(self, capsys, files):
        res = run_json(capsys, ["definetti", "--matrix", files["full2"], "--m", "2", "--n", "30", "--seed", "0"])
        assert res["metadata"]["conditionals"]

    def test_amnesia(self, capsys, files):
        res = run_json(capsys, ["amnesia", "--matrix", files["golden"], "--s1", "1,0", "--s2", "0,1",
                                "--last1", "0", "--last2", "1", "--m", "20", "--seed", "0"])
        assert len(res["series"]) > 0

    def test_qtable(self, capsys, files):
        res = run_json(capsys, ["qtable", "--matrix", files["golden"], "--stochastic", files["stoch"], "--m", "5"])
        assert set(res["total_probability"].values()) == {"1"}

    def test_weakmix(self, capsys, files):
        res = run_json(capsys, ["weakmix", "--alpha", "1/2", "--theta", "0.5", "--m", "20", "--seed", "0"])
        assert res["metadata"]["lucas_agrees"] is True

    def test_split(self, capsys, files):
        res = run_json(capsys, ["split", "--alpha", "1/2", "--steps", "63"])
        assert res["star_discrepancy"] == "1/64"
        res = run_json(capsys, ["split", "--alpha-left", "1/2", "--alpha-right", "1/2", "--steps", "7"])
        assert res["star_discrepancy"] == "1/8"


class TestOutput:
    def test_byte_identical(self, files):
        d = files["dir"]
        argv = ["ratio-limit", "--matrix", files["golden"], "--cylinder", "0", "--seed", "4", "--n", "80"]
        assert main(argv + ["--out", str(d / "a.csv")]) == 0
        assert main(argv + ["--out", str(d / "b.csv")]) == 0
        a, b = (d / "a.csv").read_bytes(), (d / "b.csv").read_bytes()
        assert a == b and a

    def test_config_embedded(self, capsys, files):
        run_json(capsys, ["split", "--alpha", "1/3", "--steps", "5"])
        main(["split", "--alpha", "1/3", "--steps", "5", "--format", "json"])
        doc = json.loads(capsys.readouterr().out)
        assert doc["config"]["alpha"] == "1/3" and doc["config"]["steps"] == 5

    def test_key_value_csv(self, capsys, files):
        assert main(["validate", "--matrix", files["golden"], "--format", "csv"]) == 0
        body = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
        assert body[0] == "key,value" and "full_shift,false" in body


class TestExitCodes:
    def test_no_command(self, capsys):
        assert main([]) == EXIT_CONFIG
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self, capsys, files):
        assert main(["validate", "--matrix", files["golden"], "--bogus"]) == EXIT_CONFIG

    def test_missing_required(self, capsys, files):
        assert main(["measure", "--matrix", files["golden"]]) == EXIT_CONFIG
        assert "--cylinder" in capsys.readouterr().err

    def test_missing_file(self, capsys, files):
        assert main(["validate", "--matrix", str(files["dir"] / "none.json")]) == EXIT_CONFIG

    def test_bad_matrix(self, capsys, files):
        bad = files["dir"] / "bad.json"
        bad.write_text('{"rows": [[1, 2], [0, 1]]}')
        assert main(["validate", "--matrix", str(bad)]) == EXIT_CONFIG

    def test_alpha_on_other_shift(self, capsys, files):
        assert main(["measure", "--matrix", files["ex53"], "--alpha", "1/2", "--cylinder", "0"]) == EXIT_CONFIG

    def test_budget(self, capsys):
        code = main(["weakmix", "--alpha", "1/2", "--theta", "0.3", "--m", "400", "--seed", "0",
                     "--max-digits", "50"])
        assert code == EXIT_BUDGET
        assert "budget" in capsys.readouterr().err

    def test_horizon_budget(self, capsys, files):
        code = main(["successor", "--matrix", files["full2"], "--cylinder", "111111", "--horizon", "5"])
        assert code == EXIT_BUDGET


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "shiftlab", "validate", "--matrix", files["full2"]],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["result"]["full_shift"] is True
