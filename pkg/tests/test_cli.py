import csv
import io
import json
import subprocess
import sys

import pytest

from dagvisits.cli import (
    EXIT_FAILED, EXIT_INPUT, EXIT_LIMIT, EXIT_OK, EXIT_TIMEOUT, EXIT_USAGE, main,
)


@pytest.fixture
def run(capsys, monkeypatch):
    def go(*argv, stdin=None):
        if stdin is not None:
            monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err
    return go


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


CHAIN3 = {"n": 3, "edges": [[0, 1], [1, 2]]}


class TestGen:
    def test_diamond(self, run):
        code, out, _ = run("gen", "diamond:q=2,b=9")
        assert code == EXIT_OK and json.loads(out)["n"] == 81

    def test_deterministic(self, run):
        assert run("gen", "random:n=40", "--seed", 3)[1] == run("gen", "random:n=40", "--seed", 3)[1]
        assert run("gen", "random:n=40", "--seed", 3)[1] != run("gen", "random:n=40", "--seed", 4)[1]

    def test_dot(self, run):
        code, out, _ = run("gen", "tree:q=2,i=2", "--dot")
        assert code == EXIT_OK and out.startswith("digraph")
        assert sum(1 for line in out.splitlines() if "->" not in line and line.strip().rstrip(";").isdigit()) == 7

    def test_out_file(self, run, tmp_path):
        target = tmp_path / "g.json"
        code, out, _ = run("gen", "pyramid:q=2,b=8", "--out", target)
        assert code == EXIT_OK and out == ""
        assert json.loads(target.read_text())["n"] == 36

    def test_bad_spec(self, run):
        assert run("gen", "hypercube:n=3")[0] == EXIT_INPUT


class TestVisit:
    def test_build_topo_from_stdin(self, run):
        code, out, _ = run("gen", "chain_arborescence:h=2")
        code, out, _ = run("visit", "build", "--algo", "topo", stdin=out)
        res = json.loads(out)
        assert code == EXIT_OK and res["achieved"] == 3 and len(res["sequence"]) == 14

    def test_chain_first(self, run):
        code, out, _ = run("visit", "build", "--algo", "chain-first", "--family", "chain_arborescence:h=2")
        assert code == EXIT_OK and json.loads(out)["achieved"] == 2

    def test_blocked_needs_m(self, run):
        assert run("visit", "build", "--algo", "diamond-blocked", "--family", "diamond:q=2,b=8")[0] == EXIT_USAGE

    def test_blocked(self, run):
        code, out, _ = run("visit", "build", "--algo", "diamond-blocked", "--m", 2,
                           "--family", "diamond:q=2,b=8")
        assert code == EXIT_OK and len(json.loads(out)["sequence"]) == 64

    def test_check(self, run, tmp_path):
        graph = write(tmp_path, "g.json", CHAIN3)
        good = write(tmp_path, "good.json", [0, 1, 2])
        bad = write(tmp_path, "bad.json", {"sequence": [1, 0, 2]})
        part = write(tmp_path, "part.json", [0, 1])
        code, out, _ = run("visit", "check", "--graph", graph, "--visit", good)
        assert code == EXIT_OK and json.loads(out)["complete"]
        code, out, _ = run("visit", "check", "--graph", graph, "--visit", bad)
        assert code == EXIT_FAILED and json.loads(out)["position"] == 1
        assert run("visit", "check", "--graph", graph, "--visit", part)[0] == EXIT_FAILED
        assert run("visit", "check", "--graph", graph, "--visit", part, "--prefix")[0] == EXIT_OK
        assert run("visit", "check", "--graph", graph)[0] == EXIT_USAGE

    def test_check_with_rule_file(self, run, tmp_path):
        graph = write(tmp_path, "g.json", {"n": 2, "edges": [[0, 1]]})
        rule = write(tmp_path, "rule.json", {"0": [[]], "1": [[]]})
        visit = write(tmp_path, "v.json", [1, 0])
        assert run("visit", "check", "--graph", graph, "--visit", visit)[0] == EXIT_FAILED
        assert run("visit", "check", "--graph", graph, "--visit", visit, "--rule", rule)[0] == EXIT_OK

    def test_malformed_graph(self, run):
        assert run("visit", "build", stdin="{not json")[0] == EXIT_INPUT
        assert run("visit", "build", stdin='{"n": 2, "edges": [[0, 1], [1, 0]]}')[0] == EXIT_INPUT


class TestOracle:
    def test_boundary(self, run):
        code, out, _ = run("oracle", "boundary", "--family", "chain_arborescence:h=2", "--rule", "top")
        assert code == EXIT_OK and json.loads(out)["value"] == 3

    def test_pebbling(self, run):
        code, out, _ = run("oracle", "pebbling", "--family", "pyramid:q=2,b=3")
        res = json.loads(out)
        assert code == EXIT_OK and res["value"] == 4 and res["schedule"][0]["op"] == "place"

    def test_pebbling_too_large(self, run):
        assert run("oracle", "pebbling", "--family", "random:n=30")[0] == EXIT_LIMIT

    def test_limits_override(self, run):
        assert run("oracle", "pebbling", "--family", "pyramid:q=2,b=4", "--limits", "pebbling=5")[0] == EXIT_LIMIT

    def test_timeout(self, run):
        edgeless = json.dumps({"n": 18, "edges": []})
        code, _, _ = run("oracle", "boundary", "--limits", "time=0.01", stdin=edgeless)
        assert code == EXIT_TIMEOUT

    def test_cuts(self, run):
        code, out, _ = run("oracle", "postdominator", "--family", "diamond:q=2,b=3", "--set", "0,1,2")
        assert code == EXIT_OK and json.loads(out)["value"] == 1
        code, out, _ = run("oracle", "dominator", "--family", "diamond:q=2,b=3", "--set", "8")
        assert json.loads(out)["value"] == 1
        assert run("oracle", "dominator", "--family", "diamond:q=2,b=3")[0] == EXIT_USAGE

    def test_spartition(self, run):
        code, out, _ = run("oracle", "spartition", "--family", "diamond:q=2,b=3", "--s", 2)
        assert code == EXIT_OK and json.loads(out)["k"] == 1
        assert run("oracle", "spartition", "--family", "diamond:q=2,b=3")[0] == EXIT_USAGE

    def test_flows(self, run):
        code, out, _ = run("oracle", "flows", "--family", "pyramid:q=2,b=4")
        assert code == EXIT_OK and json.loads(out)["value"] == 1

    def test_viopt(self, run):
        code, out, _ = run("oracle", "viopt", "--family", "diamond:q=2,b=4", "--m", 1,
                           "--rule", "blocked", "--limits", "visit_partition=16")
        assert code == EXIT_OK and json.loads(out)["value"] == 4
        assert run("oracle", "viopt", "--family", "diamond:q=2,b=3")[0] == EXIT_USAGE


class TestBounds:
    def test_diamond(self, run):
        code, out, _ = run("bounds", "diamond", "--q", 2, "--b", 32, "--m", 4)
        assert code == EXIT_OK and json.loads(out)["value"] == 64
        assert run("bounds", "diamond", "--q", 2, "--b", 32)[0] == EXIT_USAGE

    def test_catalog_csv(self, run):
        code, out, _ = run("bounds", "catalog", "diamond", "--q", 2, "--b", 32, "--m", 4, "--format", "csv")
        rows = {r["bound"]: r["value"] for r in csv.DictReader(io.StringIO(out))}
        assert code == EXIT_OK and rows["io_upper"] == "1024" and rows["io_lower"] == "64"
        assert run("bounds", "catalog", "diamond", "--q", 2)[0] == EXIT_USAGE
        assert run("bounds", "catalog")[0] == EXIT_USAGE

    def test_hongkung(self, run):
        code, out, _ = run("bounds", "hongkung", "--family", "diamond:q=2,b=8", "--m", 2)
        assert code == EXIT_OK and json.loads(out)["bound"] == 0

    def test_partition(self, run, tmp_path):
        code, out, _ = run("bounds", "partition", "--family", "random:n=15,seed=2", "--m", 2)
        res = json.loads(out)
        assert code == EXIT_OK and res["total"] >= res["write"] >= 0
        code, out, _ = run("bounds", "partition", "--family", "random:n=15,seed=2", "--m", 2,
                           "--rule", "top", "--cuts", "5,15")
        assert code == EXIT_OK and json.loads(out)["cuts"] == [5, 15]
        code, out, _ = run("bounds", "partition", "--family", "random:n=15,seed=2", "--m", 2,
                           "--variant", "free-input")
        assert json.loads(out)["variant"] == "free-input"

    def test_io_count_pipe(self, run, tmp_path):
        code, trace, _ = run("simulate", "astar", "--q", 2, "--b", 32, "--m", 4)
        assert code == EXIT_OK
        code, out, _ = run("bounds", "io-count", stdin=trace)
        assert json.loads(out) == {"reads": 505, "writes": 408, "total": 913}

    def test_bad_trace(self, run):
        assert run("bounds", "io-count", stdin='{"op": "jump", "v": 1}\n')[0] == EXIT_INPUT


class TestSimulate:
    def test_greedy_then_validate(self, run, tmp_path):
        code, trace, _ = run("simulate", "greedy", "--family", "diamond:q=2,b=6", "--m", 2)
        assert code == EXIT_OK
        path = write(tmp_path, "t.jsonl", trace)
        code, out, _ = run("simulate", "validate", "--family", "diamond:q=2,b=6", "--m", 2, "--trace", path)
        assert code == EXIT_OK and json.loads(out)["ok"]
        code, out, _ = run("simulate", "validate", "--family", "diamond:q=2,b=6", "--m", 1, "--trace", path)
        res = json.loads(out)
        assert code == EXIT_FAILED and {v["kind"] for v in res["violations"]} == {"capacity"}

    def test_astar_precondition(self, run):
        assert run("simulate", "astar", "--q", 3, "--b", 8, "--m", 2)[0] == EXIT_INPUT

    def test_validate_needs_trace(self, run):
        assert run("simulate", "validate", "--family", "diamond:q=2,b=3", "--m", 2)[0] == EXIT_USAGE


class TestVerify:
    def test_diamond_io(self, run):
        code, out, err = run("verify", "diamond-io")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == EXIT_OK and rows and all(r["pass"] == "true" for r in rows)
        assert "checks passed" in err

    def test_small_suites(self, run):
        assert run("verify", "universal-bounds", "--n", 60, "--seeds", 3)[0] == EXIT_OK
        assert run("verify", "converters", "--seeds", 4)[0] == EXIT_OK


class TestEntryPoints:
    def test_usage_errors(self):
        with pytest.raises(SystemExit) as exc:
            main(["nonsense"])
        assert exc.value.code == EXIT_USAGE

    def test_module_runs(self):
        proc = subprocess.run([sys.executable, "-m", "dagvisits", "bounds", "diamond",
                               "--q", "2", "--b", "16", "--m", "2"], capture_output=True, text=True)
        assert proc.returncode == 0 and json.loads(proc.stdout)["value"] == 32
