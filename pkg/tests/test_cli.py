import io
import json
import subprocess
import sys

import pytest

from cubicpref.cli import run
from cubicpref.prefcore import Character, character, is_cubic, parse_matrix

from matrices import (
    A,
    ACTION_P,
    ACTION_P_PRIME,
    M,
    STACK_P1,
    STACK_P2,
    STACKED,
    SYNTH_TARGET,
    WEAVE_P1,
    WOVEN,
)


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def write(tmp_path):
    def _write(name, content):
        path = tmp_path / name
        path.write_text(content if isinstance(content, str) else content.to_text())
        return path

    return _write


def test_character_json(write):
    code, out, _ = cli("character", write("A.txt", A))
    assert code == 0
    assert out == '{"n":2,"separable":[[],[1],[1,2]]}\n'


def test_is_cubic(write):
    assert cli("is-cubic", write("M.txt", M))[1] == "true\n"
    assert cli("is-cubic", write("B.txt", "101\n100\n110\n000\n011\n111\n001\n010\n"))[1] == "false\n"


def test_restrict(write):
    b = write("B.txt", "101\n100\n110\n000\n011\n111\n001\n010\n")
    assert cli("restrict", b, "--fix", "3=1")[1] == "10\n01\n11\n00\n"
    assert cli("restrict", b, "--fix", "3=0")[1] == "10\n11\n00\n01\n"
    code, out, _ = cli("restrict", b, "--fix", "1,3=10")
    assert code == 0 and parse_matrix(out).n == 1
    assert cli("restrict", b, "--fix", "3=12")[0] == 1
    assert cli("restrict", b, "--fix", "3")[0] == 1


def test_act_worked_example(write):
    code, out, _ = cli("act", write("P.txt", ACTION_P), "--perm", "2,3,1", "--flips", "3")
    assert code == 0 and out == ACTION_P_PRIME.to_text()
    assert cli("act", write("P.txt", ACTION_P), "--perm", "1,1,2")[0] == 1


def test_canonical(write):
    code, out, _ = cli("canonical", write("P.txt", ACTION_P))
    r = parse_matrix(out)
    assert code == 0 and r.rows[0] == 0b111
    code, out, _ = cli("canonical", write("P.txt", ACTION_P), "--format", "json")
    obj = json.loads(out)
    assert obj["matrix"] == r.row_strings() and obj["element"].startswith("perm=")
    assert cli("canonical", write("B.txt", "101\n100\n110\n000\n011\n111\n001\n010\n"))[0] == 1


def test_classify_table_n3():
    code, out, _ = cli("classify", "--n", 3, "--format", "table")
    assert code == 0
    lines = out.splitlines()
    assert "Character Class" in lines[1] and "Total Matrices" in lines[1] and "Path Classes" in lines[1]
    body = [line.split() for line in lines[3:]]
    assert body == [["{a}", "48", "1"], ["{a}{a,b}", "48", "1"], ["∅", "48", "1"]]


def test_classify_formats_n4():
    code, out, _ = cli("classify", "--n", 4, "--format", "json")
    obj = json.loads(out)
    assert obj["total_matrices"] == 91392
    assert [c["path_classes"] for c in obj["classes"]] == [183, 45, 7, 1, 1, 1]
    code, out, _ = cli("classify", "--n", 4, "--format", "tsv")
    assert out.splitlines()[1] == "∅\t70272\t183"


def test_classify_n5_refused():
    code, out, err = cli("classify", "--n", 5)
    assert code == 2 and out == ""
    assert "--deep" in err and "search nodes" in err


def test_enumerate_all():
    code, out, _ = cli("enumerate", "--n", 4, "--all", "--format", "json")
    obj = json.loads(out)
    assert obj["matrices_brute_force"] == obj["matrices"] == 91392
    assert obj["path_classes"] == 238 and obj["consistent"] is True


def test_progress_and_threads_do_not_change_output():
    base = cli("classify", "--n", 4)[1]
    code, out, err = cli("classify", "--n", 4, "--threads", 2, "--progress")
    assert code == 0 and out == base
    assert "units" in err


def test_find():
    code, out, _ = cli("find", "--n", 4, "--class", "{a}{a,b}{a,b,c}")
    assert code == 0 and is_cubic(parse_matrix(out))
    assert cli("find", "--n", 4, "--class", "{a}{b}")[0] == 3
    assert cli("find", "--n", 4, "--class", "{q}")[0] == 1


def test_stack_weave_round_trips(write):
    a, b = write("P1.txt", STACK_P1), write("P2.txt", STACK_P2)
    code, out, _ = cli("stack", a, b, "--k", 2, "--sign", 1)
    assert code == 0 and out == STACKED.to_text()
    code, out, _ = cli("unstack", write("S.txt", out))
    upper, lower = out.split("\n\n")
    assert parse_matrix(upper) == STACK_P1 and parse_matrix(lower) == STACK_P2
    code, out, _ = cli("weave", write("W1.txt", WEAVE_P1), "--k", 3, "--sign", 0)
    assert out == WOVEN.to_text()
    assert cli("unweave", write("W.txt", out))[1] == WEAVE_P1.to_text()
    assert cli("stack", a, a, "--k", 1)[0] == 1
    assert cli("unweave", write("S2.txt", STACKED))[0] == 1


def test_synthesize(write):
    c = Character.of(7, SYNTH_TARGET)
    path = write("C.json", c.dumps())
    code, out, err = cli("synthesize", "--character", path)
    p = parse_matrix(out)
    assert code == 0 and len(p.rows) == 128 and character(p) == c
    assert "proved admissible" in err
    trace_path = path.parent / "trace.json"
    code, out, _ = cli("synthesize", "--character", path, "--format", "json", "--trace", trace_path)
    trace = json.loads(out)
    assert trace == json.loads(trace_path.read_text())
    assert trace["status"] == "admissible"
    assert [s["op"] for s in trace["steps"]] == ["stack", "weave", "weave"]
    assert len(trace["base"]) == 16 and len(trace["matrix"]) == 128


def test_synthesize_failures(write):
    code, out, err = cli("synthesize", "--character", write("N.json", Character.of(3, [[1], [2]]).dumps()))
    assert code == 3 and "proved inadmissible" in err
    code, out, err = cli(
        "synthesize", "--character", write("X.json", Character.of(6, [[1, 2]]).dumps()), "--format", "json"
    )
    assert code == 3 and "not found by this procedure" in err
    assert json.loads(out)["status"] == "not found"
    assert cli("synthesize", "--character", write("bad.json", "{nope"))[0] == 1


def test_random_deterministic():
    a = cli("random", "--n", 5, "--seed", 9)
    assert a == cli("random", "--n", 5, "--seed", 9)
    assert is_cubic(parse_matrix(a[1]))


def test_nested_check(write):
    code, out, _ = cli("nested-check", "--character", write("C.json", Character.of(2, [[1], [2]]).dumps()))
    assert json.loads(out)["nested"] is False
    code, out, _ = cli("nested-check", "--character", write("D.json", Character.of(3, [[1], [1, 2]]).dumps()))
    assert json.loads(out) == {"nested": True, "intersection_closed": True, "class": "{a}{a,b}"}


def test_input_errors(write):
    code, _, err = cli("character", "/nonexistent/x.txt")
    assert code == 1 and "cannot read" in err
    code, _, err = cli("character", write("bad.txt", "10\n11\n01\n01\n"))
    assert code == 1 and "line 4" in err
    assert cli("frobnicate")[0] == 1
    assert cli("classify")[0] == 1
    assert cli("classify", "--n", 9)[0] == 1


def test_console_entry_point(tmp_path):
    (tmp_path / "A.txt").write_text(A.to_text())
    proc = subprocess.run(
        [sys.executable, "-m", "cubicpref.cli", "character", str(tmp_path / "A.txt")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout == '{"n":2,"separable":[[],[1],[1,2]]}\n'
