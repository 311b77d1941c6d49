import json
import subprocess
import sys

import pytest

from thinloop.cli import build_parser, main, resolve_config
from thinloop.config import CONFIG_FORMAT


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_reduce(capsys):
    assert run(capsys, "reduce", "a b b' c c' a'")[:2] == (0, "(empty)\n")
    assert run(capsys, "reduce", "a b b' c")[1] == "a c\n"


def test_equiv_exit_codes(capsys):
    code, out, _ = run(capsys, "equiv", "word:s0 t0 t0' v0", "word:s0 v0")
    assert code == 0 and "verdict: equivalent" in out
    code, out, _ = run(capsys, "equiv", "corpus:commutator", "constant")
    assert code == 1 and "verdict: not equivalent" in out


def test_crosscheck_examples(capsys):
    code, out, _ = run(capsys, "crosscheck", "word:s0 t0 t0' v0", "word:s0 v0")
    assert code == 0
    assert out.count("route") == 4 and out.count(": equivalent") == 5 and "agreement: yes" in out
    code, out, _ = run(capsys, "crosscheck", "constant", "corpus:commutator", "--connections", "4")
    assert code == 1


def test_synth_then_decompose(capsys, tmp_path):
    path = tmp_path / "c.json"
    code, out, _ = run(capsys, "synth", "--word", "p0 s1 s1'", "-o", str(path))
    assert code == 0 and "word p0 s1 s1'" in out
    code, out, _ = run(capsys, "decompose", str(path), "--emit", "tables", "--out", str(tmp_path / "o"))
    assert code == 0 and out.startswith("word: a b b'")
    assert "invariants: " in out and "FAIL" not in out
    doc = json.loads((tmp_path / "o" / "decomposition.json").read_text())
    assert doc["word"] == "a b b'"
    code, out, _ = run(capsys, "synth", str(path))
    assert json.loads(out)["format"] == "thinloop-curve/1"


def test_tree_and_svg(capsys, tmp_path):
    code, out, _ = run(capsys, "tree", "corpus:branch_q0", "--emit", "svg", "--out", str(tmp_path))
    assert code == 0 and "# letter parent child length" in out
    assert (tmp_path / "tree.svg").read_text().startswith("<svg")
    assert run(capsys, "tree", "corpus:figure_eight")[0] == 1


def test_contract_frames(capsys, tmp_path):
    code, out, _ = run(capsys, "contract", "corpus:out_and_back", "--emit", "frames", "--frames", "3",
                       "--out", str(tmp_path))
    assert code == 0 and out.count("thinness pass") == 3
    assert sorted(p.name for p in (tmp_path / "frames").iterdir()) == [f"frame_00{k}.csv" for k in range(3)]


def test_holonomy_and_signature(capsys):
    code, out, _ = run(capsys, "holonomy", "corpus:petal_whisker", "--connections", "3", "--group", "SO3")
    assert code == 0 and len(out.splitlines()) == 5
    assert float(out.splitlines()[-1].split()[-1]) < 1e-9
    code, out, _ = run(capsys, "signature", "corpus:petal_whisker", "--level", "2")
    assert code == 0 and out.startswith("level 1: ")


def test_holonomy_from_connection_file(capsys, tmp_path):
    p = tmp_path / "conn.json"
    p.write_text(json.dumps({"format": "thinloop-connection/1", "group": "SU2", "seed": 11}))
    code, out, _ = run(capsys, "holonomy", "corpus:commutator", "--connection", str(p))
    assert code == 0 and out.splitlines()[1].startswith("11 ")


def test_psi_table(capsys):
    code, out, _ = run(capsys, "psi", "0.5", "--points", "5")
    rows = [[float(x) for x in line.split()] for line in out.splitlines()[1:]]
    assert code == 0 and len(rows) == 5
    assert rows[0] == [0.0, 0.0, 0.0] and rows[-1] == [1.0, 1.0, 0.0]
    assert all(a[1] <= b[1] for a, b in zip(rows, rows[1:]))


def test_bad_input_exit_code(capsys):
    code, _, err = run(capsys, "decompose", "missing.json")
    assert code == 3 and "no such file" in err
    assert run(capsys, "decompose", "corpus:nope")[0] == 3
    assert run(capsys, "equiv", "constant", "constant")[0] == 3
    assert run(capsys, "synth", "missing.json")[0] == 3


def test_usage_errors_do_not_look_undecided(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["crosscheck", "word:p0"])
    assert exc.value.code == 3


def test_config_precedence(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"format": CONFIG_FORMAT, "seed": 5, "group": "SO3", "connections": 3}))
    args = build_parser().parse_args(["holonomy", "x", "--config", str(p), "--seed", "9"])
    cfg = resolve_config(args)
    assert (cfg.seed, cfg.group, cfg.connections) == (9, "SO3", 3)


def test_output_is_deterministic(capsys):
    argv = ["crosscheck", "corpus:abbc", "constant", "--connections", "5"]
    first = run(capsys, *argv)
    assert run(capsys, *argv) == first


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "thinloop", "reduce", "x y y' x'"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout == "(empty)\n"
