import json

import pytest

from symcirc.cli import main
from symcirc.graphs import BipartitePattern
from symcirc.treedec import exact_treewidth, to_pace

P3 = {"left": 1, "right": 2, "edges": [[0, 0, 1], [0, 1, 1]]}


def _write(path, obj):
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(path)


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_synth_hom_with_td_and_verify(tmp_path, capsys):
    pat = _write(tmp_path / "p3.json", P3)
    _, td = exact_treewidth(BipartitePattern(1, 2, ((0, 0, 1), (0, 1, 1))))
    td_path = _write(tmp_path / "p3.td", to_pace(BipartitePattern(1, 2, ((0, 0, 1), (0, 1, 1))), td))
    circ = tmp_path / "p3.circ"
    code, _, _ = _run(capsys, "synth", "hom", "--pattern", pat, "--td", td_path, "--n", 3, "--m", 3, "--out", circ)
    assert code == 0
    report = json.loads((tmp_path / "p3.circ.report.json").read_text())
    assert report["command"] == "synth" and len(report["inputs"]) == 2
    code, out, _ = _run(capsys, "verify", circ, "--oracle", "hom", "--pattern", pat, "--trials", 5, "--seed", 1)
    assert code == 0 and out.startswith("PASS")


def test_synth_determinant_and_eval(tmp_path, capsys):
    circ = tmp_path / "det.circ"
    assert _run(capsys, "synth", "determinant", "--n", 4, "--out", circ)[0] == 0
    ident = _write(tmp_path / "id.json", {"n": 4, "m": 4, "entries": [[str(int(i == j)) for j in range(4)] for i in range(4)]})
    code, out, _ = _run(capsys, "eval", circ, ident)
    assert code == 0 and out.strip() == "1/1"
    small = _write(tmp_path / "small.json", {"n": 3, "m": 3, "triples": [[0, 0, "1"]]})
    assert _run(capsys, "eval", circ, small)[0] == 2


def test_permanent_eval(tmp_path, capsys):
    circ = tmp_path / "perm.circ"
    assert _run(capsys, "synth", "immanant", "--lambda", "3", "--out", circ)[0] == 0
    ones = _write(tmp_path / "ones.json", {"n": 3, "m": 3, "entries": [["1"] * 3] * 3})
    code, out, _ = _run(capsys, "eval", circ, ones)
    assert out.strip() == "6/1"
    code, out, _ = _run(capsys, "verify", circ, "--oracle", "perm", "--trials", 3)
    assert code == 0


def test_corrupted_constant_fails_verification(tmp_path, capsys):
    pat = _write(tmp_path / "p3.json", P3)
    circ = tmp_path / "sub.circ"
    assert _run(capsys, "synth", "sub-moebius", "--pattern", pat, "--n", 2, "--m", 2, "--out", circ)[0] == 0
    code, out, _ = _run(capsys, "verify", circ, "--oracle", "sub", "--pattern", pat, "--trials", 5)
    assert code == 0
    lines = circ.read_text().splitlines()
    idx = next(i for i, line in enumerate(lines) if " CONST " in line)
    head = lines[idx].rsplit(" ", 1)[0]
    lines[idx] = head + " 7/3"
    circ.write_text("\n".join(lines) + "\n")
    code, out, _ = _run(capsys, "verify", circ, "--oracle", "sub", "--pattern", pat, "--trials", 5)
    assert code == 4 and out.startswith("FAIL") and "counterexample" in out


def test_usage_and_parse_errors(tmp_path, capsys):
    pat = _write(tmp_path / "p3.json", P3)
    circ = tmp_path / "h.circ"
    _run(capsys, "synth", "hom", "--pattern", pat, "--n", 2, "--m", 2, "--out", circ)
    assert _run(capsys, "verify", circ, "--pattern", pat, "--trials", 0)[0] == 1
    assert _run(capsys, "synth", "hom", "--n", 2)[0] == 1
    assert _run(capsys, "frobnicate")[0] == 1
    bad = _write(tmp_path / "bad.json", "{not json")
    assert _run(capsys, "synth", "hom", "--pattern", bad, "--n", 2, "--m", 2, "--out", circ)[0] == 2
    junk = _write(tmp_path / "junk.circ", "g 0 FOO\n")
    host = _write(tmp_path / "h.json", {"n": 2, "m": 2, "entries": [["1", "1"], ["1", "1"]]})
    assert _run(capsys, "eval", junk, host)[0] == 2


def test_large_pattern_without_decomposition_hits_cap(tmp_path, capsys):
    big = {"left": 7, "right": 7, "edges": [[a, b, 1] for a in range(7) for b in range(7) if (a + b) % 3 == 0]}
    pat = _write(tmp_path / "big.json", big)
    code, _, err = _run(capsys, "synth", "hom", "--pattern", pat, "--n", 2, "--m", 2, "--out", tmp_path / "x.circ")
    assert code == 3 and "cap" in err


def test_cfi_and_wl(tmp_path, capsys):
    g0, g1 = tmp_path / "g0.json", tmp_path / "g1.json"
    assert _run(capsys, "cfi", "--base", "c4", "--twist", "0000", "--out", g0)[0] == 0
    assert _run(capsys, "cfi", "--base", "c4", "--twist", "0001", "--out", g1)[0] == 0
    assert json.loads(g1.read_text())["vertices"] == 8
    code, out, _ = _run(capsys, "wl", "--k", 2, g0, g1)
    assert code == 0 and out.strip().startswith("EQUIVALENT")
    code, out, _ = _run(capsys, "wl", "--k", 3, g0, g1)
    assert out.strip().startswith("DISTINGUISHED")
    assert _run(capsys, "cfi", "--base", "c4", "--twist", "01")[0] == 2


def test_widthlab_jsonl(tmp_path, capsys):
    out = tmp_path / "lab.jsonl"
    code, _, _ = _run(capsys, "widthlab", "--poly", "perm", "--k", 2, "--bases", "auto", "--limit", 2, "--out", out)
    assert code == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert rows[0]["header"]["seed"] == 0 and len(rows) > 1
    assert all(r["ck_equivalent"] for r in rows[1:])


def test_commands_are_deterministic(tmp_path, capsys):
    pat = _write(tmp_path / "p3.json", P3)
    texts = []
    for name in ("a.circ", "b.circ"):
        _run(capsys, "synth", "sub-cover", "--pattern", pat, "--n", 3, "--m", 3, "--out", tmp_path / name)
        texts.append((tmp_path / name).read_text())
    assert texts[0] == texts[1]
