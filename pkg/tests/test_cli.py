from __future__ import annotations

import json

import pytest

from ordlab.cli import EXIT_PARSE, EXIT_PATH, EXIT_USAGE, main
from ordlab.conesearch import validate_certificate
from ordlab.groups import load_group


def run(tmp_path, *args):
    rep = tmp_path / "r.json"
    code = main([*args, "--no-timestamp", "--report", str(rep)])
    return code, (json.loads(rep.read_text()) if rep.exists() else None)


def test_parse_roundtrip(tmp_path, capsys):
    f = tmp_path / "k.grp"
    f.write_text("gens x y;   # Klein\nrel x y x^-1 y;\n")
    code, rep = run(tmp_path, "parse", str(f))
    assert code == 0 and rep["family"] == "KleinBottle"
    assert rep["peripherals"] == [{"lam": "y", "mu": "x^2", "name": "T"}]
    assert "gens x y;" in capsys.readouterr().out


def test_cone_search_klein(tmp_path):
    code, rep = run(tmp_path, "cone-search", "@klein", "--radius", "3")
    assert code == 0 and rep["count"] == 4 and rep["complete"]
    assert sorted(c["matches"] for c in rep["cones"]) == ["o", "o(x)", "o(x,y)", "o(y)"]


def test_detect_strong(tmp_path):
    code, rep = run(tmp_path, "detect", "@trefoil", "--slope", "0/1", "--level", "strong", "--epi", "ab")
    assert code == 0 and rep["status"] == "certified" and rep["level"] == "strong"
    code, rep = run(tmp_path, "detect", "@trefoil", "--slope", "∞", "--level", "strong")
    assert code == 0 and rep["status"] == "not-certified"


def test_glue(tmp_path):
    g = tmp_path / "g.glue"
    g.write_text("vertex N1 @klein\nvertex N2 @klein\nedge N1.T N2.T [[1,0],[0,1]]\n")
    code, rep = run(tmp_path, "glue", str(g), "--assign", "l,l")
    assert code == 0 and rep["coherence"]["status"] == "pass"
    assert rep["bludov_glass"][0]["status"] == "compatible"


def test_certificate_file(tmp_path):
    cert = tmp_path / "c.txt"
    code, rep = run(tmp_path, "certify-nonorderable", "@z3-torsion", "--emit-certificate", str(cert))
    assert code == 0 and rep["certified"]
    assert validate_certificate(load_group("gens x; rel x^3;"), cert.read_text()) > 0


def test_svg_outputs(tmp_path):
    s1, s2 = tmp_path / "c.svg", tmp_path / "d.svg"
    assert run(tmp_path, "detect", "@klein", "--slope", "0/1", "--svg", str(s1))[0] == 0
    assert run(tmp_path, "dynreal", "@klein", "--radius", "3", "--svg", str(s2))[0] == 0
    assert s1.read_text().startswith("<svg") and s2.read_text().startswith("<svg")


def test_timestamp_present_by_default(tmp_path):
    rep = tmp_path / "r.json"
    assert main(["ball", "@z", "--radius", "2", "--report", str(rep)]) == 0
    data = json.loads(rep.read_text())
    assert "timestamp" in data and data["size"] == 5


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.grp"
    bad.write_text("gens x;\nrel y;\n")
    assert main(["parse", str(bad)]) == EXIT_PARSE
    assert main(["parse", str(tmp_path / "missing.grp")]) == EXIT_PATH
    assert main(["slope", "@klein", "--order", "nope"]) == EXIT_USAGE
    assert main(["ball", "@z", "--report", str(tmp_path / "no" / "dir" / "r.json")]) == EXIT_PATH
    with pytest.raises(SystemExit) as e:
        main(["cone-search", "@klein", "--radius", "-2"])
    assert e.value.code == EXIT_USAGE
