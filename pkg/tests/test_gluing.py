from __future__ import annotations

import pytest

from ordlab.gluing import (BoundedAmalgam, GluingError, GluingMap, assignment_from_list,
                           bludov_glass_check, build_amalgam, coherence_check, family_fixture,
                           inverse_transport, parse_gluing_graph, transport_slope)
from ordlab.groups import KLEIN_TEXT, TREFOIL_TEXT, Z2_TEXT, load_group
from ordlab.lattice import LatticeLine, Rational, classify_line_orders, parse_slope

I = ((1, 0), (0, 1))
SWAP = ((0, 1), (1, 0))


@pytest.fixture(scope="module")
def groups():
    return load_group(KLEIN_TEXT), load_group(KLEIN_TEXT), load_group(TREFOIL_TEXT)


def test_determinant_checked(groups):
    K1, K2, _ = groups
    with pytest.raises(GluingError):
        GluingMap(K1.peripheral(), K2.peripheral(), ((2, 0), (0, 1)))


def test_transport_round_trip(groups):
    K1, K2, _ = groups
    f = GluingMap(K1.peripheral(), K2.peripheral(), ((2, 1), (1, 1)))
    for s in (Rational(0, 1), Rational(3, -2), Rational(1, 0), parse_slope("√2"), parse_slope("(1-√3)/2")):
        assert inverse_transport(f, transport_slope(f, s)) == s
    assert transport_slope(SWAP, Rational(0, 1)) == Rational(1, 0)


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_klein_restrictions_are_the_four_lambda_orders(groups, r):
    K1, _, _ = groups
    from ordlab.gluing import restriction_table
    from ordlab.families import klein_family
    P = K1.peripheral()
    Z2 = load_group(Z2_TEXT)
    rs = {restriction_table(o, P, r) for o in klein_family(K1).values()}
    # the same box on Z^2, where lam = a and mu = b
    line = {tuple(o.sign(Z2.from_vector((b, a))) for a in range(-r, r + 1) for b in range(-r, r + 1)
                  if (a, b) != (0, 0))
            for o in classify_line_orders(LatticeLine(Rational(0, 1)), Z2)}
    assert rs == line and len(rs) == 4


def test_bludov_glass_verdicts_and_symmetry(groups):
    K1, K2, T = groups
    N1, N2, NT = family_fixture(K1, "N1"), family_fixture(K2, "N2"), family_fixture(T, "K")
    for N in (N1, N2, NT):
        assert N.validate(3)["conjugate_closed_at_radius"] == 3
    cases = [(N1, N2, I, "compatible"), (NT, N2, I, "compatible"), (N1, N2, SWAP, "incompatible")]
    for A, B, M, want in cases:
        f = GluingMap(A.group.peripheral(), B.group.peripheral(), M)
        v = bludov_glass_check(A, B, f, 3)
        assert v.status == want
        assert bludov_glass_check(B, A, f.inverse(), 3).status == want
        if want == "compatible":
            assert "Bludov-Glass" in v.implication
        else:
            assert "no partner" in v.reason


def test_irrational_gluing_of_line_families():
    Z1, Z2 = load_group(Z2_TEXT), load_group(Z2_TEXT)
    s = parse_slope("√2")
    M = ((1, 1), (0, 1))
    N1 = family_fixture(Z1, "A", s)
    N2 = family_fixture(Z2, "B", transport_slope(M, s))
    assert len(N1.orders) == len(N2.orders) == 2
    f = GluingMap(Z1.peripheral(), Z2.peripheral(), M)
    assert bludov_glass_check(N1, N2, f, 3).status == "compatible"
    N3 = family_fixture(Z2, "C", s)
    assert bludov_glass_check(N1, N3, f, 3).status == "incompatible"


def test_non_conjugation_closed_family_flagged():
    from ordlab.families import shear_order
    from ordlab.gluing import NormalFamilyFixture
    from ordlab.groups import semidirect_shear
    from ordlab.orders import opposite
    S = semidirect_shear()
    o = shear_order(S)
    N = NormalFamilyFixture(S, [o, opposite(o)], "shear")
    tags = N.validate(3)
    assert tags["conjugate_closed_at_radius"] is None and tags["opposite_closed"]


GRAPH = "vertex N1 @klein\nvertex N2 @klein\nedge N1.T N2.T [[1,0],[0,1]]\n"


def test_coherence(groups):
    g = parse_gluing_graph(GRAPH)
    assert coherence_check(g, assignment_from_list(g, ["l", "l"]))["status"] == "pass"
    rep = coherence_check(g, assignment_from_list(g, ["l", "m"]))
    assert rep["status"] == "fail"
    assert "N1.T->N2.T" in rep["edges"][0]["reason"]
    g2 = parse_gluing_graph("vertex K @trefoil\nvertex N @klein\nedge K.T N.T [[1,0],[0,1]]\n")
    assert coherence_check(g2, assignment_from_list(g2, ["0/1", "l"]))["status"] == "pass"


def test_coherence_names_vertex_without_witness():
    g = parse_gluing_graph("vertex N1 @klein\nvertex N2 @klein\nedge N1.T N2.T [[0,1],[1,0]]\n")
    rep = coherence_check(g, assignment_from_list(g, ["m", "l"]))
    assert rep["status"] == "fail"
    assert rep["edges"][0]["status"] == "pass"
    assert [v["vertex"] for v in rep["vertices"] if v["status"] == "fail"] == ["N1"]


@pytest.mark.parametrize("text", [
    "vertex A @klein\nedge A.T B.T [[1,0],[0,1]]\n",
    "vertex A @klein\nvertex B @klein\nedge A.T B.T [[1,0],[0,1]]\nedge A.T B.T [[1,0],[0,1]]\n",
    "vertex A @klein\nvertex B @klein\nedge A.T B.T [[2,0],[0,1]]\n",
    "vertex A @klein\nvertex B @klein\nedge A.X B.T [[1,0],[0,1]]\n",
    "vertex A @klein\nbogus\n",
])
def test_graph_errors(text):
    with pytest.raises(GluingError):
        parse_gluing_graph(text)


def test_graph_file_references(tmp_path):
    (tmp_path / "n.grp").write_text(KLEIN_TEXT)
    g = parse_gluing_graph("vertex A n.grp\nvertex B @klein\nedge A.T B.T [[1,0],[0,1]]\n", str(tmp_path))
    assert g.tori() == [("A", "T"), ("B", "T")]


def test_amalgam_rejects_edge_group_factor():
    Z1, Z2 = load_group(Z2_TEXT), load_group(Z2_TEXT)
    with pytest.raises(GluingError, match="factor equals edge group"):
        build_amalgam(Z1, Z2, GluingMap(Z1.peripheral(), Z2.peripheral(), I))


def test_klein_amalgam_infinite_order(groups):
    K1, K2, _ = groups
    A = build_amalgam(K1, K2, GluingMap(K1.peripheral(), K2.peripheral(), I), 8)
    assert isinstance(A, BoundedAmalgam)
    w = A.word("x1 x2")
    lengths = [len(A.power(w, n)) for n in range(1, 5)]
    assert lengths == [2, 4, 6, 8]
    assert A.is_identity(A.word("x1^2 x2^-2"))
    assert A.is_identity(A.word("y1 y2^-1"))


def test_amalgam_factor_embedding(groups):
    K1, K2, _ = groups
    A = build_amalgam(K1, K2, GluingMap(K1.peripheral(), K2.peripheral(), SWAP), 4)
    ball = K1.ball(3).elements
    for g in ball:
        for h in ball:
            assert (A.normal_form(A.factor_word(0, g)) == A.normal_form(A.factor_word(0, h))) == (g == h)


def test_trefoil_klein_amalgam_cosets(groups):
    _, K2, T = groups
    A = build_amalgam(T, K2, GluingMap(T.peripheral(), K2.peripheral(), I), 6)
    mu1 = A.factor_word(0, T.peripheral().mu)
    x2 = A.factor_word(1, K2.word("x"))
    assert A.syllable_length(mu1) == 0
    assert A.syllable_length(x2) == 1
    assert A.syllable_length(A.mul(A.word("u"), x2)) == 2
    assert A.is_identity(A.mul(mu1, A.inv(A.factor_word(1, K2.peripheral().mu))))
    assert A.equal_certified(A.word("u x"), A.word("u x")) is True
    assert A.equal_certified(A.power(A.word("u x"), 4), A.power(A.word("u x"), 4)) is None
