from __future__ import annotations

import pytest

from oracles import brute_force_cones
from ordlab.conesearch import (CertificateError, LineConstraint, SignConstraint, certify_nonorderable,
                               count_classes, search, validate_certificate)
from ordlab.families import klein_family
from ordlab.groups import KLEIN_TEXT, Z2_TEXT, Z_TEXT, load_group
from ordlab.lattice import Rational, parse_slope
from ordlab.orders import cone_violations, snapshot

TORSION = ["gens x; rel x^2;", "gens x; rel x^3;", "gens a b; rel a^2; rel b^2; rel a b a^-1 b^-1;",
           "gens a b; rel a^3; rel b^2; rel a b a b;"]


@pytest.mark.parametrize("text, r", [(Z_TEXT, 1), (Z_TEXT, 3), (Z2_TEXT, 1), (Z2_TEXT, 2),
                                     (KLEIN_TEXT, 1), (KLEIN_TEXT, 2), (KLEIN_TEXT, 3)])
def test_counts_match_brute_force(text, r):
    G = load_group(text)
    out = search(G, r)
    assert out.complete
    assert out.count == brute_force_cones(G, r)


def test_found_cones_satisfy_axioms():
    G = load_group(KLEIN_TEXT)
    for s in search(G, 4).cones:
        assert cone_violations(s) == []


def test_klein_cones_are_the_four_orders():
    G = load_group(KLEIN_TEXT)
    fam = {snapshot(o, 4).table() for o in klein_family(G).values()}
    assert {s.table() for s in search(G, 4).cones} == fam


def test_sign_constraint_halves():
    G = load_group(KLEIN_TEXT)
    out = search(G, 3, [SignConstraint(G.word("y"), 1)])
    assert out.count == 2
    assert all(s.signs[G.word("y")] == 1 for s in out.cones)


# the line through (2, -3) misses B_3, so its four orders collapse to two snapshots
@pytest.mark.parametrize("slope, n", [("0/1", 4), ("1/2", 4), ("∞", 4), ("√2", 2), ("-3/2", 2)])
def test_z2_line_constraint(slope, n):
    G = load_group(Z2_TEXT)
    assert count_classes(G, 3, [LineConstraint(G.peripheral(), parse_slope(slope))]) == n


def test_fixed_side_line_constraint():
    G = load_group(Z2_TEXT)
    c = LineConstraint(G.peripheral(), Rational(0, 1), fixed_side=1)
    assert count_classes(G, 3, [c]) == 2


@pytest.mark.parametrize("text", TORSION)
def test_torsion_certificates_replay(text):
    G = load_group(text)
    cert = certify_nonorderable(G, 3)
    assert cert is not None
    assert validate_certificate(G, cert.text()) > 0


def test_tampered_certificate_rejected():
    G = load_group("gens x; rel x^3;")
    text = certify_nonorderable(G, 3).text()
    bad = text.replace("closure x ; x ; x^-1", "closure x ; x ; x")
    assert bad != text
    with pytest.raises(CertificateError):
        validate_certificate(G, bad)
    with pytest.raises(CertificateError):
        validate_certificate(G, "\n".join(l for l in text.splitlines() if "conflict" not in l))


def test_certificate_does_not_transfer_to_orderable_group():
    G3 = load_group("gens x; rel x^3;")
    text = certify_nonorderable(G3, 3).text()
    with pytest.raises(CertificateError):
        validate_certificate(load_group(Z_TEXT), text)


def test_constrained_unsat_certificate():
    G = load_group(KLEIN_TEXT)
    c = [LineConstraint(G.peripheral(), Rational(1, 0))]
    out = search(G, 3, c)
    assert out.unsat
    assert validate_certificate(G, out.certificate.text(), c) > 0


def test_orderable_group_has_no_certificate():
    assert certify_nonorderable(load_group(KLEIN_TEXT), 3) is None


def test_results_independent_of_jobs():
    G = load_group(KLEIN_TEXT)
    a = [s.serialise() for s in search(G, 4, jobs=1).cones]
    b = [s.serialise() for s in search(G, 4, jobs=3).cones]
    assert a == b
    G2 = load_group("gens a b; rel a^3; rel b^2; rel a b a b;")
    t1 = certify_nonorderable(G2, 3, jobs=1).text()
    t2 = certify_nonorderable(G2, 3, jobs=4).text()
    assert t1 == t2
