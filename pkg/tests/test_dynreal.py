from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ordlab.dynreal import (PLHomeo, build_realisation, evaluate, fixed_points, order_at_point,
                            orbit_law_report, sign_recovery_mismatches, svg_graphs)
from ordlab.families import klein_family, klein_order, torus_ab_order
from ordlab.groups import KLEIN_TEXT, TREFOIL_TEXT, load_group
from ordlab.orders import snapshot

fr = st.fractions(min_value=-20, max_value=20, max_denominator=7)


@st.composite
def pl_maps(draw):
    n = draw(st.integers(1, 5))
    xs = sorted(set(draw(st.lists(fr, min_size=n, max_size=n))))
    ys = sorted(set(draw(st.lists(fr, min_size=len(xs), max_size=len(xs)))))
    if len(ys) < len(xs):
        ys = [xs[i] + i for i in range(len(xs))]
        ys = sorted(ys)
    return PLHomeo(tuple(xs), tuple(ys[:len(xs)]))


@given(pl_maps(), pl_maps(), fr)
def test_pl_composition_and_inverse(f, g, x):
    assert f.inverse()(f(x)) == x
    assert f.compose(g)(x) == f(g(x))
    assert f.compose(f.inverse())(x) == x


@given(pl_maps(), fr, fr)
def test_pl_maps_increasing(f, x, y):
    if x < y:
        assert f(x) < f(y)


def test_identity_table():
    assert PLHomeo.identity()(Fraction(7, 3)) == Fraction(7, 3)


@pytest.mark.parametrize("r", [3, 4])
def test_klein_realisation_laws(r):
    K = load_group(KLEIN_TEXT)
    for o in klein_family(K).values():
        A = build_realisation(o, r)
        law = orbit_law_report(A)
        assert law["applicable"] > 0 and law["holds"] == law["applicable"]
        assert sign_recovery_mismatches(A) == []


def test_trefoil_realisation_laws():
    T = load_group(TREFOIL_TEXT)
    A = build_realisation(torus_ab_order(T), 4)
    assert orbit_law_report(A)["failures"] == []
    assert sign_recovery_mismatches(A) == []


def test_order_recovered_at_zero():
    K = load_group(KLEIN_TEXT)
    o = klein_order(K, -1, 1)
    A = build_realisation(o, 4)
    rec = order_at_point(A, 0)
    assert snapshot(rec, 3) == snapshot(o, 3)


def test_evaluate_is_a_left_action_on_table():
    K = load_group(KLEIN_TEXT)
    A = build_realisation(klein_order(K, 1, 1), 4)
    x, y = K.word("x"), K.word("y")
    for h in K.ball(2).elements:
        assert evaluate(A, x, A.table[h]) == A.table[K.mul(x, h)]
        assert evaluate(A, y, A.table[h]) == A.table[K.mul(y, h)]


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_klein_fixed_point_verdicts(r):
    """y lies in the convex subgroup <y> and fixes points; x^2 is cofinal."""
    K = load_group(KLEIN_TEXT)
    A = build_realisation(klein_order(K, 1, 1), r)
    assert fixed_points(A, K.word("y")).verdict == "has-fixed-points"
    assert fixed_points(A, K.word("x^2")).verdict == "fixed-point-free-on-window"


def test_svg_emits_polylines():
    K = load_group(KLEIN_TEXT)
    A = build_realisation(klein_order(K, 1, 1), 3)
    svg = svg_graphs(A, [K.word("x"), K.word("y")])
    assert svg.startswith("<svg") and svg.count("<polyline") == 2
