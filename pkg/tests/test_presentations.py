from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from ordlab.presentations import (PresentationError, Word, parse_presentation,
                                  serialise_presentation)

syllables = st.lists(st.tuples(st.integers(0, 2), st.integers(-4, 4)), max_size=12)


def test_klein_presentation_parses():
    P = parse_presentation("gens x y; rel x y x^-1 y;")
    assert P.generators == ("x", "y")
    assert P.show(P.relators[0]) == "x y x^-1 y"


def test_comments_and_peripherals():
    text = "# Klein\ngens x y;  # two generators\nrel x y x^-1 y;\nperipheral T = x^2, y;\n"
    P = parse_presentation(text)
    assert [d.name for d in P.peripherals] == ["T"]
    assert P.show(P.peripherals[0].mu) == "x^2"


@pytest.mark.parametrize("text, line, col", [
    ("gens x y;\nrel x z;\n", 2, 7),
    ("gens x;\nrel x^;\n", 2, 6),
    ("rel x;\n", 1, 1),
])
def test_errors_have_positions(text, line, col):
    with pytest.raises(PresentationError) as e:
        parse_presentation(text)
    assert e.value.line == line
    assert e.value.column == col


def test_undeclared_generator_in_peripheral():
    with pytest.raises(PresentationError):
        parse_presentation("gens x y; rel x y x^-1 y; peripheral T = x^2, z;")


def test_order_of_sections_enforced():
    with pytest.raises(PresentationError):
        parse_presentation("gens x y; peripheral T = x, y; rel x y;")


@given(st.lists(syllables, max_size=3))
def test_roundtrip(rels):
    P = parse_presentation("gens a b c;")
    words = [Word(r) for r in rels if Word(r).syl]
    body = "gens a b c;\n" + "".join(f"rel {P.show(w)};\n" for w in words)
    Q = parse_presentation(body)
    assert parse_presentation(serialise_presentation(Q)) == Q


@given(syllables, syllables)
def test_word_group_laws(s, t):
    u, v = Word(s), Word(t)
    assert (u * u.inverse()).syl == ()
    assert (u * v).inverse() == v.inverse() * u.inverse()
    assert len(u * v) <= len(u) + len(v)
    assert all(a[0] != b[0] for a, b in zip(u.syl, u.syl[1:]))
