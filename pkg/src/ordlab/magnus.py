"""Magnus bi-order on free groups, and the commutator subgroup of a torus
knot group rewritten as a free group (Reidemeister-Schreier)."""
from __future__ import annotations

from .presentations import Word


def magnus_expansion(w: Word, degree: int) -> dict:
    """Truncated Magnus series of w: monomial tuple -> integer coefficient."""
    series = {(): 1}
    for g, e in w.syl:
        for _ in range(abs(e)):
            new: dict = {}
            for m, c in series.items():
                new[m] = new.get(m, 0) + c
                room = degree - len(m)
                if e > 0:
                    if room >= 1:
                        mm = m + (g,)
                        new[mm] = new.get(mm, 0) + c
                else:
                    sgn = -1
                    mm = m
                    for _j in range(room):
                        mm = mm + (g,)
                        new[mm] = new.get(mm, 0) + sgn * c
                        sgn = -sgn
            series = {m: c for m, c in new.items() if c}
    return series


def magnus_sign(w: Word) -> int:
    """Sign of the leading term of M(w) - 1 in degree-then-lex order.

    This is a bi-order on the free group; the identity has no sign.
    """
    if not w.syl:
        raise ValueError("identity has no sign")
    n = len(w)
    D = 1
    while True:
        series = magnus_expansion(w, D)
        terms = sorted((len(m), m) for m, c in series.items() if m and c)
        if terms:
            return 1 if series[terms[0][1]] > 0 else -1
        if D >= n:
            raise AssertionError("nontrivial word with trivial Magnus expansion")
        D = min(2 * D, n)


class TorusKernel:
    """Rewrites elements of the commutator subgroup of <u, v | u^p = v^q>
    as words in a free basis of rank (p-1)(q-1).

    The commutator subgroup meets the centre trivially and maps isomorphically
    onto the commutator subgroup of Z_p * Z_q, which has Schreier transversal
    a^i b^j and free generators g(i, j) = a^i b^j a b^-j a^-(i+1), j != 0,
    subject to g(0,j)...g(p-1,j) = 1.
    """

    def __init__(self, group):
        self.G = group
        self.p, self.q = group.p, group.q

    def index(self, i: int, j: int) -> int:
        return i * (self.q - 1) + (j - 1)

    @property
    def rank(self) -> int:
        return (self.p - 1) * (self.q - 1)

    def rewrite(self, g: Word) -> Word:
        G = self.G
        if G.abelian(g) != 0:
            raise ValueError("element is not in the commutator subgroup")
        _, syl = G.rep(g)
        p, q = self.p, self.q
        i = j = 0
        out: list[tuple[int, int]] = []
        for gi, e in syl:
            for _ in range(e):
                if gi == 0:
                    if j:
                        if i < p - 1:
                            out.append((self.index(i, j), 1))
                        else:
                            for t in range(p - 2, -1, -1):
                                out.append((self.index(t, j), -1))
                    i = (i + 1) % p
                else:
                    j = (j + 1) % q
        assert i == 0 and j == 0
        return Word(out)

    def sign(self, g: Word) -> int:
        return magnus_sign(self.rewrite(g))
