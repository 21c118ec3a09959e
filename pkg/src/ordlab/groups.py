"""Group backends with exact word problems, Cayley balls and peripheral data."""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Optional

from .presentations import IDENTITY, PeripheralDecl, Presentation, Word


class UndecidedError(Exception):
    """The backend cannot decide the question (the tri-valued "unknown")."""


class ResourceLimitError(Exception):
    pass


class UnsupportedPresentation(ValueError):
    pass


DEFAULT_BALL_CAP = 200_000


@dataclass
class Ball:
    radius: int
    elements: list          # normal forms in ball order
    length: dict            # normal form -> word length
    geodesic: dict          # normal form -> a geodesic Word

    def __post_init__(self):
        self.index = {g: i for i, g in enumerate(self.elements)}

    def __contains__(self, g) -> bool:
        return g in self.index

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def nontrivial(self):
        return [g for g in self.elements if g.syl]


class PeripheralSubgroup:
    """A named ℤ² subgroup with ordered basis (mu, lam)."""

    def __init__(self, group: "GroupBackend", name: str, mu: Word, lam: Word):
        self.group = group
        self.name = name
        self.mu = group.normal_form(mu)
        self.lam = group.normal_form(lam)
        self._mu_pows: dict[int, Word] = {}
        self._lam_pows: dict[int, Word] = {}

    def _pow(self, cache, base, n):
        if n not in cache:
            cache[n] = self.group.normal_form(base ** n)
        return cache[n]

    def element(self, a: int, b: int) -> Word:
        """Normal form of mu^a lam^b."""
        return self.group.mul(self._pow(self._mu_pows, self.mu, a),
                              self._pow(self._lam_pows, self.lam, b))

    def lattice_element(self, x: int, y: int) -> Word:
        """Lattice point (x, y) = x*lam + y*mu, so slope p/q has direction (q, p)."""
        return self.element(y, x)

    def coords(self, w: Word, window: Optional[int] = None):
        return self.group.peripheral_coords(self, w, window)

    def conjugated(self, g: Word) -> "PeripheralSubgroup":
        G = self.group
        gi = G.inv(g)
        return PeripheralSubgroup(G, f"{self.name}^({G.show(g)})",
                                  G.mul(g, self.mu, gi), G.mul(g, self.lam, gi))

    def __repr__(self):
        G = self.group
        return f"Peripheral({self.name}: mu={G.show(self.mu)}, lam={G.show(self.lam)})"


class GroupBackend:
    family = "generic"

    def __init__(self, presentation: Presentation):
        self.presentation = presentation
        self.names = list(presentation.generators)
        self.rank = len(self.names)
        self._nf_cache: dict[Word, Word] = {}
        self._balls: dict[int, Ball] = {}
        self.peripherals: list[PeripheralSubgroup] = []

    # word problem -----------------------------------------------------
    def _nf(self, w: Word) -> Word:
        raise NotImplementedError

    def normal_form(self, w: Word) -> Word:
        r = self._nf_cache.get(w)
        if r is None:
            r = self._nf(w)
            if len(self._nf_cache) < 500_000:
                self._nf_cache[w] = r
        return r

    def mul(self, *ws: Word) -> Word:
        syl: tuple = ()
        for w in ws:
            syl += w.syl
        return self.normal_form(Word(syl))

    def inv(self, w: Word) -> Word:
        return self.normal_form(w.inverse())

    def power(self, w: Word, n: int) -> Word:
        return self.normal_form(w ** n)

    def equal(self, a: Word, b: Word) -> bool:
        return self.normal_form(a) == self.normal_form(b)

    def is_identity(self, w: Word) -> bool:
        return not self.normal_form(w).syl

    def word(self, text: str) -> Word:
        return self.normal_form(self.presentation.word(text))

    def show(self, w: Word) -> str:
        return w.text(self.names)

    def letters(self) -> list[Word]:
        out = []
        for g in range(self.rank):
            out += [Word.gen(g, 1), Word.gen(g, -1)]
        return out

    # balls ------------------------------------------------------------
    def ball(self, r: int, cap: int = DEFAULT_BALL_CAP) -> Ball:
        if r < 0:
            raise ValueError("radius must be nonnegative")
        if r in self._balls:
            return self._balls[r]
        length = {IDENTITY: 0}
        geo = {IDENTITY: IDENTITY}
        frontier = [IDENTITY]
        letters = self.letters()
        for k in range(1, r + 1):
            nxt = []
            for g in frontier:
                for s in letters:
                    h = self.mul(g, s)
                    if h not in length:
                        length[h] = k
                        geo[h] = geo[g] * s
                        nxt.append(h)
                        if len(length) > cap:
                            raise ResourceLimitError(
                                f"ball of radius {r} exceeds cap {cap}")
            frontier = sorted(nxt, key=Word.key)
        elems = sorted(length, key=lambda w: (length[w], w.syl))
        ball = Ball(r, elems, length, geo)
        self._balls[r] = ball
        return ball

    def word_length(self, g: Word, r_max: int = 12):
        g = self.normal_form(g)
        for r in range(r_max + 1):
            b = self.ball(r)
            if g in b:
                return b.length[g]
        return None

    # peripherals ------------------------------------------------------
    def peripheral(self, name: Optional[str] = None) -> PeripheralSubgroup:
        if not self.peripherals:
            raise KeyError("group has no peripheral subgroup")
        if name is None:
            return self.peripherals[0]
        for p in self.peripherals:
            if p.name == name:
                return p
        raise KeyError(f"no peripheral named {name!r}")

    def peripheral_coords(self, P: PeripheralSubgroup, w: Word,
                          window: Optional[int] = None):
        """(a, b) with w = mu^a lam^b, searched over |a|, |b| <= window."""
        w = self.normal_form(w)
        W = window if window is not None else 2 * max(len(w), 1) + 6
        table = {P.element(a, 0): a for a in range(-W, W + 1)}
        for b in sorted(range(-W, W + 1), key=lambda t: (abs(t), t)):
            x = self.mul(w, P.element(0, -b))
            if x in table:
                return (table[x], b)
        return None

    def add_peripheral(self, name: str, mu: Word, lam: Word, check: bool = True):
        P = PeripheralSubgroup(self, name, mu, lam)
        if check:
            validate_peripheral(P)
        self.peripherals.append(P)
        return P

    def describe(self) -> str:
        return self.family


def validate_peripheral(P: PeripheralSubgroup, bound: int = 6) -> None:
    G = P.group
    comm = G.mul(P.mu, P.lam, G.inv(P.mu), G.inv(P.lam))
    if comm.syl:
        raise UnsupportedPresentation(f"peripheral {P.name}: basis does not commute")
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            if (a, b) != (0, 0) and not P.element(a, b).syl:
                raise UnsupportedPresentation(
                    f"peripheral {P.name}: relation mu^{a} lam^{b} = 1")


# ---------------------------------------------------------------------
class FreeGroup(GroupBackend):
    family = "Free"

    def _nf(self, w):
        return w


class ZnGroup(GroupBackend):
    family = "Zn"

    def vector(self, w: Word) -> tuple:
        v = [0] * self.rank
        for g, e in w.syl:
            v[g] += e
        return tuple(v)

    def from_vector(self, v) -> Word:
        return Word((i, e) for i, e in enumerate(v))

    def _nf(self, w):
        return self.from_vector(self.vector(w))

    def peripheral_coords(self, P, w, window=None):
        m, l, v = self.vector(P.mu), self.vector(P.lam), self.vector(w)
        n = self.rank
        for i in range(n):
            for j in range(i + 1, n):
                det = m[i] * l[j] - m[j] * l[i]
                if det:
                    an = v[i] * l[j] - v[j] * l[i]
                    bn = m[i] * v[j] - m[j] * v[i]
                    if an % det or bn % det:
                        return None
                    a, b = an // det, bn // det
                    if all(a * m[k] + b * l[k] == v[k] for k in range(n)):
                        return (a, b)
                    return None
        return None

    def describe(self):
        return f"Zn({self.rank})"


class KleinGroup(GroupBackend):
    """<x, y | x y x^-1 y>, normal form x^a y^b."""
    family = "KleinBottle"

    def __init__(self, presentation, x: int, y: int):
        super().__init__(presentation)
        self.x, self.y = x, y

    def pair(self, w: Word) -> tuple[int, int]:
        a = b = 0
        for g, e in w.syl:
            if g == self.x:
                a += e
                if e % 2:
                    b = -b
            else:
                b += e
        return a, b

    def from_pair(self, a: int, b: int) -> Word:
        return Word(((self.x, a), (self.y, b)))

    def _nf(self, w):
        return self.from_pair(*self.pair(w))

    def peripheral_coords(self, P, w, window=None):
        if P.mu == self.from_pair(2, 0) and P.lam == self.from_pair(0, 1):
            a, b = self.pair(w)
            return (a // 2, b) if a % 2 == 0 else None
        return super().peripheral_coords(P, w, window)


def _torus_basis(p: int, q: int) -> tuple[int, int]:
    best = None
    for a in range(-2 * q, 2 * q + 1):
        if (1 - a * q) % p == 0:
            b = (1 - a * q) // p
            cand = (abs(a) + abs(b), -a, a, b)
            if best is None or cand < best:
                best = cand
    return best[2], best[3]


class TorusKnotGroup(GroupBackend):
    """<u, v | u^p = v^q>; normal form z^k times alternating syllables."""
    family = "TorusKnot"

    def __init__(self, presentation, p: int, q: int, u: int, v: int):
        super().__init__(presentation)
        self.p, self.q, self.u, self.v = p, q, u, v
        self.mu_exps = _torus_basis(p, q)

    def rep(self, w: Word):
        k = 0
        st: list[list[int]] = []
        for g, e in w.syl:
            gi = 0 if g == self.u else 1
            n = self.p if gi == 0 else self.q
            if st and st[-1][0] == gi:
                e += st.pop()[1]
            c, e = divmod(e, n)
            k += c
            if e:
                st.append([gi, e])
        return k, tuple((gi, e) for gi, e in st)

    def from_rep(self, k: int, syl) -> Word:
        out = [(self.u, self.p * k)]
        for gi, e in syl:
            out.append((self.u if gi == 0 else self.v, e))
        return Word(out)

    def _nf(self, w):
        return self.from_rep(*self.rep(w))

    def abelian(self, w: Word) -> int:
        return sum((self.q if g == self.u else self.p) * e for g, e in w.syl)

    def mu_word(self) -> Word:
        a, b = self.mu_exps
        return self.normal_form(Word(((self.u, a), (self.v, b))))

    def lam_word(self) -> Word:
        return self.normal_form(Word(((self.u, self.p),)) * self.mu_word() ** (-self.p * self.q))

    def peripheral_coords(self, P, w, window=None):
        if P.mu == self.mu_word() and P.lam == self.lam_word():
            # mu^a lam^b = z^b mu^(a - pq b)
            w = self.normal_form(w)
            a = self.abelian(w)
            m = len(self.rep(w)[1]) + 2
            for n in range(-m, m + 1):
                k, syl = self.rep(self.mul(w, P.mu ** (-n)))
                if not syl:
                    # w = z^k mu^n
                    b = k
                    if n + self.p * self.q * b == a:
                        return (a, b)
            return None
        return super().peripheral_coords(P, w, window)

    def describe(self):
        return f"TorusKnot({self.p},{self.q})"


class SemidirectShear(GroupBackend):
    """ℤ² ⋊ ℤ with t a t^-1 = a b, t b t^-1 = b; elements (x, y, n) = a^x b^y t^n."""
    family = "Semidirect"

    def triple(self, w: Word):
        x = y = n = 0
        for g, e in w.syl:
            if g == 0:
                x2, y2 = e, 0
            elif g == 1:
                x2, y2 = 0, e
            else:
                n += e
                continue
            # (v, n)(w, 0) = (v + A^n w, n); A^n (x, y) = (x, y + n x)
            x += x2
            y += y2 + n * x2
        return x, y, n

    def _nf(self, w):
        x, y, n = self.triple(w)
        return Word(((0, x), (1, y), (2, n)))

    def describe(self):
        return "Semidirect(Z2 x| Z, shear)"


class FiniteGroup(GroupBackend):
    """Finite group via coset enumeration over the trivial subgroup."""
    family = "Finite"

    def __init__(self, presentation, table, canon):
        super().__init__(presentation)
        self.table = table
        self.canon = canon
        self.order = len(table)

    def _nf(self, w):
        c = 0
        for g, s in w.letters():
            c = self.table[c][2 * g + (0 if s > 0 else 1)]
        return self.canon[c]

    def describe(self):
        return f"Finite(order {self.order})"


def todd_coxeter(ngens: int, relators: list[Word], max_cosets: int = 20000):
    """HLT coset enumeration; returns the compressed coset table or None."""
    cols = 2 * ngens
    rels = [[2 * g + (0 if s > 0 else 1) for g, s in r.letters()] for r in relators]
    # closing the inverse-pair relations is built into the table
    table: list[list] = [[None] * cols]
    parent = [0]

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    def define(c, x):
        if len(table) >= max_cosets:
            raise ResourceLimitError("coset limit")
        d = len(table)
        table.append([None] * cols)
        parent.append(d)
        table[c][x] = d
        table[d][x ^ 1] = c
        return d

    def coincidence(a, b):
        queue = [(a, b)]
        while queue:
            a, b = queue.pop()
            a, b = find(a), find(b)
            if a == b:
                continue
            if a > b:
                a, b = b, a
            parent[b] = a
            for x in range(cols):
                d = table[b][x]
                if d is None:
                    continue
                table[b][x] = None
                if table[d][x ^ 1] == b:
                    table[d][x ^ 1] = None
                a2 = find(a)
                d2 = find(d)
                if table[a2][x] is not None:
                    queue.append((table[a2][x], d2))
                elif table[d2][x ^ 1] is not None:
                    queue.append((a2, table[d2][x ^ 1]))
                else:
                    table[a2][x] = d2
                    table[d2][x ^ 1] = a2

    def scan_fill(c, rel):
        f, i = c, 0
        b, j = c, len(rel) - 1
        while True:
            while i <= j and table[f][rel[i]] is not None:
                f = table[f][rel[i]]
                i += 1
            if i > j:
                if f != b:
                    coincidence(f, b)
                return
            while j >= i and table[b][rel[j] ^ 1] is not None:
                b = table[b][rel[j] ^ 1]
                j -= 1
            if j < i:
                coincidence(f, b)
                return
            if i == j:
                table[f][rel[i]] = b
                table[b][rel[i] ^ 1] = f
                return
            define(f, rel[i])

    try:
        c = 0
        while c < len(table):
            if find(c) == c:
                for rel in rels:
                    if find(c) != c:
                        break
                    scan_fill(c, rel)
                if find(c) == c:
                    for x in range(cols):
                        if table[c][x] is None:
                            define(c, x)
            c += 1
    except ResourceLimitError:
        return None
    live = [c for c in range(len(table)) if find(c) == c]
    # renumber in shortlex BFS order from coset 0
    order = [0]
    seen = {0: 0}
    i = 0
    while i < len(order):
        c = order[i]
        for x in range(cols):
            d = find(table[c][x])
            if d not in seen:
                seen[d] = len(order)
                order.append(d)
        i += 1
    if len(order) != len(live):
        return None
    new = [[seen[find(table[c][x])] for x in range(cols)] for c in order]
    return new


def _finite_from_table(P: Presentation, table) -> FiniteGroup:
    n = len(table)
    canon: list[Optional[Word]] = [None] * n
    canon[0] = IDENTITY
    queue = [0]
    for c in queue:
        for x in range(len(table[c])):
            d = table[c][x]
            if canon[d] is None:
                canon[d] = canon[c] * Word.gen(x // 2, 1 if x % 2 == 0 else -1)
                queue.append(d)
    return FiniteGroup(P, table, canon)


# ---------------------------------------------------------------------
def _is_commutator(r: Word):
    s = r.syl
    if len(s) == 4 and all(abs(e) == 1 for _, e in s):
        (g1, e1), (h1, f1), (g2, e2), (h2, f2) = s
        if g1 == g2 and h1 == h2 and g1 != h1 and e1 == -e2 and f1 == -f2:
            return frozenset((g1, h1))
    return None


def backend_from_presentation(P: Presentation, finite_cap: int = 20000) -> GroupBackend:
    """Recognise a built-in family and attach peripheral subgroups."""
    rels = list(P.relators)
    n = len(P.generators)
    G: GroupBackend
    defaults: list[tuple[str, Word, Word]] = []
    if not rels:
        G = FreeGroup(P)
    elif all(_is_commutator(r) for r in rels) and \
            {_is_commutator(r) for r in rels} == {frozenset((i, j)) for i in range(n) for j in range(i + 1, n)}:
        G = ZnGroup(P)
        if n == 2:
            defaults.append(("T", Word.gen(1), Word.gen(0)))
    elif len(rels) == 1 and _klein_shape(rels[0]):
        x, y = _klein_shape(rels[0])
        G = KleinGroup(P, x, y)
        defaults.append(("T", Word.gen(x, 2), Word.gen(y)))
    elif len(rels) == 1 and n == 2 and _torus_shape(rels[0]):
        u, p, v, q = _torus_shape(rels[0])
        G = TorusKnotGroup(P, p, q, u, v)
        defaults.append(("T", G.mu_word(), G.lam_word()))
    else:
        table = todd_coxeter(n, rels, finite_cap)
        if table is None:
            raise UnsupportedPresentation(
                "presentation matches no built-in family and coset enumeration did not close")
        G = _finite_from_table(P, table)
    if P.peripherals:
        for d in P.peripherals:
            G.add_peripheral(d.name, d.mu, d.lam)
    else:
        for name, mu, lam in defaults:
            G.add_peripheral(name, mu, lam)
    return G


def _klein_shape(r: Word):
    s = r.syl
    if len(s) == 4 and [abs(e) for _, e in s] == [1, 1, 1, 1]:
        (x1, a1), (y1, b1), (x2, a2), (y2, b2) = s
        if x1 == x2 and y1 == y2 and x1 != y1 and a1 == 1 and a2 == -1 and b1 == 1 and b2 == 1:
            return x1, y1
    return None


def _torus_shape(r: Word):
    s = r.syl
    if len(s) == 2:
        (u, p), (v, mq) = s
        if p >= 2 and mq <= -2 and gcd(p, -mq) == 1:
            return u, p, v, -mq
    return None


def semidirect_shear() -> SemidirectShear:
    from .presentations import parse_presentation
    P = parse_presentation(
        "gens a b t; rel a b a^-1 b^-1; rel t a t^-1 b^-1 a^-1; rel t b t^-1 b^-1;")
    G = SemidirectShear(P)
    G.add_peripheral("T", Word.gen(1), Word.gen(0))
    return G


def load_group(text: str) -> GroupBackend:
    from .presentations import parse_presentation
    return backend_from_presentation(parse_presentation(text))


KLEIN_TEXT = "gens x y;\nrel x y x^-1 y;\n"
TREFOIL_TEXT = "gens u v;\nrel u^2 v^-3;\n"
Z2_TEXT = "gens a b;\nrel a b a^-1 b^-1;\n"
Z_TEXT = "gens a;\n"
