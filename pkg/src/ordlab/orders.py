"""Left-orders as sign oracles, the standard combinators, and ball snapshots."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .groups import GroupBackend, UndecidedError
from .presentations import Word


class OrderError(ValueError):
    pass


class ConvexityRefuted(OrderError):
    def __init__(self, triple, names=None):
        self.triple = triple
        super().__init__(f"convexity refuted by triple {triple}")


def _prov_text(p) -> str:
    if isinstance(p, tuple):
        head, *args = p
        return f"{head}(" + ", ".join(_prov_text(a) for a in args) + ")"
    return str(p)


class OrderOracle:
    """A left-order given by a sign function on nontrivial normal forms.

    ``provenance`` is a nested tuple naming the constructor or combinator.
    """

    def __init__(self, group: GroupBackend, sign_fn: Callable[[Word], int], provenance):
        self.group = group
        self._sign_fn = sign_fn
        self.provenance = provenance
        self._memo: dict[Word, int] = {}

    def sign(self, w: Word) -> int:
        g = self.group.normal_form(w)
        s = self._memo.get(g)
        if s is None:
            if not g.syl:
                raise OrderError("sign of the identity is undefined")
            s = self._sign_fn(g)
            if s not in (1, -1):
                raise OrderError(f"sign function returned {s!r}")
            self._memo[g] = s
        return s

    def less(self, g: Word, h: Word) -> bool:
        G = self.group
        d = G.mul(G.inv(g), h)
        return bool(d.syl) and self.sign(d) > 0

    def compare(self, g: Word, h: Word) -> int:
        G = self.group
        d = G.mul(G.inv(g), h)
        return 0 if not d.syl else self.sign(d)

    def describe(self) -> str:
        return _prov_text(self.provenance)

    def __repr__(self):
        return f"OrderOracle({self.describe()})"


def sign_of(o: OrderOracle, w: Word) -> int:
    return o.sign(w)


def sign_char(s: int) -> str:
    return "+" if s > 0 else "-"


# combinators ----------------------------------------------------------

def opposite(o: OrderOracle) -> OrderOracle:
    return OrderOracle(o.group, lambda g: -o.sign(g), ("op", o.provenance))


def conjugate(o: OrderOracle, g: Word) -> OrderOracle:
    """g·o, with positive cone g P g^-1: sign'(h) = sign(g^-1 h g)."""
    G = o.group
    g = G.normal_form(g)
    if not g.syl:
        return o
    gi = G.inv(g)
    return OrderOracle(G, lambda h: o.sign(G.mul(gi, h, g)),
                       ("conj", G.show(g), o.provenance))


@dataclass
class ConvexWitness:
    """A subgroup C (membership oracle) claimed convex for an order."""
    member: Callable[[Word], bool]
    order: OrderOracle
    name: str = "C"

    def refute(self, r: int) -> Optional[tuple]:
        """Search B_r for 1 < g < h with h in C and g not in C (or the mirror)."""
        o = self.order
        G = o.group
        ball = G.ball(r).nontrivial()
        inside = [h for h in ball if self.member(h)]
        outside = [g for g in ball if not self.member(g)]
        for h in inside:
            sh = o.sign(h)
            for g in outside:
                if o.sign(g) == sh and o.compare(g, h) == sh:
                    # 1 < g < h (sh = +1) or h < g < 1 (sh = -1)
                    return (G.show(g), G.show(h))
        return None


def convex_swap(o: OrderOracle, C: ConvexWitness, radius: int = 3) -> OrderOracle:
    bad = C.refute(radius)
    if bad:
        raise ConvexityRefuted(bad)
    return OrderOracle(o.group, lambda g: -o.sign(g) if C.member(g) else o.sign(g),
                       ("swap", C.name, o.provenance))


def transform(o: OrderOracle, t, radius: int = 3) -> OrderOracle:
    """t is "opposite", ("conjugate", g) or ("convex_swap", C)."""
    if t == "opposite":
        return opposite(o)
    kind, arg = t
    if kind == "conjugate":
        return conjugate(o, arg)
    if kind == "convex_swap":
        return convex_swap(o, arg, radius)
    raise ValueError(f"unknown transform {t!r}")


def lex_extend(group: GroupBackend, kernel_sign: Callable[[Word], int],
               quotient: OrderOracle, proj: Callable[[Word], Word],
               provenance="lex") -> OrderOracle:
    """Quotient sign when proj(g) != 1, kernel sign otherwise."""
    Q = quotient.group

    def sign(g):
        x = Q.normal_form(proj(g))
        if x.syl:
            return quotient.sign(x)
        return kernel_sign(g)

    return OrderOracle(group, sign, provenance)


class CosetOrder:
    """Total order on G/C induced by an order for which C is convex."""

    def __init__(self, o: OrderOracle, C: ConvexWitness):
        self.order = o
        self.C = C

    def compare(self, g: Word, h: Word) -> int:
        G = self.order.group
        d = G.mul(G.inv(g), h)
        if not d.syl or self.C.member(d):
            return 0
        return self.order.sign(d)

    def check_well_defined(self, r: int) -> Optional[tuple]:
        """Look for representatives g, gc of one coset comparing differently with h."""
        G = self.order.group
        ball = G.ball(r)
        cs = [c for c in ball.nontrivial() if self.C.member(c)]
        for g in ball:
            for h in ball:
                v = self.compare(g, h)
                for c in cs:
                    if self.compare(G.mul(g, c), h) != v:
                        return (G.show(g), G.show(c), G.show(h))
        return None


def quotient_order(o: OrderOracle, C: ConvexWitness, radius: int = 3) -> CosetOrder:
    bad = C.refute(radius)
    if bad:
        raise ConvexityRefuted(bad)
    return CosetOrder(o, C)


def order_from_action(group: GroupBackend, act: Callable[[Word, object], object], x,
                      stab_sign: Optional[Callable[[Word], int]] = None,
                      key: Callable = lambda t: t, provenance="action") -> OrderOracle:
    """g > 1 iff g·x > x, ties (g in Stab(x)) broken by ``stab_sign``.

    ``act(g, x)`` must be order-preserving for ``key``.
    """
    kx = key(x)

    def sign(g):
        y = key(act(g, x))
        if y > kx:
            return 1
        if y < kx:
            return -1
        if stab_sign is None:
            raise UndecidedError("stabiliser element with no stabiliser order")
        return stab_sign(g)

    return OrderOracle(group, sign, provenance)


def check_action_compatible(o: OrderOracle, act, x, r: int, key=lambda t: t):
    """Check g1 <= g2 implies g1·x <= g2·x on B_r; returns a violating pair or None."""
    G = o.group
    ball = G.ball(r).elements
    pos = {g: key(act(g, x)) for g in ball}
    for g1 in ball:
        for g2 in ball:
            if o.compare(g1, g2) >= 0 and pos[g1] > pos[g2]:
                return (G.show(g1), G.show(g2))
    return None


# snapshots ------------------------------------------------------------

@dataclass
class ConeSnapshot:
    group: GroupBackend
    radius: int
    signs: dict                 # normal form -> +1/-1, over B_r minus identity

    def order_keys(self):
        ball = self.group.ball(self.radius)
        return [g for g in ball.elements if g.syl]

    def serialise(self) -> str:
        G = self.group
        return "".join(f"{G.show(g)} {sign_char(self.signs[g])}\n" for g in self.order_keys())

    def table(self) -> tuple:
        return tuple(self.signs[g] for g in self.order_keys())

    def restrict(self, r: int) -> "ConeSnapshot":
        ball = self.group.ball(r)
        return ConeSnapshot(self.group, r, {g: s for g, s in self.signs.items() if g in ball})

    def __eq__(self, other) -> bool:
        return (isinstance(other, ConeSnapshot) and other.radius == self.radius
                and other.signs == self.signs)

    def __hash__(self):
        return hash((self.radius, self.table()))


def snapshot(o: OrderOracle, r: int) -> ConeSnapshot:
    ball = o.group.ball(r)
    return ConeSnapshot(o.group, r, {g: o.sign(g) for g in ball.elements if g.syl})


def parse_snapshot(group: GroupBackend, radius: int, text: str) -> ConeSnapshot:
    signs = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        word, _, s = line.rpartition(" ")
        signs[group.word(word)] = 1 if s == "+" else -1
    return ConeSnapshot(group, radius, signs)


def sikora_distance(s1: ConeSnapshot, s2: ConeSnapshot) -> Fraction:
    if s1.radius != s2.radius:
        raise OrderError("radius mismatch")
    ball = s1.group.ball(s1.radius)
    m = None
    for g in ball.elements:
        if g.syl and s1.signs[g] != s2.signs[g]:
            L = ball.length[g]
            m = L if m is None else min(m, L)
    return Fraction(0) if m is None else Fraction(1, 2 ** m)


def cone_violations(s: ConeSnapshot, limit: int = 5) -> list[str]:
    """Independent check of antisymmetry and ball-local closure."""
    G = s.group
    out = []
    pos = [g for g, v in s.signs.items() if v > 0]
    for g, v in s.signs.items():
        gi = G.inv(g)
        if gi not in s.signs or s.signs[gi] != -v:
            out.append(f"antisymmetry at {G.show(g)}")
            if len(out) >= limit:
                return out
    for g in pos:
        for h in pos:
            gh = G.mul(g, h)
            if not gh.syl:
                out.append(f"closure: {G.show(g)} * {G.show(h)} = 1")
            elif gh in s.signs and s.signs[gh] < 0:
                out.append(f"closure: {G.show(g)} * {G.show(h)} negative")
            if len(out) >= limit:
                return out
    return out
