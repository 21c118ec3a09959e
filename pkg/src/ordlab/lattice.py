"""Order theory of ℤ²: slopes, line orders, separating-line intervals."""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key, lru_cache
from math import gcd, isqrt
from typing import Callable, Optional, Union

from .presentations import Word


class InconsistentCone(ValueError):
    """No line separates the positive from the negative lattice points."""


# exact arithmetic in Q(√d) ----------------------------------------------

@dataclass(frozen=True)
class QuadNum:
    x: Fraction
    y: Fraction = Fraction(0)
    d: int = 0

    @staticmethod
    def of(v, d=0) -> "QuadNum":
        if isinstance(v, QuadNum):
            return v
        return QuadNum(Fraction(v), Fraction(0), d)

    def _d(self, o):
        return self.d or o.d

    def __add__(self, o):
        o = QuadNum.of(o)
        return QuadNum(self.x + o.x, self.y + o.y, self._d(o))

    __radd__ = __add__

    def __neg__(self):
        return QuadNum(-self.x, -self.y, self.d)

    def __sub__(self, o):
        return self + (-QuadNum.of(o))

    def __rsub__(self, o):
        return QuadNum.of(o) - self

    def __mul__(self, o):
        o = QuadNum.of(o)
        d = self._d(o)
        return QuadNum(self.x * o.x + self.y * o.y * d, self.x * o.y + self.y * o.x, d)

    __rmul__ = __mul__

    def conj(self):
        return QuadNum(self.x, -self.y, self.d)

    def norm(self) -> Fraction:
        return self.x * self.x - self.y * self.y * self.d

    def __truediv__(self, o):
        o = QuadNum.of(o)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt d)")
        t = self * o.conj()
        return QuadNum(t.x / n, t.y / n, t.d)

    def sign(self) -> int:
        x, y = self.x, self.y
        sx = (x > 0) - (x < 0)
        sy = (y > 0) - (y < 0)
        if sy == 0 or self.d == 0:
            return sx
        if sx == 0 or sx == sy:
            return sy
        return sx if x * x > y * y * self.d else sy


# slopes ---------------------------------------------------------------

@dataclass(frozen=True)
class Rational:
    p: int
    q: int

    def __post_init__(self):
        p, q = self.p, self.q
        if (p, q) == (0, 0):
            raise ValueError("slope 0/0")
        g = gcd(p, q)
        p, q = p // g, q // g
        if q < 0 or (q == 0 and p < 0):
            p, q = -p, -q
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    def direction(self):
        """Lattice direction (x, y) = (q, p)."""
        return (QuadNum.of(self.q), QuadNum.of(self.p))

    def int_direction(self):
        return (self.q, self.p)

    def text(self) -> str:
        return "∞" if self.q == 0 else f"{self.p}/{self.q}"

    @property
    def rational(self) -> bool:
        return True


def _squarefree(d: int):
    k = 1
    f = 2
    while f * f <= d:
        while d % (f * f) == 0:
            d //= f * f
            k *= f
        f += 1
    return k, d


@dataclass(frozen=True)
class QuadIrr:
    """(a + b√d)/c."""
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        a, b, c, d = self.a, self.b, self.c, self.d
        k, d = _squarefree(d)
        b *= k
        if d < 2 or b == 0 or c == 0:
            raise ValueError("not a quadratic irrational")
        if c < 0:
            a, b, c = -a, -b, -c
        g = gcd(gcd(a, b), c)
        for name, v in zip("abcd", (a // g, b // g, c // g, d)):
            object.__setattr__(self, name, v)

    def value(self) -> QuadNum:
        return QuadNum(Fraction(self.a, self.c), Fraction(self.b, self.c), self.d)

    def direction(self):
        return (QuadNum.of(1, self.d), self.value())

    def text(self) -> str:
        sgn = "+" if self.b > 0 else "-"
        return f"({self.a}{sgn}{abs(self.b)}√{self.d})/{self.c}"

    @property
    def rational(self) -> bool:
        return False

    @staticmethod
    def from_quadnum(v: QuadNum) -> "QuadIrr":
        den = 1
        for f in (v.x, v.y):
            den = den * f.denominator // gcd(den, f.denominator)
        return QuadIrr(int(v.x * den), int(v.y * den), den, v.d)


Slope = Union[Rational, QuadIrr]

_QUAD = re.compile(r"^\(?\s*([+-]?\d+)\s*([+-])\s*(\d*)\s*(?:√|sqrt)\s*(\d+)\s*\)?\s*(?:/\s*(\d+))?$")


def parse_slope(text: str) -> Slope:
    t = text.strip().replace(" ", "")
    if t in ("∞", "inf", "infinity", "1/0", "-1/0"):
        return Rational(1, 0)
    m = re.fullmatch(r"([+-]?\d+)(?:/([+-]?\d+))?", t)
    if m:
        return Rational(int(m.group(1)), int(m.group(2) or 1))
    m = re.fullmatch(r"([+-]?)(\d*)(?:√|sqrt)(\d+)", t)
    if m:
        b = int(m.group(2) or 1) * (-1 if m.group(1) == "-" else 1)
        return QuadIrr(0, b, 1, int(m.group(3)))
    m = _QUAD.match(t)
    if m:
        b = int(m.group(3) or 1) * (-1 if m.group(2) == "-" else 1)
        return QuadIrr(int(m.group(1)), b, int(m.group(5) or 1), int(m.group(4)))
    raise ValueError(f"cannot parse slope {text!r}")


def slope_from_vector(x: int, y: int) -> Rational:
    """Slope of the lattice direction (x, y)."""
    return Rational(y, x)


def slope_of_mu_lambda(a, b) -> Slope:
    """Slope of the peripheral class a*mu + b*lam (a, b may lie in Q(√d))."""
    if isinstance(a, int) and isinstance(b, int):
        return Rational(a, b)
    a, b = QuadNum.of(a), QuadNum.of(b)
    return _slope_from_quad(a / b)


def _slope_from_quad(v: QuadNum) -> Slope:
    if v.y == 0 or v.d == 0:
        f = v.x
        return Rational(f.numerator, f.denominator)
    return QuadIrr.from_quadnum(v)


def mobius(M, s: Slope) -> Slope:
    """Apply M (acting on (mu, lam) coefficient vectors) to a slope."""
    (m00, m01), (m10, m11) = M
    if isinstance(s, Rational):
        return Rational(m00 * s.p + m01 * s.q, m10 * s.p + m11 * s.q)
    v = s.value()
    num = v * m00 + m01
    den = v * m10 + m11
    return _slope_from_quad(num / den)


def cross(u, v) -> QuadNum:
    return QuadNum.of(u[0]) * QuadNum.of(v[1]) - QuadNum.of(u[1]) * QuadNum.of(v[0])


def dot(u, v) -> QuadNum:
    return QuadNum.of(u[0]) * QuadNum.of(v[0]) + QuadNum.of(u[1]) * QuadNum.of(v[1])


def on_line(s: Slope, v) -> bool:
    return cross(s.direction(), v).sign() == 0


# line orders ------------------------------------------------------------

@dataclass(frozen=True)
class LatticeLine:
    """A line of slope ``slope``; ``side`` picks the positive open half-plane
    (sign of cross(direction, v)) and ``axis`` orders L0 for rational slopes."""
    slope: Slope
    side: int = 1
    axis: int = 1

    def sign(self, v) -> int:
        d = self.slope.direction()
        c = cross(d, v).sign()
        if c:
            return self.side * c
        t = dot(d, v).sign()
        if t == 0:
            raise ValueError("sign of the origin")
        return self.axis * t

    def label(self) -> str:
        s = f"line[{self.slope.text()},side{'+' if self.side > 0 else '-'}"
        if self.slope.rational:
            s += f",axis{'+' if self.axis > 0 else '-'}"
        return s + "]"


@lru_cache(maxsize=None)
def z2_group():
    from .groups import Z2_TEXT, load_group
    return load_group(Z2_TEXT)


def line_order(line: LatticeLine, group=None, coords: Optional[Callable] = None):
    """The line order as an OrderOracle on ``group`` (default ℤ²)."""
    from .orders import OrderOracle
    G = group or z2_group()
    if coords is None:
        coords = G.vector
    return OrderOracle(G, lambda g: line.sign(coords(g)), line.label())


def classify_line_orders(line: LatticeLine, group=None) -> list:
    s = line.slope
    variants = [(line.side, line.axis), (-line.side, -line.axis)]
    if s.rational:
        variants += [(line.side, -line.axis), (-line.side, line.axis)]
    return [line_order(LatticeLine(s, a, b), group) for a, b in variants]


def l1_ball(r: int) -> list[tuple[int, int]]:
    pts = [(x, y) for x in range(-r, r + 1) for y in range(-r, r + 1) if abs(x) + abs(y) <= r]
    return sorted(pts, key=lambda v: (abs(v[0]) + abs(v[1]), v))


def cofinal_elements(line: LatticeLine, r: int) -> list[tuple[int, int]]:
    return [v for v in l1_ball(r) if v != (0, 0) and not on_line(line.slope, v)]


# separating lines -------------------------------------------------------

def _half(v) -> int:
    return 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1


def _angle_cmp(u, v) -> int:
    hu, hv = _half(u), _half(v)
    if hu != hv:
        return hu - hv
    c = u[0] * v[1] - u[1] * v[0]
    return -1 if c > 0 else (1 if c < 0 else 0)


def _icross(u, v) -> int:
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class SlopeInterval:
    """Projective arc of candidate line directions, swept counterclockwise
    from ``start`` to ``end`` (integer lattice vectors)."""
    start: tuple
    end: tuple

    @property
    def lo(self) -> Rational:
        return slope_from_vector(*self.start)

    @property
    def hi(self) -> Rational:
        return slope_from_vector(*self.end)

    @property
    def degenerate(self) -> bool:
        return self.start == self.end

    @property
    def full(self) -> bool:
        return self.start == (-self.end[0], -self.end[1])

    def contains(self, s: Slope) -> bool:
        d = s.direction()
        A, B = self.start, self.end
        if self.full:
            return True
        if self.degenerate:
            return cross(A, d).sign() == 0
        for v in (d, (-d[0], -d[1])):
            if cross(A, v).sign() >= 0 and cross(v, B).sign() >= 0:
                return True
        return False

    def endpoints(self) -> list[Rational]:
        return [self.lo] if self.lo == self.hi else [self.lo, self.hi]

    def text(self) -> str:
        if self.degenerate:
            return self.lo.text()
        if self.full:
            return "[all]"
        return f"[{self.lo.text()}, {self.hi.text()}]"


def separating_interval(signs: dict) -> SlopeInterval:
    """Arc of lines L such that every point strictly on one side of L is +
    and every point strictly on the other side is -.

    ``signs`` maps nonzero integer lattice points to +1/-1.
    """
    W = set()
    for v, s in signs.items():
        if v == (0, 0):
            continue
        W.add(v if s > 0 else (-v[0], -v[1]))
    if not W:
        raise InconsistentCone("no signed lattice points")
    prim = set()
    for v in W:
        g = gcd(abs(v[0]), abs(v[1]))
        prim.add((v[0] // g, v[1] // g))
    dirs = sorted(prim, key=cmp_to_key(_angle_cmp))
    n = len(dirs)
    if n == 1:
        w = dirs[0]
        return SlopeInterval(w, (-w[0], -w[1]))
    best = None
    for i in range(n):
        a, b = dirs[i], dirs[(i + 1) % n]
        c = _icross(a, b)
        # the ccw gap from a to b is > pi when c < 0 and exactly pi when
        # a and b are opposite
        if c < 0:
            best = (a, b)
            break
        if c == 0 and best is None:
            best = (a, b)
    if best is None:
        raise InconsistentCone("positive points surround the origin")
    wb, wa = best
    # hull of W runs ccw from wa to wb; candidate lines run ccw from wb to -wa
    return SlopeInterval(wb, (-wa[0], -wa[1]))


def primitive(v):
    g = gcd(abs(v[0]), abs(v[1]))
    return (v[0] // g, v[1] // g)


def l0_convexity_violation(s: Rational, sign_at: Callable, window: int, k_max: int):
    """Search for 0 < w < k·v with w off the rational line (v primitive on it).

    ``sign_at(point)`` returns +1/-1 or None when unavailable.  Returns the
    witness (w, k) or None.
    """
    v = s.int_direction()
    sv = sign_at(v)
    if sv is None:
        return None
    if sv < 0:
        v = (-v[0], -v[1])
    for x in range(-window, window + 1):
        for y in range(-window, window + 1):
            w = (x, y)
            if _icross(v, w) == 0 or sign_at(w) != 1:
                continue
            for k in range(1, k_max + 1):
                t = sign_at((k * v[0] - x, k * v[1] - y))
                if t == 1:
                    return (w, k)
    return None


def line_of_cone(snap, coords: Optional[Callable] = None) -> SlopeInterval:
    """Separating-line interval of a ℤ² snapshot (or a snapshot read through
    ``coords``, mapping group elements to lattice points)."""
    G = snap.group
    coords = coords or G.vector
    pts = {}
    for g, s in snap.signs.items():
        v = coords(g)
        if v is not None:
            pts[tuple(v)] = s
    return separating_interval(pts)
