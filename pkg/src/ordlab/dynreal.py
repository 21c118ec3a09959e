"""Dynamic realisations: exact piecewise-linear actions on a window of ℝ."""
from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from typing import Optional

from .groups import GroupBackend
from .orders import OrderOracle, order_from_action
from .presentations import Word


@dataclass(frozen=True)
class PLHomeo:
    """Increasing PL map through (breakpoints[i], values[i]), extended affinely
    with slope ``left_slope`` / ``right_slope`` outside the breakpoints."""
    breakpoints: tuple
    values: tuple
    left_slope: Fraction = Fraction(1)
    right_slope: Fraction = Fraction(1)

    def __post_init__(self):
        b, v = self.breakpoints, self.values
        if len(b) != len(v) or not b:
            raise ValueError("need equally many breakpoints and values")
        if any(b[i] >= b[i + 1] or v[i] >= v[i + 1] for i in range(len(b) - 1)):
            raise ValueError("PL map must be strictly increasing")
        if self.left_slope <= 0 or self.right_slope <= 0:
            raise ValueError("tail slopes must be positive")

    @staticmethod
    def identity() -> "PLHomeo":
        return PLHomeo((Fraction(0),), (Fraction(0),))

    def __call__(self, x) -> Fraction:
        b, v = self.breakpoints, self.values
        x = Fraction(x)
        if x <= b[0]:
            return v[0] + self.left_slope * (x - b[0])
        if x >= b[-1]:
            return v[-1] + self.right_slope * (x - b[-1])
        i = bisect_right(b, x) - 1
        if b[i] == x:
            return v[i]
        return v[i] + (v[i + 1] - v[i]) * (x - b[i]) / (b[i + 1] - b[i])

    def inverse(self) -> "PLHomeo":
        return PLHomeo(self.values, self.breakpoints, 1 / self.left_slope, 1 / self.right_slope)

    def compose(self, g: "PLHomeo") -> "PLHomeo":
        """self ∘ g."""
        gi = g.inverse()
        pts = sorted(set(g.breakpoints) | {gi(b) for b in self.breakpoints})
        pts = _prune(pts, lambda x: self(g(x)))
        return PLHomeo(tuple(pts), tuple(self(g(x)) for x in pts),
                       self.left_slope * g.left_slope, self.right_slope * g.right_slope)

    def table(self) -> list:
        return [[str(b), str(v)] for b, v in zip(self.breakpoints, self.values)]


def _prune(pts, f):
    """Drop breakpoints where the map is locally affine (keeps the ends)."""
    if len(pts) <= 2:
        return pts
    vals = [f(x) for x in pts]
    out = [pts[0]]
    for i in range(1, len(pts) - 1):
        s1 = (vals[i] - vals[i - 1]) / (pts[i] - pts[i - 1])
        s2 = (vals[i + 1] - vals[i]) / (pts[i + 1] - pts[i])
        if s1 != s2:
            out.append(pts[i])
    out.append(pts[-1])
    return out


@dataclass
class PLAction:
    group: GroupBackend
    order: OrderOracle
    radius: int
    table: dict                     # ball element -> integer position
    gens: list                      # PLHomeo per generator
    window: tuple = field(default=(0, 0))

    def rho(self, w: Word) -> PLHomeo:
        f = PLHomeo.identity()
        for g, e in w.syl:
            h = self.gens[g] if e > 0 else self.gens[g].inverse()
            for _ in range(abs(e)):
                f = f.compose(h)
        return f

    def geodesic(self, g: Word) -> Word:
        ball = self.group.ball(self.radius)
        g = self.group.normal_form(g)
        return ball.geodesic.get(g, g)


def build_realisation(o: OrderOracle, r: int) -> PLAction:
    G = o.group
    ball = G.ball(r)
    elems = sorted(ball.elements, key=cmp_to_key(lambda g, h: -o.compare(g, h)))
    zero = elems.index(G.normal_form(Word()))
    t = {g: i - zero for i, g in enumerate(elems)}
    gens = []
    for k in range(G.rank):
        s = Word.gen(k)
        pairs = []
        for h in ball.elements:
            sh = G.mul(s, h)
            if sh in t:
                pairs.append((Fraction(t[h]), Fraction(t[sh])))
        pairs.sort()
        gens.append(PLHomeo(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)))
    lo, hi = -zero, len(elems) - 1 - zero
    return PLAction(G, o, r, t, gens, (lo, hi))


def evaluate(A: PLAction, w: Word, x) -> Fraction:
    """rho(w)(x): the last letter acts first."""
    x = Fraction(x)
    for g, e in reversed(w.syl):
        f = A.gens[g] if e > 0 else A.gens[g].inverse()
        for _ in range(abs(e)):
            x = f(x)
    return x


def path_in_table(A: PLAction, w: Word, h: Word) -> bool:
    """True when every suffix of w applied to h stays in the table, so the
    evaluation only uses exact table pairs."""
    G = A.group
    cur = G.normal_form(h)
    if cur not in A.table:
        return False
    for g, e in reversed(w.syl):
        s = Word.gen(g, 1 if e > 0 else -1)
        for _ in range(abs(e)):
            cur = G.mul(s, cur)
            if cur not in A.table:
                return False
    return True


def orbit_law_report(A: PLAction, r: Optional[int] = None) -> dict:
    """Check rho(g)(t(h)) = t(gh) over g, h, gh in B_{r-1}.

    Pairs whose geodesic evaluation path leaves the table are "applicable"
    only when the path stays inside; those must hold exactly.  The others
    are counted separately (they depend on the interpolation).
    """
    G = A.group
    r = A.radius - 1 if r is None else r
    ball = G.ball(r)
    applicable = holds = outside = outside_holds = 0
    failures = []
    for g in ball.elements:
        w = A.geodesic(g)
        for h in ball.elements:
            gh = G.mul(g, h)
            if gh not in ball:
                continue
            ok = evaluate(A, w, A.table[h]) == A.table[gh]
            if path_in_table(A, w, h):
                applicable += 1
                holds += ok
                if not ok and len(failures) < 5:
                    failures.append((G.show(g), G.show(h)))
            else:
                outside += 1
                outside_holds += ok
    return {"applicable": applicable, "holds": holds, "failures": failures,
            "non_applicable": outside, "non_applicable_holds": outside_holds}


def sign_recovery_mismatches(A: PLAction, r: Optional[int] = None) -> list:
    G = A.group
    r = A.radius - 1 if r is None else r
    bad = []
    for g in G.ball(r).nontrivial():
        y = evaluate(A, A.geodesic(g), 0)
        s = 1 if y > 0 else (-1 if y < 0 else 0)
        if s != A.order.sign(g):
            bad.append(G.show(g))
    return bad


@dataclass
class FixedPointReport:
    element: str
    window: tuple
    intervals: list                 # [(lo, hi)] exact, lo == hi for isolated points
    verdict: str

    def as_dict(self):
        return {"element": self.element, "window": [str(self.window[0]), str(self.window[1])],
                "fixed": [[str(a), str(b)] for a, b in self.intervals], "verdict": self.verdict}


def fixed_points(A: PLAction, w: Word) -> FixedPointReport:
    lo, hi = Fraction(A.window[0]), Fraction(A.window[1])
    f = A.rho(w)
    pts = sorted({lo, hi} | {b for b in f.breakpoints if lo < b < hi})
    d = [f(x) - x for x in pts]
    raw = []
    for i in range(len(pts) - 1):
        a, b, da, db = pts[i], pts[i + 1], d[i], d[i + 1]
        if da == 0 and db == 0:
            raw.append((a, b))
        elif da == 0:
            raw.append((a, a))
        elif db == 0:
            raw.append((b, b))
        elif (da > 0) != (db > 0):
            z = a + (b - a) * da / (da - db)
            raw.append((z, z))
    if len(pts) == 1 and d[0] == 0:
        raw.append((pts[0], pts[0]))
    raw.sort()
    merged: list = []
    for a, b in raw:
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(b, merged[-1][1]))
        else:
            merged.append((a, b))
    if not merged:
        verdict = "fixed-point-free-on-window"
    elif any(lo < a and b < hi for a, b in merged):
        verdict = "has-fixed-points"
    else:
        verdict = "inconclusive"
    return FixedPointReport(A.group.show(A.group.normal_form(w)), (lo, hi), merged, verdict)


def order_at_point(A: PLAction, x, stab_order: Optional[OrderOracle] = None) -> OrderOracle:
    """The order read off the orbit of x; ties (stabiliser) use ``stab_order``."""
    x = Fraction(x)
    stab = stab_order.sign if stab_order is not None else None
    return order_from_action(A.group, lambda g, p: evaluate(A, A.geodesic(g), p), x, stab,
                             provenance=("orbit", str(x), A.order.provenance))


def svg_graphs(A: PLAction, words: list, size: int = 360) -> str:
    """SVG with the graphs of rho(w) over the window."""
    lo, hi = A.window
    span = max(hi - lo, 1)
    pad = 20

    def sx(v):
        return pad + float(v - lo) / span * (size - 2 * pad)

    def sy(v):
        return size - pad - float(v - lo) / span * (size - 2 * pad)

    colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">',
             f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
             f'<line x1="{sx(lo):.2f}" y1="{sy(lo):.2f}" x2="{sx(hi):.2f}" y2="{sy(hi):.2f}" '
             'stroke="#999" stroke-dasharray="4 3"/>']
    for i, w in enumerate(words):
        f = A.rho(w)
        xs = sorted({Fraction(lo), Fraction(hi)} | {b for b in f.breakpoints if lo < b < hi})
        pts = " ".join(f"{sx(x):.2f},{sy(min(max(f(x), lo), hi)):.2f}" for x in xs)
        parts.append(f'<polyline fill="none" stroke="{colours[i % len(colours)]}" points="{pts}"/>')
        parts.append(f'<text x="{pad}" y="{14 + 12 * i}" font-size="11" '
                     f'fill="{colours[i % len(colours)]}">rho({A.group.show(w)})</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
