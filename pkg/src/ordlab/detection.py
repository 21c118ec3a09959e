"""Slopes of orders and the weak, regular and strong detection checks."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from .groups import GroupBackend, KleinGroup, PeripheralSubgroup, TorusKnotGroup
from .lattice import (InconsistentCone, LatticeLine, Rational, Slope, SlopeInterval,
                      cross, l0_convexity_violation, separating_interval)
from .orders import OrderOracle, conjugate, lex_extend
from .presentations import Word


class PeripheralSigns:
    """Signs of an order on the lattice points x*lam + y*mu of a peripheral subgroup."""

    def __init__(self, o: OrderOracle, P: PeripheralSubgroup):
        self.o, self.P = o, P
        self._cache: dict = {}

    def __call__(self, v):
        v = (int(v[0]), int(v[1]))
        if v == (0, 0):
            return None
        s = self._cache.get(v)
        if s is None:
            s = self.o.sign(self.P.lattice_element(*v))
            self._cache[v] = s
        return s

    def box(self, r: int) -> dict:
        return {(x, y): self((x, y)) for x in range(-r, r + 1) for y in range(-r, r + 1)
                if (x, y) != (0, 0)}


@dataclass
class SlopeEstimate:
    interval: SlopeInterval
    radius: int
    exact: Optional[Slope] = None
    refuted: dict = field(default_factory=dict)     # endpoint text -> witness

    def contains(self, s: Slope) -> bool:
        if self.exact is not None:
            return s == self.exact
        return self.interval.contains(s) and s.text() not in self.refuted

    def text(self) -> str:
        return self.exact.text() if self.exact is not None else self.interval.text()

    def as_dict(self) -> dict:
        return {"interval": [self.interval.lo.text(), self.interval.hi.text()],
                "exact": None if self.exact is None else self.exact.text(),
                "radius": self.radius,
                "refuted_endpoints": {k: v for k, v in sorted(self.refuted.items())}}


def slope_of_order(o: OrderOracle, P: PeripheralSubgroup, r: int,
                   signs: Optional[PeripheralSigns] = None) -> SlopeEstimate:
    """Separating-line interval from the box |x|, |y| <= r, refined by testing
    convexity of L0 for the (box-witnessed) rational endpoints.

    ``exact`` is set when the interval is a single line, or when exactly one
    endpoint survives the convexity test: no other slope of height <= r is
    compatible with the signs.
    """
    sg = signs or PeripheralSigns(o, P)
    interval = separating_interval(sg.box(r))
    if interval.degenerate:
        return SlopeEstimate(interval, r, interval.lo)
    refuted = {}
    survivors = []
    for s in interval.endpoints():
        bad = l0_convexity_violation(s, sg, r, 2 * r + 2)
        if bad:
            (w, k) = bad
            refuted[s.text()] = f"0 < {w} < {k}*{s.int_direction()}"
        else:
            survivors.append(s)
    exact = survivors[0] if len(survivors) == 1 and not interval.full else None
    return SlopeEstimate(interval, r, exact, refuted)


def line_inconsistency(sg: Callable, s: Slope, R: int):
    """A pair of points strictly on the same side of the line through s with
    opposite signs, or on opposite sides with equal signs; None if consistent."""
    L = LatticeLine(s)
    side_sign = None
    first = None
    for x in range(-R, R + 1):
        for y in range(-R, R + 1):
            if (x, y) == (0, 0) or cross(s.direction(), (x, y)).sign() == 0:
                continue
            rel = sg((x, y)) * L.sign((x, y))
            if side_sign is None:
                side_sign, first = rel, (x, y)
            elif rel != side_sign:
                return (first, (x, y))
    return None


@dataclass
class DetectionVerdict:
    level: str
    slope: Slope
    status: str                 # certified | not-certified | refuted-at-radius | unknown
    radius: int
    witness: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    def as_dict(self) -> dict:
        return {"level": self.level, "slope": self.slope.text(), "status": self.status,
                "radius": self.radius, "witness": self.witness}


def weak_detect(G: GroupBackend, o: OrderOracle, P: PeripheralSubgroup, slope: Slope,
                r: int) -> DetectionVerdict:
    sg = PeripheralSigns(o, P)
    try:
        est = slope_of_order(o, P, r, sg)
    except InconsistentCone as e:
        return DetectionVerdict("weak", slope, "unknown", r,
                                {"order": o.describe(), "error": f"inconsistent peripheral signs: {e}"})
    wit = {"order": o.describe(), "estimate": est.as_dict()}
    if not est.contains(slope):
        wit["reason"] = "slope outside the separating-line estimate"
        return DetectionVerdict("weak", slope, "not-certified", r, wit)
    bad = line_inconsistency(sg, slope, 2 * r)
    if bad:
        wit["reason"] = f"signs of {bad[0]} and {bad[1]} disagree with the line"
        return DetectionVerdict("weak", slope, "not-certified", r, wit)
    if isinstance(slope, Rational):
        v = l0_convexity_violation(slope, sg, r, 2 * r + 2)
        if v:
            wit["reason"] = f"L0 not convex: 0 < {v[0]} < {v[1]}*{slope.int_direction()}"
            return DetectionVerdict("weak", slope, "not-certified", r, wit)
    return DetectionVerdict("weak", slope, "certified", r, wit)


def regular_detect_check(G: GroupBackend, o: OrderOracle, P: PeripheralSubgroup, slope: Slope,
                         r_conj: int, r_slope: int, jobs: int = 1) -> DetectionVerdict:
    ball = G.ball(r_conj).elements

    def one(g):
        return g, weak_detect(G, conjugate(o, g), P, slope, r_slope)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(one, ball))
    else:
        results = [one(g) for g in ball]
    wit = {"order": o.describe(), "conjugates_checked": len(results), "r_conj": r_conj}
    for g, v in results:
        if not v.certified:
            wit["failing_conjugate"] = G.show(g)
            wit["failing_verdict"] = v.as_dict()
            status = "refuted-at-radius" if v.status == "not-certified" else "unknown"
            return DetectionVerdict("regular", slope, status, r_slope, wit)
    return DetectionVerdict("regular", slope, "certified", r_slope, wit)


def peripheral_element(P: PeripheralSubgroup, slope: Rational) -> Word:
    """Primitive class alpha = mu^p lam^q for slope p/q."""
    return P.element(slope.p, slope.q)


def default_kernel_sign(G: GroupBackend) -> Optional[Callable]:
    if isinstance(G, TorusKnotGroup):
        from .magnus import TorusKernel
        return TorusKernel(G).sign
    if isinstance(G, KleinGroup):
        return lambda g: 1 if G.pair(g)[1] > 0 else -1
    return None


def strong_detect_witness(G: GroupBackend, P: PeripheralSubgroup, slope: Rational, phi,
                          target_order: OrderOracle, r: int,
                          kernel_sign: Optional[Callable] = None) -> DetectionVerdict:
    """Certified when phi(alpha) = 1 and phi maps onto the ordered target;
    ker(phi) is then a proper normal subgroup, convex for the lex order."""
    if not isinstance(slope, Rational):
        return DetectionVerdict("strong", slope, "not-certified", r,
                                {"reason": "strong detection needs a rational slope"})
    alpha = peripheral_element(P, slope)
    img = phi(alpha)
    T = phi.target
    wit = {"epimorphism": phi.name, "alpha": G.show(alpha), "phi_alpha": T.show(img),
           "target": T.describe()}
    if img.syl:
        wit["reason"] = "phi(alpha) is not trivial"
        return DetectionVerdict("strong", slope, "not-certified", r, wit)
    if not phi.is_surjective():
        wit["reason"] = "phi is not onto the target"
        return DetectionVerdict("strong", slope, "not-certified", r, wit)
    if T.rank == 0:
        wit["reason"] = "trivial target: kernel is not proper"
        return DetectionVerdict("strong", slope, "not-certified", r, wit)
    ks = kernel_sign or default_kernel_sign(G)
    if ks is not None:
        induced = lex_extend(G, ks, target_order, phi, ("lex", phi.name, target_order.provenance, "kernel"))
        wit["induced_order"] = induced.describe()
        wit["_order"] = induced
    wit["kernel"] = f"ker({phi.name}) is normal and convex for the induced lex order"
    return DetectionVerdict("strong", slope, "certified", r, wit)


# cofinality ---------------------------------------------------------------

def cofinality_check(G: GroupBackend, o: OrderOracle, w: Word, r: int,
                     n_max: Optional[int] = None, action=None) -> dict:
    n_max = 2 * r + 4 if n_max is None else n_max
    w = G.normal_form(w)
    if not w.syl:
        return {"verdict": "bounded-at-radius", "reason": "identity"}
    wp = w if o.sign(w) > 0 else G.inv(w)
    pows = [G.normal_form(Word())]
    for n in range(1, 2 * n_max + 1):
        pows.append(G.mul(pows[-1], wp))
    ball = G.ball(r).elements
    uncovered = []
    for g in ball:
        for n in range(1, n_max + 1):
            if o.less(G.inv(pows[n]), g) and o.less(g, pows[n]):
                break
        else:
            uncovered.append(g)
    out: dict = {"element": G.show(w), "n_max": n_max, "radius": r}
    if not uncovered:
        out["verdict"] = "cofinal-at-radius"
    else:
        bound = None
        for g in uncovered:
            if all(o.less(pows[n], g) for n in range(1, 2 * n_max + 1)):
                bound = (G.show(g), "above")
                break
            if all(o.less(g, G.inv(pows[n])) for n in range(1, 2 * n_max + 1)):
                bound = (G.show(g), "below")
                break
        if bound:
            out["verdict"] = "bounded-at-radius"
            out["bound"] = list(bound)
        else:
            out["verdict"] = "unknown"
            out["uncovered"] = [G.show(g) for g in uncovered[:5]]
    if action is not None:
        from .dynreal import fixed_points
        out["fixed_points"] = fixed_points(action, w).verdict
    return out


def off_line_element(est: SlopeEstimate, P: PeripheralSubgroup):
    for a, b in [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2)]:
        s = Rational(a, b)
        if not est.contains(s) and not est.interval.contains(s):
            return P.element(a, b), s
    for a, b in [(1, 0), (0, 1), (1, 1), (1, -1)]:
        s = Rational(a, b)
        if not est.contains(s):
            return P.element(a, b), s
    return None, None


def boundary_cofinality_report(G: GroupBackend, o: OrderOracle, P: PeripheralSubgroup,
                               r: int, n_max: Optional[int] = None) -> dict:
    est = slope_of_order(o, P, r)
    w, s = off_line_element(est, P)
    out = {"order": o.describe(), "slope_estimate": est.as_dict()}
    if w is None:
        out["verdict"] = "unknown"
        return out
    c = cofinality_check(G, o, w, r, n_max)
    out["witness"] = G.show(w)
    out["witness_slope"] = s.text()
    out["cofinality"] = c
    out["verdict"] = {"cofinal-at-radius": "boundary-cofinal-at-radius",
                      "bounded-at-radius": "not-boundary-cofinal-at-radius"}.get(c["verdict"], "unknown")
    return out


def exclusion_search(G: GroupBackend, P: PeripheralSubgroup, slope: Slope, r: int,
                     jobs: int = 1, node_cap: int = 2_000_000, ball_cap: int = 200_000):
    """Search for an Unsat certificate: no radius-r cone has peripheral line of
    this slope.  Returns (certificate or None, SearchOutcome)."""
    from .conesearch import LineConstraint, search
    out = search(G, r, [LineConstraint(P, slope)], limit=1, jobs=jobs,
                 node_cap=node_cap, ball_cap=ball_cap)
    return out.certificate, out


@dataclass
class Multislope:
    slopes: list

    def text(self) -> list:
        return [s.text() for s in self.slopes]


def multislope_of(o: OrderOracle, G: GroupBackend, r: int) -> list:
    return [slope_of_order(o, P, r) for P in G.peripherals]


def slope_circle_svg(certified: list, excluded: list, size: int = 320) -> str:
    """Projective slope circle: direction angle phi in [0, pi) drawn at 2*phi."""
    c = size / 2
    R = size / 2 - 30

    def pos(s: Slope, rad=R):
        d = s.direction()
        x = float(d[0].x) + float(d[0].y) * math.sqrt(d[0].d or 0)
        y = float(d[1].x) + float(d[1].y) * math.sqrt(d[1].d or 0)
        phi = math.atan2(y, x) % math.pi
        return c + rad * math.cos(2 * phi), c - rad * math.sin(2 * phi)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>',
             f'<circle cx="{c}" cy="{c}" r="{R}" fill="none" stroke="#444"/>']
    for s in excluded:
        x, y = pos(s)
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="#d62728"/>')
        tx, ty = pos(s, R + 16)
        parts.append(f'<text x="{tx:.2f}" y="{ty:.2f}" font-size="10" text-anchor="middle">{s.text()}</text>')
    for s in certified:
        x, y = pos(s)
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="5" fill="#2ca02c"/>')
        tx, ty = pos(s, R + 16)
        parts.append(f'<text x="{tx:.2f}" y="{ty:.2f}" font-size="10" text-anchor="middle">{s.text()}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
