"""Slope transport, the Bludov-Glass compatibility check on normal families,
gluing coherence over graphs of groups, and amalgam normal forms."""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Optional

from .detection import regular_detect_check
from .families import standard_orders
from .groups import (GroupBackend, KleinGroup, PeripheralSubgroup, TorusKnotGroup,
                     UndecidedError, UnsupportedPresentation, ZnGroup, load_group,
                     KLEIN_TEXT, TREFOIL_TEXT, Z2_TEXT)
from .lattice import (InconsistentCone, LatticeLine, Rational, Slope, classify_line_orders,
                      mobius, parse_slope, separating_interval)
from .orders import OrderOracle, conjugate, opposite, snapshot
from .presentations import Presentation, Word


class GluingError(ValueError):
    pass


@dataclass
class GluingMap:
    """Identifies source (mu, lam) coefficient vectors with target ones: (a, b) -> M (a, b)."""
    source: PeripheralSubgroup
    target: PeripheralSubgroup
    matrix: tuple

    def __post_init__(self):
        (a, b), (c, d) = self.matrix
        self.matrix = ((int(a), int(b)), (int(c), int(d)))
        if a * d - b * c not in (1, -1):
            raise GluingError(f"gluing matrix {list(map(list, self.matrix))} has determinant {a * d - b * c}, not ±1")

    @property
    def det(self) -> int:
        (a, b), (c, d) = self.matrix
        return a * d - b * c

    def inverse_matrix(self) -> tuple:
        (a, b), (c, d) = self.matrix
        e = self.det
        return ((d * e, -b * e), (-c * e, a * e))

    def inverse(self) -> "GluingMap":
        return GluingMap(self.target, self.source, self.inverse_matrix())

    def apply(self, v) -> tuple:
        (a, b), (c, d) = self.matrix
        return (a * v[0] + b * v[1], c * v[0] + d * v[1])


def transport_slope(f, s: Slope) -> Slope:
    M = f.matrix if isinstance(f, GluingMap) else f
    return mobius(M, s)


def inverse_transport(f: GluingMap, s: Slope) -> Slope:
    return mobius(f.inverse_matrix(), s)


def compose_matrices(M, N) -> tuple:
    """M N (apply N first)."""
    return tuple(tuple(sum(M[i][k] * N[k][j] for k in range(2)) for j in range(2)) for i in range(2))


# normal families ----------------------------------------------------------

@dataclass
class NormalFamilyFixture:
    group: GroupBackend
    orders: list
    name: str = "family"
    tags: dict = field(default_factory=dict)

    def validate(self, r: int = 3) -> dict:
        """Conjugating any member by any generator yields a member (snapshot
        equality at radius r); also records closure under opposites."""
        G = self.group
        snaps = {snapshot(o, r).table() for o in self.orders}
        conj_ok = True
        missing = None
        for o in self.orders:
            for k in range(G.rank):
                for e in (1, -1):
                    c = snapshot(conjugate(o, Word.gen(k, e)), r).table()
                    if c not in snaps:
                        conj_ok = False
                        missing = (o.describe(), G.show(Word.gen(k, e)))
                        break
                if not conj_ok:
                    break
            if not conj_ok:
                break
        opp_ok = all(snapshot(opposite(o), r).table() in snaps for o in self.orders)
        self.tags = {"conjugate_closed_at_radius": r if conj_ok else None,
                     "opposite_closed": opp_ok, "distinct_snapshots": len(snaps)}
        if missing:
            self.tags["missing_conjugate"] = list(missing)
        return self.tags

    @property
    def conjugate_closed(self) -> bool:
        return self.tags.get("conjugate_closed_at_radius") is not None


def _box(r: int) -> list:
    return [(a, b) for a in range(-r, r + 1) for b in range(-r, r + 1) if (a, b) != (0, 0)]


def restriction_table(o: OrderOracle, P: PeripheralSubgroup, r: int, M=None) -> tuple:
    """Signs of o on mu^a lam^b over the box |a|, |b| <= r (source coordinates
    pulled through M when given)."""
    out = []
    for a, b in _box(r):
        if M is not None:
            (m00, m01), (m10, m11) = M
            a, b = m00 * a + m01 * b, m10 * a + m11 * b
        out.append(o.sign(P.element(a, b)))
    return tuple(out)


def _describe_restriction(table: tuple, r: int) -> str:
    signs = {(b, a): s for (a, b), s in zip(_box(r), table)}
    try:
        return f"line {separating_interval(signs).text()}"
    except InconsistentCone:
        return "no separating line"


@dataclass
class GlueVerdict:
    status: str                  # compatible | incompatible | unknown
    reason: str = ""
    implication: str = ""
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"status": self.status, "reason": self.reason,
                "implication": self.implication, "details": self.details}


def bludov_glass_check(N1: NormalFamilyFixture, N2: NormalFamilyFixture, f: GluingMap,
                       r: int) -> GlueVerdict:
    """Compare the peripheral restriction sets of two normal families, the
    first pulled back through the gluing map."""
    try:
        R1 = {restriction_table(o, f.source, r): o.describe() for o in N1.orders}
        R2 = {restriction_table(o, f.target, r, f.matrix): o.describe() for o in N2.orders}
    except UndecidedError as e:
        return GlueVerdict("unknown", f"undecided sign on the needed box: {e}")
    details = {"radius": r, "restrictions_1": len(R1), "restrictions_2": len(R2),
               "families": [N1.name, N2.name]}
    for t, name in sorted(R1.items(), key=lambda kv: kv[1]):
        if t not in R2:
            return GlueVerdict("incompatible",
                               f"restriction of {N1.name}:{name} ({_describe_restriction(t, r)}) "
                               f"has no partner in {N2.name}", details=details)
    for t, name in sorted(R2.items(), key=lambda kv: kv[1]):
        if t not in R1:
            return GlueVerdict("incompatible",
                               f"restriction of {N2.name}:{name} ({_describe_restriction(t, r)}) "
                               f"has no partner in {N1.name}", details=details)
    return GlueVerdict("compatible", "restriction sets correspond under the gluing map",
                       "the amalgam is left-orderable by the Bludov-Glass criterion "
                       "(cited theorem, the amalgam order is not constructed)", details)


# gluing graphs ------------------------------------------------------------

BUILTIN_GROUPS = {"klein": KLEIN_TEXT, "trefoil": TREFOIL_TEXT, "z2": Z2_TEXT}

SLOPE_ALIASES = {"l": Rational(0, 1), "lambda": Rational(0, 1), "λ": Rational(0, 1),
                 "m": Rational(1, 0), "mu": Rational(1, 0), "μ": Rational(1, 0)}


def parse_assigned_slope(text: str) -> Slope:
    t = text.strip()
    return SLOPE_ALIASES.get(t.lower(), None) or parse_slope(t)


@dataclass
class GluingEdge:
    v1: str
    t1: str
    v2: str
    t2: str
    matrix: tuple
    line: int = 0

    @property
    def label(self) -> str:
        return f"{self.v1}.{self.t1}->{self.v2}.{self.t2}"


@dataclass
class GluingGraph:
    vertices: dict                 # name -> GroupBackend
    edges: list
    sources: dict = field(default_factory=dict)

    def peripheral(self, v: str, t: str) -> PeripheralSubgroup:
        G = self.vertices[v]
        try:
            return G.peripheral(t)
        except (KeyError, ValueError) as e:
            raise GluingError(f"vertex {v} has no peripheral torus {t}") from e

    def gluing_map(self, e: GluingEdge) -> GluingMap:
        return GluingMap(self.peripheral(e.v1, e.t1), self.peripheral(e.v2, e.t2), e.matrix)

    def tori(self) -> list:
        """Tori in order of first appearance in the edges."""
        out = []
        for e in self.edges:
            for k in ((e.v1, e.t1), (e.v2, e.t2)):
                if k not in out:
                    out.append(k)
        return out


_EDGE = re.compile(r"^edge\s+(\w+)\.(\w+)\s+(\w+)\.(\w+)\s+\[\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*,"
                   r"\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\]\s*$")
_VERTEX = re.compile(r"^vertex\s+(\w+)\s+(\S+)\s*$")


def parse_gluing_graph(text: str, base_dir: str = ".") -> GluingGraph:
    """Lines ``vertex NAME PATH`` (PATH a presentation file, or @klein,
    @trefoil, @z2) and ``edge V1.T V2.T [[a,b],[c,d]]``; # starts a comment."""
    vertices: dict = {}
    sources: dict = {}
    edges = []
    used = set()
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _VERTEX.match(line)
        if m:
            name, path = m.groups()
            if name in vertices:
                raise GluingError(f"line {n}: duplicate vertex {name}")
            if path.startswith("@"):
                if path[1:] not in BUILTIN_GROUPS:
                    raise GluingError(f"line {n}: unknown built-in group {path}")
                src = BUILTIN_GROUPS[path[1:]]
            else:
                full = path if os.path.isabs(path) else os.path.join(base_dir, path)
                with open(full, encoding="utf-8") as fh:
                    src = fh.read()
            vertices[name] = load_group(src)
            sources[name] = path
            continue
        m = _EDGE.match(line)
        if m:
            v1, t1, v2, t2 = m.group(1, 2, 3, 4)
            a, b, c, d = (int(x) for x in m.group(5, 6, 7, 8))
            for v in (v1, v2):
                if v not in vertices:
                    raise GluingError(f"line {n}: edge references undeclared vertex {v}")
            for k in ((v1, t1), (v2, t2)):
                if k in used:
                    raise GluingError(f"line {n}: torus {k[0]}.{k[1]} used by two edges")
                used.add(k)
            if (v1, t1) == (v2, t2):
                raise GluingError(f"line {n}: edge glues a torus to itself")
            edges.append(GluingEdge(v1, t1, v2, t2, ((a, b), (c, d)), n))
            continue
        raise GluingError(f"line {n}: cannot parse {line!r}")
    g = GluingGraph(vertices, edges, sources)
    for e in edges:
        g.gluing_map(e)          # checks tori and determinants
    return g


def candidate_orders(G: GroupBackend, P: PeripheralSubgroup, slope: Slope) -> list:
    if isinstance(G, ZnGroup) and G.rank == 2 and len(G.peripherals) == 1:
        return classify_line_orders(LatticeLine(slope), G)
    return list(standard_orders(G).values())


def coherence_check(graph: GluingGraph, assignment: dict, r: int = 3, r_conj: int = 3,
                    jobs: int = 1) -> dict:
    """``assignment`` maps (vertex, torus) to a slope.  Every edge must carry
    the assigned slopes onto each other, and every vertex multislope needs an
    order that regularly detects all of its assigned slopes."""
    report: dict = {"edges": [], "vertices": [], "radius": r, "r_conj": r_conj}
    ok = True
    for e in graph.edges:
        s1, s2 = assignment.get((e.v1, e.t1)), assignment.get((e.v2, e.t2))
        entry = {"edge": e.label, "matrix": [list(row) for row in e.matrix]}
        if s1 is None or s2 is None:
            entry.update(status="fail", reason="unassigned torus")
            ok = False
        else:
            img = transport_slope(e.matrix, s1)
            entry.update(assigned=[s1.text(), s2.text()], transported=img.text())
            if img == s2:
                entry["status"] = "pass"
            else:
                entry.update(status="fail", reason=f"edge {e.label} maps {s1.text()} to {img.text()}, not {s2.text()}")
                ok = False
        report["edges"].append(entry)
    for v in sorted(graph.vertices):
        G = graph.vertices[v]
        tori = [(t, s) for (vv, t), s in sorted(assignment.items(), key=lambda kv: kv[0]) if vv == v]
        entry: dict = {"vertex": v, "group": G.describe(),
                       "multislope": {t: s.text() for t, s in tori}}
        if not tori:
            entry["status"] = "pass"
            entry["reason"] = "no assigned tori"
            report["vertices"].append(entry)
            continue
        witness = None
        first_P = graph.peripheral(v, tori[0][0])
        for o in candidate_orders(G, first_P, tori[0][1]):
            good = True
            for t, s in tori:
                verdict = regular_detect_check(G, o, graph.peripheral(v, t), s, r_conj, r, jobs)
                if not verdict.certified:
                    good = False
                    break
            if good:
                witness = o
                break
        if witness is None:
            entry.update(status="fail", reason=f"vertex {v}: no regular-detection witness among "
                                                 f"the built-in orders at radius {r}")
            ok = False
        else:
            entry.update(status="pass", witness=witness.describe())
        report["vertices"].append(entry)
    report["status"] = "pass" if ok else "fail"
    if ok:
        report["interpretation"] = ("gluing coherent at the working radius; the glued group is "
                                    "left-orderable by the gluing-coherence theorem")
    return report


def assignment_from_list(graph: GluingGraph, slopes: list) -> dict:
    tori = graph.tori()
    if len(slopes) != len(tori):
        raise GluingError(f"assignment needs {len(tori)} slopes (tori: "
                          f"{', '.join(f'{v}.{t}' for v, t in tori)}), got {len(slopes)}")
    return {k: parse_assigned_slope(s) if isinstance(s, str) else s for k, s in zip(tori, slopes)}


# amalgams -----------------------------------------------------------------

class _Factor:
    """Left coset representatives of a factor modulo its peripheral subgroup:
    g = rep(g) * mu^a lam^b."""

    def __init__(self, G: GroupBackend, P: PeripheralSubgroup):
        self.G, self.P = G, P
        if isinstance(G, ZnGroup) and G.rank == 2:
            if G.peripheral_coords(P, Word.gen(0)) is not None and \
                    G.peripheral_coords(P, Word.gen(1)) is not None:
                raise GluingError("factor equals edge group")
        if isinstance(G, KleinGroup) and P.mu == G.from_pair(2, 0) and P.lam == G.from_pair(0, 1):
            self.kind = "klein"
        elif isinstance(G, TorusKnotGroup) and P.mu == G.mu_word() and P.lam == G.lam_word():
            self.kind = "torus"
        else:
            raise UnsupportedPresentation(
                f"no coset table for {G.describe()} modulo peripheral {P.name}")

    def split(self, g: Word):
        G = self.G
        g = G.normal_form(g)
        if self.kind == "klein":
            a, b = G.pair(g)
            rep = G.from_pair(a % 2, 0)
        else:
            n_max = len(G.rep(g)[1]) + 1
            best = None
            for n in range(-n_max, n_max + 1):
                _, syl = G.rep(G.mul(g, G.power(self.P.mu, n)))
                w = G.normal_form(G.from_rep(0, syl))
                if best is None or w.key() < best.key():
                    best = w
            rep = best
        c = G.mul(G.inv(rep), g)
        coords = G.peripheral_coords(self.P, c)
        if coords is None:
            raise UndecidedError("coset decomposition failed")
        return rep, coords


class BoundedAmalgam(GroupBackend):
    """G1 *_{P1 = P2} G2 with P1 and P2 identified through a gluing matrix.

    Normal form: alternating coset representatives followed by a peripheral
    element, written in the first factor's basis.  Words longer than the
    certified radius are still reduced with the closed-form coset tables, but
    are reported as outside the certified range.
    """
    family = "BoundedAmalgam"

    def __init__(self, G1: GroupBackend, P1: PeripheralSubgroup, G2: GroupBackend,
                 P2: PeripheralSubgroup, matrix, certified_radius: int):
        f = GluingMap(P1, P2, matrix)
        self.f = f
        self.factors = [_Factor(G1, P1), _Factor(G2, P2)]
        n1 = list(G1.names)
        n2 = list(G2.names)
        clash = set(n1) & set(n2)
        names = [f"{n}1" if n in clash else n for n in n1] + [f"{n}2" if n in clash else n for n in n2]
        self.offset = len(n1)
        rels = [r for r in G1.presentation.relators]
        rels += [self._lift(1, r) for r in G2.presentation.relators]
        for v, w in (((1, 0), P1.mu), ((0, 1), P1.lam)):
            img = P2.element(*f.apply(v))
            rels.append(Word(w.inverse().syl + self._lift(1, img).syl))
        super().__init__(Presentation(tuple(names), tuple(r for r in rels if r.syl)))
        self.certified_radius = certified_radius
        self.groups = [G1, G2]

    def _lift(self, i: int, w: Word) -> Word:
        if i == 0:
            return w
        return Word((g + self.offset, e) for g, e in w.syl)

    def _side(self, g: int) -> int:
        return 0 if g < self.offset else 1

    def _coords_to(self, i: int, c):
        return c if i == 0 else self.f.apply(c)

    def _coords_from(self, i: int, c):
        if i == 0:
            return c
        (a, b), (cc, d) = self.f.inverse_matrix()
        return (a * c[0] + b * c[1], cc * c[0] + d * c[1])

    def decompose(self, w: Word):
        """(list of (factor, rep), peripheral coords in the first factor's basis)."""
        reps: list = []
        c = (0, 0)
        for side, sub in self._syllables(w):
            F = self.factors[side]
            cur = F.G.mul(F.P.element(*self._coords_to(side, c)), sub)
            if reps and reps[-1][0] == side:
                cur = F.G.mul(reps.pop()[1], cur)
            rep, cc = F.split(cur)
            c = self._coords_from(side, cc)
            if rep.syl:
                reps.append((side, rep))
        return reps, c

    def _syllables(self, w: Word):
        run: list = []
        side = None
        for g, e in w.syl:
            s = self._side(g)
            if run and s != side:
                yield side, Word(run)
                run = []
            side = s
            run.append((g - (self.offset if s else 0), e))
        if run:
            yield side, Word(run)

    def _nf(self, w: Word) -> Word:
        reps, c = self.decompose(w)
        out: list = []
        if reps and reps[-1][0] == 0:
            side, rep = reps.pop()
            tail = self.factors[0].G.mul(rep, self.factors[0].P.element(*c))
        elif reps:
            side, rep = reps.pop()
            F = self.factors[1]
            tail = self._lift(1, F.G.mul(rep, F.P.element(*self._coords_to(1, c))))
        else:
            tail = self.factors[0].P.element(*c)
        for side, rep in reps:
            out.extend(self._lift(side, rep).syl)
        out.extend(tail.syl)
        return Word(out)

    def syllable_length(self, w: Word) -> int:
        return len(self.decompose(w)[0])

    def certified(self, w: Word) -> bool:
        return len(w) <= self.certified_radius

    def equal_certified(self, a: Word, b: Word) -> Optional[bool]:
        """Tri-valued equality: None beyond the certified radius."""
        if not (self.certified(a) and self.certified(b)):
            return None
        return self.equal(a, b)

    def factor_word(self, i: int, w: Word) -> Word:
        return self._lift(i, w)

    def describe(self):
        return f"BoundedAmalgam({self.groups[0].describe()} * {self.groups[1].describe()}, r={self.certified_radius})"


def build_amalgam(G1: GroupBackend, G2: GroupBackend, f: GluingMap,
                  certified_radius: int = 4) -> BoundedAmalgam:
    return BoundedAmalgam(G1, f.source, G2, f.target, f.matrix, certified_radius)


# fixtures -----------------------------------------------------------------

def family_fixture(G: GroupBackend, name: str = "", slope: Optional[Slope] = None) -> NormalFamilyFixture:
    """Built-in normal families: the Klein 4-family, the trefoil
    abelianisation-lex family closed under mu-conjugation, and the line orders
    of a given slope on ℤ²."""
    from .families import klein_family, torus_family
    if isinstance(G, KleinGroup):
        return NormalFamilyFixture(G, list(klein_family(G).values()), name or "klein")
    if isinstance(G, TorusKnotGroup):
        return NormalFamilyFixture(G, list(torus_family(G).values()), name or "torus")
    if isinstance(G, ZnGroup) and G.rank == 2:
        s = slope if slope is not None else Rational(0, 1)
        return NormalFamilyFixture(G, classify_line_orders(LatticeLine(s), G), name or f"line[{s.text()}]")
    raise UnsupportedPresentation(f"no built-in normal family for {G.describe()}")
