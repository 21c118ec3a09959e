"""Built-in orders and epimorphisms for the standard fixture groups."""
from __future__ import annotations

from math import gcd
from .groups import (FreeGroup, GroupBackend, KleinGroup, SemidirectShear,
                     TorusKnotGroup, ZnGroup)
from .lattice import LatticeLine, Rational, Slope, classify_line_orders, line_order, parse_slope
from .magnus import TorusKernel
from .orders import OrderOracle, lex_extend
from .presentations import Word


class Epimorphism:
    """Homomorphism given by generator images; relators are checked to map to 1."""

    def __init__(self, source: GroupBackend, target: GroupBackend, images: list[Word], name: str = "phi"):
        self.source, self.target, self.name = source, target, name
        self.images = [target.normal_form(w) for w in images]
        for r in source.presentation.relators:
            if self(r).syl:
                raise ValueError(f"{name} does not kill relator {source.show(r)}")

    def __call__(self, w: Word) -> Word:
        T = self.target
        out: list = []
        for g, e in w.syl:
            out.extend((self.images[g] ** e).syl)
        return T.normal_form(Word(out))

    def is_surjective(self, radius: int = 6) -> bool:
        T = self.target
        if isinstance(T, ZnGroup) and T.rank == 1:
            g = 0
            for w in self.images:
                g = gcd(g, T.vector(w)[0])
            return g == 1
        # breadth-first span of the images
        reach = {T.normal_form(Word())}
        frontier = list(reach)
        gens = self.images + [T.inv(w) for w in self.images]
        for _ in range(radius):
            nxt = []
            for x in frontier:
                for s in gens:
                    y = T.mul(x, s)
                    if y not in reach:
                        reach.add(y)
                        nxt.append(y)
            frontier = nxt
        return all(T.normal_form(Word.gen(i)) in reach for i in range(T.rank))


_Z = None


def integers() -> ZnGroup:
    """The target group ℤ = <t> for abelian quotients."""
    global _Z
    if _Z is None:
        from .presentations import Presentation
        _Z = ZnGroup(Presentation(("t",)))
    return _Z


def z_standard(Z: GroupBackend, sign: int = 1) -> OrderOracle:
    def s(g):
        n = sum(e for _, e in g.syl)
        return sign * (1 if n > 0 else -1)
    return OrderOracle(Z, s, "std" if sign > 0 else "op(std)")


def epimorphism_named(G: GroupBackend, name: str) -> Epimorphism:
    """'ab': abelianisation onto ℤ (torsion-free part); 'aexp': x-exponent for the Klein group."""
    Z = integers()
    t = Word.gen(0)
    if isinstance(G, TorusKnotGroup):
        if name != "ab":
            raise ValueError(f"unknown epimorphism {name!r} for {G.describe()}")
        imgs = [Word()] * G.rank
        imgs[G.u] = t ** G.q
        imgs[G.v] = t ** G.p
        return Epimorphism(G, Z, imgs, "ab")
    if isinstance(G, KleinGroup):
        if name not in ("ab", "aexp"):
            raise ValueError(f"unknown epimorphism {name!r} for {G.describe()}")
        imgs = [Word()] * G.rank
        imgs[G.x] = t
        return Epimorphism(G, Z, imgs, name)
    if isinstance(G, SemidirectShear):
        return Epimorphism(G, Z, [Word(), Word(), t], name)
    if isinstance(G, FreeGroup) and G.rank == 1:
        return Epimorphism(G, Z, [t], name)
    raise ValueError(f"no built-in epimorphism {name!r} for {G.describe()}")


# orders -----------------------------------------------------------------

KLEIN_NAMES = {"o": (-1, -1), "o(x)": (1, -1), "o(y)": (-1, 1), "o(x,y)": (1, 1)}


def klein_order(G: KleinGroup, sx: int, sy: int) -> OrderOracle:
    """Lex order through 1 -> <y> -> G -> <x> -> 1 with signs of x and y."""
    def sign(g):
        a, b = G.pair(g)
        return sx * (1 if a > 0 else -1) if a else sy * (1 if b > 0 else -1)
    name = {v: k for k, v in KLEIN_NAMES.items()}[(sx, sy)]
    return OrderOracle(G, sign, name)


def klein_family(G: KleinGroup) -> dict:
    return {n: klein_order(G, *s) for n, s in KLEIN_NAMES.items()}


def torus_ab_order(G: TorusKnotGroup, eps: int = 1, kern: int = 1, shift: int = 0) -> OrderOracle:
    """Lex order: abelianisation sign first, then the Magnus order on the
    commutator subgroup, pre-conjugated by mu^shift."""
    K = TorusKernel(G)
    mu = G.mu_word()
    m_neg, m_pos = G.power(mu, -shift), G.power(mu, shift)
    Z = integers()

    def ksign(g):
        if shift:
            g = G.mul(m_neg, g, m_pos)
        return kern * K.sign(g)

    phi = epimorphism_named(G, "ab")
    q = z_standard(Z, eps)
    tag = f"ab{'+' if eps > 0 else '-'}{'+' if kern > 0 else '-'}"
    if shift:
        tag += f"@{shift}"
    return lex_extend(G, ksign, q, phi, tag)


def torus_family(G: TorusKnotGroup) -> dict:
    """The conjugation-closed family: quotient sign x kernel sign x mu-shift mod pq."""
    out = {}
    for eps in (1, -1):
        for kern in (1, -1):
            for n in range(G.p * G.q):
                o = torus_ab_order(G, eps, kern, n)
                out[o.provenance] = o
    return out


def shear_order(G: SemidirectShear, slope: Slope = Rational(0, 1)) -> OrderOracle:
    """t-exponent first, then a line order on the normal ℤ² = <a, b>.

    With slope 0 the kernel line is not invariant under the shear, so the
    conjugates of this order have other peripheral slopes.
    """
    L = LatticeLine(slope)

    def sign(g):
        x, y, n = G.triple(g)
        if n:
            return 1 if n > 0 else -1
        return L.sign((x, y))
    return OrderOracle(G, sign, f"shear-lex[{L.label()}]")


def standard_orders(G: GroupBackend) -> dict:
    """Named orders usable from the command line."""
    if isinstance(G, KleinGroup):
        return klein_family(G)
    if isinstance(G, TorusKnotGroup):
        return {o.provenance: o for o in (torus_ab_order(G, e, k) for e in (1, -1) for k in (1, -1))}
    if isinstance(G, FreeGroup) and G.rank == 1:
        return {"std": z_standard(G, 1), "op(std)": z_standard(G, -1)}
    if isinstance(G, SemidirectShear):
        return {"shear-lex": shear_order(G)}
    return {}


def resolve_order(G: GroupBackend, spec: str) -> OrderOracle:
    """Order by name; ℤ² also accepts ``line:<slope>[:<side>[:<axis>]]``."""
    if spec.startswith("line:"):
        if not (isinstance(G, ZnGroup) and G.rank == 2):
            raise ValueError("line orders need a rank-2 free abelian group")
        parts = spec[5:].split(":")
        s = parse_slope(parts[0])
        side = -1 if len(parts) > 1 and parts[1] == "-" else 1
        axis = -1 if len(parts) > 2 and parts[2] == "-" else 1
        return line_order(LatticeLine(s, side, axis), G)
    if isinstance(G, TorusKnotGroup) and spec.startswith("ab") and "@" in spec:
        base, shift = spec.split("@")
        return torus_ab_order(G, 1 if base[2] == "+" else -1, 1 if base[3] == "+" else -1, int(shift))
    orders = standard_orders(G)
    if spec not in orders:
        raise KeyError(f"unknown order {spec!r}; available: {', '.join(orders) or 'line:<slope>'}")
    return orders[spec]


def default_order(G: GroupBackend) -> OrderOracle:
    if isinstance(G, ZnGroup) and G.rank == 2:
        return resolve_order(G, "line:0/1")
    orders = standard_orders(G)
    if not orders:
        raise KeyError(f"no built-in order for {G.describe()}")
    if isinstance(G, KleinGroup):
        return orders["o(x,y)"]
    return next(iter(orders.values()))
