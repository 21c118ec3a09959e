"""Exhaustive positive-cone search on a Cayley ball.

Each inversion pair {g, g^-1} of the ball is one boolean variable (true when
the pair's first element in ball order is positive).  Closure gives clauses
not(g) or not(h) or gh for every g, h in the ball with gh in the ball.  The
search is DPLL with two-watched-literal propagation; refutations are kept as
decision trees with backward-sliced propagation chains so they replay through
an independent validator.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from .groups import GroupBackend, PeripheralSubgroup, ResourceLimitError
from .lattice import LatticeLine, Slope, cross
from .orders import ConeSnapshot, sign_char
from .presentations import PresentationError, Word

SPLIT_DEPTH = 3


# constraints ------------------------------------------------------------

@dataclass(frozen=True)
class SignConstraint:
    element: Word
    sign: int


@dataclass(frozen=True)
class LineConstraint:
    """Peripheral elements strictly off the line share the line's side pattern.

    With ``fixed_side`` the side is prescribed; otherwise either side is
    allowed (one selector variable), so the constraint says "the cone's
    peripheral line has this slope".
    """
    peripheral: PeripheralSubgroup
    slope: Slope
    fixed_side: Optional[int] = None


@dataclass
class ConvexConstraint:
    member: Callable[[Word], bool]
    name: str = "C"


# SAT core ---------------------------------------------------------------

class Solver:
    def __init__(self, nvars: int, clauses: list[tuple]):
        self.n = nvars
        self.clauses = [list(c) for c in clauses]
        self.assign = [0] * (nvars + 1)
        self.reason: list[Optional[int]] = [None] * (nvars + 1)
        self.trail: list[int] = []
        self.qhead = 0
        self.marks: list[int] = []
        self.watches: dict[int, list[int]] = {}
        for v in range(1, nvars + 1):
            self.watches[v] = []
            self.watches[-v] = []
        self.units: list[int] = []
        self.empty: Optional[int] = None
        for ci, c in enumerate(self.clauses):
            if not c:
                self.empty = ci
            elif len(c) == 1:
                self.units.append(ci)
            else:
                self.watches[c[0]].append(ci)
                self.watches[c[1]].append(ci)

    def value(self, lit: int) -> int:
        v = self.assign[abs(lit)]
        return v if lit > 0 else -v

    def enqueue(self, lit: int, reason: Optional[int]) -> bool:
        val = self.value(lit)
        if val == -1:
            return False
        if val == 1:
            return True
        self.assign[abs(lit)] = 1 if lit > 0 else -1
        self.reason[abs(lit)] = reason
        self.trail.append(lit)
        return True

    def root_units(self) -> Optional[int]:
        if self.empty is not None:
            return self.empty
        for ci in self.units:
            if not self.enqueue(self.clauses[ci][0], ci):
                return ci
        return None

    def propagate(self) -> Optional[int]:
        clauses, watches, assign = self.clauses, self.watches, self.assign
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            fl = -p
            ws = watches[fl]
            keep: list[int] = []
            i = 0
            n = len(ws)
            while i < n:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c[0] == fl:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                fv = assign[abs(first)]
                if (fv if first > 0 else -fv) == 1:
                    keep.append(ci)
                    continue
                moved = False
                for k in range(2, len(c)):
                    lk = c[k]
                    lv = assign[abs(lk)]
                    if (lv if lk > 0 else -lv) != -1:
                        c[1], c[k] = lk, c[1]
                        watches[c[1]].append(ci)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(ci)
                if (fv if first > 0 else -fv) == -1:
                    keep.extend(ws[i:])
                    watches[fl] = keep
                    return ci
                self.enqueue(first, ci)
            watches[fl] = keep
        return None

    def new_level(self):
        self.marks.append(len(self.trail))

    def backtrack(self):
        m = self.marks.pop()
        for lit in self.trail[m:]:
            self.assign[abs(lit)] = 0
            self.reason[abs(lit)] = None
        del self.trail[m:]
        self.qhead = m

    def slice_conflict(self, ci: int) -> list[tuple[int, int]]:
        """Propagated literals (with reasons) needed to derive the conflict."""
        need = {abs(l) for l in self.clauses[ci]}
        steps = []
        for lit in reversed(self.trail):
            v = abs(lit)
            if v in need and self.reason[v] is not None:
                r = self.reason[v]
                steps.append((lit, r))
                need |= {abs(l) for l in self.clauses[r]}
        steps.reverse()
        return steps


class _Budget(Exception):
    pass


def _dpll(solver: Solver, order: list[int], limit: int, models: list, node_cap: int,
          counter: list, path: tuple):
    """Returns a refutation tree when the subtree has no model, else None."""
    counter[0] += 1
    if counter[0] > node_cap:
        raise _Budget()
    ci = solver.propagate()
    if ci is not None:
        return {"path": path, "steps": solver.slice_conflict(ci), "conflict": ci}
    for v in order:
        if solver.assign[v] == 0:
            break
    else:
        models.append(tuple(solver.assign[1:]))
        return None
    kids = []
    found = False
    for lit in (v, -v):
        if len(models) >= limit:
            return None
        solver.new_level()
        solver.enqueue(lit, None)
        sub = _dpll(solver, order, limit, models, node_cap, counter, path + (lit,))
        solver.backtrack()
        if sub is None:
            found = True
        kids.append(sub)
    if found:
        return None
    return {"path": path, "decide": v, "children": kids}


def _solve_branch(args):
    nvars, clauses, order, assumptions, limit, node_cap = args
    s = Solver(nvars, clauses)
    models: list = []
    counter = [0]
    ci = s.root_units()
    if ci is not None:
        return models, {"path": (), "steps": s.slice_conflict(ci), "conflict": ci}, False
    for lit in assumptions:
        ci = s.propagate()
        if ci is not None:
            return models, {"path": tuple(assumptions), "steps": s.slice_conflict(ci), "conflict": ci}, False
        s.new_level()
        s.enqueue(lit, None)
    try:
        tree = _dpll(s, order, limit, models, node_cap, counter, tuple(assumptions))
    except _Budget:
        return models, None, True
    return models, tree, False


def _expand(nvars, clauses, order, depth):
    """Deterministically expand the first ``depth`` decision levels.

    Returns a list of ("branch", assumptions) and ("leaf", refutation) items
    in search order, plus the skeleton used to rebuild the refutation tree.
    """
    items = []

    def rec(assumptions, d):
        s = Solver(nvars, clauses)
        ci = s.root_units()
        if ci is not None:
            items.append(("leaf", {"path": (), "steps": s.slice_conflict(ci), "conflict": ci}))
            return ("leaf", len(items) - 1)
        for lit in assumptions:
            s.propagate()
            s.new_level()
            s.enqueue(lit, None)
        ci = s.propagate()
        if ci is not None:
            items.append(("leaf", {"path": tuple(assumptions), "steps": s.slice_conflict(ci), "conflict": ci}))
            return ("leaf", len(items) - 1)
        v = next((v for v in order if s.assign[v] == 0), None)
        if v is None or d == 0:
            items.append(("branch", tuple(assumptions)))
            return ("branch", len(items) - 1)
        return ("node", tuple(assumptions), v,
                [rec(assumptions + [v], d - 1), rec(assumptions + [-v], d - 1)])

    skel = rec([], depth)
    return items, skel


# problem construction ---------------------------------------------------

@dataclass
class Encoding:
    group: GroupBackend
    radius: int
    elements: list                   # nontrivial ball elements in ball order
    lit: dict                        # element -> literal
    rep: dict                        # variable -> representative element
    nvars: int
    clauses: list = field(default_factory=list)
    why: list = field(default_factory=list)   # justification per clause
    selectors: list = field(default_factory=list)

    def add(self, clause, why):
        c = []
        for l in clause:
            if -l in c:
                return
            if l not in c:
                c.append(l)
        self.clauses.append(tuple(c))
        self.why.append(why)


def encode(G: GroupBackend, r: int, constraints=(), ball_cap: int = 200_000) -> Encoding:
    ball = G.ball(r, ball_cap)
    elems = ball.nontrivial()
    lit: dict = {}
    rep: dict = {}
    nv = 0
    involutions = []
    for g in elems:
        if g in lit:
            continue
        gi = G.inv(g)
        nv += 1
        lit[g] = nv
        rep[nv] = g
        if gi == g:
            involutions.append(g)
        else:
            lit[gi] = -nv
    enc = Encoding(G, r, elems, lit, rep, nv)
    for g in involutions:
        # g = g^-1 forces sign(g) = -sign(g)
        enc.add((lit[g],), ("antisym", g))
        enc.add((-lit[g],), ("antisym", g))
    for g in elems:
        lg = lit[g]
        for h in elems:
            gh = G.mul(g, h)
            if gh.syl and gh in lit:
                enc.add((-lg, -lit[h], lit[gh]), ("closure", g, h, gh))
            elif not gh.syl and lit[h] != -lg:
                enc.add((-lg, -lit[h]), ("identity", g, h))
    for c in constraints:
        _encode_constraint(enc, c)
    return enc


def _encode_constraint(enc: Encoding, c):
    G = enc.group
    if isinstance(c, SignConstraint):
        g = G.normal_form(c.element)
        if g not in enc.lit:
            raise ValueError(f"constrained element {G.show(g)} not in the ball")
        enc.add((enc.lit[g] if c.sign > 0 else -enc.lit[g],), ("sign", g, c.sign))
    elif isinstance(c, LineConstraint):
        P = c.peripheral
        line = LatticeLine(c.slope)
        pts = []
        for g in enc.elements:
            v = P.coords(g)
            if v is None:
                continue
            a, b = v
            x, y = b, a
            if cross(c.slope.direction(), (x, y)).sign() != 0:
                pts.append((g, line.sign((x, y))))
        if c.fixed_side is not None:
            for g, s in pts:
                s2 = s * c.fixed_side
                enc.add((enc.lit[g] if s2 > 0 else -enc.lit[g],), ("line", g, s2, 0))
        elif pts:
            enc.nvars += 1
            sel = enc.nvars
            enc.selectors.append(sel)
            for g, s in pts:
                lg = enc.lit[g] if s > 0 else -enc.lit[g]
                enc.add((-sel, lg), ("line", g, s, sel))
                enc.add((sel, -lg), ("line", g, -s, -sel))
    elif isinstance(c, ConvexConstraint):
        inside = [h for h in enc.elements if c.member(h)]
        outside = [g for g in enc.elements if not c.member(g)]
        for h in inside:
            for g in outside:
                d = G.mul(G.inv(g), h)
                if d in enc.lit:
                    # 1 < g < h or h < g < 1 with h in C, g outside C
                    enc.add((-enc.lit[g], -enc.lit[d]), ("convex", g, h, 1))
                    enc.add((enc.lit[g], enc.lit[d]), ("convex", g, h, -1))
    else:
        raise TypeError(f"unknown constraint {c!r}")


# outcomes ---------------------------------------------------------------

@dataclass
class Certificate:
    group: GroupBackend
    radius: int
    tree: dict
    enc: Encoding

    def lines(self) -> list[str]:
        out = []
        G = self.group

        def lt(lit):
            g = self.enc.rep[abs(lit)] if abs(lit) in self.enc.rep else None
            if g is None:
                return f"selector{abs(lit)} {'+' if lit > 0 else '-'}"
            return f"{G.show(g)} {'+' if lit > 0 else '-'}"

        def path_text(path):
            return "".join("+" if l > 0 else "-" for l in path) or "."

        def why_text(ci):
            w = self.enc.why[ci]
            k = w[0]
            if k == "closure":
                return f"closure {G.show(w[1])} ; {G.show(w[2])} ; {G.show(w[3])}"
            if k == "identity":
                return f"identity {G.show(w[1])} ; {G.show(w[2])}"
            if k == "antisym":
                return f"antisym {G.show(w[1])}"
            if k == "sign":
                return f"constraint {G.show(w[1])} ; {sign_char(w[2])}"
            if k == "line":
                sel = "" if not w[3] else f" ; selector{abs(w[3])} {'+' if w[3] > 0 else '-'}"
                return f"line {G.show(w[1])} ; {sign_char(w[2])}{sel}"
            if k == "convex":
                return f"convex {G.show(w[1])} ; {G.show(w[2])} ; {sign_char(w[3])}"
            return str(w)

        def rec(node):
            p = node["path"]
            if "decide" in node:
                v = node["decide"]
                for lit, kid in zip((v, -v), node["children"]):
                    out.append(f"[{path_text(p + (lit,))}] assume {lt(lit)}")
                    rec(kid)
                return
            for lit, ci in node["steps"]:
                out.append(f"[{path_text(p)}] derive {lt(lit)} by {why_text(ci)}")
            out.append(f"[{path_text(p)}] conflict {why_text(node['conflict'])}")

        rec(self.tree)
        return [f"{i}. {s}" for i, s in enumerate(out, 1)]

    def text(self) -> str:
        from .presentations import serialise_presentation
        head = ["# unsat certificate: no cone on the ball satisfies the axioms and constraints",
                f"# radius {self.radius}"]
        pres = serialise_presentation(self.group.presentation).strip().replace("\n", " ")
        head.append(f"# group {pres}")
        return "\n".join(head + self.lines()) + "\n"


@dataclass
class SearchOutcome:
    radius: int
    cones: list = field(default_factory=list)
    complete: bool = True
    certificate: Optional[Certificate] = None

    @property
    def unsat(self) -> bool:
        return self.certificate is not None

    @property
    def count(self) -> int:
        return len(self.cones)


def _snap(enc: Encoding, model) -> ConeSnapshot:
    signs = {}
    for g in enc.elements:
        l = enc.lit[g]
        v = model[abs(l) - 1]
        signs[g] = v if l > 0 else -v
    return ConeSnapshot(enc.group, enc.radius, signs)


def search(G: GroupBackend, r: int, constraints=(), limit: int = 10_000,
           jobs: int = 1, node_cap: int = 2_000_000, ball_cap: int = 200_000) -> SearchOutcome:
    try:
        enc = encode(G, r, constraints, ball_cap)
    except ResourceLimitError:
        return SearchOutcome(r, [], False, None)
    order = sorted(enc.rep)
    order += enc.selectors
    items, skel = _expand(enc.nvars, enc.clauses, order, SPLIT_DEPTH)
    tasks = [(enc.nvars, enc.clauses, order, list(a), limit, node_cap)
             for kind, a in items if kind == "branch"]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_solve_branch, tasks))
    else:
        results = [_solve_branch(t) for t in tasks]
    models: list = []
    complete = True
    trees = {}
    ri = 0
    for i, (kind, a) in enumerate(items):
        if kind == "branch":
            ms, tree, over = results[ri]
            ri += 1
            if over:
                complete = False
            models.extend(ms)
            trees[i] = None if ms or over else tree
        else:
            trees[i] = a
    if len(models) > limit:
        models = models[:limit]
    if len(models) >= limit:
        complete = False
    # drop selector values and deduplicate snapshots (selectors may double count)
    seen = set()
    cones = []
    for m in models:
        s = _snap(enc, m)
        key = s.table()
        if key not in seen:
            seen.add(key)
            cones.append(s)
    cert = None
    if not models and complete:
        cert = Certificate(G, r, _rebuild(skel, trees), enc)
    return SearchOutcome(r, cones, complete, cert)


def _rebuild(skel, trees):
    kind = skel[0]
    if kind in ("leaf", "branch"):
        return trees[skel[1]]
    _, path, v, kids = skel
    return {"path": path, "decide": v, "children": [_rebuild(k, trees) for k in kids]}


def count_classes(G: GroupBackend, r: int, constraints=(), **kw):
    out = search(G, r, constraints, **kw)
    return "unsat" if out.unsat else out.count


def certify_nonorderable(G: GroupBackend, r_max: int, r_min: int = 1, **kw) -> Optional[Certificate]:
    for r in range(r_min, r_max + 1):
        out = search(G, r, (), limit=1, **kw)
        if out.unsat:
            return out.certificate
    return None


# independent validator -----------------------------------------------------

class CertificateError(ValueError):
    pass


def validate_certificate(G: GroupBackend, text: str, constraints=()) -> int:
    """Replay a certificate using only the group's word problem.

    Every leaf branch must derive its conflict from its own assumptions via
    the cited facts, and the assumptions must cover all cases.  Facts that
    come from constraints are checked against ``constraints``.  Returns the
    number of replayed steps.
    """
    steps = []
    for raw in text.splitlines():
        raw = raw.strip()
        if not raw or raw.startswith("#"):
            continue
        num, _, rest = raw.partition(". ")
        if not num.isdigit() or not rest.startswith("["):
            raise CertificateError(f"bad line {raw!r}")
        path_part, _, body = rest.partition("] ")
        path = path_part[1:]
        path = "" if path == "." else path
        steps.append((path, body))

    def el(t):
        try:
            return G.word(t.strip())
        except PresentationError as e:
            raise CertificateError(f"bad element {t.strip()!r}: {e}") from e

    assume = {}
    leaves: dict = {}
    for path, body in steps:
        kind, _, arg = body.partition(" ")
        if kind == "assume":
            who, sg = arg.rsplit(" ", 1)
            assume[path] = (who, 1 if sg == "+" else -1)
        else:
            leaves.setdefault(path, []).append((kind, arg))

    def complete(path):
        if path in leaves:
            return True
        a, b = path + "+", path + "-"
        if a not in assume or b not in assume:
            return False
        if assume[a][0] != assume[b][0] or assume[a][1] != 1 or assume[b][1] != -1:
            return False
        return complete(a) and complete(b)

    if not complete(""):
        raise CertificateError("decision tree does not cover every case")

    signs_given = {}
    lines_given = []
    for c in constraints:
        if isinstance(c, SignConstraint):
            signs_given[G.normal_form(c.element)] = c.sign
        elif isinstance(c, LineConstraint):
            lines_given.append(c)

    def line_sign(g):
        """Side of g for some declared line constraint, or None."""
        for c in lines_given:
            v = c.peripheral.coords(g)
            if v is None:
                continue
            pt = (v[1], v[0])
            if cross(c.slope.direction(), pt).sign() != 0:
                return LatticeLine(c.slope).sign(pt), c.fixed_side
        return None

    def fact(desc):
        kind, _, arg = desc.partition(" ")
        parts = [t.strip() for t in arg.split(";")]
        if kind == "closure":
            g, h, gh = (el(t) for t in parts)
            if G.mul(g, h) != gh or not gh.syl:
                raise CertificateError(f"false product {arg}")
            return [(G.show(g), -1), (G.show(h), -1), (G.show(gh), 1)]
        if kind == "identity":
            g, h = (el(t) for t in parts)
            if G.mul(g, h).syl:
                raise CertificateError(f"product is not trivial: {arg}")
            return [(G.show(g), -1), (G.show(h), -1)]
        if kind == "antisym":
            g = el(parts[0])
            if G.mul(g, g).syl or not g.syl:
                raise CertificateError(f"{arg} is not an involution")
            return None
        if kind == "constraint":
            g, sg = el(parts[0]), (1 if parts[1] == "+" else -1)
            if signs_given.get(g) != sg:
                raise CertificateError(f"no such sign constraint: {arg}")
            return [(G.show(g), sg)]
        if kind == "line":
            g, sg = el(parts[0]), (1 if parts[1] == "+" else -1)
            ls = line_sign(g)
            if ls is None:
                raise CertificateError(f"{parts[0]} is not off a constrained line")
            side, fixed = ls
            if len(parts) == 2:
                if fixed is None or sg != side * fixed:
                    raise CertificateError(f"bad fixed-side line fact {arg}")
                return [(G.show(g), sg)]
            who, ss = parts[2].rsplit(" ", 1)
            ss = 1 if ss == "+" else -1
            if sg != side * ss:
                raise CertificateError(f"bad line fact {arg}")
            return [(who, -ss), (G.show(g), sg)]
        raise CertificateError(f"fact {kind!r} cannot be replayed")

    count = 0
    for path, body_list in leaves.items():
        known: dict = {}

        def key_of(who):
            if who.startswith("selector"):
                return who, 1
            g = el(who)
            if not g.syl:
                raise CertificateError("identity has no sign")
            k = min(g, G.inv(g), key=Word.key)
            return k, (1 if g == k else -1)

        def val(who):
            k, f = key_of(who)
            v = known.get(k)
            return None if v is None else v * f

        def setv(who, sg):
            k, f = key_of(who)
            old = known.get(k)
            if old is not None and old != sg * f:
                return False
            known[k] = sg * f
            return True

        def canon(w, sg):
            k, f = key_of(w)
            return k, sg * f

        for i in range(1, len(path) + 1):
            who, sg = assume[path[:i]]
            if not setv(who, sg):
                raise CertificateError("inconsistent assumptions")

        for kind, arg in body_list:
            count += 1
            if kind == "derive":
                lhs, _, why = arg.partition(" by ")
                who, sg = lhs.rsplit(" ", 1)
                sg = 1 if sg == "+" else -1
                c = fact(why)
                if c is None:
                    setv(who, sg)
                    continue
                hit = False
                target = canon(who, sg)
                for w, wsg in c:
                    if canon(w, wsg) == target:
                        hit = True
                        continue
                    v = val(w)
                    if v is None or v == wsg:
                        raise CertificateError(f"step {arg!r} does not follow")
                if not hit:
                    raise CertificateError(f"step {arg!r} derives a literal outside its fact")
                if not setv(who, sg):
                    raise CertificateError(f"step {arg!r} contradicts the branch")
            elif kind == "conflict":
                c = fact(arg)
                if c is None:
                    continue  # g = g^-1 with g != 1: no sign is possible
                for w, wsg in c:
                    v = val(w)
                    if v is None or v == wsg:
                        raise CertificateError(f"conflict {arg!r} is not falsified")
            else:
                raise CertificateError(f"unknown step {kind!r}")
        if body_list[-1][0] != "conflict":
            raise CertificateError(f"branch [{path}] ends without a conflict")
    return count
