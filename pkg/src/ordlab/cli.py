"""Command-line front end: ``ordlab <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

from .groups import (KLEIN_TEXT, TREFOIL_TEXT, Z2_TEXT, Z_TEXT, GroupBackend, ResourceLimitError,
                     UndecidedError, UnsupportedPresentation, backend_from_presentation,
                     semidirect_shear)
from .presentations import PresentationError, parse_presentation, serialise_presentation

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_RESOURCE, EXIT_PATH = 0, 2, 3, 4, 5

BUILTINS = {"klein": KLEIN_TEXT, "trefoil": TREFOIL_TEXT, "z2": Z2_TEXT, "z": Z_TEXT,
            "z2-torsion": "gens x;\nrel x^2;\n", "z3-torsion": "gens x;\nrel x^3;\n",
            "klein-four": "gens a b;\nrel a^2;\nrel b^2;\nrel a b a^-1 b^-1;\n"}


class UsageError(Exception):
    pass


def load_input(spec: str) -> GroupBackend:
    """A presentation file path, or @name for a built-in fixture."""
    if spec.startswith("@"):
        name = spec[1:]
        if name == "shear":
            return semidirect_shear()
        if name not in BUILTINS:
            raise UsageError(f"unknown built-in group {spec}; choose from "
                             f"{', '.join('@' + k for k in sorted(BUILTINS) + ['shear'])}")
        return backend_from_presentation(parse_presentation(BUILTINS[name]))
    with open(spec, encoding="utf-8") as fh:
        text = fh.read()
    return backend_from_presentation(parse_presentation(text))


def _peripheral(G, name):
    try:
        return G.peripheral(name)
    except KeyError as e:
        raise UsageError(str(e).strip("'\"")) from e


def _order(G, name):
    from .families import default_order, resolve_order
    try:
        return resolve_order(G, name) if name else default_order(G)
    except KeyError as e:
        raise UsageError(str(e).strip("'\"")) from e


def _slope(text):
    from .gluing import parse_assigned_slope
    try:
        return parse_assigned_slope(text)
    except (ValueError, KeyError) as e:
        raise PresentationError(f"bad slope {text!r}: {e}") from e


def _write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(d):
        raise FileNotFoundError(f"directory does not exist: {d}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# subcommands ----------------------------------------------------------------

def cmd_parse(a):
    G = load_input(a.group)
    P = G.presentation
    text = serialise_presentation(P)
    print(text, end="")
    print(f"# family {G.describe()}")
    return {"family": G.describe(), "presentation": text,
            "generators": list(P.generators), "relators": [r.text(P.generators) for r in P.relators],
            "peripherals": [{"name": Q.name, "mu": G.show(Q.mu), "lam": G.show(Q.lam)} for Q in G.peripherals]}


def cmd_ball(a):
    G = load_input(a.group)
    B = G.ball(a.radius)
    for g in B.elements:
        print(f"{B.length[g]} {G.show(g)}")
    print(f"# |B_{a.radius}| = {len(B)}")
    return {"family": G.describe(), "radius": a.radius, "size": len(B),
            "elements": [G.show(g) for g in B.elements]}


def cmd_cone_search(a):
    from .conesearch import LineConstraint, search
    from .orders import snapshot
    from .families import standard_orders
    G = load_input(a.group)
    cons = []
    if a.line:
        cons.append(LineConstraint(_peripheral(G, a.peripheral), _slope(a.line)))
    out = search(G, a.radius, cons, limit=a.limit, jobs=a.jobs, node_cap=a.node_cap)
    named = {}
    for name, o in sorted(standard_orders(G).items()):
        named.setdefault(snapshot(o, a.radius).table(), name)
    cones = []
    for s in out.cones:
        cones.append({"snapshot": s.serialise(), "matches": named.get(s.table())})
    report = {"family": G.describe(), "radius": a.radius, "constraints": [f"line {a.line}"] if a.line else [],
              "count": out.count, "complete": out.complete, "unsat": out.unsat, "cones": cones}
    if out.unsat:
        report["certificate_lines"] = len(out.certificate.lines())
        if a.emit_certificate:
            _write(a.emit_certificate, out.certificate.text())
            report["certificate"] = os.path.basename(a.emit_certificate)
    status = "unsat" if out.unsat else ("complete" if out.complete else "incomplete (cap reached)")
    print(f"cone-search radius {a.radius}: {out.count} cone(s), {status}")
    for i, c in enumerate(cones, 1):
        print(f"  cone {i}" + (f" = {c['matches']}" if c["matches"] else ""))
    return report


def cmd_classify_z2(a):
    from .lattice import LatticeLine, classify_line_orders, cofinal_elements, z2_group
    from .orders import snapshot
    s = _slope(a.slope)
    G = z2_group()
    orders = classify_line_orders(LatticeLine(s), G)
    print(f"slope {s.text()}: {len(orders)} line orders")
    out = []
    for o in orders:
        print(f"  {o.describe()}")
        out.append({"order": o.describe(), "snapshot": snapshot(o, a.radius).serialise()})
    cof = cofinal_elements(LatticeLine(s), a.radius)
    return {"slope": s.text(), "count": len(orders), "radius": a.radius, "orders": out,
            "cofinal_elements": [list(v) for v in cof]}


def cmd_slope(a):
    from .detection import slope_of_order
    G = load_input(a.group)
    o = _order(G, a.order)
    P = _peripheral(G, a.peripheral)
    est = slope_of_order(o, P, a.radius)
    print(f"{o.describe()} on {P.name}: {est.text()}" + ("" if est.exact else f" (interval {est.interval.text()})"))
    return {"family": G.describe(), "order": o.describe(), "peripheral": P.name, **est.as_dict()}


def cmd_detect(a):
    from .detection import (exclusion_search, regular_detect_check, slope_circle_svg,
                            strong_detect_witness, weak_detect)
    from .families import epimorphism_named, z_standard
    G = load_input(a.group)
    P = _peripheral(G, a.peripheral)
    s = _slope(a.slope)
    if a.level == "strong":
        try:
            phi = epimorphism_named(G, a.epi)
        except ValueError as e:
            raise UsageError(str(e)) from e
        v = strong_detect_witness(G, P, s, phi, z_standard(phi.target), a.radius)
        induced = v.witness.pop("_order", None)
        if induced is not None and a.r_conj is not None:
            reg = regular_detect_check(G, induced, P, s, a.r_conj, a.radius, a.jobs)
            v.witness["induced_regular"] = reg.status
    else:
        o = _order(G, a.order)
        if a.level == "weak":
            v = weak_detect(G, o, P, s, a.radius)
        else:
            v = regular_detect_check(G, o, P, s, 3 if a.r_conj is None else a.r_conj, a.radius, a.jobs)
    report = {"family": G.describe(), "peripheral": P.name, **v.as_dict()}
    excluded = []
    if a.exclude_radius:
        cert, out = exclusion_search(G, P, s, a.exclude_radius, jobs=a.jobs)
        report["exclusion"] = {"radius": a.exclude_radius, "certificate": cert is not None,
                               "complete": out.complete, "cones_found": out.count}
        if cert is not None:
            excluded.append(s)
            if a.emit_certificate:
                _write(a.emit_certificate, cert.text())
    if a.svg:
        _write(a.svg, slope_circle_svg([s] if v.certified else [], excluded))
    print(f"{v.level} detection of {s.text()}: {v.status} (radius {v.radius})")
    return report


def cmd_cofinal(a):
    from .detection import boundary_cofinality_report, cofinality_check
    G = load_input(a.group)
    o = _order(G, a.order)
    if a.element:
        rep = cofinality_check(G, o, G.word(a.element), a.radius, a.n_max)
        print(f"{a.element}: {rep['verdict']}")
    else:
        rep = boundary_cofinality_report(G, o, _peripheral(G, a.peripheral), a.radius, a.n_max)
        print(f"{o.describe()}: {rep['verdict']}")
    return {"family": G.describe(), "order": o.describe(), **rep}


def cmd_dynreal(a):
    from .dynreal import build_realisation, fixed_points, orbit_law_report, sign_recovery_mismatches, svg_graphs
    from .presentations import Word
    G = load_input(a.group)
    o = _order(G, a.order)
    A = build_realisation(o, a.radius)
    law = orbit_law_report(A)
    bad = sign_recovery_mismatches(A)
    words = [G.word(w) for w in a.words] if a.words else [Word.gen(i) for i in range(G.rank)]
    fps = [fixed_points(A, w).as_dict() for w in words]
    print(f"orbit law: {law['holds']}/{law['applicable']} applicable pairs; "
          f"sign recovery mismatches: {len(bad)}")
    for f in fps:
        print(f"  rho({f['element']}): {f['verdict']}")
    if a.svg:
        _write(a.svg, svg_graphs(A, words))
    return {"family": G.describe(), "order": o.describe(), "radius": a.radius,
            "window": [A.window[0], A.window[1]], "orbit_law": {k: (list(map(list, v)) if k == "failures" else v)
                                                                 for k, v in law.items()},
            "sign_recovery_mismatches": bad, "fixed_points": fps,
            "generators": {G.names[i]: A.gens[i].table() for i in range(G.rank)}}


def cmd_glue(a):
    from .gluing import (assignment_from_list, bludov_glass_check, coherence_check,
                         family_fixture, parse_gluing_graph)
    with open(a.graph, encoding="utf-8") as fh:
        text = fh.read()
    g = parse_gluing_graph(text, os.path.dirname(os.path.abspath(a.graph)))
    report: dict = {"graph": os.path.basename(a.graph)}
    if a.assign:
        slopes = [x for x in a.assign.split(",") if x.strip()]
        asg = assignment_from_list(g, slopes)
        report["coherence"] = coherence_check(g, asg, a.radius, a.r_conj, a.jobs)
        print(f"coherence: {report['coherence']['status']}")
    bg = []
    for e in g.edges:
        f = g.gluing_map(e)
        s1 = asg.get((e.v1, e.t1)) if a.assign else None
        s2 = asg.get((e.v2, e.t2)) if a.assign else None
        try:
            N1 = family_fixture(g.vertices[e.v1], e.v1, s1)
            N2 = family_fixture(g.vertices[e.v2], e.v2, s2)
        except UnsupportedPresentation as err:
            bg.append({"edge": e.label, "status": "unknown", "reason": str(err)})
            continue
        N1.validate(3)
        N2.validate(3)
        v = bludov_glass_check(N1, N2, f, a.radius)
        bg.append({"edge": e.label, **v.as_dict(), "families": {e.v1: N1.tags, e.v2: N2.tags}})
        print(f"bludov-glass {e.label}: {v.status}")
    report["bludov_glass"] = bg
    return report


def cmd_certify(a):
    from .conesearch import certify_nonorderable, validate_certificate
    G = load_input(a.group)
    cert = certify_nonorderable(G, a.max_radius, jobs=a.jobs)
    if cert is None:
        print(f"no certificate up to radius {a.max_radius}")
        return {"family": G.describe(), "certified": False, "max_radius": a.max_radius}
    text = cert.text()
    steps = validate_certificate(G, text)
    if a.emit_certificate:
        _write(a.emit_certificate, text)
    print(f"not left-orderable: certificate at radius {cert.radius}, {steps} replayed steps")
    return {"family": G.describe(), "certified": True, "radius": cert.radius,
            "lines": len(cert.lines()), "replayed_steps": steps, "certificate": text}


# argument parsing -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ordlab", description="Left-orders, slopes and gluing checks.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", metavar="PATH", help="write the JSON report here")
    common.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    common.add_argument("--jobs", type=int, default=1, help="worker count (results do not depend on it)")
    sub = p.add_subparsers(dest="cmd", required=True)

    def add(name, fn, help_, group=True):
        s = sub.add_parser(name, parents=[common], help=help_)
        if group:
            s.add_argument("group", help="presentation file or @builtin (klein, trefoil, z2, z, shear, ...)")
        s.set_defaults(fn=fn)
        return s

    add("parse", cmd_parse, "parse and normalise a presentation")
    s = add("ball", cmd_ball, "list the Cayley ball")
    s.add_argument("--radius", type=int, default=2)
    s = add("cone-search", cmd_cone_search, "enumerate positive cones on a ball")
    s.add_argument("--radius", type=int, default=3)
    s.add_argument("--line", metavar="SLOPE", help="require this peripheral slope")
    s.add_argument("--peripheral", default=None)
    s.add_argument("--limit", type=int, default=10_000)
    s.add_argument("--node-cap", type=int, default=2_000_000)
    s.add_argument("--emit-certificate", metavar="PATH")
    s = add("classify-z2", cmd_classify_z2, "line orders of ℤ² for a slope", group=False)
    s.add_argument("--slope", required=True)
    s.add_argument("--radius", type=int, default=3)
    s = add("slope", cmd_slope, "slope of an order on a peripheral subgroup")
    s.add_argument("--order")
    s.add_argument("--peripheral", default=None)
    s.add_argument("--radius", type=int, default=4)
    s = add("detect", cmd_detect, "weak, regular or strong slope detection")
    s.add_argument("--slope", required=True)
    s.add_argument("--level", choices=["weak", "regular", "strong"], default="weak")
    s.add_argument("--order")
    s.add_argument("--epi", default="ab")
    s.add_argument("--peripheral", default=None)
    s.add_argument("--radius", type=int, default=3)
    s.add_argument("--r-conj", type=int, default=None)
    s.add_argument("--exclude-radius", type=int, default=0, help="also run an exclusion search")
    s.add_argument("--emit-certificate", metavar="PATH")
    s.add_argument("--svg", metavar="PATH", help="slope-circle plot")
    s = add("cofinal", cmd_cofinal, "cofinality of an element or of the boundary")
    s.add_argument("--order")
    s.add_argument("--element", help="word; omit for the boundary report")
    s.add_argument("--peripheral", default=None)
    s.add_argument("--radius", type=int, default=3)
    s.add_argument("--n-max", type=int, default=None)
    s = add("dynreal", cmd_dynreal, "dynamic realisation on a window")
    s.add_argument("--order")
    s.add_argument("--radius", type=int, default=4)
    s.add_argument("--words", nargs="*", help="elements for fixed points and plots")
    s.add_argument("--svg", metavar="PATH", help="graphs of rho(w)")
    s = add("glue", cmd_glue, "gluing coherence and Bludov-Glass checks", group=False)
    s.add_argument("graph", help="gluing graph file")
    s.add_argument("--assign", help="comma-separated slopes, tori in order of appearance")
    s.add_argument("--radius", type=int, default=3)
    s.add_argument("--r-conj", type=int, default=3)
    s = add("certify-nonorderable", cmd_certify, "search for an Unsat certificate")
    s.add_argument("--max-radius", type=int, default=3)
    s.add_argument("--emit-certificate", metavar="PATH")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    for k in ("radius", "max_radius", "r_conj", "n_max"):
        v = getattr(a, k, None)
        if v is not None and v < 0:
            parser.error(f"--{k.replace('_', '-')} must be >= 0")
    if getattr(a, "limit", 1) < 1 or a.jobs < 1:
        parser.error("limits and --jobs must be >= 1")
    from .gluing import GluingError
    try:
        report = a.fn(a)
    except UsageError as e:
        print(f"ordlab: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (PresentationError, GluingError, UnsupportedPresentation) as e:
        print(f"ordlab: parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (ResourceLimitError, UndecidedError, MemoryError) as e:
        print(f"ordlab: resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as e:
        print(f"ordlab: path error: {e}", file=sys.stderr)
        return EXIT_PATH
    report = {"command": a.cmd, **report}
    if not a.no_timestamp:
        report["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    text = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if a.json:
        sys.stdout.write(text)
    if a.report:
        try:
            _write(a.report, text)
        except OSError as e:
            print(f"ordlab: path error: {e}", file=sys.stderr)
            return EXIT_PATH
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
