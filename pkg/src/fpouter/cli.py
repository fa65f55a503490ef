"""Command-line front end.

Subcommands: validate, lengths, base, flow, path, contract, act, oracle,
selfcheck.  All inputs and outputs are the JSON documents of
:mod:`fpouter.documents`; rationals are written ``p/q``.

Exit codes: 0 success, 1 validation failure, 2 parse error, 3 engine
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import documents as docs
from .catalog import build_catalog
from .checks import run_selfcheck
from .documents import DocumentError
from .flows import contract, flow, fold_path
from .folding import EngineError, FlowPrecondition
from .graphs import (apply_automorphism, default_witnesses, translation_length,
                     validate_point)
from .morphisms import base_tree, validate_morphism
from .oracle import OracleError, PLMap, four_point_condition, quotient_finite
from .words import WordError, format_fraction, format_word, parse_fraction, parse_word

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2
EXIT_ENGINE = 3


def _emit(args, doc) -> None:
    text = docs.dumps(doc)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_tree(path: str):
    doc = docs.load_path(path)
    return docs.tree_from_doc(doc)


def _parse_time(text: str):
    if text in ("inf", "oo", "infinity"):
        return None
    return parse_fraction(text)


def cmd_validate(args) -> int:
    doc = docs.load_path(args.file)
    kind = doc.get("kind")
    if kind == "tree":
        graph = docs.tree_from_doc(doc)
        rep = validate_point(graph)
    elif kind == "morphism":
        f = docs.morphism_from_doc(doc)
        rep = validate_morphism(f)
        if rep.ok:
            rep = validate_point(f.source)
        if rep.ok:
            rep = validate_point(f.target)
    elif kind == "finite_tree":
        docs.finite_tree_from_doc(doc)
        _emit(args, {"valid": True, "problems": []})
        return EXIT_OK
    elif kind == "pl_map":
        docs.pl_map_from_doc(doc)
        _emit(args, {"valid": True, "problems": []})
        return EXIT_OK
    else:
        raise DocumentError(f"unknown document kind {kind!r}")
    _emit(args, {"valid": rep.ok,
                 "problems": [{"code": c, "message": m} for c, m in rep.problems]})
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_lengths(args) -> int:
    graph = _load_tree(args.file)
    rep = validate_point(graph)
    if not rep.ok:
        sys.stderr.write(str(rep) + "\n")
        return EXIT_INVALID
    if args.words:
        words = [parse_word(graph.sig, w) for w in args.words.split(";") if w.strip()]
    else:
        words = default_witnesses(graph.sig, args.witness_bound)
    lines = []
    for w in words:
        val = translation_length(graph, w)
        lines.append(f"{format_word(w)}\t{format_fraction(val)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_base(args) -> int:
    target = _load_tree(args.file)
    rep = validate_point(target)
    if not rep.ok:
        sys.stderr.write(str(rep) + "\n")
        return EXIT_INVALID
    _t0, f = base_tree(target)
    _emit(args, docs.morphism_to_doc(f))
    return EXIT_OK


def cmd_flow(args) -> int:
    target = _load_tree(args.file)
    rep = validate_point(target)
    if not rep.ok:
        sys.stderr.write(str(rep) + "\n")
        return EXIT_INVALID
    _t0, f = base_tree(target)
    t = _parse_time(args.t)
    graph, _phi, _psi = flow(f, t, event_ceiling=args.event_ceiling)
    _emit(args, docs.tree_to_doc(graph))
    return EXIT_OK


def cmd_path(args) -> int:
    target = _load_tree(args.file)
    rep = validate_point(target)
    if not rep.ok:
        sys.stderr.write(str(rep) + "\n")
        return EXIT_INVALID
    _t0, f = base_tree(target)
    path = fold_path(f, event_ceiling=args.event_ceiling)
    _emit(args, docs.fold_path_to_doc(path, witness_bound=args.witness_bound))
    if args.table:
        from .checks import length_functions
        wits = default_witnesses(target.sig, args.witness_bound)
        funcs = length_functions(path, wits)
        rows = []
        for t0, t1, vec in funcs:
            ts = [t0]
            if t1 is not None:
                ts.append((t0 + t1) / 2)
            else:
                ts.append(t0 + 1)
            for t in ts:
                for w in wits:
                    rows.append(f"{format_fraction(t)}\t{format_word(w)}\t"
                                f"{format_fraction(vec[w](t))}")
        with open(args.table, "w", encoding="utf-8") as fh:
            fh.write("\n".join(rows) + "\n")
    return EXIT_OK


def cmd_contract(args) -> int:
    target = _load_tree(args.file)
    rep = validate_point(target)
    if not rep.ok:
        sys.stderr.write(str(rep) + "\n")
        return EXIT_INVALID
    graphs, _path = contract(target, args.steps, mode=args.mode,
                             event_ceiling=args.event_ceiling)
    _emit(args, {"kind": "contraction", "steps": args.steps,
                 "trees": [docs.tree_to_doc(g) for g in graphs]})
    return EXIT_OK


def cmd_act(args) -> int:
    graph = _load_tree(args.file)
    rep = validate_point(graph)
    if not rep.ok:
        sys.stderr.write(str(rep) + "\n")
        return EXIT_INVALID
    auto_doc = docs.load_path(args.auto)
    images, inverse_images = docs.automorphism_from_doc(graph.sig, auto_doc)
    out = apply_automorphism(graph, images, inverse_images)
    rep = validate_point(out)
    if not rep.ok:
        sys.stderr.write(str(rep) + "\n")
        return EXIT_INVALID
    _emit(args, docs.tree_to_doc(out))
    return EXIT_OK


def _parse_oracle_point(tree, spec: str):
    if ":" in spec:
        eid, _, off = spec.partition(":")
        return tree.point(eid, parse_fraction(off))
    if spec not in tree.vertices:
        raise DocumentError(f"unknown vertex {spec!r}")
    return ("v", spec)


def cmd_oracle(args) -> int:
    doc = docs.load_path(args.file)
    plm = docs.pl_map_from_doc(doc)
    a = _parse_oracle_point(plm.source, args.a) if args.a else None
    b = _parse_oracle_point(plm.source, args.b) if args.b else None
    if args.op == "tau":
        val = plm.tau(a, b)
        _emit(args, {"op": "tau", "value": format_fraction(val)})
    elif args.op == "delta":
        t = parse_fraction(args.t)
        val = plm.delta_t(a, b, t)
        _emit(args, {"op": "delta", "t": format_fraction(t),
                     "value": format_fraction(val)})
    elif args.op == "monotone":
        times = [parse_fraction(x) for x in args.times.split(",")] if args.times \
            else [Fraction(j, 4) for j in range(9)]
        rep = plm.check_monotone(a, b, times)
        _emit(args, {"op": "monotone", "ok": not rep["problems"],
                     "d0": format_fraction(rep["d0"]),
                     "dinf": format_fraction(rep["dinf"]),
                     "values": [[format_fraction(t), format_fraction(v)]
                                for t, v in zip(rep["times"], rep["values"])],
                     "problems": rep["problems"]})
        return EXIT_OK if not rep["problems"] else EXIT_INVALID
    elif args.op == "quotient":
        t = parse_fraction(args.t)
        quot, _proj, _reps, _induced = quotient_finite(plm, t)
        bad = four_point_condition(quot)
        _emit(args, {"op": "quotient", "t": format_fraction(t),
                     "tree": docs.finite_tree_to_doc(quot),
                     "four_point_violations": [list(q) for q in bad]})
        return EXIT_OK if not bad else EXIT_INVALID
    else:
        raise DocumentError(f"unknown oracle op {args.op!r}")
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    golden = None
    if args.golden:
        with open(args.golden, "r", encoding="utf-8") as fh:
            golden = json.load(fh)
    report, lines = run_selfcheck(seed=args.seed, samples=args.samples,
                                  witness_bound=args.witness_bound,
                                  event_ceiling=args.event_ceiling,
                                  golden=golden)
    for line in lines:
        sys.stdout.write(line + "\n")
    sys.stdout.write(("all checks passed" if report["ok"] else "FAILURES") + "\n")
    return EXIT_OK if report["ok"] else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fpouter",
        description="Marked graphs of groups and fold paths for a free product")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, ceiling=True):
        p.add_argument("--out", help="write the result document here")
        if ceiling:
            p.add_argument("--event-ceiling", type=int, default=10000)

    p = sub.add_parser("validate", help="validate a document")
    p.add_argument("file")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("lengths", help="translation length table")
    p.add_argument("file")
    p.add_argument("--words", help="semicolon-separated words; default witnesses")
    p.add_argument("--witness-bound", type=int, default=6)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_lengths)

    p = sub.add_parser("base", help="basepoint tree and canonical morphism")
    p.add_argument("file")
    common(p, ceiling=False)
    p.set_defaults(fn=cmd_base)

    p = sub.add_parser("flow", help="deformed tree at a given time")
    p.add_argument("file")
    p.add_argument("--t", required=True, help='time "p/q" or "inf"')
    common(p)
    p.set_defaults(fn=cmd_flow)

    p = sub.add_parser("path", help="the whole fold path")
    p.add_argument("file")
    p.add_argument("--witness-bound", type=int, default=4)
    p.add_argument("--table", help="write a (t, word, length) TSV here")
    common(p)
    p.set_defaults(fn=cmd_path)

    p = sub.add_parser("contract", help="sample the deformation to the basepoint")
    p.add_argument("file")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--mode", choices=["tmax", "h"], default="tmax")
    common(p)
    p.set_defaults(fn=cmd_contract)

    p = sub.add_parser("act", help="change of marking by an automorphism")
    p.add_argument("file")
    p.add_argument("--auto", required=True, help="automorphism document")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_act)

    p = sub.add_parser("oracle", help="finite-tree brute-force reference")
    p.add_argument("file", help="pl_map document")
    p.add_argument("--op", required=True,
                   choices=["tau", "delta", "quotient", "monotone"])
    p.add_argument("--a", help='point "edge:offset" or vertex id')
    p.add_argument("--b", help='point "edge:offset" or vertex id')
    p.add_argument("--t", help="time p/q")
    p.add_argument("--times", help="comma-separated times for monotone")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("selfcheck", help="run the property suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=60)
    p.add_argument("--witness-bound", type=int, default=6)
    p.add_argument("--event-ceiling", type=int, default=10000)
    p.add_argument("--golden", help="golden sensitivity constants (JSON)")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_selfcheck)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (DocumentError, WordError, FileNotFoundError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except (FlowPrecondition, OracleError) as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INVALID
    except EngineError as exc:
        sys.stderr.write(f"engine invariant violation: {exc}\n")
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
