"""Structured-text documents for every object the tools exchange.

All documents are JSON with a ``kind`` field; rationals are serialized as
``"p/q"`` strings with positive denominator in lowest terms.  Group
elements use the word grammar of :mod:`fpouter.words`: syllables joined by
``*``, factor elements ``Gi.k``, free letters ``tj`` / ``tj^n``, identity
``1``.  Marking maps are keyed by generator tokens in the same grammar.

Morphism documents record edge images as alternating turn words and
oriented target edge crossings (``"A"`` forward, ``"~A"`` backward), with
optional ``start_offset`` / ``end_offset`` fields when an endpoint lies in
the interior of a target edge.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Dict, Optional

from .graphs import MarkedGraph
from .morphisms import Morphism
from .oracle import FiniteTree, PLMap
from .trees import TreeStructure
from .words import (IDENTITY, FactorGroup, Signature, Word, WordError,
                    format_fraction, format_word, inverse, multiply,
                    parse_fraction, parse_word, syllable_word)


class DocumentError(ValueError):
    """A document failed to parse or reference-check."""


def _token_text(tok) -> str:
    if tok[0] == "f":
        return f"G{tok[1] + 1}.{tok[2]}"
    return f"t{tok[1] + 1}"


def _parse_token(sig: Signature, text: str):
    w = parse_word(sig, text)
    if len(w) != 1:
        raise DocumentError(f"generator token {text!r} is not a single syllable")
    kind, idx, val = w[0]
    if kind == "f":
        return ("f", idx, val)
    if val != 1:
        raise DocumentError(f"generator token {text!r} must be a plain letter")
    return ("t", idx)


# ---------------------------------------------------------------------------
# signatures


def signature_to_doc(sig: Signature) -> dict:
    names = [f.name for f in sig.factors]
    if len(set(names)) != len(names):
        raise DocumentError("factor names must be distinct in documents")
    return {
        "factors": [{"name": f.name, "table": [list(r) for r in f.table],
                     "inverse": list(f.inverse)} for f in sig.factors],
        "free_rank": sig.free_rank,
    }


def signature_from_doc(doc: dict) -> Signature:
    factors = []
    for fd in doc.get("factors", []):
        factors.append(FactorGroup(fd.get("name", f"G{len(factors) + 1}"),
                                   fd["table"], fd.get("inverse")))
    return Signature(factors, int(doc.get("free_rank", 0)))


# ---------------------------------------------------------------------------
# marked graphs


def tree_to_doc(graph: MarkedGraph) -> dict:
    sig = graph.sig
    names = {i: f.name for i, f in enumerate(sig.factors)}
    vertices = [{"id": vid,
                 "group": None if lab is None else names[lab]}
                for vid, lab in sorted(graph.vertices.items())]
    edges = [{"id": eid, "ends": list(graph.edges[eid]),
              "length": format_fraction(graph.lengths[eid])}
             for eid in sorted(graph.edges)]
    return {
        "kind": "tree",
        "signature": signature_to_doc(sig),
        "vertices": vertices,
        "edges": edges,
        "spanning_tree": sorted(graph.tree),
        "marking": {
            "to_graph": {_token_text(tok): format_word(w)
                         for tok, w in sorted(graph.marking_to.items())},
            "from_graph": {_token_text(tok): format_word(w)
                           for tok, w in sorted(graph.marking_from.items())},
        },
    }


def tree_from_doc(doc: dict) -> MarkedGraph:
    if doc.get("kind") != "tree":
        raise DocumentError("expected a tree document")
    sig = signature_from_doc(doc["signature"])
    names = {}
    for i, f in enumerate(sig.factors):
        if f.name in names:
            raise DocumentError(f"duplicate factor name {f.name!r}")
        names[f.name] = i
    vertices: Dict[str, Optional[int]] = {}
    for vd in doc["vertices"]:
        group = vd.get("group")
        if group is None:
            vertices[vd["id"]] = None
        elif group in names:
            vertices[vd["id"]] = names[group]
        else:
            raise DocumentError(f"unknown factor name {group!r}")
    edges = {}
    lengths = {}
    for ed in doc["edges"]:
        u, v = ed["ends"]
        edges[ed["id"]] = (u, v)
        lengths[ed["id"]] = parse_fraction(ed["length"])
    pi1 = Signature(sig.factors, len(edges) - len(vertices) + 1)
    marking = doc.get("marking", {})
    to_graph = {}
    for tok_text, word_text in marking.get("to_graph", {}).items():
        to_graph[_parse_token(sig, tok_text)] = parse_word(pi1, word_text)
    from_graph = {}
    for tok_text, word_text in marking.get("from_graph", {}).items():
        from_graph[_parse_token(pi1, tok_text)] = parse_word(sig, word_text)
    return MarkedGraph(sig, vertices, edges, lengths,
                       doc.get("spanning_tree", []), to_graph, from_graph)


# ---------------------------------------------------------------------------
# morphisms


def _point_to_doc(ts: TreeStructure, point) -> dict:
    if point[0] == "v":
        return {"vertex": point[1], "coset": format_word(ts.to_pi1(point[2]))}
    return {"edge": point[1], "coset": format_word(ts.to_pi1(point[2])),
            "offset": format_fraction(point[3])}


def _point_from_doc(ts: TreeStructure, doc: dict):
    pi1 = ts.pi1
    lift = ts.from_pi1(parse_word(pi1, doc.get("coset", "1")))
    if "vertex" in doc:
        return ts.vertex_point(doc["vertex"], lift)
    return ts.edge_point(doc["edge"], lift, parse_fraction(doc["offset"]))


def morphism_to_doc(f: Morphism) -> dict:
    st, tt = f.source_ts, f.target_ts
    sig = f.source.sig
    paths = {}
    for eid in sorted(f.source.edges):
        pieces = f.edge_paths[eid]
        pos_lift = f.vertex_images[f.source.edges[eid][0]][2]
        doc_steps = []
        prev_pos = pos_lift
        for teid, lift, a, b in pieces:
            forward = b > a
            entry_pos = lift if forward else multiply(sig, lift, tt.serre[teid])
            z = multiply(sig, inverse(sig, prev_pos), entry_pos)
            doc_steps.append(format_word(tt.to_pi1(z)))
            doc_steps.append(teid if forward else f"~{teid}")
            prev_pos = multiply(sig, lift, tt.serre[teid]) if forward else lift
        # closing turn onto serre . image(terminus)
        term = f.source.edges[eid][1]
        want = tt.translate_point(st.serre[eid], f.vertex_images[term])
        want_lift = want[2]
        z = multiply(sig, inverse(sig, prev_pos), want_lift)
        doc_steps.append(format_word(tt.to_pi1(z)))
        entry = {"path": doc_steps}
        first = pieces[0]
        last = pieces[-1]
        if not (first[2] == 0 or first[2] == tt.lengths[first[0]]):
            entry["start_offset"] = format_fraction(first[2])
        if not (last[3] == 0 or last[3] == tt.lengths[last[0]]):
            entry["end_offset"] = format_fraction(last[3])
        paths[eid] = entry
    return {
        "kind": "morphism",
        "source": tree_to_doc(f.source),
        "target": tree_to_doc(f.target),
        "vertex_images": {vid: _point_to_doc(tt, pt)
                          for vid, pt in sorted(f.vertex_images.items())},
        "edge_paths": paths,
    }


def morphism_from_doc(doc: dict) -> Morphism:
    if doc.get("kind") != "morphism":
        raise DocumentError("expected a morphism document")
    source = tree_from_doc(doc["source"])
    target = tree_from_doc(doc["target"])
    st = TreeStructure(source)
    tt = TreeStructure(target)
    sig = source.sig
    images = {vid: _point_from_doc(tt, pd)
              for vid, pd in doc["vertex_images"].items()}
    paths = {}
    for eid, entry in doc["edge_paths"].items():
        seq = entry["path"]
        if len(seq) % 2 != 1:
            raise DocumentError(f"edge path of {eid} must alternate turns and edges")
        img = images[source.edges[eid][0]]
        pos = img[2]
        pieces = []
        start_offset = entry.get("start_offset")
        end_offset = entry.get("end_offset")
        ncross = len(seq) // 2
        for i in range(ncross):
            turn_text, cross = seq[2 * i], seq[2 * i + 1]
            z = tt.from_pi1(parse_word(tt.pi1, turn_text))
            pos = multiply(sig, pos, z)
            reverse = cross.startswith("~")
            teid = cross[1:] if reverse else cross
            if teid not in target.edges:
                raise DocumentError(f"unknown target edge {teid!r}")
            L = tt.lengths[teid]
            a, b = (L, Fraction(0)) if reverse else (Fraction(0), L)
            lift = multiply(sig, pos, inverse(sig, tt.serre[teid])) if reverse else pos
            if i == 0 and start_offset is not None:
                a = parse_fraction(start_offset)
            if i == ncross - 1 and end_offset is not None:
                b = parse_fraction(end_offset)
            pieces.append((teid, lift, a, b))
            pos = lift if reverse else multiply(sig, pos, tt.serre[teid])
        paths[eid] = pieces
    return Morphism(source, target, images, paths, source_ts=st, target_ts=tt)


# ---------------------------------------------------------------------------
# finite trees and PL maps


def finite_tree_to_doc(tree: FiniteTree) -> dict:
    return {
        "kind": "finite_tree",
        "vertices": list(tree.vertices),
        "edges": [{"id": eid, "ends": [u, v], "length": format_fraction(L)}
                  for eid, (u, v, L) in sorted(tree.edges.items())],
    }


def finite_tree_from_doc(doc: dict) -> FiniteTree:
    if doc.get("kind") != "finite_tree":
        raise DocumentError("expected a finite_tree document")
    edges = {ed["id"]: (ed["ends"][0], ed["ends"][1], parse_fraction(ed["length"]))
             for ed in doc["edges"]}
    return FiniteTree(doc["vertices"], edges)


def _fpoint_to_doc(p) -> dict:
    if p[0] == "v":
        return {"vertex": p[1]}
    return {"edge": p[1], "offset": format_fraction(p[2])}


def _fpoint_from_doc(tree: FiniteTree, doc: dict):
    if "vertex" in doc:
        if doc["vertex"] not in tree.vertices:
            raise DocumentError(f"unknown vertex {doc['vertex']!r}")
        return ("v", doc["vertex"])
    return tree.point(doc["edge"], parse_fraction(doc["offset"]))


def pl_map_to_doc(f: PLMap) -> dict:
    return {
        "kind": "pl_map",
        "source": finite_tree_to_doc(f.source),
        "target": finite_tree_to_doc(f.target),
        "vertex_images": {vid: _fpoint_to_doc(p)
                          for vid, p in sorted(f.vertex_images.items())},
    }


def pl_map_from_doc(doc: dict) -> PLMap:
    if doc.get("kind") != "pl_map":
        raise DocumentError("expected a pl_map document")
    source = finite_tree_from_doc(doc["source"])
    target = finite_tree_from_doc(doc["target"])
    images = {vid: _fpoint_from_doc(target, pd)
              for vid, pd in doc["vertex_images"].items()}
    return PLMap(source, target, images)


# ---------------------------------------------------------------------------
# automorphisms


def automorphism_from_doc(sig: Signature, doc: dict):
    if doc.get("kind") != "automorphism":
        raise DocumentError("expected an automorphism document")
    images = {}
    inverse_images = {}
    for tok_text, word_text in doc["images"].items():
        images[_parse_token(sig, tok_text)] = parse_word(sig, word_text)
    for tok_text, word_text in doc["inverse_images"].items():
        inverse_images[_parse_token(sig, tok_text)] = parse_word(sig, word_text)
    for tok in _all_tokens(sig):
        images.setdefault(tok, _token_word(tok))
        inverse_images.setdefault(tok, _token_word(tok))
    return images, inverse_images


def _all_tokens(sig: Signature):
    toks = []
    for i, f in enumerate(sig.factors):
        for e in range(1, f.order):
            toks.append(("f", i, e))
    for j in range(sig.free_rank):
        toks.append(("t", j))
    return toks


def _token_word(tok) -> Word:
    if tok[0] == "f":
        return (tok,)
    return (("t", tok[1], 1),)


# ---------------------------------------------------------------------------
# fold paths


def fold_path_to_doc(path, witness_bound: int = 4) -> dict:
    from .flows import FoldPath
    from .graphs import default_witnesses, length_vector
    assert isinstance(path, FoldPath)
    intervals = []
    for iv in path.intervals:
        probe = iv.probe()
        maps = iv.export_at(probe)
        aff = iv.affine_lengths()
        intervals.append({
            "t_start": format_fraction(iv.t0),
            "t_end": None if iv.t1 is None else format_fraction(iv.t1),
            "graph": tree_to_doc(maps.graph),
            "probe_time": format_fraction(probe),
            "lengths": {eid: {"alpha": format_fraction(a), "beta": format_fraction(b)}
                        for eid, (a, b) in sorted(aff.items())},
        })
    wits = default_witnesses(path.target.sig, witness_bound)
    endpoint = length_vector(path.target, wits)
    return {
        "kind": "fold_path",
        "t_max": format_fraction(path.t_max),
        "events": [{"time": format_fraction(ev.time), "kind": ev.kind,
                    "participants": list(ev.participants)} for ev in path.events],
        "intervals": intervals,
        "endpoint_lengths": {format_word(w): format_fraction(v)
                             for w, v in zip(wits, endpoint)},
    }


# ---------------------------------------------------------------------------
# I/O helpers


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_path(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: invalid JSON at line {exc.lineno} "
                            f"column {exc.colno}") from exc


def save_path(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))
