"""Differential testing glue between the fold engine and the finite oracle.

A pair of source points spans a segment; restricting the morphism to it
gives an explicit map of finite metric trees that the brute-force oracle
understands.  The engine's deformed distance between the tracked images
must equal the oracle's grid value exactly, for every time.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Tuple

from .flows import FoldPath, reduce_piece_path
from .folding import FlowState
from .morphisms import Morphism
from .oracle import FiniteTree, PLMap
from .words import Word, format_word, multiply


def _point_key(pt) -> str:
    if pt[0] == "v":
        return f"v:{pt[1]}:{format_word(pt[2])}"
    return f"e:{pt[1]}:{format_word(pt[2])}:{pt[3]}"


def restriction_map(f: Morphism, a, b):
    """Restrict ``f`` to the segment [a, b] of its source tree.

    Points are ``(edge id, lift word, offset)``.  Returns ``(plmap,
    first_vertex, last_vertex)``: the segment as a path-shaped finite tree,
    its image hull as a finite tree, and the induced map between them.
    """
    sig = f.source.sig
    st, tt = f.source_ts, f.target_ts
    pa = st.edge_point(a[0], a[1], a[2])
    pb = st.edge_point(b[0], b[1], b[2])
    if pa == pb:
        raise ValueError("segment endpoints coincide")
    src_pieces = st.point_geodesic(pa, pb)

    # cut each source piece at the boundaries of the image path pieces
    cuts = []  # (length, target point at start, target point at end, lift-edge)
    for eid, lift, x0, x1 in src_pieces:
        spans = []
        run = Fraction(0)
        for teid, plift, ya, yb in f.edge_paths[eid]:
            seg = abs(yb - ya)
            spans.append((run, run + seg, teid, plift, ya, yb))
            run += seg
        lo, hi = min(x0, x1), max(x0, x1)
        sel = []
        for s0, s1, teid, plift, ya, yb in spans:
            ov0, ov1 = max(lo, s0), min(hi, s1)
            if ov0 >= ov1:
                continue
            sgn = 1 if yb > ya else -1
            sel.append((ov1 - ov0, teid, multiply(sig, lift, plift),
                        ya + sgn * (ov0 - s0), ya + sgn * (ov1 - s0)))
        if x0 > x1:
            sel = [(L, t_, l_, yb_, ya_) for L, t_, l_, ya_, yb_ in reversed(sel)]
        cuts.extend(sel)

    # the segment as a path tree
    sverts = [f"p{i}" for i in range(len(cuts) + 1)]
    sedges = {f"s{i}": (sverts[i], sverts[i + 1], cuts[i][0])
              for i in range(len(cuts))}
    source_tree = FiniteTree(sverts, sedges)

    # the image hull as a finite tree
    params: Dict[tuple, set] = {}
    for _L, teid, lift, ya, yb in cuts:
        key = (teid, lift)
        params.setdefault(key, set()).update((ya, yb))
    node_of: Dict[str, str] = {}
    tverts: List[str] = []
    tedges = {}

    def node(point) -> str:
        k = _point_key(point)
        if k not in node_of:
            node_of[k] = f"n{len(node_of)}"
            tverts.append(node_of[k])
        return node_of[k]

    for (teid, lift), ys in sorted(params.items(), key=lambda kv: str(kv[0])):
        ordered = sorted(ys)
        for y0, y1 in zip(ordered, ordered[1:]):
            n0 = node(tt.edge_point(teid, lift, y0))
            n1 = node(tt.edge_point(teid, lift, y1))
            eid2 = f"h{len(tedges)}"
            tedges[eid2] = (n0, n1, y1 - y0)
    target_tree = FiniteTree(tverts, tedges)

    images = {}
    run_pt = tt.edge_point(cuts[0][1], cuts[0][2], cuts[0][3])
    images[sverts[0]] = ("v", node_of[_point_key(run_pt)])
    for i, (_L, teid, lift, ya, yb) in enumerate(cuts):
        end_pt = tt.edge_point(teid, lift, yb)
        images[sverts[i + 1]] = ("v", node_of[_point_key(end_pt)])
    plm = PLMap(source_tree, target_tree, images)
    return plm, sverts[0], sverts[-1]


def pushed_distance(state: FlowState, a, b) -> Fraction:
    """Distance between the tracked images of two source points in a frozen
    engine state: push the source segment through the map and reduce."""
    st = state.src_ts
    sig = state.sig
    pa = st.edge_point(a[0], a[1], a[2])
    pb = st.edge_point(b[0], b[1], b[2])
    if pa == pb:
        return Fraction(0)
    pieces = []
    for eid, lift, x0, x1 in st.point_geodesic(pa, pb):
        lo, hi = min(x0, x1), max(x0, x1)
        sel = []
        for pc in state.phi[eid]:
            ov0, ov1 = max(lo, pc.p0), min(hi, pc.p1)
            if ov0 >= ov1:
                continue
            sel.append([pc.cur, multiply(sig, lift, pc.lift),
                        pc.at(ov0), pc.at(ov1)])
        if x0 > x1:
            sel = [[c, l, b_, a_] for c, l, a_, b_ in reversed(sel)]
        pieces.extend(sel)
    reduced = reduce_piece_path(pieces)
    return sum((abs(b_ - a_) for _c, _l, a_, b_ in reduced), Fraction(0))


def oracle_agreement(f: Morphism, path: FoldPath, a, b, times) -> dict:
    """Compare engine distances with oracle values on a finite restriction."""
    plm, first, last = restriction_map(f, a, b)
    pa, pb = ("v", first), ("v", last)
    problems = []
    values = []
    for t in times:
        t = Fraction(t)
        d_oracle = plm.delta_t(pa, pb, t)
        frozen = path.state_at(t)
        d_engine = pushed_distance(frozen, a, b)
        values.append((t, d_oracle, d_engine))
        if d_oracle != d_engine:
            problems.append(f"t={t}: oracle {d_oracle} != engine {d_engine}")
    return {"ok": not problems, "problems": problems, "values": values,
            "plmap": plm}
