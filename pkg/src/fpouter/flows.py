"""Fold paths, flow snapshots, and the deformation onto the basepoint cone.

The engine in :mod:`fpouter.folding` evolves a tree; this module turns its
states back into marked graphs of groups.  The marking of an intermediate
tree is reconstructed by pushing loops of ambient generators through the
tracked map from the initial tree and reading the crossings off against the
exported spanning tree, so every exported point carries a full, verifiable
marking in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .folding import (EVENT_DIVERGE, EVENT_EXHAUST, EVENT_ORBIT, Aff,
                      EngineError, FlowPrecondition, FlowState, FoldEvent)
from .graphs import (MarkedGraph, cone_signature, default_witnesses,
                     length_vector, translation_length, validate_point)
from .morphisms import (Morphism, all_vertex_groups_nontrivial,
                        check_minimality_condition, validate_morphism)
from .trees import TreeStructure
from .words import IDENTITY, Word, inverse, multiply, normalize, syllable_word


# ---------------------------------------------------------------------------
# piece paths


def reduce_piece_path(pieces: List[list]) -> List[list]:
    """Cancel backtracking in a path of chart pieces ``[id, lift, a, b]``.

    Adjacent pieces on the same edge lift running in opposite senses are
    trimmed against each other; this is exact since all params are rational.
    """
    stack: List[list] = []
    for piece in pieces:
        cur = list(piece)
        while True:
            if cur[2] == cur[3]:
                break
            if not stack:
                stack.append(cur)
                break
            top = stack[-1]
            same = top[0] == cur[0] and top[1] == cur[1]
            opposite = (top[3] - top[2] > 0) != (cur[3] - cur[2] > 0)
            if same and opposite and top[3] == cur[2]:
                h = min(abs(top[3] - top[2]), abs(cur[3] - cur[2]))
                sgn_top = 1 if top[3] > top[2] else -1
                top[3] -= sgn_top * h
                cur[2] += -sgn_top * h
                if top[2] == top[3]:
                    stack.pop()
                continue
            if same and not opposite and top[3] == cur[2]:
                top[3] = cur[3]
                break
            stack.append(cur)
            break
    return stack


# ---------------------------------------------------------------------------
# exports


@dataclass
class ExportMaps:
    state: FlowState
    graph: MarkedGraph
    ts: TreeStructure
    chains: Dict[str, list]              # chain id -> [(fid, dir, align, off)]
    fine_to_chain: Dict[str, tuple]      # fid -> (chain id, index)
    psi: Morphism = None
    base_vertex: str = ""
    base_lift: Word = IDENTITY

    def to_export_point(self, fid: str, lift: Word, p: Fraction):
        cid, idx = self.fine_to_chain[fid]
        _f, d, align, off = self.chains[cid][idx]
        e = self.state.edges[fid]
        t = self.state.t
        rel = (p - e.lo(t)) if d > 0 else (e.hi(t) - p)
        chain_lift = multiply(self.state.sig, lift, inverse(self.state.sig, align))
        return self.ts.edge_point(cid, chain_lift, off + rel)

    def to_export_piece(self, fid: str, lift: Word, a: Fraction, b: Fraction):
        cid, idx = self.fine_to_chain[fid]
        _f, d, align, off = self.chains[cid][idx]
        e = self.state.edges[fid]
        t = self.state.t
        if d > 0:
            ca, cb = off + (a - e.lo(t)), off + (b - e.lo(t))
        else:
            ca, cb = off + (e.hi(t) - a), off + (e.hi(t) - b)
        chain_lift = multiply(self.state.sig, lift, inverse(self.state.sig, align))
        return (cid, chain_lift, ca, cb)


def _chain_decomposition(state: FlowState):
    """Maximal chains through trivial degree-2 vertices of a frozen state."""
    essential = set()
    for vid in state.verts:
        if state.verts[vid] is not None or len(state.incident(vid)) != 2:
            essential.add(vid)
    if not essential:
        raise EngineError("no essential vertex in exported tree")
    chains = []
    used = set()
    for vid in sorted(essential):
        for eid, end in state.incident(vid):
            if eid in used:
                continue
            walk = []
            cur_e, cur_end = eid, end
            cur_v = vid
            while True:
                used.add(cur_e)
                e = state.edges[cur_e]
                d = 1 if cur_end == 0 else -1
                walk.append((cur_e, d))
                nxt_v = e.t if cur_end == 0 else e.o
                if nxt_v in essential:
                    break
                nxts = [(e2, en2) for e2, en2 in state.incident(nxt_v)
                        if not (e2 == cur_e and en2 != cur_end)]
                if len(nxts) != 1:
                    raise EngineError("broken chain walk")
                cur_e, cur_end = nxts[0]
                cur_v = nxt_v
            chains.append(walk)
    # canonical traversal per chain
    out = []
    for walk in chains:
        rev = [(e, -d) for e, d in reversed(walk)]
        out.append(walk if walk <= rev else rev)
    return out


def export_state(state: FlowState) -> ExportMaps:
    """Build the marked graph of a frozen engine state.

    Redundant trivial vertices disappear into chains; the marking towards
    the graph is reconstructed by pushing ambient generator loops through
    the tracked map.
    """
    sig = state.sig
    t = state.t
    walks = _chain_decomposition(state)

    chains: Dict[str, list] = {}
    fine_to_chain: Dict[str, tuple] = {}
    vertices: Dict[str, Optional[int]] = {}
    edges: Dict[str, tuple] = {}
    lengths: Dict[str, Fraction] = {}
    tree: List[str] = []
    serres: Dict[str, Word] = {}

    for vid in state.verts:
        info = state.verts[vid]
        if info is not None or len(state.incident(vid)) != 2:
            vertices[vid] = None if info is None else info[0]

    for walk in walks:
        cid = walk[0][0]
        parts = []
        align = IDENTITY
        off = Fraction(0)
        total = Fraction(0)
        serre = IDENTITY
        ntree = 0
        for fid, d in walk:
            e = state.edges[fid]
            if d < 0:
                # a backward crossing starts at the serre-translated end
                align = multiply(sig, align, inverse(sig, e.serre))
            parts.append((fid, d, align, off))
            fine_to_chain[fid] = (cid, len(parts) - 1)
            seg = e.length(t)
            off += seg
            total += seg
            if d > 0:
                align = multiply(sig, align, e.serre)
                serre = multiply(sig, serre, e.serre)
            else:
                serre = multiply(sig, serre, inverse(sig, e.serre))
            if not e.tree:
                ntree += 1
        if ntree > 1:
            raise EngineError("chain with two non-tree edges")
        first = state.edges[walk[0][0]]
        last = state.edges[walk[-1][0]]
        o_vid = first.o if walk[0][1] > 0 else first.t
        t_vid = last.t if walk[-1][1] > 0 else last.o
        chains[cid] = parts
        edges[cid] = (o_vid, t_vid)
        lengths[cid] = total
        serres[cid] = serre
        if ntree == 0:
            tree.append(cid)

    marking_from = {}
    for vid, lab in vertices.items():
        if lab is None:
            continue
        info = state.verts[vid]
        slot, c = info[0], info[1]
        c_inv = inverse(sig, c)
        fac = sig.factors[slot]
        for e in range(1, fac.order):
            marking_from[("f", slot, e)] = multiply(
                sig, multiply(sig, c, syllable_word(("f", slot, e))), c_inv)
    letters = sorted(e for e in edges if e not in tree)
    for j, cid in enumerate(letters):
        marking_from[("t", j)] = serres[cid]

    graph = MarkedGraph(sig, vertices, edges, lengths, tree, {}, marking_from)
    maps = ExportMaps(state, graph, None, chains, fine_to_chain)

    marking_to = {}
    base_vid, base_lift = _phi_base(state, maps)
    maps.base_vertex, maps.base_lift = base_vid, base_lift
    for tok in _ambient_tokens(sig):
        g = syllable_word(tok if tok[0] == "f" else ("t", tok[1], 1))
        word = _loop_word(state, maps, letters, g, base_vid, base_lift)
        marking_to[tok] = word
    graph.marking_to = marking_to
    maps.ts = TreeStructure(graph)
    maps.psi = _export_psi(state, maps)
    return maps


def _ambient_tokens(sig):
    toks = []
    for i, f in enumerate(sig.factors):
        for e in range(1, f.order):
            toks.append(("f", i, e))
    for j in range(sig.free_rank):
        toks.append(("t", j))
    return toks


def _phi_base(state: FlowState, maps: ExportMaps):
    """Current position of the source basepoint lift: (vertex id, lift)."""
    base = state.src.base_vertex()
    eid, end = state.src_ts.graph.incident(base)[0]
    pieces = state.phi[eid]
    if end == 0:
        pc = pieces[0]
        p, lift = pc.at(pc.p0), pc.lift
    else:
        pc = pieces[-1]
        p = pc.at(pc.p1)
        lift = multiply(state.sig, inverse(state.sig, state.src_ts.serre[eid]), pc.lift)
    key = state.point_key(pc.cur, lift, p, state.t)
    if key[0] != "v":
        raise EngineError("source basepoint no longer sits on a vertex")
    return key[1], key[2]


def _pushed_loop(state: FlowState, g: Word):
    """The loop of an ambient element, pushed through the tracked map and
    reduced: a list of [fine edge, lift, a, b] chart pieces."""
    base = state.src.base_vertex()
    steps = state.src_ts.lift_path((base, IDENTITY), (base, g))
    pieces = []
    for seid, d, lift in steps:
        plist = state.phi[seid]
        ordered = plist if d > 0 else list(reversed(plist))
        for pc in ordered:
            a, b = pc.at(pc.p0), pc.at(pc.p1)
            if d < 0:
                a, b = b, a
            pieces.append([pc.cur, multiply(state.sig, lift, pc.lift), a, b])
    return reduce_piece_path(pieces)


def _pieces_to_steps(state: FlowState, pieces):
    """Interpret reduced pieces as whole fine-edge crossings."""
    t = state.t
    steps = []
    for cid, lift, a, b in pieces:
        e = state.edges[cid]
        lo, hi = e.lo(t), e.hi(t)
        if a == lo and b == hi:
            steps.append((cid, 1, lift))
        elif a == hi and b == lo:
            steps.append((cid, -1, lift))
        else:
            raise EngineError("reduced loop contains a partial edge crossing")
    return steps


def _loop_word(state: FlowState, maps: ExportMaps, letters, g: Word,
               base_vid: str, base_lift: Word) -> Word:
    """Read the word of ``g`` over the exported graph's fundamental group."""
    sig = state.sig
    pieces = _pushed_loop(state, g)
    fine_steps = _pieces_to_steps(state, pieces)
    # group fine steps into chain crossings
    steps = []
    i = 0
    while i < len(fine_steps):
        fid, d, lift = fine_steps[i]
        cid, idx = maps.fine_to_chain[fid]
        parts = maps.chains[cid]
        _f, pd, align, _off = parts[idx]
        direction = 1 if d == pd else -1
        count = len(parts)
        chain_lift = multiply(sig, lift, inverse(sig, align))
        expect = range(idx, count) if direction > 0 else range(idx, -1, -1)
        expect = list(expect)
        if direction > 0 and idx != 0:
            raise EngineError("chain crossing does not start at its end")
        if direction < 0 and idx != count - 1:
            raise EngineError("chain crossing does not start at its end")
        for k, j in enumerate(expect):
            fj, dj, alignj, _offj = parts[j]
            got = fine_steps[i + k]
            if got[0] != fj or got[1] != dj * direction:
                raise EngineError("inconsistent chain crossing in reduced loop")
            want_lift = multiply(sig, chain_lift, alignj)
            if got[2] != want_lift:
                raise EngineError("inconsistent lift along chain crossing")
        i += count
        steps.append((cid, direction, chain_lift))

    word = []
    pos = base_lift
    cur = base_vid
    for cid, d, lift in steps:
        o_vid, t_vid = maps.graph.edges[cid]
        serre = _chain_serre(state, maps, cid)
        if d > 0:
            start_pos = lift
            end_pos = multiply(sig, lift, serre)
            nxt = t_vid
        else:
            start_pos = multiply(sig, lift, serre)
            end_pos = lift
            nxt = o_vid
        z = multiply(sig, inverse(sig, pos), start_pos)
        zi = state.stab_decompose(cur, z)
        if zi is None:
            raise EngineError("loop turn is not a stabilizer element")
        if zi:
            word.append(("f", state.verts[cur][0], zi))
        if cid in letters:
            word.append(("t", letters.index(cid), d))
        pos = end_pos
        cur = nxt
    closing = multiply(sig, inverse(sig, pos),
                       multiply(sig, g, base_lift))
    zi = state.stab_decompose(cur, closing)
    if zi is None:
        raise EngineError("loop closure is not a stabilizer element")
    if zi:
        word.append(("f", state.verts[cur][0], zi))
    return normalize(maps.graph.pi1_signature(), word)


def _chain_serre(state: FlowState, maps: ExportMaps, cid: str) -> Word:
    sig = state.sig
    serre = IDENTITY
    for fid, d, _align, _off in maps.chains[cid]:
        e = state.edges[fid]
        serre = multiply(sig, serre, e.serre if d > 0 else inverse(sig, e.serre))
    return serre


def _export_psi(state: FlowState, maps: ExportMaps) -> Morphism:
    """The induced morphism from the exported tree onto the target."""
    sig = state.sig
    t = state.t
    paths = {}
    for cid, parts in maps.chains.items():
        pieces = []
        for fid, d, align, _off in parts:
            e = state.edges[fid]
            tlift = multiply(sig, align, e.tlift)
            ya, yb = e.y(e.lo(t)), e.y(e.hi(t))
            if d < 0:
                ya, yb = yb, ya
            pieces.append((e.teid, tlift, ya, yb))
        paths[cid] = pieces
    images = {}
    for vid in maps.graph.vertices:
        images[vid] = state.psi_vertex_point(vid, t)
    return Morphism(maps.graph, state.target, images, paths,
                    source_ts=maps.ts, target_ts=state.tt)


def export_phi(state: FlowState, maps: ExportMaps) -> Morphism:
    """The tracked map from the original source onto the exported tree."""
    sig = state.sig
    paths = {}
    for seid in sorted(state.src.edges):
        pieces = []
        for pc in state.phi[seid]:
            pieces.append(maps.to_export_piece(pc.cur, pc.lift,
                                               pc.at(pc.p0), pc.at(pc.p1)))
        paths[seid] = [p for p in pieces if p[2] != p[3]]
    images = {}
    for vid in sorted(state.src.vertices):
        eid, end = state.src_ts.graph.incident(vid)[0]
        plist = state.phi[eid]
        if end == 0:
            pc = plist[0]
            images[vid] = maps.to_export_point(pc.cur, pc.lift, pc.at(pc.p0))
        else:
            pc = plist[-1]
            lift = multiply(sig, inverse(sig, state.src_ts.serre[eid]), pc.lift)
            images[vid] = maps.to_export_point(pc.cur, lift, pc.at(pc.p1))
    return Morphism(state.src, maps.graph, images, paths,
                    source_ts=state.src_ts, target_ts=maps.ts)


# ---------------------------------------------------------------------------
# fold paths


@dataclass
class Interval:
    t0: Fraction
    t1: Optional[Fraction]
    state: FlowState
    _exports: dict = field(default_factory=dict)

    def probe(self) -> Fraction:
        if self.t1 is None:
            return self.t0 + Fraction(1, 7)
        return self.t0 + (self.t1 - self.t0) / 3

    def probe2(self) -> Fraction:
        if self.t1 is None:
            return self.t0 + Fraction(2, 7)
        return self.t0 + (self.t1 - self.t0) * 2 / 3

    def export_at(self, t: Fraction) -> ExportMaps:
        if t not in self._exports:
            self._exports[t] = export_state(self.state.frozen_at(t))
        return self._exports[t]

    def affine_lengths(self) -> Dict[str, Tuple[Fraction, Fraction]]:
        """Per exported edge: (alpha, beta) with length = alpha + beta * t."""
        p1, p2 = self.probe(), self.probe2()
        m1, m2 = self.export_at(p1), self.export_at(p2)
        out = {}
        for eid in m1.graph.edges:
            l1, l2 = m1.graph.lengths[eid], m2.graph.lengths[eid]
            beta = (l2 - l1) / (p2 - p1)
            out[eid] = (l1 - beta * p1, beta)
        if set(out) != set(m2.graph.edges):
            raise EngineError("interval exports disagree combinatorially")
        return out


@dataclass
class FoldPath:
    source: MarkedGraph
    target: MarkedGraph
    intervals: List[Interval]
    events: List[FoldEvent]
    t_max: Fraction

    def interval_at(self, t: Fraction) -> Interval:
        if t < 0:
            raise ValueError("negative time")
        for iv in self.intervals:
            if iv.t1 is None or t < iv.t1:
                if t >= iv.t0:
                    return iv
        return self.intervals[-1]

    def state_at(self, t: Fraction) -> FlowState:
        return self.interval_at(t).state.frozen_at(t)

    def export_at(self, t: Fraction) -> ExportMaps:
        return self.interval_at(t).export_at(t)


def prepare_morphism(f: Morphism, check: bool = True) -> None:
    if check:
        rep = validate_morphism(f)
        if not rep.ok:
            raise FlowPrecondition(f"morphism invalid: {rep}")
        ok, witness = check_minimality_condition(f)
        if not ok and not all_vertex_groups_nontrivial(f.source):
            raise FlowPrecondition(
                f"morphism folds every direction at vertex {witness} and the "
                "source has trivial vertex groups; the flow may lose minimality")


def fold_path(f: Morphism, event_ceiling: int = 10000, check: bool = True) -> FoldPath:
    prepare_morphism(f, check)
    st = FlowState(f, event_ceiling=event_ceiling, check=check)
    intervals = [Interval(Fraction(0), None, st.clone())]
    while True:
        if len(st.events) > event_ceiling:
            raise EngineError(f"event ceiling {event_ceiling} exceeded")
        tn = st.next_event_time()
        if tn is None:
            break
        st._process_event(tn)
        intervals[-1].t1 = tn
        intervals.append(Interval(tn, None, st.clone()))
    if st.zips:
        raise EngineError("flow stalled with active folds")
    t_max = st.t
    return FoldPath(f.source, f.target, intervals, list(st.events), t_max)


def flow(f: Morphism, t: Optional[Fraction] = None, event_ceiling: int = 10000,
         check: bool = True):
    """The deformed tree at time ``t`` (``None`` for the terminal tree),
    with the tracked map from the source and the induced map to the target.

    Returns ``(graph, phi, psi)``.
    """
    prepare_morphism(f, check)
    st = FlowState(f, event_ceiling=event_ceiling, check=check)
    reached = st.run_until(t)
    if st.zips and t is None:
        raise EngineError("flow stalled with active folds")
    frozen = st.frozen_at(reached if t is None else t)
    maps = export_state(frozen)
    phi = export_phi(frozen, maps)
    return maps.graph, phi, maps.psi


# ---------------------------------------------------------------------------
# identification times


def point_image(f: Morphism, point):
    """Image of a source point ``(eid, lift word, offset)`` in the target."""
    eid, lift, off = point
    off = Fraction(off)
    pieces = f.edge_paths[eid]
    run = Fraction(0)
    sig = f.source.sig
    for teid, plift, a, b in pieces:
        seg = abs(b - a)
        if off <= run + seg:
            rel = off - run
            y = a + (1 if b > a else -1) * rel
            return f.target_ts.edge_point(teid, multiply(sig, lift, plift), y)
        run += seg
    raise ValueError(f"offset {off} beyond edge {eid}")


def _image_path(f: Morphism, a, b):
    """The image of the source geodesic [a, b] as target pieces."""
    sig = f.source.sig
    st = f.source_ts
    pa = st.edge_point(a[0], a[1], a[2])
    pb = st.edge_point(b[0], b[1], b[2])
    out = []
    for eid, lift, x0, x1 in st.point_geodesic(pa, pb):
        out.extend(_restrict_pieces(sig, f.edge_paths[eid], lift, x0, x1))
    return pa, pb, out


def tau(f: Morphism, a, b) -> Fraction:
    """Identification time of two source points with a common image.

    Points are ``(edge id, lift word, offset)``.  The value is the farthest
    the image of the connecting segment strays from the common endpoint
    image.
    """
    fa = point_image(f, a)
    fb = point_image(f, b)
    if fa != fb:
        raise ValueError("points do not have equal images")
    _pa, _pb, pieces = _image_path(f, a, b)
    tt = f.target_ts
    best = Fraction(0)
    for teid, lift, ya, yb in pieces:
        for y in (ya, yb):
            d = tt.distance(fa, tt.edge_point(teid, lift, y))
            if d > best:
                best = d
    return best


def _restrict_pieces(sig, path_pieces, lift: Word, x0: Fraction, x1: Fraction):
    """The sub-path of an edge image between source offsets x0 and x1."""
    spans = []
    run = Fraction(0)
    for teid, plift, ya, yb in path_pieces:
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
        sel.append([teid, multiply(sig, lift, plift),
                    ya + sgn * (ov0 - s0), ya + sgn * (ov1 - s0)])
    if x0 > x1:
        sel = [[t_, l_, b_, a_] for t_, l_, a_, b_ in reversed(sel)]
    return sel


def composition_check(phi: Morphism, psi: Morphism, f: Morphism) -> dict:
    """Verify that the induced map after the tracked map equals the input
    morphism, edge by edge, up to path reduction."""
    problems = []
    sig = f.source.sig
    for eid in sorted(f.source.edges):
        composed = []
        for teid, lift, a, b in phi.edge_paths[eid]:
            composed.extend(_restrict_pieces(sig, psi.edge_paths[teid], lift, a, b))
        lhs = reduce_piece_path(composed)
        rhs = reduce_piece_path([list(p) for p in f.edge_paths[eid]])
        if lhs != rhs:
            problems.append(f"composition differs on edge {eid}")
    return {"ok": not problems, "problems": problems}


def stray_along(f: Morphism, a, b) -> Fraction:
    """max over [a, b] of the image distance from the image of ``a``."""
    fa = point_image(f, a)
    _pa, _pb, pieces = _image_path(f, a, b)
    tt = f.target_ts
    best = Fraction(0)
    for teid, lift, ya, yb in pieces:
        for y in (ya, yb):
            best = max(best, tt.distance(fa, tt.edge_point(teid, lift, y)))
    return best


# ---------------------------------------------------------------------------
# identified pairs out of a fold path


def identified_pairs(path: FoldPath, tprime: Fraction):
    """Pairs of source points whose identification time equals ``tprime``.

    ``tprime`` must lie strictly inside an interval of the path; the pairs
    are pulled back through the tracked map from the zips active there.
    """
    iv = path.interval_at(tprime)
    if tprime <= iv.t0 or (iv.t1 is not None and tprime >= iv.t1):
        raise ValueError("time must lie strictly inside an interval")
    st = iv.state
    sig = st.sig
    pairs = []
    for zp in st.zips:
        per_member = []
        for eid, end in zp.members:
            e = st.edges[eid]
            if end == 0:
                p = e.lo(tprime)
                rel = IDENTITY
            else:
                p = e.hi(tprime)
                rel = inverse(sig, e.serre)
            spots = []
            for pc_src in sorted(st.phi):
                for pc in st.phi[pc_src]:
                    if pc.cur != eid:
                        continue
                    lo, hi = pc.cur_range()
                    if lo <= p <= hi:
                        x = (p - pc.c) * pc.m
                        lift = multiply(sig, rel, inverse(sig, pc.lift))
                        spots.append((pc_src, lift, x))
            per_member.append(spots)
        # only cross-member pairs are identified at exactly this time;
        # preimages of one member were glued at some earlier event
        for i in range(len(per_member)):
            for j in range(i + 1, len(per_member)):
                for x in per_member[i]:
                    for y in per_member[j]:
                        if x != y:
                            pairs.append((x, y))
    return pairs


def phi_point_at(path: FoldPath, t: Fraction, point):
    """Image of a source point under the tracked map at time ``t``, as a
    point of the exported tree at ``t``: returns (maps, export point)."""
    maps = path.export_at(t)
    st = maps.state
    sig = st.sig
    seid, lift, x = point
    for pc in st.phi[seid]:
        if pc.p0 <= x <= pc.p1:
            cur_p = pc.at(x)
            cur_lift = multiply(sig, lift, pc.lift)
            return maps, maps.to_export_point(pc.cur, cur_lift, cur_p)
    raise ValueError(f"source param {x} not covered on edge {seid}")


# ---------------------------------------------------------------------------
# property checks used by the acceptance suite and the CLI


def semiflow_check(f: Morphism, s: Fraction, t: Fraction,
                   witness_bound: int = 4, path: Optional[FoldPath] = None) -> dict:
    """Fold the time-``t`` tree for a further time ``s`` and compare with
    the direct tree at time ``s + t``: combinatorial type, edge lengths and
    length vectors must agree exactly."""
    s, t = Fraction(s), Fraction(t)
    if path is None:
        path = fold_path(f)
    direct = path.export_at(t + s)
    mid = path.export_at(t)
    repl = fold_path(mid.psi)
    again = repl.export_at(s)
    report = {"ok": True, "problems": []}

    tok1 = cone_signature(direct.graph, include_marking=False)
    tok2 = cone_signature(again.graph, include_marking=False)
    if tok1 != tok2:
        report["problems"].append("combinatorial types differ")
    if sorted(direct.graph.lengths.values()) != sorted(again.graph.lengths.values()):
        report["problems"].append("edge length multisets differ")
    wits = default_witnesses(f.source.sig, witness_bound)
    v1 = length_vector(direct.graph, wits)
    v2 = length_vector(again.graph, wits)
    if v1 != v2:
        report["problems"].append("length vectors differ")
    expected_tmax = max(Fraction(0), path.t_max - t)
    if repl.t_max != expected_tmax:
        report["problems"].append(
            f"restarted flow ends at {repl.t_max}, expected {expected_tmax}")
    report["ok"] = not report["problems"]
    return report


def vertex_locus_check(path: FoldPath, t: Fraction) -> dict:
    """Every vertex of the deformed tree must map to a target vertex or to a
    point at distance exactly ``t`` from one."""
    maps = path.export_at(t)
    st = maps.state
    problems = []
    for vid in sorted(maps.graph.vertices):
        p = st.psi_vertex_point(vid, st.t)
        if p[0] == "v":
            continue
        if not st.tt.exists_vertex_at_distance(p, t):
            problems.append(f"vertex {vid} maps to {p}, not at distance {t} "
                            "from any target vertex")
    return {"ok": not problems, "problems": problems}


def eq2_check(path: FoldPath, f: Morphism, tprime: Fraction, t: Fraction) -> dict:
    """Identification times drop linearly along the flow: pairs identified
    at ``tprime`` have identification time ``tprime - t`` in the time-``t``
    tree (and 0 when ``t >= tprime``)."""
    problems = []
    pairs = identified_pairs(path, tprime)
    for x, y in pairs:
        t_direct = tau(f, x, y)
        if t_direct != tprime:
            problems.append(f"pair has identification time {t_direct}, "
                            f"expected {tprime}")
            continue
        maps, xt = phi_point_at(path, t, x)
        _maps, yt = phi_point_at(path, t, y)
        if t >= tprime:
            if xt != yt:
                problems.append("pair not yet identified past its time")
            continue
        if xt == yt:
            problems.append("pair identified too early")
            continue

        def to_triple(pt):
            if pt[0] == "e":
                return (pt[1], pt[2], pt[3])
            # a vertex point: express it on an incident edge chart
            vid, rep = pt[1], pt[2]
            g = maps.graph
            eid, end = g.incident(vid)[0]
            if end == 0:
                return (eid, rep, Fraction(0))
            serre_inv = inverse(maps.state.sig, maps.ts.serre[eid])
            return (eid, multiply(maps.state.sig, rep, serre_inv), g.lengths[eid])
        t_later = tau(maps.psi, to_triple(xt), to_triple(yt))
        if t_later != tprime - t:
            problems.append(f"deformed identification time {t_later} != "
                            f"{tprime - t}")
    return {"ok": not problems, "problems": problems, "pairs": len(pairs)}


def contract(target: MarkedGraph, steps: int, mode: str = "tmax",
             event_ceiling: int = 10000):
    """Sample the deformation from the basepoint tree to ``target``.

    Returns a list of ``steps + 1`` normalized marked graphs running from
    the basepoint tree (time 0) to the target (time t_max).  With
    ``mode="h"`` the time scale is the translation length of the canonical
    hyperbolic element instead of t_max.
    """
    from .morphisms import base_tree
    if steps < 1:
        raise ValueError("steps must be positive")
    t0, f = base_tree(target)
    path = fold_path(f, event_ceiling=event_ceiling)
    sig = target.sig
    if mode == "h":
        if sig.num_factors >= 2:
            h = multiply(sig, syllable_word(("f", 0, 1)), syllable_word(("f", 1, 1)))
        else:
            tj = syllable_word(("t", 0, 1))
            h = multiply(sig, multiply(sig, syllable_word(("f", 0, 1)), tj),
                         multiply(sig, syllable_word(("f", 0, 1)), inverse(sig, tj)))
        scale = translation_length(target, h)
    elif mode == "tmax":
        scale = path.t_max
    else:
        raise ValueError(f"unknown contraction mode {mode!r}")
    out = []
    for j in range(steps + 1):
        t = scale * Fraction(j, steps)
        maps = path.export_at(t)
        out.append(maps.graph.normalize())
    return out, path
