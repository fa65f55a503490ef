"""Event-driven equivariant folding between points of the space.

Given an edge-isometric equivariant morphism ``f`` from a source point onto
a target point, the deformed tree at time ``t`` identifies source points
with equal image whose identification time is at most ``t``.  This module
realizes the whole family at once: between events every maximal family of
directions with a common image germ zips together at unit speed, and an
event happens exactly when some actively-consumed edge reaches length zero.

State conventions (all group data in ambient coordinates):

* every edge has a chart, a rational interval ``[lo(t), hi(t)]`` whose ends
  move affinely in ``t``; points keep fixed chart coordinates while folds
  consume the edge, so the tracked map from the initial tree stays static;
* the chart-lo point of an edge is ``1 . (lift of its o vertex)`` and the
  chart-hi point is ``serre . (lift of its t vertex)``;
* each edge maps isometrically onto a segment of a single target edge lift:
  chart parameter ``p`` lands at ``y0 + c1 * p`` on ``tlift . teid``;
* spanning-tree edges always carry the identity serre word, so exported
  fundamental-group letters are just the serre words of the other edges.
"""

from __future__ import annotations

import copy as _copy
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .graphs import MarkedGraph
from .morphisms import Morphism
from .trees import TreeStructure
from .words import IDENTITY, Word, inverse, multiply, syllable_word


class EngineError(RuntimeError):
    """An internal invariant of the fold engine failed."""


class FlowPrecondition(ValueError):
    """The supplied morphism is not eligible for the semi-flow."""


@dataclass(frozen=True)
class Aff:
    """An affine function a + b*t of the global time."""
    a: Fraction
    b: Fraction = Fraction(0)

    def __call__(self, t: Fraction) -> Fraction:
        return self.a + self.b * t

    def __add__(self, other):
        if isinstance(other, Aff):
            return Aff(self.a + other.a, self.b + other.b)
        return Aff(self.a + Fraction(other), self.b)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Aff):
            return Aff(self.a - other.a, self.b - other.b)
        return Aff(self.a - Fraction(other), self.b)

    @staticmethod
    def const(x) -> "Aff":
        return Aff(Fraction(x), Fraction(0))


@dataclass
class EEdge:
    o: str
    t: str
    serre: Word
    tree: bool
    lo: Aff
    hi: Aff
    teid: str
    tlift: Word
    y0: Fraction
    c1: int  # +1 or -1

    def length(self, t: Fraction) -> Fraction:
        return self.hi(t) - self.lo(t)

    def y(self, p: Fraction) -> Fraction:
        return self.y0 + self.c1 * p


@dataclass
class Piece:
    """A chunk of the tracked map from the initial tree.

    Source chart params ``[p0, p1]`` of source edge land on the current
    edge ``cur`` at chart params ``m * x + c``, as ``lift`` times the
    canonical lift.
    """
    p0: Fraction
    p1: Fraction
    cur: str
    lift: Word
    m: int
    c: Fraction

    def at(self, x: Fraction) -> Fraction:
        return self.m * x + self.c

    def cur_range(self) -> Tuple[Fraction, Fraction]:
        a, b = self.at(self.p0), self.at(self.p1)
        return (a, b) if a <= b else (b, a)


@dataclass
class Rec:
    """Absorption rule: consumed chart params of an edge live on a stem."""
    side: str          # "o" (params below lo) or "t" (params above hi)
    start: Fraction    # chart value where this consumption began
    stem: str
    m: int
    c: Fraction
    transfer: Word     # output lift = input lift * transfer


@dataclass
class Zip:
    base: str
    tip: str
    stem: str
    members: List[Tuple[str, int]]   # (eid, end) with end 0 = o, 1 = t


@dataclass
class FoldEvent:
    time: Fraction
    kind: str
    participants: List[str]


EVENT_EXHAUST = "edge-exhausted"
EVENT_DIVERGE = "images-diverge-at-target-vertex"
EVENT_ORBIT = "orbit-fold-completes"


class FlowState:
    """Mutable engine state; deterministic given the input morphism."""

    def __init__(self, f: Morphism, event_ceiling: int = 10000, check: bool = True):
        self.sig = f.source.sig
        self.target = f.target
        self.tt = f.target_ts
        self.src = f.source
        self.src_ts = f.source_ts
        self.event_ceiling = event_ceiling
        self.check = check
        self.t = Fraction(0)
        self.events: List[FoldEvent] = []
        self.verts: Dict[str, Optional[tuple]] = {}
        self.edges: Dict[str, EEdge] = {}
        self.phi: Dict[str, List[Piece]] = {}
        self.records: Dict[str, List[Rec]] = {}
        self.zips: List[Zip] = []
        self._counter = 0
        self._build_initial(f)

    # ------------------------------------------------------------------
    # construction

    def _fresh(self, prefix: str) -> str:
        while True:
            self._counter += 1
            name = f"{prefix}{self._counter}"
            if name not in self.verts and name not in self.edges:
                return name

    def _build_initial(self, f: Morphism):
        st = self.src_ts
        for vid in self.src.vertices:
            self.verts[vid] = st.stab[vid]
        for eid in sorted(self.src.edges):
            pieces = f.edge_paths[eid]
            mine = []
            run = Fraction(0)
            u, v = self.src.edges[eid]
            n = len(pieces)
            prev_vid = u
            for i, (teid, tlift, a, b) in enumerate(pieces):
                seg = abs(b - a)
                lo, hi = run, run + seg
                run = hi
                fid = eid if n == 1 else f"{eid}.{i}"
                if i == n - 1:
                    far = v
                    serre = st.serre[eid]
                    tree = eid in self.src.tree
                else:
                    far = self._fresh(f"{eid}.m")
                    self.verts[far] = None
                    serre = IDENTITY
                    tree = True
                c1 = 1 if b > a else -1
                y0 = a - c1 * lo
                self.edges[fid] = EEdge(prev_vid, far, serre, tree,
                                        Aff.const(lo), Aff.const(hi),
                                        teid, tlift, y0, c1)
                mine.append(Piece(lo, hi, fid, IDENTITY, 1, Fraction(0)))
                prev_vid = far
            self.phi[eid] = mine
            if run != self.src.lengths[eid]:
                raise EngineError("edge path length mismatch during setup")
        self._recompute_tree()
        self._reanchor()
        self._detect_zips()
        if self.check:
            self.check_invariants()

    # ------------------------------------------------------------------
    # generic helpers

    def stab_order(self, vid: str) -> int:
        info = self.verts[vid]
        return 1 if info is None else self.sig.factors[info[0]].order

    def stab_element(self, vid: str, z: int) -> Word:
        if z == 0:
            return IDENTITY
        info = self.verts[vid]
        if info is None:
            raise EngineError(f"vertex {vid} has trivial stabilizer")
        slot, c = info[0], info[1]
        return multiply(self.sig, multiply(self.sig, c, syllable_word(("f", slot, z))),
                        inverse(self.sig, c))

    def stab_decompose(self, vid: str, g: Word) -> Optional[int]:
        if not g:
            return 0
        info = self.verts[vid]
        if info is None:
            return None
        slot, c = info[0], info[1]
        w = multiply(self.sig, multiply(self.sig, inverse(self.sig, c), g), c)
        if len(w) == 1 and w[0][0] == "f" and w[0][1] == slot:
            return w[0][2]
        return None

    def canonical_vertex(self, vid: str, g: Word) -> tuple:
        info = self.verts[vid]
        if info is None:
            return (vid, g)
        slot, c = info[0], info[1]
        w = multiply(self.sig, g, c)
        if w and w[-1][0] == "f" and w[-1][1] == slot:
            w = w[:-1]
        return (vid, multiply(self.sig, w, inverse(self.sig, c)))

    def incident(self, vid: str) -> List[Tuple[str, int]]:
        out = []
        for eid in sorted(self.edges):
            e = self.edges[eid]
            if e.o == vid:
                out.append((eid, 0))
            if e.t == vid:
                out.append((eid, 1))
        return out

    def point_key(self, eid: str, lift: Word, p: Fraction, t: Fraction) -> tuple:
        e = self.edges[eid]
        if p == e.lo(t):
            return ("v",) + self.canonical_vertex(e.o, lift)
        if p == e.hi(t):
            return ("v",) + self.canonical_vertex(e.t, multiply(self.sig, lift, e.serre))
        return ("e", eid, lift, p)

    def psi_point(self, eid: str, lift: Word, p: Fraction) -> tuple:
        e = self.edges[eid]
        return self.tt.edge_point(e.teid, multiply(self.sig, lift, e.tlift), e.y(p))

    def psi_vertex_point(self, vid: str, t: Fraction) -> tuple:
        for eid, end in self.incident(vid):
            e = self.edges[eid]
            if end == 0:
                return self.psi_point(eid, IDENTITY, e.lo(t))
            return self.psi_point(eid, inverse(self.sig, e.serre), e.hi(t))
        raise EngineError(f"vertex {vid} has no incident edges")

    # ------------------------------------------------------------------
    # germ bookkeeping

    def germ_of(self, eid: str, end: int, z: int, t: Fraction) -> tuple:
        """Image germ of direction (eid, end, z) at the canonical vertex
        lift: (teid, lift word, y value, direction along the target)."""
        e = self.edges[eid]
        if end == 0:
            zw = self.stab_element(e.o, z)
            return (e.teid, multiply(self.sig, zw, e.tlift), e.y(e.lo(t)), e.c1)
        zw = self.stab_element(e.t, z)
        base = multiply(self.sig, zw, inverse(self.sig, e.serre))
        return (e.teid, multiply(self.sig, base, e.tlift), e.y(e.hi(t)), -e.c1)

    def _germ_classes_at(self, vid: str, t: Fraction):
        """Fold classes at the canonical lift of ``vid``: lists of
        (eid, end, z), one representative per stabilizer-translation orbit,
        normalized so the first member has z = 0."""
        groups: Dict[tuple, list] = {}
        for eid, end in self.incident(vid):
            for z in range(self.stab_order(vid)):
                groups.setdefault(self.germ_of(eid, end, z, t), []).append((eid, end, z))
        fac = None
        info = self.verts[vid]
        if info is not None:
            fac = self.sig.factors[info[0]]
        classes = []
        seen = set()
        for germ in sorted(groups):
            members = sorted(groups[germ])
            if len(members) < 2:
                continue
            z0 = members[0][2]
            if fac is None:
                key = tuple(members)
            else:
                zinv = fac.inv(z0)
                key = tuple(sorted((e, en, fac.mul(zinv, z)) for e, en, z in members))
            if key in seen:
                continue
            seen.add(key)
            classes.append(list(key))
        return classes

    # ------------------------------------------------------------------
    # lift translations

    def translate_edge_lift(self, eid: str, h: Word):
        """Replace the canonical lift of ``eid`` by ``h`` times itself."""
        if not h:
            return
        e = self.edges[eid]
        h_inv = inverse(self.sig, h)
        e.serre = multiply(self.sig, h, e.serre)
        e.tlift = multiply(self.sig, h, e.tlift)
        for pieces in self.phi.values():
            for pc in pieces:
                if pc.cur == eid:
                    pc.lift = multiply(self.sig, pc.lift, h_inv)
        for recs in self.records.values():
            for rec in recs:
                if rec.stem == eid:
                    rec.transfer = multiply(self.sig, rec.transfer, h_inv)
        for rec in self.records.get(eid, ()):
            rec.transfer = multiply(self.sig, h, rec.transfer)

    def _reanchor_vertex(self, vid: str, h: Word):
        """Replace the canonical lift of ``vid`` by ``h`` times itself."""
        if not h:
            return
        info = self.verts[vid]
        if info is not None:
            self.verts[vid] = (info[0], multiply(self.sig, h, info[1]))
        h_inv = inverse(self.sig, h)
        for eid, end in self.incident(vid):
            e = self.edges[eid]
            if e.o == vid and e.t == vid:
                self.translate_edge_lift(eid, h)
                e.serre = multiply(self.sig, e.serre, h_inv)
            elif e.o == vid:
                self.translate_edge_lift(eid, h)
            else:
                e.serre = multiply(self.sig, e.serre, h_inv)

    def _root(self) -> str:
        for vid in sorted(self.verts):
            info = self.verts[vid]
            if info is not None and info[0] == 0:
                return vid
        return min(self.verts)

    def _reanchor(self):
        """Restore the invariant that spanning-tree serre words are trivial."""
        root = self._root()
        seen = {root}
        queue = [root]
        while queue:
            x = queue.pop(0)
            for eid, end in self.incident(x):
                e = self.edges[eid]
                if not e.tree:
                    continue
                child = e.t if end == 0 else e.o
                if child in seen:
                    continue
                seen.add(child)
                queue.append(child)
                s = e.serre if end == 0 else inverse(self.sig, e.serre)
                if s:
                    self._reanchor_vertex(child, s)
        if len(seen) != len(self.verts):
            raise EngineError("spanning tree does not reach every vertex")

    def _recompute_tree(self):
        """Choose a spanning tree, preferring current tree edges."""
        parent = {v: v for v in self.verts}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        chosen = set()
        old = [e for e in sorted(self.edges) if self.edges[e].tree]
        rest = [e for e in sorted(self.edges) if not self.edges[e].tree]
        for eid in old + rest:
            e = self.edges[eid]
            ru, rv = find(e.o), find(e.t)
            if ru != rv:
                parent[ru] = rv
                chosen.add(eid)
        for eid, e in self.edges.items():
            e.tree = eid in chosen
        if len(chosen) != len(self.verts) - 1:
            raise EngineError("graph became disconnected")

    # ------------------------------------------------------------------
    # absorption bookkeeping

    def _find_record(self, eid: str, p: Fraction, t: Fraction) -> Rec:
        recs = self.records.get(eid, ())
        e = self.edges.get(eid)
        best = None
        for r in recs:
            if e is not None and r.side == "o" and not p < e.lo(t):
                continue
            if e is not None and r.side == "t" and not p > e.hi(t):
                continue
            if r.side == "o":
                if r.start <= p and (best is None or r.start > best.start):
                    best = r
            else:
                if r.start >= p and (best is None or r.start < best.start):
                    best = r
        if best is None:
            raise EngineError(f"no absorption record for param {p} on edge {eid}")
        return best

    def resolve_chart_point(self, eid: str, p: Fraction, lift: Word, t: Fraction):
        """Follow absorption rules until the point lies on a live chart."""
        for _ in range(10000):
            e = self.edges.get(eid)
            if e is not None and e.lo(t) <= p <= e.hi(t):
                return eid, p, lift
            rec = self._find_record(eid, p, t)
            eid, p, lift = rec.stem, rec.m * p + rec.c, multiply(self.sig, lift, rec.transfer)
        raise EngineError("absorption resolution did not terminate")

    def resolve_all_pieces(self, t: Fraction):
        """Split and redirect map pieces so every piece lies on a live chart."""
        for src in sorted(self.phi):
            out: List[Piece] = []
            stack = list(reversed(self.phi[src]))
            guard = 0
            while stack:
                guard += 1
                if guard > 100000:
                    raise EngineError("piece resolution did not terminate")
                pc = stack.pop()
                e = self.edges.get(pc.cur)
                a, b = pc.cur_range()
                if e is not None:
                    lo, hi = e.lo(t), e.hi(t)
                    if lo <= a and b <= hi:
                        out.append(pc)
                        continue
                    cuts = [x for x in (lo, hi) if a < x < b]
                    if cuts:
                        cut = min(cuts) if pc.m > 0 else max(cuts)
                        xsplit = (cut - pc.c) * pc.m
                        stack.append(Piece(xsplit, pc.p1, pc.cur, pc.lift, pc.m, pc.c))
                        stack.append(Piece(pc.p0, xsplit, pc.cur, pc.lift, pc.m, pc.c))
                        continue
                mid = (pc.at(pc.p0) + pc.at(pc.p1)) / 2
                rec = self._find_record(pc.cur, mid, t)
                stack.append(Piece(pc.p0, pc.p1, rec.stem,
                                   multiply(self.sig, pc.lift, rec.transfer),
                                   pc.m * rec.m, rec.m * pc.c + rec.c))
            self.phi[src] = out

    # ------------------------------------------------------------------
    # zips

    def _detect_zips(self):
        t = self.t
        live_tips = {zp.tip: set(zp.members) for zp in self.zips}
        for vid in sorted(self.verts):
            for members in self._germ_classes_at(vid, t):
                pair_set = {(e, en) for e, en, _z in members}
                if vid in live_tips and live_tips[vid] == pair_set:
                    continue  # an ongoing zip, reformed at its own tip
                self._start_zip(vid, members, t)
        self._reanchor()

    def _start_zip(self, vid: str, members, t: Fraction):
        germ = self.germ_of(*members[0], t)
        tip = self._fresh("w")
        stem = self._fresh("q")
        self.verts[tip] = None
        teid, tlift, ystart, s = germ
        self.edges[stem] = EEdge(vid, tip, IDENTITY, True,
                                 Aff.const(0), Aff(-t, Fraction(1)),
                                 teid, tlift, ystart, s)
        mems = []
        for eid, end, z in members:
            if self.check and self.germ_of(eid, end, z, t) != germ:
                raise EngineError("fold class member has a different germ")
            zw = self.stab_element(vid, z)
            e = self.edges[eid]
            if end == 0:
                self.translate_edge_lift(eid, zw)
                e.o = tip
                lo0 = e.lo(t)
                e.lo = Aff(lo0 - t, Fraction(1))
                self.records.setdefault(eid, []).append(
                    Rec("o", lo0, stem, 1, -lo0, IDENTITY))
            else:
                e.serre = multiply(self.sig, e.serre, inverse(self.sig, zw))
                e.t = tip
                hi0 = e.hi(t)
                e.hi = Aff(hi0 + t, Fraction(-1))
                self.records.setdefault(eid, []).append(
                    Rec("t", hi0, stem, -1, hi0, e.serre))
            mems.append((eid, end))
        self.zips.append(Zip(vid, tip, stem, mems))

    def _dissolve_zip(self, zp: Zip, t: Fraction):
        stem = self.edges[zp.stem]
        stem.hi = Aff.const(stem.hi(t))
        for eid, end in zp.members:
            e = self.edges.get(eid)
            if e is not None:
                if end == 0:
                    e.lo = Aff.const(e.lo(t))
                else:
                    e.hi = Aff.const(e.hi(t))
            recs = self.records.get(eid)
            if recs is not None:
                keep = [r for r in recs if r.stem != zp.stem]
                if keep:
                    self.records[eid] = keep
                else:
                    self.records.pop(eid, None)
        self.zips.remove(zp)

    # ------------------------------------------------------------------
    # the event loop

    def next_event_time(self) -> Optional[Fraction]:
        best = None
        for eid in sorted(self.edges):
            e = self.edges[eid]
            slope = e.hi.b - e.lo.b
            if slope < 0:
                t0 = -(e.hi.a - e.lo.a) / slope
                if t0 > self.t and (best is None or t0 < best):
                    best = t0
        return best

    def is_complete(self) -> bool:
        return not self.zips and self.next_event_time() is None

    def run_until(self, t_stop: Optional[Fraction]) -> Fraction:
        """Process events up to and including ``t_stop`` (None: run to the
        end of the fold path).  Returns the time of the last processed
        event, or ``t_stop``."""
        while True:
            if len(self.events) > self.event_ceiling:
                raise EngineError(f"event ceiling {self.event_ceiling} exceeded")
            tn = self.next_event_time()
            if tn is None:
                return self.t if t_stop is None else max(self.t, t_stop)
            if t_stop is not None and tn > t_stop:
                return t_stop
            self._process_event(tn)

    def _process_event(self, tstar: Fraction):
        exhausted = sorted(eid for eid, e in self.edges.items()
                           if e.length(tstar) == 0)
        if not exhausted:
            raise EngineError("event fired with no exhausted edge")
        self.t = tstar
        exhausted_set = set(exhausted)
        merge_vertices = set()
        for eid in exhausted:
            e = self.edges[eid]
            merge_vertices.update((e.o, e.t))

        kinds = set()
        for eid in exhausted:
            e = self.edges[eid]
            yv = e.y(e.lo(tstar))
            if yv == 0 or yv == self.tt.lengths[e.teid]:
                kinds.add(EVENT_DIVERGE)

        self.resolve_all_pieces(tstar)
        for zp in list(self.zips):
            touched = any(m[0] in exhausted_set for m in zp.members)
            touched = touched or zp.tip in merge_vertices or zp.base in merge_vertices
            if touched:
                self._dissolve_zip(zp, tstar)

        classes = self._merge_classes(exhausted, kinds)
        for eid in exhausted:
            del self.edges[eid]
        for rep, members in sorted(classes.items()):
            for vid, r in members:
                if vid != rep:
                    self._absorb_vertex(vid, rep, r)
        if self.check:
            for eid in exhausted:
                self._assert_unreferenced(eid)
        self._recompute_tree()
        self._reanchor()
        self._erase_redundant(tstar)
        kind = (EVENT_ORBIT if EVENT_ORBIT in kinds
                else EVENT_DIVERGE if EVENT_DIVERGE in kinds
                else EVENT_EXHAUST)
        self.events.append(FoldEvent(tstar, kind, exhausted))
        self._detect_zips()
        if self.check:
            self.check_invariants()

    def _assert_unreferenced(self, eid: str):
        for pieces in self.phi.values():
            for pc in pieces:
                if pc.cur == eid:
                    raise EngineError(f"piece still references deleted edge {eid}")

    def _merge_classes(self, exhausted, kinds):
        """Vertex classes joined by vanished edges, with each member lift
        written relative to the class representative.

        A vanished edge identifies ``1 . o-lift`` with ``serre . t-lift``.
        Cycle discrepancies must stabilize the merged point; the class
        representative is its factor vertex when present.
        """
        adj: Dict[str, list] = {}
        for eid in exhausted:
            e = self.edges[eid]
            adj.setdefault(e.o, []).append((e.t, inverse(self.sig, e.serre)))
            adj.setdefault(e.t, []).append((e.o, e.serre))
        classes = {}
        seen = set()
        for start in sorted(adj):
            if start in seen:
                continue
            comp = {start: IDENTITY}
            holonomies = []
            queue = [start]
            seen.add(start)
            while queue:
                x = queue.pop(0)
                for y, w in adj[x]:
                    cand = multiply(self.sig, w, comp[x])
                    if y in comp:
                        diff = multiply(self.sig, inverse(self.sig, comp[y]), cand)
                        if diff:
                            holonomies.append(diff)
                            kinds.add(EVENT_ORBIT)
                        continue
                    comp[y] = cand
                    seen.add(y)
                    queue.append(y)
            factor_members = [v for v in sorted(comp) if self.verts[v] is not None]
            if len(factor_members) > 1:
                raise EngineError("merge would join two factor vertices")
            rep = factor_members[0] if factor_members else min(comp)
            base_inv = inverse(self.sig, comp[rep])
            for g in holonomies:
                # g fixes the start-vertex lift; transport to the rep lift
                g_rep = multiply(self.sig, multiply(self.sig, comp[rep], g), base_inv)
                if self.stab_decompose(rep, g_rep) is None:
                    raise EngineError(
                        f"merge at {rep} would create an illegal stabilizer")
            classes[rep] = [(v, multiply(self.sig, w, base_inv))
                            for v, w in sorted(comp.items())]
        return classes

    def _absorb_vertex(self, vid: str, rep: str, r: Word):
        """Vertex ``vid`` (canonical lift == r . rep-lift) merges into rep."""
        if self.verts[vid] is not None and r:
            raise EngineError("factor vertex absorbed with non-trivial relation")
        for eid, end in self.incident(vid):
            e = self.edges[eid]
            if e.o == vid and e.t == vid:
                self.translate_edge_lift(eid, inverse(self.sig, r))
                e.serre = multiply(self.sig, e.serre, r)
                e.o = e.t = rep
            elif e.o == vid:
                self.translate_edge_lift(eid, inverse(self.sig, r))
                e.o = rep
            else:
                e.serre = multiply(self.sig, e.serre, r)
                e.t = rep
        del self.verts[vid]

    # ------------------------------------------------------------------
    # redundant vertex erasure

    def _erase_redundant(self, t: Fraction):
        """Erase trivial degree-2 vertices whose two germs continue along
        the same target edge lift, merging the incident edge pair."""
        changed = True
        while changed:
            changed = False
            busy = set()
            for zp in self.zips:
                busy.add(zp.stem)
                busy.update(eid for eid, _end in zp.members)
            for vid in sorted(self.verts):
                if self.verts[vid] is not None:
                    continue
                inc = self.incident(vid)
                if len(inc) != 2:
                    continue
                (e1, end1), (e2, end2) = inc
                if e1 in busy or e2 in busy or e1 == e2:
                    continue
                g1 = self.germ_of(e1, end1, 0, t)
                g2 = self.germ_of(e2, end2, 0, t)
                if g1[0] != g2[0] or g1[1] != g2[1] or g1[3] != -g2[3]:
                    continue
                self._extend_edge(e1, end1, e2, end2, vid, t)
                changed = True
                break

    def _extend_edge(self, e1id: str, end1: int, e2id: str, end2: int,
                     vid: str, t: Fraction):
        """Merge e2 into e1 across the shared degree-2 trivial vertex."""
        sig = self.sig
        e1, e2 = self.edges[e1id], self.edges[e2id]
        if not (e1.tree or e2.tree):
            raise EngineError("degree-2 vertex with two non-tree edges")
        a1 = e1.serre if end1 == 1 else IDENTITY
        a2 = e2.serre if end2 == 1 else IDENTITY
        j1 = e1.hi(t) if end1 == 1 else e1.lo(t)
        j2 = e2.hi(t) if end2 == 1 else e2.lo(t)
        grow = 1 if end1 == 1 else -1           # which way e1's chart extends
        m = grow * (1 if end2 == 0 else -1)     # e2 params -> e1 params
        c = j1 - m * j2
        trans = multiply(sig, a2, inverse(sig, a1))   # new piece lift = old * trans

        far_end = 1 - end2
        far_vid = e2.t if far_end == 1 else e2.o
        far_attach = e2.serre if far_end == 1 else IDENTITY
        ext = multiply(sig, a1, inverse(sig, a2))
        new_attach = multiply(sig, ext, far_attach)
        far_chart = e2.hi if far_end == 1 else e2.lo
        new_bound = Aff(c + m * far_chart.a, m * far_chart.b)

        if self.check:
            if e2.c1 * m != e1.c1:
                raise EngineError("cannot extend: image directions disagree")
            if e2.y(far_chart(t)) != e1.y0 + e1.c1 * new_bound(t):
                raise EngineError("cannot extend: image params disagree")
            if multiply(sig, ext, e2.tlift) != e1.tlift:
                raise EngineError("cannot extend: target lifts disagree")

        if end1 == 1:
            e1.hi = new_bound
            e1.t = far_vid
            e1.serre = new_attach
            renorm = IDENTITY
        else:
            e1.lo = new_bound
            e1.o = far_vid
            renorm = inverse(sig, new_attach)

        for pieces in self.phi.values():
            for pc in pieces:
                if pc.cur == e2id:
                    pc.cur = e1id
                    pc.lift = multiply(sig, pc.lift, trans)
                    pc.m, pc.c = pc.m * m, m * pc.c + c
        trans_inv = inverse(sig, trans)
        for recs in self.records.values():
            for rec in recs:
                if rec.stem == e2id:
                    rec.stem = e1id
                    rec.m, rec.c = rec.m * m, m * rec.c + c
                    rec.transfer = multiply(sig, rec.transfer, trans)
        if e2id in self.records:
            for rec in self.records.pop(e2id):
                rec.side = rec.side if m > 0 else ("t" if rec.side == "o" else "o")
                rec.start = m * rec.start + c
                new_m = rec.m * m
                rec.c = rec.c - new_m * c
                rec.m = new_m
                rec.transfer = multiply(sig, trans_inv, rec.transfer)
                self.records.setdefault(e1id, []).append(rec)

        e1.tree = e1.tree and e2.tree
        del self.edges[e2id]
        del self.verts[vid]
        if renorm:
            self.translate_edge_lift(e1id, renorm)
        self._recompute_tree()
        self._reanchor()

    # ------------------------------------------------------------------
    # invariants

    def probe_time(self) -> Fraction:
        nxt = self.next_event_time()
        if nxt is None:
            return self.t + Fraction(1, 97)
        return (self.t + nxt) / 2

    def check_invariants(self):
        probe = self.probe_time()
        slots = {}
        for vid, info in self.verts.items():
            if info is not None:
                if info[0] in slots:
                    raise EngineError("two vertices carry the same factor")
                slots[info[0]] = vid
        if len(slots) != self.sig.num_factors:
            raise EngineError("missing factor vertex")
        tree_count = 0
        for eid, e in self.edges.items():
            if e.tree:
                tree_count += 1
                if e.serre:
                    raise EngineError(f"tree edge {eid} has non-trivial serre word")
            if e.length(probe) <= 0:
                raise EngineError(f"edge {eid} has non-positive length")
            L = self.tt.lengths[e.teid]
            for p in (e.lo(probe), e.hi(probe)):
                if not 0 <= e.y(p) <= L:
                    raise EngineError(f"edge {eid} maps outside its target edge")
        if tree_count != len(self.verts) - 1:
            raise EngineError("spanning tree has wrong size")
        betti = len(self.edges) - len(self.verts) + 1
        if betti != self.sig.free_rank:
            raise EngineError(f"Betti number drifted to {betti}")
        for vid in self.verts:
            pts = set()
            for eid, end in self.incident(vid):
                e = self.edges[eid]
                if end == 0:
                    pts.add(self.psi_point(eid, IDENTITY, e.lo(probe)))
                else:
                    pts.add(self.psi_point(eid, inverse(self.sig, e.serre), e.hi(probe)))
            if len(pts) > 1:
                raise EngineError(f"incoherent image point at vertex {vid}")
        for src, pieces in self.phi.items():
            run = Fraction(0)
            for pc in pieces:
                if pc.p0 != run:
                    raise EngineError(f"gap in map pieces over source edge {src}")
                run = pc.p1
            if run != self.src.lengths[src]:
                raise EngineError(f"map pieces do not cover source edge {src}")

    # ------------------------------------------------------------------
    # snapshots

    def clone(self) -> "FlowState":
        return _copy.deepcopy(self)

    def frozen_at(self, t: Fraction) -> "FlowState":
        """A static copy of the state at time ``t``: charts evaluated,
        zero-length stems contracted, map pieces resolved."""
        if t < self.t:
            raise EngineError("cannot rewind a flow state")
        snap = self.clone()
        snap.check = False
        snap.resolve_all_pieces(t)
        for zp in list(snap.zips):
            snap._dissolve_zip(zp, t)
        snap.t = t
        drop = [eid for eid, e in snap.edges.items() if e.length(t) == 0]
        if drop:
            classes = snap._merge_classes(drop, set())
            for eid in drop:
                del snap.edges[eid]
            for rep, members in sorted(classes.items()):
                for vid, r in members:
                    if vid != rep:
                        snap._absorb_vertex(vid, rep, r)
            snap._recompute_tree()
            snap._reanchor()
        snap._erase_redundant(t)
        snap.records = {}
        if self.check:
            snap.check = True
            snap.check_invariants()
        return snap
