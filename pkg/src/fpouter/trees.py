"""Bass-Serre tree machinery for a marked graph of groups.

Everything here works in ambient coordinates: a lift of a quotient vertex
``v`` is written ``g . v~`` with ``g`` a normal-form word of the ambient
group, and a lift of an edge is pinned down by a single group element
because edge stabilizers are trivial.  The bridge between ambient words and
fundamental-group words is the marking, corrected by the unique inner
conjugator that makes the two directions of the marking exactly inverse.

Vertex lifts are stored with a canonical coset representative, so equality
of points is plain tuple equality.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .graphs import (MarkedGraph, analyze_factor_images, expand_word_steps,
                     reduce_steps, _compose, _generator_tokens)
from .words import (IDENTITY, Signature, Word, WordError, apply_generator_map,
                    find_inner_conjugator, inverse, multiply, syllable_word)

# A point of the tree: ("v", vid, rep) or ("e", eid, lift, offset), with the
# offset measured from the edge's first endpoint, strictly inside (0, len).
Point = tuple
VertexLift = Tuple[str, Word]


class TreeStructure:
    """Ambient-coordinate stabilizer and lift data for a marked graph."""

    def __init__(self, graph: MarkedGraph):
        self.graph = graph
        self.sig = graph.sig
        self.pi1 = graph.pi1_signature()
        comp = _compose(self.sig, graph.marking_from, graph.marking_to, self.sig)
        h = find_inner_conjugator(self.sig, comp)
        if h is None:
            raise WordError("marking composites are not inner; cannot build tree structure")
        self.h = h
        self.h_inv = inverse(self.sig, h)

        slots = analyze_factor_images(self.sig, graph.marking_from, self.pi1.factors)
        self.stab: Dict[str, Optional[tuple]] = {v: None for v in graph.vertices}
        self._ambient_slot_vertex: Dict[int, tuple] = {}
        for j, (a, c, table_map) in enumerate(slots):
            vid = graph.factor_vertex(j)
            self.stab[vid] = (a, c, table_map)
            if a in self._ambient_slot_vertex:
                raise WordError(f"two vertex groups are conjugate to ambient factor {a}")
            self._ambient_slot_vertex[a] = (vid, c)

        letters = graph.nontree_edges()
        self.serre: Dict[str, Word] = {}
        for eid in graph.edges:
            if eid in graph.tree:
                self.serre[eid] = IDENTITY
            else:
                j = letters.index(eid)
                self.serre[eid] = apply_generator_map(self.sig, graph.marking_from,
                                                      syllable_word(("t", j, 1)))
        self.lengths = graph.lengths

    # -- coordinates --------------------------------------------------------

    def to_pi1(self, g: Word) -> Word:
        """The fundamental-group word acting like the ambient element ``g``.

        The marking is corrected by the inner conjugator ``h`` so that this
        map and :meth:`from_pi1` are exactly inverse: with ``nu o mu``
        equal to conjugation by ``h``, the map ``g -> mu(h^-1 g h)`` is a
        two-sided inverse of plain substitution along ``marking_from``.
        """
        shifted = multiply(self.sig, multiply(self.sig, self.h_inv, g), self.h)
        return apply_generator_map(self.pi1, self.graph.marking_to, shifted)

    def from_pi1(self, w: Word) -> Word:
        return apply_generator_map(self.sig, self.graph.marking_from, w)

    # -- stabilizers and canonical lifts ------------------------------------

    def stab_order(self, vid: str) -> int:
        info = self.stab[vid]
        return 1 if info is None else self.sig.factors[info[0]].order

    def stab_element(self, vid: str, z: int) -> Word:
        """The ambient word of the ``z``-th stabilizer element of ``1 . v~``."""
        info = self.stab[vid]
        if info is None:
            if z:
                raise WordError(f"vertex {vid} has trivial stabilizer")
            return IDENTITY
        a, c, _m = info
        if z == 0:
            return IDENTITY
        return multiply(self.sig, multiply(self.sig, c, syllable_word(("f", a, z))),
                        inverse(self.sig, c))

    def stab_decompose(self, vid: str, g: Word) -> Optional[int]:
        """If ``g`` stabilizes ``1 . v~``, return its index in the factor."""
        if not g:
            return 0
        info = self.stab[vid]
        if info is None:
            return None
        a, c, _m = info
        w = multiply(self.sig, multiply(self.sig, inverse(self.sig, c), g), c)
        if len(w) == 1 and w[0][0] == "f" and w[0][1] == a:
            return w[0][2]
        return None

    def canonical_vertex(self, vid: str, g: Word) -> VertexLift:
        """Canonical representative of the coset ``g . Stab(v~)``."""
        info = self.stab[vid]
        if info is None:
            return (vid, g)
        a, c, _m = info
        w = multiply(self.sig, g, c)
        if w and w[-1][0] == "f" and w[-1][1] == a:
            w = w[:-1]
        return (vid, multiply(self.sig, w, inverse(self.sig, c)))

    def factor_lift(self, ambient_slot: int) -> VertexLift:
        """The unique vertex lift whose stabilizer is exactly the ambient factor."""
        vid, c = self._ambient_slot_vertex[ambient_slot]
        return self.canonical_vertex(vid, inverse(self.sig, c))

    # -- points --------------------------------------------------------------

    def vertex_point(self, vid: str, g: Word) -> Point:
        return ("v",) + self.canonical_vertex(vid, g)

    def edge_point(self, eid: str, lift: Word, offset: Fraction) -> Point:
        offset = Fraction(offset)
        L = self.lengths[eid]
        if offset < 0 or offset > L:
            raise WordError(f"offset {offset} outside edge {eid} of length {L}")
        u, v = self.graph.edges[eid]
        if offset == 0:
            return self.vertex_point(u, lift)
        if offset == L:
            return self.vertex_point(v, multiply(self.sig, lift, self.serre[eid]))
        return ("e", eid, lift, offset)

    def translate_point(self, g: Word, p: Point) -> Point:
        if p[0] == "v":
            return self.vertex_point(p[1], multiply(self.sig, g, p[2]))
        return ("e", p[1], multiply(self.sig, g, p[2]), p[3])

    # -- paths ---------------------------------------------------------------

    def step_endpoints(self, step) -> Tuple[VertexLift, VertexLift]:
        eid, d, lift = step
        u, v = self.graph.edges[eid]
        start = self.canonical_vertex(u, lift)
        end = self.canonical_vertex(v, multiply(self.sig, lift, self.serre[eid]))
        return (start, end) if d > 0 else (end, start)

    def lift_path(self, A: VertexLift, B: VertexLift) -> list:
        """Reduced edge path between two vertex lifts.

        Steps are ``(eid, dir, lift)``: crossing ``lift`` times the canonical
        edge lift, forward or backward.
        """
        if A == B:
            return []
        delta = multiply(self.sig, inverse(self.sig, A[1]), B[1])
        w = self.to_pi1(delta)
        raw, _rho = expand_word_steps(self.graph, w, A[0], B[0])
        raw = reduce_steps(raw)
        out = []
        for eid, d, rho in raw:
            amb = multiply(self.sig, A[1], self.from_pi1(rho))
            out.append((eid, d, amb))
        if out:
            first = self.step_endpoints(out[0])[0]
            last = self.step_endpoints(out[-1])[1]
            if first != self.canonical_vertex(*A) or last != self.canonical_vertex(*B):
                raise WordError("internal: lift path endpoints do not match")
        return out

    def vertex_distance(self, A: VertexLift, B: VertexLift) -> Fraction:
        return sum((self.lengths[e] for e, _d, _l in self.lift_path(A, B)), Fraction(0))

    def _point_anchors(self, p: Point):
        """(vertex lift, distance) pairs through which a geodesic may leave p."""
        if p[0] == "v":
            return [(((p[1], p[2])), Fraction(0))]
        eid, lift, off = p[1], p[2], p[3]
        u, v = self.graph.edges[eid]
        a = self.canonical_vertex(u, lift)
        b = self.canonical_vertex(v, multiply(self.sig, lift, self.serre[eid]))
        return [(a, off), (b, self.lengths[eid] - off)]

    def _same_edge_offset(self, p: Point, q: Point) -> Optional[Fraction]:
        if p[0] == "e" and q[0] == "e" and p[1] == q[1] and p[2] == q[2]:
            return abs(p[3] - q[3])
        return None

    def distance(self, p: Point, q: Point) -> Fraction:
        same = self._same_edge_offset(p, q)
        if same is not None:
            return same
        best = None
        for a, da in self._point_anchors(p):
            for b, db in self._point_anchors(q):
                d = da + self.vertex_distance(a, b) + db
                if best is None or d < best:
                    best = d
        return best

    def point_geodesic(self, p: Point, q: Point) -> list:
        """The geodesic [p, q] as pieces ``(eid, lift, off_from, off_to)``.

        Offsets are measured along the edge's own chart; consecutive pieces
        share endpoints in the tree.
        """
        same = self._same_edge_offset(p, q)
        if same is not None:
            if p == q:
                return []
            return [(p[1], p[2], p[3], q[3])]
        best = None
        for a, da in self._point_anchors(p):
            for b, db in self._point_anchors(q):
                steps = self.lift_path(a, b)
                mid = sum((self.lengths[e] for e, _d, _l in steps), Fraction(0))
                d = da + mid + db
                if best is None or d < best[0]:
                    best = (d, a, da, b, db, steps)
        _d, a, da, b, db, steps = best
        pieces = []
        if p[0] == "e" and da > 0:
            u, _v = self.graph.edges[p[1]]
            to_off = Fraction(0) if self.canonical_vertex(u, p[2]) == a else self.lengths[p[1]]
            pieces.append((p[1], p[2], p[3], to_off))
        for eid, d_, lift in steps:
            L = self.lengths[eid]
            if d_ > 0:
                pieces.append((eid, lift, Fraction(0), L))
            else:
                pieces.append((eid, lift, L, Fraction(0)))
        if q[0] == "e" and db > 0:
            u, _v = self.graph.edges[q[1]]
            from_off = Fraction(0) if self.canonical_vertex(u, q[2]) == b else self.lengths[q[1]]
            pieces.append((q[1], q[2], from_off, q[3]))
        return [pc for pc in pieces if pc[2] != pc[3]]

    # -- local geometry -------------------------------------------------------

    def germs_at(self, vid: str) -> list:
        """All directions at the canonical lift of ``vid``: (eid, end, z)."""
        out = []
        for eid, end in self.graph.incident(vid):
            for z in range(self.stab_order(vid)):
                out.append((eid, end, z))
        return out

    def germ_lift(self, vid: str, germ) -> Word:
        """Group element ``X`` such that the germ is carried by ``X`` times
        the canonical edge lift (pointing away from the vertex for end 0,
        into its endpoint for end 1)."""
        eid, end, z = germ
        zref = self.stab_element(vid, z)
        if end == 0:
            return zref
        return multiply(self.sig, zref, inverse(self.sig, self.serre[eid]))

    def exists_vertex_at_distance(self, p: Point, r: Fraction) -> bool:
        """Is some tree vertex at distance exactly ``r`` from ``p``?"""
        r = Fraction(r)
        if r < 0:
            return False
        if p[0] == "v":
            if r == 0:
                return True
            starts = [(p[1], None, r)]
        else:
            eid, off = p[1], p[3]
            u, v = self.graph.edges[eid]
            starts = []
            if r == off or r == self.lengths[eid] - off:
                return True
            if r > off:
                starts.append((u, (eid, 0), r - off))
            if r > self.lengths[eid] - off:
                starts.append((v, (eid, 1), r - (self.lengths[eid] - off)))
        memo: Dict[tuple, bool] = {}

        def search(vid, came, rem) -> bool:
            # came = (eid, end) germ we arrived through, or None from a start
            if rem == 0:
                return True
            key = (vid, came, rem)
            if key in memo:
                return memo[key]
            memo[key] = False
            found = False
            nontriv = self.stab_order(vid) > 1
            for eid, end in self.graph.incident(vid):
                if came is not None and (eid, end) == came and not nontriv:
                    continue
                L = self.lengths[eid]
                if rem == L:
                    found = True
                    break
                if rem > L:
                    u, v = self.graph.edges[eid]
                    far_vid = v if end == 0 else u
                    far_end = 1 - end
                    if search(far_vid, (eid, far_end), rem - L):
                        found = True
                        break
            memo[key] = found
            return found

        return any(search(vid, came, rem) for vid, came, rem in starts)
