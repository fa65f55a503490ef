"""Equivariant morphisms between marked graphs of groups.

A morphism is stored on a fundamental domain: the image of one chosen lift
per vertex, and for every edge the geodesic image of its canonical lift as
a list of pieces ``(target_eid, lift, off_from, off_to)``.  All group data
is in ambient coordinates, so equivariance is literal: ``f(g.x) = g.f(x)``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .graphs import MarkedGraph, ValidationReport, translation_length
from .trees import Point, TreeStructure
from .words import (IDENTITY, Signature, Word, WordError, inverse, multiply,
                    syllable_word)


class Morphism:
    """An equivariant, edge-isometric map between two points of the space."""

    def __init__(self, source: MarkedGraph, target: MarkedGraph,
                 vertex_images: Dict[str, Point],
                 edge_paths: Dict[str, list],
                 source_ts: Optional[TreeStructure] = None,
                 target_ts: Optional[TreeStructure] = None):
        self.source = source
        self.target = target
        self.source_ts = source_ts or TreeStructure(source)
        self.target_ts = target_ts or TreeStructure(target)
        self.vertex_images = dict(vertex_images)
        self.edge_paths = {e: list(p) for e, p in edge_paths.items()}

    def path_length(self, eid: str) -> Fraction:
        return sum((abs(b - a) for _t, _l, a, b in self.edge_paths[eid]), Fraction(0))

    def edge_path_endpoints(self, eid: str) -> Tuple[Point, Point]:
        tt = self.target_ts
        pieces = self.edge_paths[eid]
        first = tt.edge_point(pieces[0][0], pieces[0][1], pieces[0][2])
        last = tt.edge_point(pieces[-1][0], pieces[-1][1], pieces[-1][3])
        return first, last

    def germ_images(self, vid: str) -> Dict[tuple, tuple]:
        """Image germ of every direction at the canonical lift of ``vid``.

        A germ image is ``(teid, lift, param, into)`` with ``into`` +1/-1
        telling which way the image heads along the target edge chart.
        """
        st = self.source_ts
        out = {}
        for (eid, end, z) in st.germs_at(vid):
            zw = st.stab_element(vid, z)
            pieces = self.edge_paths[eid]
            if end == 0:
                teid, lift, a, b = pieces[0]
                base = zw
                param, into = a, (1 if b > a else -1)
            else:
                teid, lift, a, b = pieces[-1]
                base = multiply(st.sig, zw, inverse(st.sig, st.serre[eid]))
                param, into = b, (1 if a > b else -1)
            out[(eid, end, z)] = (teid, multiply(st.sig, base, lift), param, into)
        return out


def validate_morphism(f: Morphism) -> ValidationReport:
    """Check the morphism conditions: isometric on edges, matching
    endpoints, stabilizer compatibility, surjectivity onto edge orbits."""
    report = ValidationReport()
    st, tt = f.source_ts, f.target_ts
    src = f.source
    for vid in src.vertices:
        if vid not in f.vertex_images:
            report.add("MISSING_VERTEX_IMAGE", f"vertex {vid} has no image")
            return report
    for eid in src.edges:
        if eid not in f.edge_paths or not f.edge_paths[eid]:
            report.add("MISSING_EDGE_PATH", f"edge {eid} has no image path")
            return report

    for vid, p in f.vertex_images.items():
        for z in range(1, st.stab_order(vid)):
            g = st.stab_element(vid, z)
            if tt.translate_point(g, p) != p:
                report.add("NOT_EQUIVARIANT",
                           f"image of vertex {vid} is not fixed by its stabilizer")
                break

    for eid in sorted(src.edges):
        u, v = src.edges[eid]
        pieces = f.edge_paths[eid]
        for (teid, lift, a, b) in pieces:
            if a == b:
                report.add("DEGENERATE_PIECE", f"edge {eid}: zero-length image piece")
            L = tt.lengths[teid]
            if not (0 <= a <= L and 0 <= b <= L):
                report.add("BAD_PIECE", f"edge {eid}: piece leaves target edge {teid}")
        if f.path_length(eid) != src.lengths[eid]:
            report.add("NOT_ISOMETRIC",
                       f"not isometric on edge {eid}: path length {f.path_length(eid)}"
                       f" != edge length {src.lengths[eid]}")
        for i in range(len(pieces) - 1):
            t1, l1, _a1, b1 = pieces[i]
            t2, l2, a2, _b2 = pieces[i + 1]
            if tt.edge_point(t1, l1, b1) != tt.edge_point(t2, l2, a2):
                report.add("BROKEN_PATH", f"edge {eid}: pieces {i} and {i+1} do not meet")
        first, last = f.edge_path_endpoints(eid)
        if first != f.vertex_images[u]:
            report.add("ENDPOINT_MISMATCH", f"edge {eid}: path does not start at image of {u}")
        want_last = tt.translate_point(st.serre[eid], f.vertex_images[v])
        if last != want_last:
            report.add("ENDPOINT_MISMATCH", f"edge {eid}: path does not end at image of {v}")

    covered: Dict[str, list] = {te: [] for te in f.target.edges}
    for eid in src.edges:
        for (teid, _l, a, b) in f.edge_paths[eid]:
            covered[teid].append((min(a, b), max(a, b)))
    for teid, spans in covered.items():
        L = tt.lengths[teid]
        spans.sort()
        reach = Fraction(0)
        for a, b in spans:
            if a > reach:
                break
            reach = max(reach, b)
        if reach < L:
            report.add("NOT_SURJECTIVE", f"target edge {teid} not covered beyond {reach}")
    return report


def check_minimality_condition(f: Morphism):
    """True when every source vertex has two directions with distinct image
    germs, i.e. the map is injective on some open interval through every
    point.  Returns ``(ok, witness_vertex)``."""
    for vid in sorted(f.source.vertices):
        germs = f.germ_images(vid)
        if len(set(germs.values())) < 2:
            return False, vid
    return True, None


def all_vertex_groups_nontrivial(graph: MarkedGraph) -> bool:
    return all(lab is not None for lab in graph.vertices.values())


# ---------------------------------------------------------------------------
# The canonical basepoint tree and its morphism onto a given point.


def base_graph(sig: Signature, lengths_spokes: List[Fraction],
               lengths_loops: List[Fraction]) -> MarkedGraph:
    """The star-shaped point: one vertex per factor, factor 1 in the middle,
    spokes to the other factors and one loop per free letter."""
    p, k = sig.num_factors, sig.free_rank
    vertices = {f"x{i + 1}": i for i in range(p)}
    edges = {}
    lengths = {}
    tree = []
    for i in range(1, p):
        eid = f"s{i + 1}"
        edges[eid] = ("x1", f"x{i + 1}")
        lengths[eid] = Fraction(lengths_spokes[i - 1])
        tree.append(eid)
    for j in range(k):
        eid = f"l{j + 1}"
        edges[eid] = ("x1", "x1")
        lengths[eid] = Fraction(lengths_loops[j])
    marking_to = {}
    marking_from = {}
    for i, fac in enumerate(sig.factors):
        for e in range(1, fac.order):
            marking_to[("f", i, e)] = (("f", i, e),)
            marking_from[("f", i, e)] = (("f", i, e),)
    for j in range(k):
        marking_to[("t", j)] = (("t", j, 1),)
        marking_from[("t", j)] = (("t", j, 1),)
    return MarkedGraph(sig, vertices, edges, lengths, tree, marking_to, marking_from)


def base_tree(target: MarkedGraph, target_ts: Optional[TreeStructure] = None):
    """The basepoint tree of a target point and the canonical morphism onto it.

    Every vertex of the basepoint has non-trivial stabilizer; each vertex
    maps to the unique target vertex lift with the same stabilizer, and each
    edge maps isometrically onto the geodesic between its endpoint images.
    Spoke lengths are half the translation length of ``g_1 g_i``, loop
    lengths half that of ``g_1 t_j g_1 t_j^-1``.
    """
    sig = target.sig
    p, k = sig.num_factors, sig.free_rank
    tt = target_ts or TreeStructure(target)
    g1 = syllable_word(("f", 0, 1))

    spoke_lengths = []
    for i in range(1, p):
        gi = syllable_word(("f", i, 1))
        ell = translation_length(target, multiply(sig, g1, gi))
        spoke_lengths.append(Fraction(ell) / 2)
    loop_lengths = []
    for j in range(k):
        tj = syllable_word(("t", j, 1))
        w = multiply(sig, multiply(sig, g1, tj), multiply(sig, g1, inverse(sig, tj)))
        ell = translation_length(target, w)
        loop_lengths.append(Fraction(ell) / 2)
    if any(x <= 0 for x in spoke_lengths + loop_lengths):
        raise WordError("degenerate basepoint: some canonical length vanished")

    t0 = base_graph(sig, spoke_lengths, loop_lengths)
    st = TreeStructure(t0)

    images = {}
    for i in range(p):
        vid, rep = tt.factor_lift(i)
        images[f"x{i + 1}"] = ("v", vid, rep)

    paths = {}
    for i in range(1, p):
        pieces = tt.point_geodesic(images["x1"], images[f"x{i + 1}"])
        paths[f"s{i + 1}"] = pieces
    for j in range(k):
        tj = syllable_word(("t", j, 1))
        end = tt.translate_point(tj, images["x1"])
        paths[f"l{j + 1}"] = tt.point_geodesic(images["x1"], end)

    f = Morphism(t0, target, images, paths, source_ts=st, target_ts=tt)
    for i in range(1, p):
        if f.path_length(f"s{i + 1}") != t0.lengths[f"s{i + 1}"]:
            raise WordError("internal: spoke image length disagrees with half "
                            "translation length")
    for j in range(k):
        if f.path_length(f"l{j + 1}") != t0.lengths[f"l{j + 1}"]:
            raise WordError("internal: loop image length disagrees with half "
                            "translation length")
    return t0, f


# ---------------------------------------------------------------------------
# Independent length computation through tree distances.


def bass_serre_distance(graph: MarkedGraph, a, b,
                        ts: Optional[TreeStructure] = None) -> Fraction:
    """Distance between two vertex lifts given as (coset word, vertex id).

    The coset words are over the fundamental group of the graph; they are
    converted to ambient coordinates through the marking.
    """
    ts = ts or TreeStructure(graph)
    wa, va = a
    wb, vb = b
    A = ts.canonical_vertex(va, ts.from_pi1(wa))
    B = ts.canonical_vertex(vb, ts.from_pi1(wb))
    return ts.vertex_distance(A, B)


def translation_length_via_points(graph: MarkedGraph, g: Word,
                                  ts: Optional[TreeStructure] = None) -> Fraction:
    """Length function computed from ``max(0, d(x, g^2 x) - d(x, g x))``.

    Independent of the loop-reduction route in :mod:`fpouter.graphs`: only
    tree distances between explicit lifts are used.
    """
    ts = ts or TreeStructure(graph)
    base = graph.base_vertex()
    x = ts.canonical_vertex(base, IDENTITY)
    gx = ts.canonical_vertex(base, g)
    g2 = multiply(graph.sig, g, g)
    g2x = ts.canonical_vertex(base, g2)
    d1 = ts.vertex_distance(x, gx)
    d2 = ts.vertex_distance(x, g2x)
    return max(Fraction(0), d2 - d1)
