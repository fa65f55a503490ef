"""Marked metric graphs of groups with trivial edge groups.

A point of the (unprojectivized) outer space of ``G = G_1*...*G_p*F_k`` is a
finite graph whose vertices carry either a trivial group or one of the
finite factors (exactly one vertex per factor), positive rational edge
lengths, a spanning tree, and a marking: an isomorphism between ``G`` and
the fundamental group of the graph of groups, recorded in both directions
on standard generators.

The fundamental group of such a graph is itself a free product with the
same finite factors and free rank equal to the first Betti number, so both
sides of the marking live in the word arithmetic of :mod:`fpouter.words`.
Free letters of the fundamental group are indexed by the non-tree edges in
sorted id order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .words import (IDENTITY, FactorGroup, Signature, Word, WordError,
                    apply_generator_map, conjugate, conjugate_into_factor,
                    cyclically_reduce, find_inner_conjugator, inverse,
                    is_cyclically_reduced, multiply, normalize, power,
                    syllable_word)


@dataclass
class ValidationReport:
    problems: List[Tuple[str, str]] = field(default_factory=list)

    def add(self, code: str, message: str) -> None:
        self.problems.append((code, message))

    @property
    def ok(self) -> bool:
        return not self.problems

    def codes(self) -> List[str]:
        return [c for c, _ in self.problems]

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "\n".join(f"{c}: {m}" for c, m in self.problems)


class MarkedGraph:
    """A marked metric graph of groups over an ambient signature."""

    def __init__(self, sig: Signature, vertices: Dict[str, Optional[int]],
                 edges: Dict[str, Tuple[str, str]], lengths: Dict[str, Fraction],
                 tree: Sequence[str], marking_to: Dict[tuple, Word],
                 marking_from: Dict[tuple, Word]):
        self.sig = sig
        self.vertices = dict(vertices)
        self.edges = {e: (u, v) for e, (u, v) in edges.items()}
        self.lengths = {e: Fraction(x) for e, x in lengths.items()}
        self.tree = frozenset(tree)
        self.marking_to = dict(marking_to)
        self.marking_from = dict(marking_from)
        self._tree_paths: Dict[Tuple[str, str], list] = {}

    # -- basic structure ---------------------------------------------------

    def incident(self, vid: str) -> List[Tuple[str, int]]:
        out = []
        for eid in sorted(self.edges):
            u, v = self.edges[eid]
            if u == vid:
                out.append((eid, 0))
            if v == vid:
                out.append((eid, 1))
        return out

    def degree(self, vid: str) -> int:
        return len(self.incident(vid))

    def nontree_edges(self) -> List[str]:
        return sorted(e for e in self.edges if e not in self.tree)

    def betti(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    def pi1_signature(self) -> Signature:
        return Signature(self.sig.factors, self.betti())

    def factor_vertex(self, i: int) -> str:
        for vid in sorted(self.vertices):
            if self.vertices[vid] == i:
                return vid
        raise KeyError(f"no vertex carries factor {i}")

    def base_vertex(self) -> str:
        labelled = [(lab, vid) for vid, lab in self.vertices.items() if lab is not None]
        if labelled:
            return min(labelled)[1]
        return min(self.vertices)

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        seen = {next(iter(sorted(self.vertices)))}
        frontier = list(seen)
        adj: Dict[str, list] = {v: [] for v in self.vertices}
        for eid, (u, v) in self.edges.items():
            adj[u].append(v)
            adj[v].append(u)
        while frontier:
            x = frontier.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        return len(seen) == len(self.vertices)

    def tree_is_spanning(self) -> bool:
        if len(self.tree) != len(self.vertices) - 1:
            return False
        parent: Dict[str, str] = {v: v for v in self.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for eid in self.tree:
            if eid not in self.edges:
                return False
            u, v = self.edges[eid]
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    def tree_path(self, a: str, b: str) -> List[Tuple[str, int]]:
        """Edge path from ``a`` to ``b`` inside the spanning tree.

        Each step is ``(eid, dir)`` with dir ``+1`` for u->v traversal.
        """
        key = (a, b)
        if key in self._tree_paths:
            return self._tree_paths[key]
        adj: Dict[str, list] = {v: [] for v in self.vertices}
        for eid in sorted(self.tree):
            u, v = self.edges[eid]
            adj[u].append((v, eid, 1))
            adj[v].append((u, eid, -1))
        prev: Dict[str, tuple] = {a: None}
        queue = [a]
        while queue:
            x = queue.pop(0)
            if x == b:
                break
            for y, eid, d in adj[x]:
                if y not in prev:
                    prev[y] = (x, eid, d)
                    queue.append(y)
        if b not in prev:
            raise WordError(f"vertices {a} and {b} not connected in spanning tree")
        path = []
        cur = b
        while prev[cur] is not None:
            x, eid, d = prev[cur]
            path.append((eid, d))
            cur = x
        path.reverse()
        self._tree_paths[key] = path
        return path

    # -- rescaling ---------------------------------------------------------

    def rescale(self, lam: Fraction) -> "MarkedGraph":
        lam = Fraction(lam)
        if lam <= 0:
            raise WordError(f"rescale factor must be positive, got {lam}")
        return MarkedGraph(self.sig, self.vertices, self.edges,
                           {e: x * lam for e, x in self.lengths.items()},
                           self.tree, self.marking_to, self.marking_from)

    def total_length(self) -> Fraction:
        return sum(self.lengths.values(), Fraction(0))

    def normalize(self) -> "MarkedGraph":
        return self.rescale(Fraction(1) / self.total_length())

    def with_lengths(self, lengths: Dict[str, Fraction]) -> "MarkedGraph":
        return MarkedGraph(self.sig, self.vertices, self.edges, lengths,
                           self.tree, self.marking_to, self.marking_from)


# ---------------------------------------------------------------------------
# Quotient loops.  A group element acting on the Bass-Serre tree is encoded
# as a sequence of oriented edge crossings decorated with the lift prefix at
# the crossing; with trivial edge groups, two crossings cancel exactly when
# the prefixes coincide.


def expand_word_steps(graph: MarkedGraph, w: Word, start: str, end: str):
    """Raw crossing sequence for the path from the start-vertex lift to
    ``w`` times the end-vertex lift, together with the prefix element after
    the walk (equal to ``w``)."""
    sig = graph.pi1_signature()
    letters = graph.nontree_edges()
    steps = []
    rho: Word = IDENTITY
    cur = start

    def walk_to(target):
        nonlocal cur
        for eid, d in graph.tree_path(cur, target):
            steps.append((eid, d, rho))
        cur = target

    for kind, idx, val in w:
        if kind == "f":
            station = graph.factor_vertex(idx)
            walk_to(station)
            rho = multiply(sig, rho, syllable_word(("f", idx, val)))
        else:
            eid = letters[idx]
            u, v = graph.edges[eid]
            reps = val if val > 0 else -val
            for _ in range(reps):
                if val > 0:
                    walk_to(u)
                    steps.append((eid, 1, rho))
                    rho = multiply(sig, rho, syllable_word(("t", idx, 1)))
                    cur = v
                else:
                    walk_to(v)
                    rho = multiply(sig, rho, syllable_word(("t", idx, -1)))
                    steps.append((eid, -1, rho))
                    cur = u
    walk_to(end)
    return steps, rho


def reduce_steps(steps):
    """Cancel adjacent crossings of the same edge lift in opposite senses."""
    out = []
    for s in steps:
        if out and out[-1][0] == s[0] and out[-1][1] == -s[1] and out[-1][2] == s[2]:
            out.pop()
        else:
            out.append(s)
    return out


def loop_length(graph: MarkedGraph, w: Word, lengths=None, zero=Fraction(0)):
    """Translation length of the fundamental-group element ``w``.

    Expands ``w`` as a loop at the base vertex, reduces it, reduces it
    cyclically against the deck transformation given by ``w`` itself, and
    adds up the lengths of the surviving edge crossings.
    """
    sig = graph.pi1_signature()
    if lengths is None:
        lengths = graph.lengths
    core, _conj = cyclically_reduce(sig, w)
    if not core:
        return zero
    base = graph.base_vertex()
    steps, total = expand_word_steps(graph, core, base, base)
    steps = reduce_steps(steps)
    while len(steps) >= 2:
        e1, d1, l1 = steps[0]
        e2, d2, l2 = steps[-1]
        if e1 == e2 and d1 == -d2 and l2 == multiply(sig, total, l1):
            steps = steps[1:-1]
        else:
            break
    val = zero
    for eid, _d, _l in steps:
        val = val + lengths[eid]
    return val


def translation_length(graph: MarkedGraph, g: Word, lengths=None, zero=Fraction(0)):
    """Length function of the marked graph at the ambient element ``g``."""
    w = apply_generator_map(graph.pi1_signature(), graph.marking_to, g)
    return loop_length(graph, w, lengths=lengths, zero=zero)


def length_vector(graph: MarkedGraph, witnesses: Sequence[Word], lengths=None,
                  zero=Fraction(0)) -> list:
    return [translation_length(graph, w, lengths=lengths, zero=zero) for w in witnesses]


# ---------------------------------------------------------------------------
# Witness sets.


def _cyclic_key(sig: Signature, w: Word):
    cands = []
    for u in (w, inverse(sig, u=w)):
        for r in range(len(u)):
            cands.append(u[r:] + u[:r])
    return min(cands) if cands else w


_witness_cache: Dict[tuple, list] = {}


def default_witnesses(sig: Signature, bound: int = 6) -> List[Word]:
    """Cyclically reduced words of letter length <= bound, deduplicated up
    to cyclic permutation and inversion.

    The letter alphabet is every non-identity factor element together with
    every free letter and its inverse.
    """
    key = (sig, bound)
    if key in _witness_cache:
        return _witness_cache[key]
    alphabet = [syllable_word(s) for s in sig.generators()]
    alphabet += [syllable_word(("t", j, -1)) for j in range(sig.free_rank)]
    seen = set()
    out: List[Word] = []

    def consider(w: Word):
        if not w or not is_cyclically_reduced(w):
            return
        k = _cyclic_key(sig, w)
        if k not in seen:
            seen.add(k)
            out.append(w)

    def grow(w: Word, depth: int):
        consider(w)
        if depth == bound:
            return
        for a in alphabet:
            w2 = multiply(sig, w, a)
            if len(w2) > len(w) or (w2 and len(w2) == len(w) and w2[-1] != w[-1]):
                grow(w2, depth + 1)

    grow(IDENTITY, 0)
    out.sort(key=lambda w: (len(w), w))
    _witness_cache[key] = out
    return out


# ---------------------------------------------------------------------------
# Validation.


def analyze_factor_images(sig_out: Signature, images: Dict[tuple, Word],
                          factors: Sequence[FactorGroup]):
    """For a generator map defined on finite factors, locate the factor of
    ``sig_out`` each one lands in, up to conjugacy.

    Returns a list of ``(slot, conjugator, table_map)`` per input factor, or
    raises :class:`WordError` when an image is not conjugate to a factor.
    Used both for markings (ambient -> fundamental group) and their
    inverses.
    """
    result = []
    for i, f in enumerate(factors):
        probe = images[("f", i, 1)]
        hit = conjugate_into_factor(sig_out, probe)
        if hit is None:
            raise WordError(f"image of factor {i} is not conjugate into a factor")
        j, _e, c = hit
        target = sig_out.factors[j]
        found = None
        for z in range(target.order):
            cand = multiply(sig_out, c, syllable_word(("f", j, z))) if z else c
            cand_inv = inverse(sig_out, cand)
            table_map = {0: 0}
            ok = True
            for e in range(1, f.order):
                img = multiply(sig_out, multiply(sig_out, cand_inv, images[("f", i, e)]), cand)
                if len(img) == 1 and img[0][0] == "f" and img[0][1] == j:
                    table_map[e] = img[0][2]
                else:
                    ok = False
                    break
            if ok and len(set(table_map.values())) == f.order:
                found = (j, cand, table_map)
                break
        if found is None:
            raise WordError(f"image of factor {i} is not a conjugate of factor {j}")
        result.append(found)
    return result


def _check_hom_on_factors(sig_out: Signature, images: Dict[tuple, Word],
                          factors: Sequence[FactorGroup], report: ValidationReport,
                          side: str) -> None:
    for i, f in enumerate(factors):
        for a in range(1, f.order):
            for b in range(1, f.order):
                c = f.mul(a, b)
                lhs = multiply(sig_out, images[("f", i, a)], images[("f", i, b)])
                rhs = images[("f", i, c)] if c else IDENTITY
                if lhs != rhs:
                    report.add("MARKING_NOT_HOM",
                               f"{side}: factor {i} images break multiplication at ({a},{b})")
                    return


def _generator_tokens(sig: Signature) -> List[tuple]:
    toks = []
    for i, f in enumerate(sig.factors):
        for e in range(1, f.order):
            toks.append(("f", i, e))
    for j in range(sig.free_rank):
        toks.append(("t", j))
    return toks


def _compose(sig_out: Signature, outer: Dict[tuple, Word], inner: Dict[tuple, Word],
             sig_mid: Signature) -> Dict[tuple, Word]:
    return {tok: apply_generator_map(sig_out, outer, inner[tok])
            for tok in _generator_tokens(sig_mid)}


def validate_point(graph: MarkedGraph) -> ValidationReport:
    """Check every structural and marking invariant of a point of the space."""
    report = ValidationReport()
    sig = graph.sig
    amb = sig.check_ambient()
    for msg in amb:
        report.add("BAD_SIGNATURE", msg)

    # vertex labels: exactly one vertex per factor
    counts = {i: 0 for i in range(sig.num_factors)}
    for vid, lab in graph.vertices.items():
        if lab is not None:
            if not 0 <= lab < sig.num_factors:
                report.add("BAD_VERTEX_GROUP", f"vertex {vid}: factor index {lab} out of range")
            else:
                counts[lab] += 1
    for i, n in counts.items():
        if n != 1:
            report.add("FACTOR_VERTEX_COUNT", f"factor {i + 1} appears on {n} vertices")

    for eid, (u, v) in graph.edges.items():
        if u not in graph.vertices or v not in graph.vertices:
            report.add("BAD_EDGE", f"edge {eid} references unknown vertex")
            return report
    if not graph.is_connected():
        report.add("NOT_CONNECTED", "graph is not connected")
        return report
    if not graph.tree_is_spanning():
        report.add("BAD_SPANNING_TREE", "spanning tree is not a spanning tree")
        return report
    if graph.betti() != sig.free_rank:
        report.add("RANK_MISMATCH",
                   f"graph has Betti number {graph.betti()} but free rank is {sig.free_rank}")

    for eid, x in graph.lengths.items():
        if x <= 0:
            report.add("NONPOSITIVE_LENGTH", f"edge {eid} has length {x}")
    for eid in graph.edges:
        if eid not in graph.lengths:
            report.add("NONPOSITIVE_LENGTH", f"edge {eid} has no length")

    for vid, lab in graph.vertices.items():
        ends = len(graph.incident(vid))
        if lab is None:
            if ends <= 1:
                report.add("TERMINAL_TRIVIAL", f"terminal vertex {vid} has trivial group")
            elif ends == 2:
                report.add("REDUNDANT_VERTEX", f"trivial vertex {vid} has degree 2")
        else:
            if ends == 0 and len(graph.vertices) > 1:
                report.add("NOT_CONNECTED", f"vertex {vid} is isolated")

    if not report.ok:
        return report

    pi1 = graph.pi1_signature()
    for tok in _generator_tokens(sig):
        if tok not in graph.marking_to:
            report.add("MARKING_INCOMPLETE", f"marking_to misses generator {tok}")
            return report
    for tok in _generator_tokens(pi1):
        if tok not in graph.marking_from:
            report.add("MARKING_INCOMPLETE", f"marking_from misses generator {tok}")
            return report

    _check_hom_on_factors(pi1, graph.marking_to, sig.factors, report, "marking_to")
    _check_hom_on_factors(sig, graph.marking_from, pi1.factors, report, "marking_from")
    if not report.ok:
        return report

    try:
        slots = analyze_factor_images(pi1, graph.marking_to, sig.factors)
    except WordError as exc:
        report.add("MARKING_FACTOR_IMAGE", str(exc))
        return report
    if sorted(s for s, _c, _m in slots) != list(range(sig.num_factors)):
        report.add("MARKING_FACTOR_IMAGE", "factor images do not hit every vertex group once")

    comp_amb = _compose(sig, graph.marking_from, graph.marking_to, sig)
    if find_inner_conjugator(sig, comp_amb) is None:
        report.add("UNVERIFIED_MARKING",
                   "marking_from o marking_to is not visibly inner")
    comp_pi1 = _compose(pi1, graph.marking_to, graph.marking_from, pi1)
    if find_inner_conjugator(pi1, comp_pi1) is None:
        report.add("UNVERIFIED_MARKING",
                   "marking_to o marking_from is not visibly inner")
    return report


# ---------------------------------------------------------------------------
# The outer automorphism action: precompose the marking.


def apply_automorphism(graph: MarkedGraph, images: Dict[tuple, Word],
                       inverse_images: Dict[tuple, Word]) -> MarkedGraph:
    """Change of marking by the automorphism sending generators to ``images``.

    ``inverse_images`` must describe the inverse automorphism; both
    composites are verified to be inner before anything is built.
    """
    sig = graph.sig
    comp = _compose(sig, images, inverse_images, sig)
    comp2 = _compose(sig, inverse_images, images, sig)
    if find_inner_conjugator(sig, comp) is None or find_inner_conjugator(sig, comp2) is None:
        raise WordError("supplied generator maps are not mutually inverse automorphisms")
    pi1 = graph.pi1_signature()
    new_to = {tok: apply_generator_map(pi1, graph.marking_to,
                                       images[tok] if tok[0] == "t" else images[tok])
              for tok in _generator_tokens(sig)}
    new_from = {tok: apply_generator_map(sig, inverse_images, graph.marking_from[tok])
                for tok in _generator_tokens(pi1)}
    return MarkedGraph(sig, graph.vertices, graph.edges, graph.lengths, graph.tree,
                       new_to, new_from)


# ---------------------------------------------------------------------------
# Cone signatures: a token for the underlying non-metric marked type.


def _letter_rewrite(w: Word, perm: Dict[int, int], flips: Dict[int, bool]) -> Word:
    return tuple(s if s[0] == "f" else
                 ("t", perm[s[1]], -s[2] if flips.get(s[1]) else s[2]) for s in w)


def cone_signature(graph: MarkedGraph, include_marking: bool = True) -> str:
    """Canonical token of the combinatorial marked type (lengths ignored).

    Two graphs that differ only by edge lengths, or by a relabeling or
    reorientation of vertices and edges (with marking words rewritten
    accordingly), receive equal tokens.  Marking words are compared
    verbatim, so markings that differ by an inner automorphism may receive
    distinct tokens; within a family produced by the fold engine the words
    are generated canonically and the token is stable.
    """
    vids = sorted(graph.vertices)
    classes: Dict[tuple, list] = {}
    fixed: Dict[str, int] = {}
    for vid in vids:
        lab = graph.vertices[vid]
        if lab is not None:
            fixed[vid] = lab  # factor vertices take their slot order first
        else:
            classes.setdefault((len(graph.incident(vid)),), []).append(vid)
    p = graph.sig.num_factors
    best = None
    perm_groups = [classes[k] for k in sorted(classes)]
    letters = graph.nontree_edges()
    sig = graph.sig
    for perms in itertools.product(*(itertools.permutations(g) for g in perm_groups)):
        order: Dict[str, int] = dict(fixed)
        nxt = p
        for group in perms:
            for vid in group:
                order[vid] = nxt
                nxt += 1
        # orient every edge with its smaller endpoint first
        rows = {}
        flipped = {}
        for eid in graph.edges:
            u, v = graph.edges[eid]
            a, b = order[u], order[v]
            flipped[eid] = a > b
            rows[eid] = (min(a, b), max(a, b), eid in graph.tree)
        eorder = sorted(graph.edges, key=lambda e: (rows[e], e))
        letter_perm = {}
        letter_flip = {}
        new_letters = [e for e in eorder if e not in graph.tree]
        for old_idx, eid in enumerate(letters):
            letter_perm[old_idx] = new_letters.index(eid)
            letter_flip[old_idx] = flipped[eid]
        token_parts = [
            "V:" + ",".join(str(graph.vertices[v] if graph.vertices[v] is not None else "-")
                            for v in sorted(order, key=order.get)),
            "E:" + ";".join(f"{rows[e][0]}-{rows[e][1]}{'t' if rows[e][2] else 'n'}"
                            for e in eorder),
        ]
        if include_marking:
            from .words import format_word, inverse as winv
            mk = []
            for tok in sorted(graph.marking_to):
                w = _letter_rewrite(graph.marking_to[tok], letter_perm, letter_flip)
                mk.append(f"{tok}->{format_word(w)}")
            for tok in sorted(graph.marking_from):
                if tok[0] == "t":
                    src = ("t", letter_perm[tok[1]])
                    val = graph.marking_from[tok]
                    if letter_flip[tok[1]]:
                        val = winv(sig, val)
                else:
                    src = tok
                    val = graph.marking_from[tok]
                mk.append(f"{src}<-{format_word(val)}")
            token_parts.append("M:" + "|".join(sorted(mk)))
        token = "\n".join(token_parts)
        if best is None or token < best:
            best = token
    return best
