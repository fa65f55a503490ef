"""Brute-force reference for the folding deformation on finite metric trees.

Everything here is non-equivariant and deliberately independent of the word
and graph machinery: finite trees with explicit vertices, piecewise-linear
maps given by vertex images, identification times by walking segments, and
the deformed distance computed as a shortest path on a common-denominator
grid with zero-cost jumps between identified points.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Tuple

# Points: ("v", vid) or ("e", eid, offset) with 0 < offset < length.


class OracleError(ValueError):
    pass


class FiniteTree:
    def __init__(self, vertices, edges: Dict[str, Tuple[str, str, Fraction]]):
        self.vertices = sorted(vertices)
        self.edges = {e: (u, v, Fraction(L)) for e, (u, v, L) in edges.items()}
        self._check()

    def _check(self):
        if len(self.edges) != len(self.vertices) - 1:
            raise OracleError("edge count does not match a tree")
        seen = set()
        adj: Dict[str, list] = {v: [] for v in self.vertices}
        for eid, (u, v, L) in self.edges.items():
            if L <= 0:
                raise OracleError(f"edge {eid} has non-positive length")
            if u == v:
                raise OracleError(f"edge {eid} is a loop")
            adj[u].append(v)
            adj[v].append(u)
        stack = [self.vertices[0]]
        seen.add(self.vertices[0])
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if len(seen) != len(self.vertices):
            raise OracleError("tree is not connected")

    def incident(self, vid: str) -> List[Tuple[str, int]]:
        out = []
        for eid in sorted(self.edges):
            u, v, _L = self.edges[eid]
            if u == vid:
                out.append((eid, 0))
            if v == vid:
                out.append((eid, 1))
        return out

    def point(self, eid: str, offset: Fraction):
        offset = Fraction(offset)
        u, v, L = self.edges[eid]
        if offset < 0 or offset > L:
            raise OracleError(f"offset {offset} outside edge {eid}")
        if offset == 0:
            return ("v", u)
        if offset == L:
            return ("v", v)
        return ("e", eid, offset)

    def vertex_path(self, a: str, b: str) -> List[Tuple[str, int]]:
        prev = {a: None}
        queue = [a]
        adj: Dict[str, list] = {v: [] for v in self.vertices}
        for eid in sorted(self.edges):
            u, v, _L = self.edges[eid]
            adj[u].append((v, eid, 1))
            adj[v].append((u, eid, -1))
        while queue:
            x = queue.pop(0)
            if x == b:
                break
            for y, eid, d in adj[x]:
                if y not in prev:
                    prev[y] = (x, eid, d)
                    queue.append(y)
        path = []
        cur = b
        while prev[cur] is not None:
            x, eid, d = prev[cur]
            path.append((eid, d))
            cur = x
        path.reverse()
        return path

    def geodesic(self, p, q) -> List[Tuple[str, Fraction, Fraction]]:
        """[p, q] as pieces (eid, off_from, off_to) with off_from != off_to."""
        if p == q:
            return []
        if p[0] == "e" and q[0] == "e" and p[1] == q[1]:
            return [(p[1], p[2], q[2])]

        def anchors(x):
            if x[0] == "v":
                return [(x[1], Fraction(0), None)]
            eid, off = x[1], x[2]
            u, v, L = self.edges[eid]
            return [(u, off, (eid, off, Fraction(0))),
                    (v, L - off, (eid, off, L))]

        best = None
        for (va, da, pa) in anchors(p):
            for (vb, db, pb) in anchors(q):
                steps = self.vertex_path(va, vb)
                mid = sum((self.edges[e][2] for e, _d in steps), Fraction(0))
                total = da + mid + db
                if best is None or total < best[0]:
                    best = (total, pa, steps, pb)
        _t, pa, steps, pb = best
        pieces = []
        if pa is not None:
            pieces.append(pa)
        for eid, d in steps:
            _u, _v, L = self.edges[eid]
            pieces.append((eid, Fraction(0), L) if d > 0 else (eid, L, Fraction(0)))
        if pb is not None:
            eid, off, end = pb
            pieces.append((eid, end, off))
        return [pc for pc in pieces if pc[1] != pc[2]]

    def distance(self, p, q) -> Fraction:
        return sum((abs(b - a) for _e, a, b in self.geodesic(p, q)), Fraction(0))

    def walk(self, pieces, s: Fraction):
        """Point at distance ``s`` along a piece list."""
        s = Fraction(s)
        if s < 0:
            raise OracleError("negative walk distance")
        if not pieces:
            if s == 0:
                raise OracleError("walk on empty path needs explicit point")
            raise OracleError("walked past the end of the path")
        for eid, a, b in pieces:
            span = abs(b - a)
            if s <= span:
                off = a + s if b > a else a - s
                return self.point(eid, off)
            s -= span
        raise OracleError("walked past the end of the path")

    def total_length(self) -> Fraction:
        return sum((L for _u, _v, L in self.edges.values()), Fraction(0))


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


class PLMap:
    """A morphism between finite trees, pinned down by vertex images.

    Every edge must map isometrically onto the geodesic between its endpoint
    images; this is validated up front, so edges carry no extra data.
    """

    def __init__(self, source: FiniteTree, target: FiniteTree,
                 vertex_images: Dict[str, tuple]):
        self.source = source
        self.target = target
        self.vertex_images = dict(vertex_images)
        problems = self.validate()
        if problems:
            raise OracleError("; ".join(problems))

    def validate(self) -> List[str]:
        problems = []
        for vid in self.source.vertices:
            if vid not in self.vertex_images:
                problems.append(f"vertex {vid} has no image")
        if problems:
            return problems
        for eid, (u, v, L) in self.source.edges.items():
            d = self.target.distance(self.vertex_images[u], self.vertex_images[v])
            if d != L:
                problems.append(f"not isometric on edge {eid}: image distance {d} != {L}")
        return problems

    def image(self, p) -> tuple:
        if p[0] == "v":
            return self.vertex_images[p[1]]
        eid, off = p[1], p[2]
        u, v, _L = self.source.edges[eid]
        fu, fv = self.vertex_images[u], self.vertex_images[v]
        return self.target.walk(self.target.geodesic(fu, fv), off)

    def _breakpoints(self, a, b):
        """Positions along [a, b] where the image path may turn."""
        pieces = self.source.geodesic(a, b)
        positions = [Fraction(0)]
        run = Fraction(0)
        for _e, x, y in pieces:
            run += abs(y - x)
            positions.append(run)
        return pieces, positions

    def tau(self, a, b) -> Fraction:
        """Identification time: the farthest the image of [a, b] strays from
        the common image of the endpoints."""
        fa, fb = self.image(a), self.image(b)
        if fa != fb:
            raise OracleError("points do not have equal images")
        pieces, positions = self._breakpoints(a, b)
        best = Fraction(0)
        for s in positions:
            x = a if s == 0 else self.source.walk(pieces, s)
            d = self.target.distance(fa, self.image(x))
            if d > best:
                best = d
        return best

    def stray(self, a, b) -> Fraction:
        """max over [a,b] of d(f(x), f(a)), with no equal-image requirement."""
        fa = self.image(a)
        pieces, positions = self._breakpoints(a, b)
        best = Fraction(0)
        for s in positions:
            x = a if s == 0 else self.source.walk(pieces, s)
            best = max(best, self.target.distance(fa, self.image(x)))
        return best

    def grid_denominator(self, extra=()) -> int:
        n = 1
        for _u, _v, L in self.source.edges.values():
            n = _lcm(n, L.denominator)
        for _u, _v, L in self.target.edges.values():
            n = _lcm(n, L.denominator)
        for p in self.vertex_images.values():
            if p[0] == "e":
                n = _lcm(n, p[2].denominator)
        for x in extra:
            n = _lcm(n, Fraction(x).denominator)
        return n

    def delta_t(self, a, b, t: Fraction) -> Fraction:
        """The deformed distance at time ``t``: shortest total flesh length
        over subdivisions of [a, b] whose jumps join points with equal image
        and identification time at most ``t``.

        Computed exactly as a shortest path on the 1/N grid along [a, b];
        an optimal straight subdivision has all its points on that grid.
        """
        t = Fraction(t)
        if t < 0:
            raise OracleError("negative time")
        extra = [t]
        for p in (a, b):
            if p[0] == "e":
                extra.append(p[2])
        N = self.grid_denominator(extra)
        step = Fraction(1, N)
        pieces = self.source.geodesic(a, b)
        total = sum((abs(y - x) for _e, x, y in pieces), Fraction(0))
        if total == 0:
            return Fraction(0)
        count = total / step
        assert count.denominator == 1
        count = int(count)
        pts = [a if i == 0 else self.source.walk(pieces, step * i) for i in range(count + 1)]
        images = [self.image(p) for p in pts]

        buckets: Dict[tuple, List[int]] = {}
        for i, im in enumerate(images):
            buckets.setdefault(im, []).append(i)

        jumps: Dict[int, List[int]] = {}
        dist_cache: Dict[tuple, Fraction] = {}

        def idist(i, j):
            key = (min(i, j), max(i, j))
            if key not in dist_cache:
                dist_cache[key] = self.target.distance(images[key[0]], images[key[1]])
            return dist_cache[key]

        for im, idxs in buckets.items():
            for ai in range(len(idxs)):
                for bi in range(ai + 1, len(idxs)):
                    i, j = idxs[ai], idxs[bi]
                    # tau(x_i, x_j) = max image distance at grid points between
                    far = Fraction(0)
                    for m in range(i, j + 1):
                        far = max(far, idist(i, m))
                        if far > t:
                            break
                    if far <= t:
                        jumps.setdefault(i, []).append(j)
                        jumps.setdefault(j, []).append(i)

        dist = {0: Fraction(0)}
        heap = [(Fraction(0), 0)]
        while heap:
            d, i = heapq.heappop(heap)
            if i in dist and d > dist[i]:
                continue
            if i == count:
                return d
            moves = []
            if i + 1 <= count:
                moves.append((i + 1, step))
            if i - 1 >= 0:
                moves.append((i - 1, step))
            for j in jumps.get(i, ()):
                moves.append((j, Fraction(0)))
            for j, c in moves:
                nd = d + c
                if j not in dist or nd < dist[j]:
                    dist[j] = nd
                    heapq.heappush(heap, (nd, j))
        raise OracleError("grid search failed to reach the endpoint")

    def check_monotone(self, a, b, times) -> dict:
        """delta_t at the sampled times plus the endpoint identities."""
        times = sorted(Fraction(x) for x in times)
        values = [self.delta_t(a, b, t) for t in times]
        problems = []
        for (t1, v1), (t2, v2) in zip(zip(times, values), zip(times[1:], values[1:])):
            if v2 > v1:
                problems.append(f"delta increased from {v1} at t={t1} to {v2} at t={t2}")
        d0 = self.source.distance(a, b)
        dinf = self.target.distance(self.image(a), self.image(b))
        if self.delta_t(a, b, Fraction(0)) != d0:
            problems.append("delta_0 differs from the original distance")
        if self.delta_t(a, b, d0 / 2) != dinf:
            problems.append("delta at half the distance differs from the image distance")
        return {"times": times, "values": values, "d0": d0, "dinf": dinf,
                "problems": problems}


# ---------------------------------------------------------------------------
# Explicit quotients.


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def quotient_finite(f: PLMap, t: Fraction):
    """The quotient tree at time ``t`` with its projection map.

    Returns ``(tree, project, rep_point, induced)``: the quotient as a
    finite tree, a function sending any source point on the grid to a
    quotient point, a representative source point for every quotient
    vertex, and the induced map from the quotient to the target.
    """
    t = Fraction(t)
    N = f.grid_denominator([t])
    step = Fraction(1, N)
    src = f.source

    nodes = []
    node_point = {}
    for vid in src.vertices:
        nodes.append(("v", vid))
        node_point[("v", vid)] = ("v", vid)
    micro = []
    for eid in sorted(src.edges):
        u, v, L = src.edges[eid]
        m = L / step
        assert m.denominator == 1
        m = int(m)
        prev = ("v", u)
        for i in range(1, m):
            nd = ("e", eid, step * i)
            nodes.append(nd)
            node_point[nd] = nd
            micro.append((prev, nd))
            prev = nd
        micro.append((prev, ("v", v)))

    images = {nd: f.image(node_point[nd]) for nd in nodes}
    buckets: Dict[tuple, list] = {}
    for nd in nodes:
        buckets.setdefault(images[nd], []).append(nd)
    uf = _UnionFind(nodes)
    for _im, grp in sorted(buckets.items(), key=lambda kv: str(kv[0])):
        for i in range(len(grp)):
            for j in range(i + 1, len(grp)):
                if uf.find(grp[i]) == uf.find(grp[j]):
                    continue
                if f.tau(node_point[grp[i]], node_point[grp[j]]) <= t:
                    uf.union(grp[i], grp[j])

    qedges = {}
    seen_pairs = {}
    for a, b in micro:
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            raise OracleError("quotient collapsed a grid segment")
        key = (min(ra, rb), max(ra, rb))
        if key in seen_pairs:
            continue
        seen_pairs[key] = True
        qedges[f"q{len(qedges)}"] = (str(ra), str(rb), step)
    qverts = sorted({str(uf.find(nd)) for nd in nodes})
    fine = FiniteTree(qverts, qedges)  # raises unless it really is a tree

    # Smooth away degree-2 chain vertices, but keep fold points of the
    # induced map: where the two neighbours share an image, the map turns
    # around and the vertex is an essential feature of the quotient.
    class_image = {}
    for nd in nodes:
        class_image[str(uf.find(nd))] = images[nd]
    keep = set()
    for v in fine.vertices:
        inc = fine.incident(v)
        if len(inc) != 2:
            keep.add(v)
            continue
        nbrs = []
        for eid2, end2 in inc:
            u2, v2, _L2 = fine.edges[eid2]
            nbrs.append(v2 if end2 == 0 else u2)
        if class_image[nbrs[0]] == class_image[nbrs[1]]:
            keep.add(v)
    if not keep:
        keep = {fine.vertices[0]}
    smap: Dict[str, tuple] = {}
    sedges = {}
    visited = set()
    for v in sorted(keep):
        for eid, end in fine.incident(v):
            if eid in visited:
                continue
            chain = [eid]
            visited.add(eid)
            u0, v0, L0 = fine.edges[eid]
            cur = v0 if end == 0 else u0
            run = [(v, Fraction(0))]
            dist = L0
            while cur not in keep:
                run.append((cur, dist))
                nxt = [(e2, d2) for e2, d2 in fine.incident(cur) if e2 not in visited]
                assert len(nxt) == 1
                e2, end2 = nxt[0]
                visited.add(e2)
                chain.append(e2)
                u2, v2, L2 = fine.edges[e2]
                cur = v2 if end2 == 0 else u2
                dist += L2
            sid = f"c{len(sedges)}"
            sedges[sid] = (v, cur, dist)
            for node, at in run[1:]:
                smap[node] = ("e", sid, at)
    smooth = FiniteTree(sorted(keep), sedges)

    rep_of_class: Dict[str, tuple] = {}
    for nd in nodes:
        r = str(uf.find(nd))
        if r not in rep_of_class:
            rep_of_class[r] = node_point[nd]

    def project(p) -> tuple:
        r = str(uf.find(p if p[0] == "v" else p))
        if r in keep:
            return ("v", r)
        return smooth.point(smap[r][1], smap[r][2])

    induced = PLMap(smooth, f.target,
                    {v: images[_node_of_class(v, uf, nodes)] for v in smooth.vertices})
    return smooth, project, rep_of_class, induced


def _node_of_class(rep: str, uf: _UnionFind, nodes) -> tuple:
    for nd in nodes:
        if str(uf.find(nd)) == rep:
            return nd
    raise OracleError(f"unknown class {rep}")


def four_point_condition(tree: FiniteTree) -> List[tuple]:
    """All vertex quadruples violating the 0-hyperbolicity inequality."""
    verts = tree.vertices
    d = {}
    for i, a in enumerate(verts):
        for b in verts[i:]:
            d[(a, b)] = d[(b, a)] = tree.distance(("v", a), ("v", b))
    bad = []
    from itertools import combinations
    for x, y, z, w in combinations(verts, 4):
        s1 = d[(x, y)] + d[(z, w)]
        s2 = d[(x, z)] + d[(y, w)]
        s3 = d[(x, w)] + d[(y, z)]
        if s1 > max(s2, s3) or s2 > max(s1, s3) or s3 > max(s1, s2):
            bad.append((x, y, z, w))
    return bad
