import random
from fractions import Fraction

import pytest

from fpouter.catalog import SIG_Z222, SIG_Z23, build_catalog, marked
from fpouter.graphs import MarkedGraph, translation_length, validate_point
from fpouter.morphisms import (Morphism, base_tree, bass_serre_distance,
                               check_minimality_condition,
                               translation_length_via_points, validate_morphism)
from fpouter.trees import TreeStructure
from fpouter.words import (IDENTITY, conjugate, inverse, multiply, parse_word,
                           syllable_word)

G1 = syllable_word(("f", 0, 1))
G2 = syllable_word(("f", 1, 1))
G3 = syllable_word(("f", 2, 1))


def base_graph_z23():
    return marked(SIG_Z23, {"v1": 0, "v2": 1}, {"A": ("v1", "v2")},
                  {"A": 1}, ["A"])


def star222(a=1, b=1):
    return marked(SIG_Z222, {"v1": 0, "v2": 1, "v3": 2},
                  {"A": ("v1", "v2"), "B": ("v2", "v3")},
                  {"A": a, "B": b}, ["A", "B"])


class TestDistances:
    def test_same_vertex(self):
        g = base_graph_z23()
        assert bass_serre_distance(g, (IDENTITY, "v1"), (IDENTITY, "v1")) == 0

    def test_base_graph_translate(self):
        g = base_graph_z23()
        w = multiply(g.sig, G1, G2)
        pw = parse_word(g.pi1_signature(), "G1.1 * G2.1")
        assert bass_serre_distance(g, (IDENTITY, "v1"), (pw, "v1")) == 2

    def test_star_between_factor_vertices(self):
        # spokes of length 1 from the central factor vertex
        g = marked(SIG_Z222, {"v1": 0, "v2": 1, "v3": 2},
                   {"A": ("v1", "v2"), "B": ("v1", "v3")},
                   {"A": 1, "B": 1}, ["A", "B"])
        assert bass_serre_distance(g, (IDENTITY, "v2"), (IDENTITY, "v3")) == 2
        # on the path-shaped graph the factor endpoints are adjacent instead
        assert bass_serre_distance(star222(), (IDENTITY, "v2"), (IDENTITY, "v3")) == 1

    def test_coset_representatives_ignored(self):
        g = base_graph_z23()
        # multiplying by a stabilizer element does not move the vertex
        pw = parse_word(g.pi1_signature(), "G1.1")
        assert bass_serre_distance(g, (IDENTITY, "v1"), (pw, "v1")) == 0


class TestLengthAgreement:
    def test_elliptic(self):
        g = star222()
        assert translation_length_via_points(g, G1) == 0

    def test_base_example(self):
        g = base_graph_z23()
        assert translation_length_via_points(g, multiply(g.sig, G1, G2)) == 2

    def test_random_agreement_with_loop_route(self, catalog):
        rng = random.Random(13)
        for name, g in catalog:
            ts = TreeStructure(g)
            gens = g.sig.generators()
            for _ in range(25):
                w = IDENTITY
                for _ in range(rng.randrange(5)):
                    s = rng.choice(gens)
                    if s[0] == "t" and rng.random() < 0.5:
                        s = ("t", s[1], -1)
                    w = multiply(g.sig, w, syllable_word(s))
                a = translation_length(g, w)
                b = translation_length_via_points(g, w, ts=ts)
                assert a == b, f"{name}: {w} loop={a} points={b}"


class TestBaseTree:
    def test_fixed_point_of_construction(self):
        g = base_graph_z23()
        t0, f = base_tree(g)
        assert t0.lengths["s2"] == 1
        assert validate_morphism(f).ok
        # single edge mapping isometrically onto the single target edge
        assert len(f.edge_paths["s2"]) == 1

    def test_star_example_lengths(self):
        t0, f = base_tree(star222())
        assert t0.lengths == {"s2": Fraction(1), "s3": Fraction(2)}
        assert validate_point(t0).ok
        assert validate_morphism(f).ok
        ok, _w = check_minimality_condition(f)
        assert ok

    def test_all_catalog_base_lengths_positive(self, instances):
        for inst in instances:
            assert all(x > 0 for x in inst.base.lengths.values())
            assert validate_point(inst.base).ok
            assert validate_morphism(inst.f).ok

    def test_base_cone_is_constant(self, instances):
        from fpouter.graphs import cone_signature
        by_sig = {}
        for inst in instances:
            key = inst.target.sig
            tok = cone_signature(inst.base, include_marking=False)
            by_sig.setdefault(key, set()).add(tok)
        for sig, toks in by_sig.items():
            assert len(toks) == 1

    def test_base_tree_with_inner_shifted_marking(self):
        g = base_graph_z23()
        h = multiply(g.sig, G1, G2)
        to = {tok: conjugate(g.pi1_signature(), wd, h)
              for tok, wd in g.marking_to.items()}
        shifted = MarkedGraph(g.sig, g.vertices, g.edges, g.lengths, g.tree,
                              to, g.marking_from)
        assert validate_point(shifted).ok
        t0, f = base_tree(shifted)
        assert t0.lengths["s2"] == 1
        assert validate_morphism(f).ok
        w = multiply(g.sig, G1, G2)
        assert translation_length_via_points(shifted, w) == \
            translation_length(shifted, w) == 2


class TestMinimality:
    def test_identity_morphism_satisfies_condition(self):
        g = base_graph_z23()
        _t0, f = base_tree(g)
        assert check_minimality_condition(f)[0]

    def test_constructed_violation(self):
        # source with a trivial valence-2 vertex both of whose directions
        # map onto the same target germ
        target = base_graph_z23()
        tt = TreeStructure(target)
        src = marked(SIG_Z23, {"v1": 0, "v2": 1, "c": None},
                     {"A": ("v1", "c"), "B": ("c", "v2")},
                     {"A": Fraction(1, 2), "B": Fraction(1, 2)},
                     ["A", "B"])
        st = TreeStructure(src)
        images = {"v1": tt.vertex_point("v1", IDENTITY),
                  "v2": tt.vertex_point("v2", G2),
                  "c": tt.edge_point("A", IDENTITY, Fraction(1, 2))}
        paths = {"A": [("A", IDENTITY, Fraction(0), Fraction(1, 2))],
                 "B": [("A", IDENTITY, Fraction(1, 2), Fraction(0)),
                       ("A", G2, Fraction(0), Fraction(1, 2))]}
        f = Morphism(src, target, images, paths, source_ts=st, target_ts=tt)
        ok, witness = check_minimality_condition(f)
        assert not ok and witness == "c"


class TestValidateMorphism:
    def test_length_mismatch(self):
        g = base_graph_z23()
        _t0, f = base_tree(g)
        broken = Morphism(f.source, f.target, f.vertex_images,
                          {"s2": [("A", IDENTITY, Fraction(0), Fraction(1, 2))]},
                          source_ts=f.source_ts, target_ts=f.target_ts)
        rep = validate_morphism(broken)
        assert any(code in ("NOT_ISOMETRIC", "ENDPOINT_MISMATCH")
                   for code in rep.codes())

    def test_not_surjective(self):
        target = star222()
        tt = TreeStructure(target)
        src = base_graph = marked(
            SIG_Z222, {"v1": 0, "v2": 1, "v3": 2},
            {"A": ("v1", "v2"), "B": ("v2", "v3")},
            {"A": 1, "B": 1}, ["A", "B"])
        st = TreeStructure(src)
        images = {"v1": tt.vertex_point("v1", IDENTITY),
                  "v2": tt.vertex_point("v2", IDENTITY),
                  "v3": tt.vertex_point("v1", IDENTITY)}
        # map B back onto A: the target edge B is never covered
        paths = {"A": [("A", IDENTITY, Fraction(0), Fraction(1))],
                 "B": [("A", G2, Fraction(1), Fraction(0))]}
        f = Morphism(src, target, images, paths, source_ts=st, target_ts=tt)
        rep = validate_morphism(f)
        assert "NOT_SURJECTIVE" in rep.codes()

    def test_equivariance_violation(self):
        target = base_graph_z23()
        tt = TreeStructure(target)
        src = base_graph_z23()
        st = TreeStructure(src)
        images = {"v1": tt.vertex_point("v1", IDENTITY),
                  "v2": tt.vertex_point("v1", G1)}  # wrong stabilizer
        paths = {"A": [("A", IDENTITY, Fraction(0), Fraction(1))]}
        f = Morphism(src, target, images, paths, source_ts=st, target_ts=tt)
        rep = validate_morphism(f)
        assert "NOT_EQUIVARIANT" in rep.codes()

    def test_base_tree_morphisms_valid_for_catalog(self, instances):
        for inst in instances:
            assert validate_morphism(inst.f).ok


class TestTreeStructureGeometry:
    def test_point_geodesic_total_length(self):
        g = star222()
        ts = TreeStructure(g)
        p = ts.edge_point("A", IDENTITY, Fraction(1, 3))
        q = ts.edge_point("B", G2, Fraction(1, 2))
        pieces = ts.point_geodesic(p, q)
        total = sum(abs(b - a) for _e, _l, a, b in pieces)
        assert total == ts.distance(p, q)
        # continuity of consecutive pieces
        for (e1, l1, _a1, b1), (e2, l2, a2, _b2) in zip(pieces, pieces[1:]):
            assert ts.edge_point(e1, l1, b1) == ts.edge_point(e2, l2, a2)

    def test_exists_vertex_at_distance(self):
        g = star222()
        ts = TreeStructure(g)
        mid = ts.edge_point("A", IDENTITY, Fraction(1, 2))
        assert ts.exists_vertex_at_distance(mid, Fraction(1, 2))
        assert ts.exists_vertex_at_distance(mid, Fraction(3, 2))
        assert not ts.exists_vertex_at_distance(mid, Fraction(1, 3))
        v = ts.vertex_point("v1", IDENTITY)
        assert ts.exists_vertex_at_distance(v, Fraction(0))
        assert ts.exists_vertex_at_distance(v, Fraction(1))
        assert not ts.exists_vertex_at_distance(v, Fraction(1, 7))
