import random
from fractions import Fraction

import pytest

from fpouter.catalog import (SIG_Z222, SIG_Z23, Z2, build_catalog, marked,
                             twist, z2)
from fpouter.graphs import (apply_automorphism, cone_signature,
                            default_witnesses, length_vector,
                            translation_length, validate_point)
from fpouter.words import (IDENTITY, Signature, WordError, conjugate, inverse,
                           multiply, parse_word, power, syllable_word)


def base_graph_z23():
    return marked(SIG_Z23, {"v1": 0, "v2": 1}, {"A": ("v1", "v2")},
                  {"A": 1}, ["A"])


def star222(a=1, b=1):
    return marked(SIG_Z222, {"v1": 0, "v2": 1, "v3": 2},
                  {"A": ("v1", "v2"), "B": ("v2", "v3")},
                  {"A": a, "B": b}, ["A", "B"])


G1 = syllable_word(("f", 0, 1))
G2 = syllable_word(("f", 1, 1))
G3 = syllable_word(("f", 2, 1))


class TestValidation:
    def test_base_graph_valid(self):
        assert validate_point(base_graph_z23()).ok

    def test_terminal_trivial_vertex(self):
        g = marked(SIG_Z23, {"v1": 0, "v2": 1, "c": None},
                   {"A": ("v1", "v2"), "B": ("v2", "c")},
                   {"A": 1, "B": 1}, ["A", "B"])
        codes = validate_point(g).codes()
        assert "TERMINAL_TRIVIAL" in codes

    def test_rank_mismatch(self):
        g = marked(SIG_Z23, {"v1": 0, "v2": 1},
                   {"A": ("v1", "v2"), "B": ("v1", "v2")},
                   {"A": 1, "B": 1}, ["A"])
        codes = validate_point(g).codes()
        assert "RANK_MISMATCH" in codes

    def test_redundant_vertex(self):
        g = marked(SIG_Z23, {"v1": 0, "v2": 1, "c": None},
                   {"A": ("v1", "c"), "B": ("c", "v2")},
                   {"A": 1, "B": 1}, ["A", "B"])
        assert "REDUNDANT_VERTEX" in validate_point(g).codes()

    def test_nonpositive_length(self):
        g = base_graph_z23()
        bad = g.with_lengths({"A": Fraction(-1)})
        assert "NONPOSITIVE_LENGTH" in validate_point(bad).codes()

    def test_factor_vertex_count(self):
        g = marked(SIG_Z23, {"v1": 0, "v2": 0}, {"A": ("v1", "v2")},
                   {"A": 1}, ["A"])
        assert "FACTOR_VERTEX_COUNT" in validate_point(g).codes()

    def test_marking_with_inner_shift_is_accepted(self):
        # compose one side of the marking with conjugation by g1 g2
        g = base_graph_z23()
        h = multiply(g.sig, G1, G2)
        to = {tok: conjugate(g.pi1_signature(), wd, h)
              for tok, wd in g.marking_to.items()}
        shifted = type(g)(g.sig, g.vertices, g.edges, g.lengths, g.tree,
                          to, g.marking_from)
        assert validate_point(shifted).ok
        # and the length function cannot tell the difference
        wits = default_witnesses(g.sig, 4)
        assert length_vector(g, wits) == length_vector(shifted, wits)

    def test_broken_marking_reported(self):
        g = base_graph_z23()
        to = dict(g.marking_to)
        to[("f", 1, 1)] = parse_word(g.pi1_signature(), "G2.2")  # not a hom
        bad = type(g)(g.sig, g.vertices, g.edges, g.lengths, g.tree,
                      to, g.marking_from)
        rep = validate_point(bad)
        assert not rep.ok

    def test_catalog_is_valid(self, catalog):
        for name, g in catalog:
            rep = validate_point(g)
            assert rep.ok, f"{name}: {rep}"


class TestLengths:
    def test_elliptic_factor_element(self):
        assert translation_length(base_graph_z23(), G1) == 0

    def test_base_graph_g1g2(self):
        g = base_graph_z23()
        assert translation_length(g, multiply(g.sig, G1, G2)) == 2

    def test_star_center_distance(self):
        # Z2*Z2*Z2 star with spokes L2 = 1/2 and L3 = 2 from the center
        g = marked(SIG_Z222, {"v1": 0, "v2": 1, "v3": 2, "c": None},
                   {"A": ("c", "v1"), "B": ("c", "v2"), "C": ("c", "v3")},
                   {"A": 1, "B": Fraction(1, 2), "C": 2}, ["A", "B", "C"])
        val = translation_length(g, multiply(g.sig, G2, G3))
        assert val == 2 * (Fraction(1, 2) + 2)

    def test_power_scales_length(self):
        g = star222()
        w = multiply(g.sig, G1, G2)
        base = translation_length(g, w)
        for n in range(1, 6):
            assert translation_length(g, power(g.sig, w, n)) == n * base

    def test_conjugation_and_inverse_invariance(self):
        g = star222()
        rng = random.Random(3)
        gens = [G1, G2, G3]
        for _ in range(50):
            w = IDENTITY
            for _ in range(rng.randrange(6)):
                w = multiply(g.sig, w, rng.choice(gens))
            h = IDENTITY
            for _ in range(rng.randrange(4)):
                h = multiply(g.sig, h, rng.choice(gens))
            lw = translation_length(g, w)
            assert translation_length(g, conjugate(g.sig, w, h)) == lw
            assert translation_length(g, inverse(g.sig, w)) == lw

    def test_elliptic_iff_conjugate_into_factor(self):
        g = star222()
        from fpouter.words import conjugate_into_factor
        rng = random.Random(5)
        gens = [G1, G2, G3]
        for _ in range(80):
            w = IDENTITY
            for _ in range(rng.randrange(6)):
                w = multiply(g.sig, w, rng.choice(gens))
            elliptic = translation_length(g, w) == 0
            conj = w == IDENTITY or conjugate_into_factor(g.sig, w) is not None
            assert elliptic == conj

    def test_length_vector_and_homogeneity(self):
        g = base_graph_z23()
        w12 = multiply(g.sig, G1, G2)
        wits = [G1, w12, power(g.sig, w12, 2)]
        assert length_vector(g, wits) == [0, 2, 4]
        doubled = g.rescale(2)
        assert length_vector(doubled, wits) == [0, 4, 8]
        assert length_vector(g.rescale(Fraction(1, 3)), wits) == \
            [Fraction(0), Fraction(2, 3), Fraction(4, 3)]


class TestRescale:
    def test_identity_and_double_halve(self):
        g = star222()
        assert g.rescale(1).lengths == g.lengths
        assert g.rescale(2).rescale(Fraction(1, 2)).lengths == g.lengths

    def test_normalize(self):
        g = marked(SIG_Z23, {"v1": 0, "v2": 1}, {"A": ("v1", "v2")},
                   {"A": 4}, ["A"])
        assert g.normalize().total_length() == 1
        g2 = star222(1, 3)
        n = g2.normalize()
        assert n.lengths["A"] == Fraction(1, 4)
        assert n.lengths["B"] == Fraction(3, 4)

    def test_rescale_rejects_nonpositive(self):
        with pytest.raises(WordError):
            star222().rescale(0)


class TestAction:
    def test_identity_action(self):
        g = star222()
        images = {tok: (syllable_word(tok) if tok[0] == "f" else
                        syllable_word(("t", tok[1], 1)))
                  for tok in [("f", 0, 1), ("f", 1, 1), ("f", 2, 1)]}
        out = apply_automorphism(g, images, images)
        assert out.marking_to == g.marking_to
        assert out.lengths == g.lengths

    def test_conjugation_preserves_lengths(self):
        g = star222()
        h = multiply(g.sig, G1, G2)
        images = {}
        for tok in [("f", 0, 1), ("f", 1, 1), ("f", 2, 1)]:
            images[tok] = conjugate(g.sig, syllable_word(tok), h)
        inv_images = {}
        hinv = inverse(g.sig, h)
        for tok in [("f", 0, 1), ("f", 1, 1), ("f", 2, 1)]:
            inv_images[tok] = conjugate(g.sig, syllable_word(tok), hinv)
        out = apply_automorphism(g, images, inv_images)
        wits = default_witnesses(g.sig, 4)
        assert length_vector(out, wits) == length_vector(g, wits)

    def test_action_transforms_lengths_by_substitution(self):
        g = star222(1, 2)
        swap = {("f", 0, 1): G1, ("f", 1, 1): G3, ("f", 2, 1): G2}
        out = apply_automorphism(g, swap, swap)
        assert validate_point(out).ok
        wits = default_witnesses(g.sig, 4)
        from fpouter.words import apply_generator_map
        for w, val in zip(wits, length_vector(out, wits)):
            assert val == translation_length(g, apply_generator_map(g.sig, swap, w))

    def test_swap_exchanges_lengths(self):
        g = star222(1, 2)
        w12 = multiply(g.sig, G1, G2)
        w13 = multiply(g.sig, G1, G3)
        l12, l13 = translation_length(g, w12), translation_length(g, w13)
        assert l12 != l13
        swap = {("f", 0, 1): G1, ("f", 1, 1): G3, ("f", 2, 1): G2}
        out = apply_automorphism(g, swap, swap)
        assert translation_length(out, w12) == l13
        assert translation_length(out, w13) == l12

    def test_rejects_non_inverse_pairs(self):
        g = star222()
        images = {("f", 0, 1): G2, ("f", 1, 1): G1, ("f", 2, 1): G3}
        bad_inv = {("f", 0, 1): G1, ("f", 1, 1): G2, ("f", 2, 1): G3}
        with pytest.raises(WordError):
            apply_automorphism(g, images, bad_inv)


class TestWitnesses:
    def test_dedup_and_reduction(self):
        wits = default_witnesses(SIG_Z23, 4)
        seen = set(wits)
        assert len(seen) == len(wits)
        from fpouter.words import is_cyclically_reduced
        for w in wits:
            assert is_cyclically_reduced(w)
            assert inverse(SIG_Z23, w) == w or inverse(SIG_Z23, w) not in seen
            rot = w[1:] + w[:1]
            assert rot == w or rot not in seen

    def test_contains_short_generators(self):
        wits = default_witnesses(SIG_Z222, 2)
        assert G1 in wits
        assert multiply(SIG_Z222, G1, G2) in wits


class TestConeSignature:
    def test_rescale_invariance(self):
        g = star222(1, 2)
        assert cone_signature(g) == cone_signature(g.rescale(3))

    def test_relabeling_invariance(self):
        g1 = marked(SIG_Z222, {"v1": 0, "v2": 1, "v3": 2, "c": None},
                    {"A": ("c", "v1"), "B": ("c", "v2"), "C": ("c", "v3")},
                    {"A": 1, "B": 1, "C": 1}, ["A", "B", "C"])
        g2 = marked(SIG_Z222, {"w1": 0, "w2": 1, "w3": 2, "m": None},
                    {"e": ("m", "w1"), "f": ("m", "w2"), "g": ("w3", "m")},
                    {"e": 2, "f": 1, "g": 5}, ["e", "f", "g"])
        assert cone_signature(g1) == cone_signature(g2)

    def test_distinct_combinatorics(self):
        g1 = star222()
        g2 = marked(SIG_Z222, {"v1": 0, "v2": 1, "v3": 2, "c": None},
                    {"A": ("c", "v1"), "B": ("c", "v2"), "C": ("c", "v3")},
                    {"A": 1, "B": 1, "C": 1}, ["A", "B", "C"])
        assert cone_signature(g1) != cone_signature(g2)

    def test_twist_changes_marked_type_but_not_unmarked(self):
        g = star222()
        tw = twist(g, {("f", 2, 1): (("f", 1, 1), ("f", 2, 1), ("f", 1, 1))},
                   {("f", 2, 1): (("f", 1, 1), ("f", 2, 1), ("f", 1, 1))})
        assert cone_signature(g, include_marking=False) == \
            cone_signature(tw, include_marking=False)
        assert cone_signature(g) != cone_signature(tw)
