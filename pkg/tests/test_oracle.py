import random
from fractions import Fraction

import pytest

from fpouter.oracle import (FiniteTree, OracleError, PLMap,
                            four_point_condition, quotient_finite)


@pytest.fixture
def folded_segment():
    """[0, 2] folded at its midpoint onto a unit segment."""
    src = FiniteTree(["a", "m", "b"],
                     {"e1": ("a", "m", Fraction(1)), "e2": ("m", "b", Fraction(1))})
    tgt = FiniteTree(["p", "q"], {"f1": ("p", "q", Fraction(1))})
    return PLMap(src, tgt, {"a": ("v", "p"), "m": ("v", "q"), "b": ("v", "p")})


class TestFiniteTree:
    def test_rejects_cycles(self):
        with pytest.raises(OracleError):
            FiniteTree(["a", "b"], {"e1": ("a", "b", Fraction(1)),
                                    "e2": ("a", "b", Fraction(1))})

    def test_rejects_disconnected(self):
        with pytest.raises(OracleError):
            FiniteTree(["a", "b", "c", "d"],
                       {"e1": ("a", "b", Fraction(1)),
                        "e2": ("c", "d", Fraction(1))})

    def test_distance_and_walk(self):
        tr = FiniteTree(["a", "b", "c"],
                        {"e1": ("a", "b", Fraction(2)),
                         "e2": ("b", "c", Fraction(3))})
        assert tr.distance(("v", "a"), ("v", "c")) == 5
        p = tr.point("e1", Fraction(1, 2))
        q = tr.point("e2", Fraction(1))
        assert tr.distance(p, q) == Fraction(5, 2)
        geo = tr.geodesic(p, q)
        assert tr.walk(geo, Fraction(3, 2)) == ("v", "b")


class TestTau:
    def test_full_fold(self, folded_segment):
        assert folded_segment.tau(("v", "a"), ("v", "b")) == 1

    def test_equal_points(self, folded_segment):
        assert folded_segment.tau(("v", "a"), ("v", "a")) == 0

    def test_interior_pair(self, folded_segment):
        f = folded_segment
        a = f.source.point("e1", Fraction(1, 2))
        b = f.source.point("e2", Fraction(1, 2))
        assert f.tau(a, b) == Fraction(1, 2)

    def test_rejects_unequal_images(self, folded_segment):
        f = folded_segment
        with pytest.raises(OracleError):
            f.tau(("v", "a"), f.source.point("e1", Fraction(1, 2)))


class TestDelta:
    def test_folded_segment_law(self, folded_segment):
        f = folded_segment
        A, B = ("v", "a"), ("v", "b")
        for t in [0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1]:
            assert f.delta_t(A, B, Fraction(t)) == 2 - 2 * Fraction(t)

    def test_zero_time_is_original_distance(self, folded_segment):
        f = folded_segment
        A, B = ("v", "a"), ("v", "b")
        assert f.delta_t(A, B, Fraction(0)) == f.source.distance(A, B)

    def test_large_time_is_image_distance(self, folded_segment):
        f = folded_segment
        A, B = ("v", "a"), ("v", "b")
        d0 = f.source.distance(A, B)
        dinf = f.target.distance(f.image(A), f.image(B))
        assert f.delta_t(A, B, d0 / 2) == dinf
        assert f.delta_t(A, B, d0) == dinf

    def test_identified_iff_zero(self, folded_segment):
        f = folded_segment
        a = f.source.point("e1", Fraction(1, 4))
        b = f.source.point("e2", Fraction(3, 4))
        tau = f.tau(a, b)
        assert f.delta_t(a, b, tau) == 0
        assert f.delta_t(a, b, tau - Fraction(1, 8)) > 0

    def test_monotone_report(self, folded_segment):
        rep = folded_segment.check_monotone(("v", "a"), ("v", "b"),
                                            [0, Fraction(1, 3), Fraction(2, 3), 1])
        assert not rep["problems"]

    def test_pseudo_metric_triangle(self, folded_segment):
        f = folded_segment
        rng = random.Random(2)
        pts = [("v", "a"), ("v", "b"), ("v", "m"),
               f.source.point("e1", Fraction(1, 4)),
               f.source.point("e2", Fraction(1, 2))]
        for t in [Fraction(1, 4), Fraction(1, 2)]:
            for _ in range(20):
                x, y, z = rng.choice(pts), rng.choice(pts), rng.choice(pts)
                dxy = f.delta_t(x, y, t)
                dyz = f.delta_t(y, z, t)
                dxz = f.delta_t(x, z, t)
                assert dxz <= dxy + dyz


class TestQuotient:
    def test_zero_time_is_isometric(self, folded_segment):
        quot, _proj, _reps, _ind = quotient_finite(folded_segment, Fraction(0))
        assert quot.total_length() == folded_segment.source.total_length()

    def test_full_fold_collapses_to_segment(self, folded_segment):
        quot, _proj, _reps, _ind = quotient_finite(folded_segment, Fraction(1))
        assert quot.total_length() == 1
        assert len(quot.vertices) == 2

    def test_half_fold_shape(self, folded_segment):
        quot, proj, _reps, _ind = quotient_finite(folded_segment, Fraction(1, 2))
        # a tripod: half-length stem plus the two unfolded halves
        assert quot.total_length() == Fraction(3, 2)
        degrees = sorted(len(quot.incident(v)) for v in quot.vertices)
        assert degrees == [1, 1, 1, 3]
        # endpoints a and b are not yet identified, but the deep pair is
        assert proj(("v", "a")) != proj(("v", "b"))
        # the deep grid pair is identified, the shallow one is not
        assert proj(("e", "e1", Fraction(1, 2))) == proj(("e", "e2", Fraction(1, 2)))

    def test_four_point_condition(self, folded_segment):
        for t in [0, Fraction(1, 4), Fraction(1, 2), 1]:
            quot, _p, _r, _i = quotient_finite(folded_segment, Fraction(t))
            assert four_point_condition(quot) == []

    def test_induced_map_and_eq2(self, folded_segment):
        f = folded_segment
        t = Fraction(1, 4)
        quot, proj, _reps, induced = quotient_finite(f, t)
        pairs = [(("v", "a"), ("v", "b")),
                 (f.source.point("e1", Fraction(1, 2)),
                  f.source.point("e2", Fraction(1, 2)))]
        for a, b in pairs:
            tau0 = f.tau(a, b)
            qa, qb = proj(a), proj(b)
            if tau0 <= t:
                assert qa == qb
            else:
                assert induced.tau(qa, qb) == tau0 - t

    def test_quotient_metric_matches_delta(self, folded_segment):
        f = folded_segment
        for t in [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]:
            quot, proj, _r, _i = quotient_finite(f, t)
            grid = [("v", "a"), ("v", "b"), ("v", "m"),
                    ("e", "e1", Fraction(1, 2)), ("e", "e2", Fraction(1, 2))]
            for x in grid:
                for y in grid:
                    assert quot.distance(proj(x), proj(y)) == f.delta_t(x, y, t)


class TestThreeLeggedMap:
    def test_star_onto_segment(self):
        # three legs of lengths 1, 1, 2 folded onto a segment
        src = FiniteTree(["c", "a", "b", "d"],
                        {"e1": ("c", "a", Fraction(1)),
                         "e2": ("c", "b", Fraction(1)),
                         "e3": ("c", "d", Fraction(2))})
        tgt = FiniteTree(["p", "q"], {"f1": ("p", "q", Fraction(2))})
        f = PLMap(src, tgt, {"c": ("v", "p"), "a": tgt.point("f1", Fraction(1)),
                             "b": tgt.point("f1", Fraction(1)), "d": ("v", "q")})
        assert f.tau(("v", "a"), ("v", "b")) == 1
        # legs a and d agree for one unit, then d continues
        assert f.delta_t(("v", "a"), ("v", "d"), Fraction(1, 2)) == 2
        assert f.delta_t(("v", "a"), ("v", "d"), Fraction(1)) == 1
        quot, _p, _r, _i = quotient_finite(f, Fraction(1, 2))
        assert four_point_condition(quot) == []
        # one common stem of depth 1/2, then the three unfolded remainders
        assert quot.total_length() == Fraction(1, 2) + 2 * Fraction(1, 2) + Fraction(3, 2)
        degrees = sorted(len(quot.incident(v)) for v in quot.vertices)
        assert degrees == [1, 1, 1, 1, 4]
