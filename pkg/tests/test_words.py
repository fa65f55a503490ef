import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpouter.catalog import S3, Z2, Z3
from fpouter.words import (IDENTITY, FactorGroup, Signature, WordError,
                           conjugate_into_factor, cyclically_reduce,
                           find_inner_conjugator, format_fraction, format_word,
                           inverse, is_cyclically_reduced, multiply, normalize,
                           parse_fraction, parse_word, power, syllable_word)

SIG = Signature([Z2, Z3], 1)


def w(text):
    return parse_word(SIG, text)


def test_identity_multiplication():
    u = w("G1.1 * t1^-2 * G2.1")
    assert multiply(SIG, IDENTITY, u) == u
    assert multiply(SIG, u, IDENTITY) == u


def test_inverse_cancellation_in_z2_star_z2():
    sig = Signature([Z2, Z2], 0)
    ab = parse_word(sig, "G1.1 * G2.1")
    ba = parse_word(sig, "G2.1 * G1.1")
    assert multiply(sig, ab, ba) == IDENTITY


def test_factor_merge_through_free_cancellation():
    sig = Signature([Z3], 1)
    u = parse_word(sig, "G1.1 * t1")
    v = parse_word(sig, "t1^-1 * G1.1")
    assert multiply(sig, u, v) == parse_word(sig, "G1.2")


def test_inverse_examples():
    assert inverse(SIG, IDENTITY) == IDENTITY
    assert inverse(SIG, w("t1^2")) == w("t1^-2")
    u = w("G1.1 * t1 * G2.1")
    assert inverse(SIG, u) == w("G2.2 * t1^-1 * G1.1")
    assert multiply(SIG, u, inverse(SIG, u)) == IDENTITY


def test_cyclic_reduction_examples():
    assert cyclically_reduce(SIG, IDENTITY) == (IDENTITY, IDENTITY)
    sig22 = Signature([Z2, Z2], 0)
    u = parse_word(sig22, "G1.1 * G2.1 * G1.1")
    core, conj = cyclically_reduce(sig22, u)
    assert is_cyclically_reduced(core)
    assert conj == parse_word(sig22, "G1.1")
    back = multiply(sig22, multiply(sig22, conj, core), inverse(sig22, conj))
    assert back == u

    v = w("t1 * G1.1 * t1^-1")
    core, conj = cyclically_reduce(SIG, v)
    assert core == w("G1.1")
    assert conj == w("t1")


def test_conjugate_into_factor():
    assert conjugate_into_factor(SIG, w("t1 * G2.2 * t1^-1")) == \
        (1, 2, w("t1"))
    assert conjugate_into_factor(SIG, w("t1")) is None
    assert conjugate_into_factor(SIG, w("G1.1 * G2.1")) is None


def test_validate_factor_tables():
    assert Z2.validate() == []
    assert Z3.validate() == []
    assert S3.validate() == []
    bad = FactorGroup("bad", [[0, 1], [1, 1]])
    problems = bad.validate()
    assert problems and any("inverse" in p or "identity" in p for p in problems)
    # a non-associative magma with a valid identity row and inverses
    weird = FactorGroup("w", [[0, 1, 2, 3, 4],
                              [1, 0, 3, 4, 2],
                              [2, 4, 0, 1, 3],
                              [3, 2, 4, 0, 1],
                              [4, 3, 1, 2, 0]])
    problems = weird.validate()
    assert any("associativity" in p for p in problems)


def test_s3_is_a_group_of_order_six():
    assert S3.order == 6
    # pick two generators and check the defining symmetric group relations
    a, b = 1, 2  # a transposition and another transposition
    assert S3.mul(a, a) == 0
    assert S3.mul(b, b) == 0


def test_parse_format_roundtrip():
    for text in ["1", "G1.1", "t1^-2", "G1.1 * t1^3 * G2.2", "G2.1 * G1.1 * G2.2"]:
        u = w(text)
        assert parse_word(SIG, format_word(u)) == u


def test_parse_errors():
    with pytest.raises(WordError):
        w("G3.1")  # factor index out of range
    with pytest.raises(WordError):
        w("G1.5")
    with pytest.raises(WordError):
        w("t2")
    with pytest.raises(WordError):
        w("x7")
    with pytest.raises(WordError):
        parse_fraction("3/0")


def test_fraction_roundtrip():
    assert parse_fraction("-4/6") == Fraction(-2, 3)
    assert format_fraction(Fraction(3)) == "3/1"


def _random_syllables(rng, n):
    out = []
    for _ in range(n):
        if rng.random() < 0.6:
            i = rng.randrange(2)
            order = SIG.factors[i].order
            out.append(("f", i, rng.randrange(1, order)))
        else:
            out.append(("t", 0, rng.choice([-2, -1, 1, 2])))
    return out


def test_group_axioms_on_random_triples():
    rng = random.Random(7)
    for _ in range(1000):
        u = normalize(SIG, _random_syllables(rng, rng.randrange(5)))
        v = normalize(SIG, _random_syllables(rng, rng.randrange(5)))
        zz = normalize(SIG, _random_syllables(rng, rng.randrange(5)))
        assert multiply(SIG, multiply(SIG, u, v), zz) == \
            multiply(SIG, u, multiply(SIG, v, zz))
        assert multiply(SIG, u, inverse(SIG, u)) == IDENTITY
        assert multiply(SIG, inverse(SIG, u), u) == IDENTITY


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), max_size=12),
       st.data())
def test_normal_form_independent_of_bracketing(raw, data):
    # interpret integer pairs as syllables over Z2 * Z3 * F1
    syls = []
    for a, b in raw:
        kind = a % 3
        if kind == 0:
            syls.append(("f", 0, 1))
        elif kind == 1:
            syls.append(("f", 1, 1 + b % 2))
        else:
            syls.append(("t", 0, (b % 5) - 2 or 1))
    whole = normalize(SIG, syls)
    if len(syls) >= 2:
        cut = data.draw(st.integers(1, len(syls) - 1))
        left = normalize(SIG, syls[:cut])
        right = normalize(SIG, syls[cut:])
        assert multiply(SIG, left, right) == whole


def test_cyclic_reduction_shrinks_and_conjugates():
    rng = random.Random(11)
    for _ in range(300):
        u = normalize(SIG, _random_syllables(rng, rng.randrange(9)))
        core, conj = cyclically_reduce(SIG, u)
        assert len(core) <= len(u)
        assert is_cyclically_reduced(core)
        assert multiply(SIG, multiply(SIG, conj, core), inverse(SIG, conj)) == u


def test_power():
    u = w("G1.1 * t1")
    assert power(SIG, u, 0) == IDENTITY
    assert power(SIG, u, 3) == multiply(SIG, u, multiply(SIG, u, u))
    assert power(SIG, u, -2) == inverse(SIG, power(SIG, u, 2))


def test_find_inner_conjugator():
    h = w("t1 * G2.1")
    images = {}
    for tok in [("f", 0, 1), ("f", 1, 1), ("f", 1, 2)]:
        images[tok] = multiply(SIG, multiply(SIG, h, syllable_word(tok)),
                               inverse(SIG, h))
    images[("t", 0)] = multiply(SIG, multiply(SIG, h, w("t1")), inverse(SIG, h))
    assert find_inner_conjugator(SIG, images) == h
    # a genuinely outer map: inversion on the Z3 factor
    outer = {("f", 0, 1): w("G1.1"), ("f", 1, 1): w("G2.2"),
             ("f", 1, 2): w("G2.1"), ("t", 0): w("t1")}
    assert find_inner_conjugator(SIG, outer) is None
