"""Exact arithmetic in a free product of finite groups and a free group.

Elements are normal-form words: tuples of syllables, where a syllable is
either ``("f", i, e)`` (element ``e != 0`` of the ``i``-th finite factor) or
``("t", j, n)`` (the ``j``-th free letter raised to ``n != 0``).  Adjacent
syllables never share a factor index or a free letter, so every group
element has exactly one representation and tuples can be compared directly.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

Syllable = Tuple[str, int, int]
Word = Tuple[Syllable, ...]

IDENTITY: Word = ()


class WordError(ValueError):
    """Malformed element: bad syllable shape or out-of-range reference."""


class FactorGroup:
    """A finite group given by its multiplication table.

    Element 0 is the identity.  ``table[a][b]`` is the product ``a*b``.
    The inverse array is derived from the table (and cross-checked against
    an explicit one if supplied).
    """

    def __init__(self, name: str, table: Sequence[Sequence[int]], inverse=None):
        self.name = name
        self.table = tuple(tuple(int(x) for x in row) for row in table)
        self.order = len(self.table)
        inv = [None] * self.order
        for a in range(self.order):
            row = self.table[a] if a < len(self.table) else ()
            for b in range(min(self.order, len(row))):
                if row[b] == 0:
                    inv[a] = b
        self.inverse = tuple(-1 if x is None else x for x in inv)
        if inverse is not None and tuple(inverse) != self.inverse:
            raise WordError(f"factor {name}: supplied inverse array disagrees with table")

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverse[a]

    def validate(self) -> list:
        """Check the group axioms exhaustively; return a list of violations."""
        problems = []
        n = self.order
        if n < 2:
            problems.append(f"factor {self.name}: order {n} < 2")
        for a, row in enumerate(self.table):
            if len(row) != n:
                problems.append(f"factor {self.name}: row {a} has length {len(row)} != {n}")
                return problems
            for b, x in enumerate(row):
                if not 0 <= x < n:
                    problems.append(f"factor {self.name}: entry ({a},{b}) = {x} out of range")
                    return problems
        for a in range(n):
            if self.table[0][a] != a or self.table[a][0] != a:
                problems.append(f"factor {self.name}: 0 is not a two-sided identity at {a}")
        for a in range(n):
            if self.inverse[a] < 0 or self.table[self.inverse[a]][a] != 0:
                problems.append(f"factor {self.name}: element {a} has no two-sided inverse")
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                        problems.append(
                            f"factor {self.name}: associativity fails at ({a},{b},{c})")
                        return problems
        return problems

    def __eq__(self, other):
        return isinstance(other, FactorGroup) and self.table == other.table

    def __hash__(self):
        return hash(self.table)

    def __repr__(self):
        return f"FactorGroup({self.name!r}, order={self.order})"


class Signature:
    """A free product shape: an ordered list of finite factors and a free rank."""

    def __init__(self, factors: Sequence[FactorGroup], free_rank: int):
        self.factors = tuple(factors)
        self.free_rank = int(free_rank)
        if self.free_rank < 0:
            raise WordError("free rank must be non-negative")

    @property
    def num_factors(self) -> int:
        return len(self.factors)

    def check_ambient(self) -> list:
        """Constraints for use as the ambient group: p >= 1 and p + k >= 2."""
        problems = []
        if len(self.factors) < 1:
            problems.append("ambient signature needs at least one finite factor")
        if len(self.factors) + self.free_rank < 2:
            problems.append("ambient signature needs p + k >= 2")
        for f in self.factors:
            problems.extend(f.validate())
        return problems

    def generators(self) -> list:
        """All standard generators: every non-identity factor element, every letter."""
        gens = []
        for i, f in enumerate(self.factors):
            for e in range(1, f.order):
                gens.append(("f", i, e))
        for j in range(self.free_rank):
            gens.append(("t", j, 1))
        return gens

    def __eq__(self, other):
        return (isinstance(other, Signature) and self.factors == other.factors
                and self.free_rank == other.free_rank)

    def __hash__(self):
        return hash((self.factors, self.free_rank))

    def __repr__(self):
        names = "*".join(f.name for f in self.factors)
        return f"Signature({names}*F{self.free_rank})"


def _check_syllable(sig: Signature, s) -> None:
    if not (isinstance(s, tuple) and len(s) == 3):
        raise WordError(f"bad syllable {s!r}")
    kind, idx, val = s
    if kind == "f":
        if not 0 <= idx < len(sig.factors):
            raise WordError(f"factor index {idx} out of range")
        if not 1 <= val < sig.factors[idx].order:
            raise WordError(f"element index {val} out of range for factor {idx}")
    elif kind == "t":
        if not 0 <= idx < sig.free_rank:
            raise WordError(f"free letter index {idx} out of range")
        if val == 0:
            raise WordError("free syllable with zero exponent")
    else:
        raise WordError(f"unknown syllable kind {kind!r}")


def _push(sig: Signature, stack: list, s: Syllable) -> None:
    # Merge one syllable onto a normal-form stack.
    kind, idx, val = s
    while stack and stack[-1][0] == kind and stack[-1][1] == idx:
        pk, pi, pv = stack.pop()
        if kind == "f":
            val = sig.factors[idx].mul(pv, val)
        else:
            val = pv + val
        if val == 0:
            return
        break
    stack.append((kind, idx, val))


def normalize(sig: Signature, syllables: Iterable[Syllable]) -> Word:
    """Reduce an arbitrary syllable sequence to normal form."""
    stack: list = []
    for s in syllables:
        _check_syllable(sig, s)
        _push(sig, stack, s)
    return tuple(stack)


def multiply(sig: Signature, u: Word, v: Word) -> Word:
    """Product of two normal forms, again in normal form."""
    stack = list(u)
    for s in v:
        _check_syllable(sig, s)
        _push(sig, stack, s)
    return tuple(stack)


def multiply_all(sig: Signature, words: Iterable[Word]) -> Word:
    out: Word = IDENTITY
    for w in words:
        out = multiply(sig, out, w)
    return out


def inverse(sig: Signature, u: Word) -> Word:
    out = []
    for kind, idx, val in reversed(u):
        if kind == "f":
            out.append(("f", idx, sig.factors[idx].inv(val)))
        else:
            out.append(("t", idx, -val))
    return tuple(out)


def conjugate(sig: Signature, u: Word, by: Word) -> Word:
    """``by * u * by^-1``."""
    return multiply(sig, multiply(sig, by, u), inverse(sig, by))


def power(sig: Signature, u: Word, n: int) -> Word:
    if n < 0:
        return power(sig, inverse(sig, u), -n)
    out: Word = IDENTITY
    for _ in range(n):
        out = multiply(sig, out, u)
    return out


def syllable_word(s: Syllable) -> Word:
    return (s,)


def is_cyclically_reduced(u: Word) -> bool:
    if len(u) < 2:
        return True
    first, last = u[0], u[-1]
    return not (first[0] == last[0] and first[1] == last[1])


def cyclically_reduce(sig: Signature, u: Word):
    """Write ``u = c * core * c^-1`` with ``core`` cyclically reduced.

    Returns ``(core, c)``.  The first and last syllables of ``core`` involve
    different factors/letters (or ``core`` has at most one syllable).
    """
    core = u
    conj: Word = IDENTITY
    while not is_cyclically_reduced(core):
        head = syllable_word(core[0])
        conj = multiply(sig, conj, head)
        core = multiply(sig, multiply(sig, inverse(sig, head), core), head)
    return core, conj


def conjugate_into_factor(sig: Signature, u: Word) -> Optional[Tuple[int, int, Word]]:
    """If ``u = c (i,e) c^-1`` for a factor element, return ``(i, e, c)``.

    Returns None when ``u`` is not conjugate into any finite factor (in
    particular for the identity and for every hyperbolic element).
    """
    core, conj = cyclically_reduce(sig, u)
    if len(core) == 1 and core[0][0] == "f":
        return core[0][1], core[0][2], conj
    return None


def apply_generator_map(sig_out: Signature, gen_map: dict, w: Word) -> Word:
    """Substitute generator images through ``gen_map`` and normalize.

    ``gen_map`` sends every generator of the word's own signature (keys
    ``("f", i, e)`` and ``("t", j)``) to a word over ``sig_out``.
    """
    out: Word = IDENTITY
    for kind, idx, val in w:
        if kind == "f":
            img = gen_map[("f", idx, val)]
            out = multiply(sig_out, out, img)
        else:
            img = gen_map[("t", idx)]
            out = multiply(sig_out, out, power(sig_out, img, val))
    return out


def find_inner_conjugator(sig: Signature, images: dict) -> Optional[Word]:
    """Find ``h`` with ``images[x] = h x h^-1`` for every generator, if any.

    ``images`` maps every generator token of ``sig`` (as in
    :meth:`Signature.generators`, keyed ``("f", i, e)`` / ``("t", j)``) to a
    word over ``sig``.  The candidate conjugators come from the conjugacy
    structure of the image of the first factor: if the map is inner, the
    image of any non-trivial element of factor 0 pins ``h`` down to a coset
    of that factor, which is finite and can be checked exhaustively.
    """
    probe = images[("f", 0, 1)]
    hit = conjugate_into_factor(sig, probe)
    if hit is None:
        return None
    i, _e, c = hit
    if i != 0:
        return None
    gens = []
    for fi, f in enumerate(sig.factors):
        for e in range(1, f.order):
            gens.append((("f", fi, e), ("f", fi, e)))
    for j in range(sig.free_rank):
        gens.append((("t", j), ("t", j, 1)))
    order0 = sig.factors[0].order
    for z in range(order0):
        h = multiply(sig, c, syllable_word(("f", 0, z))) if z else c
        ok = True
        for key, syl in gens:
            if images[key] != conjugate(sig, syllable_word(syl), h):
                ok = False
                break
        if ok:
            return h
    return None


# ---------------------------------------------------------------------------
# Text grammar: syllables joined by '*'; `Gi.k` for factor elements,
# `tj` / `tj^n` for free letters, `1` for the identity.

def format_word(u: Word) -> str:
    if not u:
        return "1"
    parts = []
    for kind, idx, val in u:
        if kind == "f":
            parts.append(f"G{idx + 1}.{val}")
        elif val == 1:
            parts.append(f"t{idx + 1}")
        else:
            parts.append(f"t{idx + 1}^{val}")
    return " * ".join(parts)


def parse_word(sig: Signature, text: str) -> Word:
    text = text.strip()
    if text == "1" or text == "":
        return IDENTITY
    syllables = []
    for chunk in text.split("*"):
        tok = chunk.strip()
        if tok == "1":
            continue
        if tok.startswith("G") or tok.startswith("g"):
            body = tok[1:]
            if "." not in body:
                raise WordError(f"bad factor syllable {tok!r}")
            fi, _, ei = body.partition(".")
            try:
                i, e = int(fi) - 1, int(ei)
            except ValueError:
                raise WordError(f"bad factor syllable {tok!r}") from None
            syllables.append(("f", i, e))
        elif tok.startswith("t"):
            body = tok[1:]
            if "^" in body:
                ji, _, ni = body.partition("^")
            else:
                ji, ni = body, "1"
            try:
                j, n = int(ji) - 1, int(ni)
            except ValueError:
                raise WordError(f"bad free syllable {tok!r}") from None
            syllables.append(("t", j, n))
        else:
            raise WordError(f"bad syllable {tok!r}")
    return normalize(sig, syllables)


def parse_fraction(text) -> Fraction:
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip()
    if "/" in s:
        p, _, q = s.partition("/")
        qv = int(q)
        if qv == 0:
            raise WordError(f"bad rational {text!r}: zero denominator")
        return Fraction(int(p), qv)
    return Fraction(int(s))


def format_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"
