"""Property suites over the built-in catalog.

These drive every headline guarantee: the basepoint length formulas, the
contraction endpoint, the semi-flow law, the linear drop of identification
times, agreement with the brute-force oracle, monotonicity of length
functions, invariance of the space under the flow, and a reproducible
sensitivity constant for target perturbations.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .bridge import oracle_agreement
from .catalog import build_catalog
from .flows import (FoldPath, eq2_check, fold_path, semiflow_check,
                    vertex_locus_check)
from .folding import Aff
from .graphs import (MarkedGraph, default_witnesses, length_vector,
                     translation_length, validate_point)
from .morphisms import (Morphism, base_tree, check_minimality_condition,
                        translation_length_via_points, validate_morphism)
from .oracle import four_point_condition, quotient_finite
from .words import IDENTITY, inverse, multiply, syllable_word


def random_word(sig, rng, maxlen=3):
    gens = sig.generators()
    w = IDENTITY
    for _ in range(rng.randrange(maxlen + 1)):
        s = rng.choice(gens)
        if s[0] == "t" and rng.random() < 0.5:
            s = ("t", s[1], -1)
        w = multiply(sig, w, syllable_word(s))
    return w


def random_point(graph, rng, sig):
    eid = rng.choice(sorted(graph.edges))
    off = Fraction(rng.randrange(1, 8), 8) * graph.lengths[eid]
    return (eid, random_word(sig, rng), off)


def length_functions(path: FoldPath, witnesses) -> List[tuple]:
    """Witness lengths along a fold path, per interval: (t0, t1, {w: Aff})."""
    out = []
    for iv in path.intervals:
        aff = iv.affine_lengths()
        graph = iv.export_at(iv.probe()).graph
        lengths = {eid: Aff(a, b) for eid, (a, b) in aff.items()}
        vec = {w: translation_length(graph, w, lengths=lengths,
                                     zero=Aff(Fraction(0)))
               for w in witnesses}
        out.append((iv.t0, iv.t1, vec))
    return out


def length_value(funcs, w, t: Fraction) -> Fraction:
    for t0, t1, vec in funcs:
        if t1 is None or t < t1:
            if t >= t0:
                return vec[w](t)
    return funcs[-1][2][w](t)


class Instance:
    """A catalog entry together with its basepoint morphism and fold path."""

    def __init__(self, name: str, target: MarkedGraph, event_ceiling: int = 10000):
        self.name = name
        self.target = target
        self.base, self.f = base_tree(target)
        self.path = fold_path(self.f, event_ceiling=event_ceiling)

    def length_functions(self, witnesses) -> List[tuple]:
        return length_functions(self.path, witnesses)


def load_instances(event_ceiling: int = 10000) -> List[Instance]:
    return [Instance(name, g, event_ceiling) for name, g in build_catalog()]


# ---------------------------------------------------------------------------
# individual suites; each returns a list of problem strings


def check_catalog_valid(instances) -> List[str]:
    problems = []
    for inst in instances:
        rep = validate_point(inst.target)
        if not rep.ok:
            problems.append(f"{inst.name}: target invalid: {rep}")
        repm = validate_morphism(inst.f)
        if not repm.ok:
            problems.append(f"{inst.name}: basepoint morphism invalid: {repm}")
        ok, wit = check_minimality_condition(inst.f)
        if not ok:
            problems.append(f"{inst.name}: basepoint morphism folds everything at {wit}")
    return problems


def check_base_lengths(instances) -> List[str]:
    """Spoke and loop lengths of the basepoint tree against the half
    translation length formulas, via both length routes."""
    problems = []
    for inst in instances:
        sig = inst.target.sig
        g1 = syllable_word(("f", 0, 1))
        for i in range(1, sig.num_factors):
            gi = syllable_word(("f", i, 1))
            w = multiply(sig, g1, gi)
            want = Fraction(translation_length(inst.target, w)) / 2
            want2 = Fraction(translation_length_via_points(inst.target, w)) / 2
            got = inst.base.lengths[f"s{i + 1}"]
            if got != want or got != want2:
                problems.append(f"{inst.name}: spoke {i + 1} is {got}, "
                                f"wanted {want} / {want2}")
        for j in range(sig.free_rank):
            tj = syllable_word(("t", j, 1))
            w = multiply(sig, multiply(sig, g1, tj),
                         multiply(sig, g1, inverse(sig, tj)))
            want = Fraction(translation_length(inst.target, w)) / 2
            want2 = Fraction(translation_length_via_points(inst.target, w)) / 2
            got = inst.base.lengths[f"l{j + 1}"]
            if got != want or got != want2:
                problems.append(f"{inst.name}: loop {j + 1} is {got}, "
                                f"wanted {want} / {want2}")
    return problems


def check_endpoints(instances, witness_bound: int = 6) -> List[str]:
    problems = []
    for inst in instances:
        wits = default_witnesses(inst.target.sig, witness_bound)
        v_target = length_vector(inst.target, wits)
        v_end = length_vector(inst.path.export_at(inst.path.t_max).graph, wits)
        if v_target != v_end:
            bad = [w for w, x, y in zip(wits, v_target, v_end) if x != y]
            problems.append(f"{inst.name}: endpoint length vector differs "
                            f"on {len(bad)} witnesses")
    return problems


def check_monotone(instances, witness_bound: int = 6) -> List[str]:
    """Witness lengths along every fold path: piecewise affine,
    non-increasing, continuous at events, constant past the end."""
    problems = []
    for inst in instances:
        wits = default_witnesses(inst.target.sig, witness_bound)
        funcs = inst.length_functions(wits)
        v_target = length_vector(inst.target, wits)
        for w, want in zip(wits, v_target):
            prev_end = None
            for t0, t1, vec in funcs:
                aff = vec[w]
                if aff.b > 0:
                    problems.append(f"{inst.name}: length of {w} increases "
                                    f"on interval [{t0}, {t1})")
                    break
                if prev_end is not None and aff(t0) != prev_end:
                    problems.append(f"{inst.name}: length of {w} jumps at {t0}")
                    break
                prev_end = aff(t1) if t1 is not None else None
            final = funcs[-1][2][w]
            if final.b != 0 or final(inst.path.t_max) != want:
                problems.append(f"{inst.name}: length of {w} not constant at "
                                "the target value past the end")
    return problems


def check_invariance(instances, locus_samples: int = 5) -> List[str]:
    """Every interval tree is a valid point; vertices map into the
    distinguished locus at sampled times."""
    problems = []
    for inst in instances:
        for iv in inst.path.intervals:
            rep = validate_point(iv.export_at(iv.probe()).graph)
            if not rep.ok:
                problems.append(f"{inst.name}: interval at {iv.t0} invalid: {rep}")
        tm = inst.path.t_max
        if tm:
            for j in range(1, locus_samples + 1):
                t = tm * Fraction(j, locus_samples + 1)
                rep = vertex_locus_check(inst.path, t)
                if not rep["ok"]:
                    problems.append(f"{inst.name}: locus at t={t}: {rep['problems']}")
    return problems


def check_semiflow(instances, samples: int, seed: int,
                   witness_bound: int = 4) -> List[str]:
    problems = []
    rng = random.Random(seed)
    flowing = [inst for inst in instances]
    for _ in range(samples):
        inst = rng.choice(flowing)
        tm = inst.path.t_max or Fraction(1)
        t = tm * Fraction(rng.randrange(0, 40), 40)
        s = tm * Fraction(rng.randrange(0, 60), 40)
        rep = semiflow_check(inst.f, s, t, witness_bound=witness_bound,
                             path=inst.path)
        if not rep["ok"]:
            problems.append(f"{inst.name}: semiflow fails at s={s}, t={t}: "
                            f"{rep['problems']}")
    return problems


def check_eq2(instances, samples: int, seed: int) -> Tuple[List[str], int]:
    problems = []
    rng = random.Random(seed)
    flowing = [inst for inst in instances if inst.path.t_max]
    pairs = 0
    for _ in range(samples):
        inst = rng.choice(flowing)
        iv = rng.choice([iv for iv in inst.path.intervals if iv.t1 is not None])
        tprime = iv.t0 + (iv.t1 - iv.t0) * Fraction(rng.randrange(1, 16), 16)
        t = tprime * Fraction(rng.randrange(0, 22), 16)
        rep = eq2_check(inst.path, inst.f, tprime, t)
        pairs += rep["pairs"]
        if not rep["ok"]:
            problems.append(f"{inst.name}: eq2 fails at t'={tprime}, t={t}: "
                            f"{rep['problems'][:2]}")
    return problems, pairs


def check_oracle(instances, samples: int, seed: int) -> List[str]:
    problems = []
    rng = random.Random(seed)
    done = 0
    while done < samples:
        inst = rng.choice(instances)
        sig = inst.target.sig
        a = random_point(inst.base, rng, sig)
        b = random_point(inst.base, rng, sig)
        tm = inst.path.t_max or Fraction(1)
        times = sorted({Fraction(0), tm * Fraction(rng.randrange(1, 10), 10),
                        tm, tm + 1})
        try:
            rep = oracle_agreement(inst.f, inst.path, a, b, times)
        except ValueError:
            continue
        done += 1
        if not rep["ok"]:
            problems.append(f"{inst.name}: oracle disagreement: {rep['problems']}")
            continue
        quot, _proj, _reps, _ind = quotient_finite(rep["plmap"], times[1])
        bad = four_point_condition(quot)
        if bad:
            problems.append(f"{inst.name}: quotient violates the four-point "
                            f"condition on {bad[:2]}")
    return problems


def continuity_constant(target: MarkedGraph, eps: Fraction = Fraction(1, 100),
                        witness_bound: int = 4, time_samples: int = 10) -> Fraction:
    """Largest sensitivity |delta length| / eps over witnesses and sampled
    times when each target edge length is bumped by ``eps`` in turn.

    Deterministic, so reruns reproduce the constant exactly; this is a
    regression surrogate for continuity, not a proof.
    """
    _base0, f0 = base_tree(target)
    path0 = fold_path(f0)
    wits = default_witnesses(target.sig, witness_bound)
    funcs0 = length_functions(path0, wits)
    horizon = path0.t_max + 1
    best = Fraction(0)
    for eid in sorted(target.edges):
        bumped = dict(target.lengths)
        bumped[eid] = bumped[eid] + eps
        target2 = target.with_lengths(bumped)
        _base2, f2 = base_tree(target2)
        funcs2 = length_functions(fold_path(f2), wits)
        for j in range(time_samples + 1):
            t = horizon * Fraction(j, time_samples)
            for w in wits:
                d = abs(length_value(funcs0, w, t) - length_value(funcs2, w, t))
                if d / eps > best:
                    best = d / eps
    return best


def check_finiteness(instances, event_ceiling: int = 10000) -> List[str]:
    """Fold paths terminate below the ceiling with run-stable event counts."""
    problems = []
    for inst in instances:
        n1 = len(inst.path.events)
        if n1 > event_ceiling:
            problems.append(f"{inst.name}: {n1} events exceed the ceiling")
        again = fold_path(inst.f, event_ceiling=event_ceiling)
        if len(again.events) != n1 or again.t_max != inst.path.t_max:
            problems.append(f"{inst.name}: event count not stable across runs")
    return problems


# ---------------------------------------------------------------------------
# the aggregate self-check


def run_selfcheck(seed: int = 0, samples: int = 60, witness_bound: int = 6,
                  event_ceiling: int = 10000, golden: Optional[dict] = None):
    """Run every property suite; returns (report dict, list of lines)."""
    lines = []
    report = {"ok": True, "suites": {}}

    def run(name, fn):
        t0 = time.time()
        problems = fn()
        dt = time.time() - t0
        ok = not problems
        report["suites"][name] = {"ok": ok, "problems": problems,
                                  "seconds": round(dt, 3)}
        report["ok"] = report["ok"] and ok
        lines.append(f"{'PASS' if ok else 'FAIL'} {name} ({dt:.2f}s)"
                     + ("" if ok else f": {problems[:3]}"))

    instances = load_instances(event_ceiling)
    run("catalog-valid", lambda: check_catalog_valid(instances))
    run("base-lengths", lambda: check_base_lengths(instances))
    run("contraction-endpoint",
        lambda: check_endpoints(instances, witness_bound))
    run("monotone-lengths", lambda: check_monotone(instances, witness_bound))
    run("invariance-and-locus", lambda: check_invariance(instances))
    run("semiflow-law", lambda: check_semiflow(instances, samples, seed))
    run("identification-times", lambda: check_eq2(instances, samples, seed + 1)[0])
    run("oracle-agreement",
        lambda: check_oracle(instances, max(4, samples // 3), seed + 2))
    run("finiteness", lambda: check_finiteness(instances, event_ceiling))
    if golden is not None:
        def golden_check():
            problems = []
            for inst in instances:
                k = continuity_constant(inst.target)
                want = golden.get(inst.name)
                if want is None:
                    problems.append(f"{inst.name}: no golden constant recorded")
                elif Fraction(want) != k:
                    problems.append(f"{inst.name}: sensitivity {k} != "
                                    f"recorded {want}")
            return problems
        run("continuity-regression", golden_check)
    return report, lines
