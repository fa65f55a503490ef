"""A small catalog of marked graphs used by tests, the self-check command,
and the acceptance suite.

Groups: Z/2 * Z/2 * Z/2, Z/2 * Z/3, Z/2 * Z/2 * F1, Z/3 * F1; shapes with
spokes, interior trivial vertices, loops and parallel edges; some entries
carry markings twisted by outer automorphisms.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Tuple

from .graphs import MarkedGraph, apply_automorphism
from .words import FactorGroup, Signature

Z2_TABLE = [[0, 1], [1, 0]]
Z3_TABLE = [[0, 1, 2], [1, 2, 0], [2, 0, 1]]


def z2(name: str = "Z2") -> FactorGroup:
    return FactorGroup(name, Z2_TABLE)


def z3(name: str = "Z3") -> FactorGroup:
    return FactorGroup(name, Z3_TABLE)


Z2 = z2()
Z3 = z3()


def s3_table():
    """The symmetric group on three letters, elements numbered by their
    one-line notation in lexicographic order (identity first)."""
    perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(q[p[i]] for i in range(3))] for q in perms] for p in perms]
    return table


S3 = FactorGroup("S3", s3_table())

# distinct factor names keep document serialization unambiguous
SIG_Z222 = Signature([z2("Z2a"), z2("Z2b"), z2("Z2c")], 0)
SIG_Z23 = Signature([Z2, Z3], 0)
SIG_Z221 = Signature([z2("Z2a"), z2("Z2b")], 1)
SIG_Z31 = Signature([Z3], 1)


def _tautological_marking(sig: Signature):
    to = {}
    frm = {}
    for i, f in enumerate(sig.factors):
        for e in range(1, f.order):
            to[("f", i, e)] = (("f", i, e),)
            frm[("f", i, e)] = (("f", i, e),)
    for j in range(sig.free_rank):
        to[("t", j)] = (("t", j, 1),)
        frm[("t", j)] = (("t", j, 1),)
    return to, frm


def marked(sig, vertices, edges, lengths, tree) -> MarkedGraph:
    to, frm = _tautological_marking(sig)
    lengths = {e: Fraction(x) for e, x in lengths.items()}
    return MarkedGraph(sig, vertices, edges, lengths, tree, to, frm)


def _identity_images(sig):
    images = {}
    for i, f in enumerate(sig.factors):
        for e in range(1, f.order):
            images[("f", i, e)] = (("f", i, e),)
    for j in range(sig.free_rank):
        images[("t", j)] = (("t", j, 1),)
    return images


def twist(graph: MarkedGraph, changes, inverse_changes) -> MarkedGraph:
    """Apply the automorphism given by a few changed generator images."""
    images = _identity_images(graph.sig)
    images.update(changes)
    inv = _identity_images(graph.sig)
    inv.update(inverse_changes)
    return apply_automorphism(graph, images, inv)


def build_catalog() -> List[Tuple[str, MarkedGraph]]:
    out = []

    # --- Z/2 * Z/2 * Z/2 ---------------------------------------------------
    path222 = marked(SIG_Z222,
                     {"v1": 0, "v2": 1, "v3": 2},
                     {"A": ("v1", "v2"), "B": ("v2", "v3")},
                     {"A": 1, "B": 1}, ["A", "B"])
    out.append(("z222_path", path222))

    out.append(("z222_star_center",
                marked(SIG_Z222,
                       {"v1": 0, "v2": 1, "v3": 2, "c": None},
                       {"A": ("c", "v1"), "B": ("c", "v2"), "C": ("c", "v3")},
                       {"A": 1, "B": Fraction(1, 2), "C": 2}, ["A", "B", "C"])))

    # partial conjugation: g3 -> g2 g3 g2, an outer automorphism
    out.append(("z222_twisted",
                twist(marked(SIG_Z222,
                             {"v1": 0, "v2": 1, "v3": 2},
                             {"A": ("v2", "v1"), "B": ("v1", "v3")},
                             {"A": Fraction(3, 4), "B": Fraction(5, 4)},
                             ["A", "B"]),
                      {("f", 2, 1): (("f", 1, 1), ("f", 2, 1), ("f", 1, 1))},
                      {("f", 2, 1): (("f", 1, 1), ("f", 2, 1), ("f", 1, 1))})))

    # --- Z/2 * Z/3 ----------------------------------------------------------
    out.append(("z23_edge",
                marked(SIG_Z23, {"v1": 0, "v2": 1}, {"A": ("v1", "v2")},
                       {"A": 1}, ["A"])))
    out.append(("z23_edge_long",
                marked(SIG_Z23, {"v1": 0, "v2": 1}, {"A": ("v2", "v1")},
                       {"A": Fraction(5, 3)}, ["A"])))

    # --- Z/2 * Z/2 * F1 -----------------------------------------------------
    theta = marked(SIG_Z221, {"v1": 0, "v2": 1},
                   {"A": ("v1", "v2"), "B": ("v1", "v2")},
                   {"A": 1, "B": Fraction(3, 2)}, ["A"])
    out.append(("z221_theta", theta))

    out.append(("z221_loop_mid",
                marked(SIG_Z221, {"v1": 0, "v2": 1, "c": None},
                       {"A": ("v1", "c"), "B": ("c", "v2"), "L": ("c", "c")},
                       {"A": Fraction(1, 2), "B": Fraction(1, 2), "L": 1},
                       ["A", "B"])))

    out.append(("z221_twisted",
                twist(theta,
                      {("t", 0): (("f", 0, 1), ("t", 0, 1))},
                      {("t", 0): (("f", 0, 1), ("t", 0, 1))})))

    # --- Z/3 * F1 -----------------------------------------------------------
    rose = marked(SIG_Z31, {"v1": 0}, {"L": ("v1", "v1")}, {"L": 1}, [])
    out.append(("z31_rose", rose))

    out.append(("z31_lollipop",
                marked(SIG_Z31, {"v1": 0, "c": None},
                       {"A": ("v1", "c"), "L": ("c", "c")},
                       {"A": Fraction(1, 2), "L": 1}, ["A"])))

    out.append(("z31_twisted",
                twist(rose,
                      {("t", 0): (("f", 0, 1), ("t", 0, 1))},
                      {("t", 0): (("f", 0, 2), ("t", 0, 1))})))

    out.append(("z222_path_uneven",
                marked(SIG_Z222,
                       {"v1": 0, "v2": 1, "v3": 2},
                       {"A": ("v1", "v2"), "B": ("v2", "v3")},
                       {"A": Fraction(1, 3), "B": Fraction(7, 4)},
                       ["A", "B"])))

    # deeper twists: longer fold paths with several events
    out.append(("z222_deep_twist",
                twist(path222,
                      {("f", 2, 1): (("f", 0, 1), ("f", 1, 1), ("f", 2, 1),
                                     ("f", 1, 1), ("f", 0, 1))},
                      {("f", 2, 1): (("f", 1, 1), ("f", 0, 1), ("f", 2, 1),
                                     ("f", 0, 1), ("f", 1, 1))})))

    loop_mid = marked(SIG_Z221, {"v1": 0, "v2": 1, "c": None},
                      {"A": ("v1", "c"), "B": ("c", "v2"), "L": ("c", "c")},
                      {"A": Fraction(1, 2), "B": Fraction(1, 2), "L": 1},
                      ["A", "B"])
    out.append(("z221_loop_twisted",
                twist(loop_mid,
                      {("t", 0): (("f", 1, 1), ("t", 0, 1), ("f", 0, 1))},
                      {("t", 0): (("f", 1, 1), ("t", 0, 1), ("f", 0, 1))})))
    return out


def catalog_dict() -> Dict[str, MarkedGraph]:
    return dict(build_catalog())
