"""Outer space of a free product: marked graphs of groups and fold paths."""

from .words import (FactorGroup, Signature, Word, WordError, multiply, inverse,
                    cyclically_reduce, parse_word, format_word, normalize,
                    parse_fraction, format_fraction)
from .graphs import (MarkedGraph, ValidationReport, validate_point,
                     translation_length, length_vector, default_witnesses,
                     apply_automorphism, cone_signature)
from .trees import TreeStructure
from .morphisms import (Morphism, base_tree, validate_morphism,
                        check_minimality_condition, bass_serre_distance,
                        translation_length_via_points)
from .folding import FlowState, EngineError, FlowPrecondition
from .flows import (fold_path, flow, FoldPath, semiflow_check, tau,
                    vertex_locus_check, eq2_check, contract, identified_pairs)
from .oracle import FiniteTree, PLMap, quotient_finite, four_point_condition

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
