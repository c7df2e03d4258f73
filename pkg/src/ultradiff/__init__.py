"""Numerical toolkit for Denjoy-Carleman weight sequences and the a priori
estimates built on them."""

from .assoc import OmegaTable, lemma2_fit, omega_brute, omega_fast
from .ladder import Ladder, LadderError, build_ladder, maximality_check, verify_ladder
from .weights import (
    WeightSequence,
    admissibility_summary,
    compare,
    make_gevrey,
    make_log_family,
    make_q_family,
    parse_sequence,
)

__version__ = "0.1.0"

__all__ = [
    "OmegaTable", "lemma2_fit", "omega_brute", "omega_fast",
    "Ladder", "LadderError", "build_ladder", "maximality_check", "verify_ladder",
    "WeightSequence", "admissibility_summary", "compare", "make_gevrey", "make_log_family",
    "make_q_family", "parse_sequence",
]
