"""Generalized Farey-fraction spin chain: enumeration, recursions, transfer operator."""

from fareychain.chain import (
    A0,
    A1,
    F0,
    F1,
    IDENTITY,
    P,
    ChainParams,
    Mat2,
    Spin,
    SpinWord,
    act,
    action_weight,
    farey_map,
    moebius_apply,
    spin_flip,
    stern_brocot_level,
    word_to_matrix,
)
from fareychain.errors import (
    ConvergenceError,
    DomainError,
    ResourceCapError,
    UnsupportedPatternError,
)

__version__ = "0.1.0"

__all__ = [
    "A0",
    "A1",
    "F0",
    "F1",
    "IDENTITY",
    "P",
    "ChainParams",
    "Mat2",
    "Spin",
    "SpinWord",
    "act",
    "action_weight",
    "farey_map",
    "moebius_apply",
    "spin_flip",
    "stern_brocot_level",
    "word_to_matrix",
    "ConvergenceError",
    "DomainError",
    "ResourceCapError",
    "UnsupportedPatternError",
]
