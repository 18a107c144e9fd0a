"""Exact integer algebra for spin words, the Stern-Brocot structure and the Farey map.

A spin configuration of length k is identified with a product of the two
generators ``A0`` (spin up) and ``A1`` (spin down), leftmost spin first.
Matrix entries are Python integers so that products stay exact at any
length; real-valued quantities (the weight ``(cx+d)**(-2*beta)`` and the
Moebius argument) are evaluated in double precision by default, or with
mpmath when a wider working precision is requested.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import mpmath

from fareychain.errors import DomainError, ResourceCapError

DEFAULT_ENUMERATION_CAP = 26


class Spin(enum.IntEnum):
    UP = 0
    DOWN = 1

    def flipped(self) -> "Spin":
        return Spin(1 - self)

    @property
    def symbol(self) -> str:
        return "^" if self is Spin.UP else "v"


@dataclass(frozen=True)
class Mat2:
    """Row-major 2x2 integer matrix ``[[a, b], [c, d]]``."""

    a: int
    b: int
    c: int
    d: int

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def transpose(self) -> "Mat2":
        return Mat2(self.a, self.c, self.b, self.d)

    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.a, self.b), (self.c, self.d))

    def __iter__(self) -> Iterator[int]:
        return iter((self.a, self.b, self.c, self.d))


IDENTITY = Mat2(1, 0, 0, 1)
A0 = Mat2(1, 0, 1, 1)
A1 = Mat2(1, 1, 0, 1)
P = Mat2(0, 1, 1, 0)
# inverse branches of the Farey map: F0(x) = x/(1+x), F1(x) = 1/(1+x)
F0 = Mat2(1, 0, 1, 1)
F1 = Mat2(0, 1, 1, 1)

GENERATORS = {Spin.UP: A0, Spin.DOWN: A1}


@dataclass(frozen=True)
class SpinWord:
    """A finite spin configuration; position 1 is the leftmost spin."""

    spins: tuple[Spin, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "spins", tuple(Spin(s) for s in self.spins))

    @classmethod
    def from_string(cls, text: str) -> "SpinWord":
        """Parse ``'^'``/``'u'`` as up and ``'v'``/``'d'`` as down."""
        table = {"^": Spin.UP, "u": Spin.UP, "U": Spin.UP, "v": Spin.DOWN, "d": Spin.DOWN, "D": Spin.DOWN}
        try:
            return cls(tuple(table[ch] for ch in text if not ch.isspace()))
        except KeyError as exc:
            raise ValueError(f"unknown spin symbol {exc.args[0]!r}") from None

    @classmethod
    def all_words(cls, k: int) -> Iterator["SpinWord"]:
        """All 2**k words of length k, up-before-down lexicographic order."""
        for spins in itertools.product((Spin.UP, Spin.DOWN), repeat=k):
            yield cls(spins)

    def __len__(self) -> int:
        return len(self.spins)

    def __iter__(self) -> Iterator[Spin]:
        return iter(self.spins)

    def __getitem__(self, i):
        return self.spins[i]

    def __add__(self, other: "SpinWord") -> "SpinWord":
        return SpinWord(self.spins + other.spins)

    def __str__(self) -> str:
        return "".join(s.symbol for s in self.spins)


@dataclass(frozen=True)
class ChainParams:
    x: float
    beta: float
    float_precision: int = 53

    def __post_init__(self):
        if not self.x >= 0:
            raise DomainError(f"x must be nonnegative, got {self.x}")
        if not self.beta >= 0:
            raise DomainError(f"beta must be nonnegative, got {self.beta}")
        if self.float_precision < 53:
            raise ValueError("float_precision must be at least 53 bits")


def word_to_matrix(word: SpinWord | Iterable[Spin]) -> Mat2:
    m = IDENTITY
    for s in word:
        m = m @ GENERATORS[Spin(s)]
    return m


def _check_prec(prec: int) -> bool:
    if prec < 53:
        raise ValueError("precision must be at least 53 bits")
    return prec > 53


def action_weight(m: Mat2, x, beta, prec: int = 53):
    """Weight ``(cx+d)**(-2*beta)`` contributed by ``m`` at ``x``.

    Returns a float at the default precision, an ``mpmath.mpf`` otherwise.
    """
    if _check_prec(prec):
        with mpmath.workprec(prec):
            den = m.c * mpmath.mpf(x) + m.d
            if den <= 0:
                raise DomainError(f"cx+d = {den} is not positive")
            return mpmath.exp(-2 * mpmath.mpf(beta) * mpmath.log(den))
    den = m.c * x + m.d
    if den <= 0:
        raise DomainError(f"cx+d = {den} is not positive")
    if beta == 0:
        return 1.0
    return math.exp(-2.0 * beta * math.log(den))


def moebius_apply(m: Mat2, x, prec: int = 53):
    """``(ax+b)/(cx+d)``."""
    if _check_prec(prec):
        with mpmath.workprec(prec):
            x = mpmath.mpf(x)
            den = m.c * x + m.d
            if den == 0:
                raise DomainError("vanishing Moebius denominator")
            return (m.a * x + m.b) / den
    if isinstance(x, Fraction):
        den = m.c * x + m.d
        if den == 0:
            raise DomainError("vanishing Moebius denominator")
        return (m.a * x + m.b) / den
    den = m.c * x + m.d
    if den == 0:
        raise DomainError("vanishing Moebius denominator")
    return (m.a * x + m.b) / den


def act(m: Mat2, f, x, beta):
    """The slash action ``f(x)|m = (cx+d)**(-2 beta) f((ax+b)/(cx+d))``."""
    return action_weight(m, x, beta) * f(moebius_apply(m, x))


def spin_flip(word: SpinWord) -> SpinWord:
    return SpinWord(tuple(s.flipped() for s in word))


def stern_brocot_level(k: int, cap: int = DEFAULT_ENUMERATION_CAP) -> list[tuple[int, int]]:
    """Farey fractions reached at level k, as ``(numerator, denominator)`` pairs.

    Each word w of length k contributes the left column ``a/c`` of
    ``A0 @ word_to_matrix(w)``; the 2**k fractions are distinct, lie in
    (0, 1] and are returned in increasing order.
    """
    if k < 0:
        raise ValueError("level must be nonnegative")
    if k > cap:
        raise ResourceCapError(f"level {k} exceeds enumeration cap {cap}")
    frontier = [A0]
    for _ in range(k):
        frontier = [m @ g for m in frontier for g in (A0, A1)]
    return sorted(((m.a, m.c) for m in frontier), key=lambda p: Fraction(*p))


def farey_map(x):
    if not 0 <= x <= 1:
        raise DomainError(f"Farey map is defined on [0, 1], got {x}")
    if 2 * x <= 1:
        return x / (1 - x)
    return (1 - x) / x
