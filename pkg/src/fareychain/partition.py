"""Partition functions by exhaustive enumeration, by recursion and on the grid.

Two families are covered:

* ``Kind.KNAUF``: Z_k(x) = 1(x)|A0 (A0+A1)^k, a sum of 2**k terms
  ((a+c)x + (b+d))**(-2 beta) carrying a hidden leading up spin;
* ``Kind.TILDE``: the same sum without the hidden spin, weights (cx+d)**(-2 beta).

Only the bottom row (c, d) of a product is needed for its weight, and the
bottom row of ``M @ A0`` / ``M @ A1`` is ``(c+d, d)`` / ``(c, c+d)``.
Enumeration splits the sites into a head, whose bottom rows are listed
explicitly, and a tail, whose full matrices are listed once and reused for
every head row. Each head row yields one pairwise-summed partial; partials
are combined with ``math.fsum`` in head order, so the result does not
depend on the number of worker threads.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np

from fareychain.chain import DEFAULT_ENUMERATION_CAP, ChainParams, Spin, SpinWord
from fareychain.errors import ResourceCapError
from fareychain.grid import GridFunction
from fareychain.spectral import DEFAULT_NODES, transfer_power

HARD_CAP = 30
RECURSION_CAP = 24
EXTENDED_PRECISION_CAP = 16
TAIL_BITS = 18


class Kind(enum.Enum):
    TILDE = "tilde"
    KNAUF = "knauf"


@dataclass(frozen=True)
class PartitionSpec:
    kind: Kind
    k: int
    params: ChainParams

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.k < 0:
            raise ValueError("chain length must be nonnegative")


Site = Spin | None


@dataclass(frozen=True)
class ConstraintPattern:
    """Spin chain with some sites fixed: ``left`` free, ``core``, ``right`` free.

    ``core`` starts and ends with a fixed spin and may contain free sites
    (``None``) between fixed ones, e.g. ``(UP, None, None, DOWN)`` for two
    spins separated by a gap of two.
    """

    left: int
    core: tuple[Site, ...]
    right: int
    sites: tuple[Site, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        core = tuple(None if s is None else Spin(s) for s in self.core)
        if not core or core[0] is None or core[-1] is None:
            raise ValueError("core must start and end with a fixed spin")
        if self.left < 0 or self.right < 0:
            raise ValueError("free run lengths must be nonnegative")
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "sites", (None,) * self.left + core + (None,) * self.right)

    @classmethod
    def single(cls, left: int, spin: Spin, right: int) -> "ConstraintPattern":
        return cls(left, (spin,), right)

    @classmethod
    def pair(cls, left: int, first: Spin, gap: int, second: Spin, right: int) -> "ConstraintPattern":
        return cls(left, (first,) + (None,) * gap + (second,), right)

    @classmethod
    def parse(cls, text: str) -> "ConstraintPattern":
        """``'..^..v.'``: ``.`` free, ``^``/``u`` up, ``v``/``d`` down."""
        sites: list[Site] = []
        for ch in text.replace(" ", ""):
            if ch == ".":
                sites.append(None)
            else:
                sites.append(SpinWord.from_string(ch)[0])
        return cls.from_sites(sites)

    @classmethod
    def from_sites(cls, sites: Sequence[Site]) -> "ConstraintPattern":
        fixed = [i for i, s in enumerate(sites) if s is not None]
        if not fixed:
            raise ValueError("pattern needs at least one fixed spin")
        lo, hi = fixed[0], fixed[-1]
        return cls(lo, tuple(sites[lo : hi + 1]), len(sites) - hi - 1)

    @property
    def length(self) -> int:
        return len(self.sites)

    @property
    def fixed_positions(self) -> tuple[int, ...]:
        """0-based positions of the fixed spins."""
        return tuple(i for i, s in enumerate(self.sites) if s is not None)

    @property
    def free_count(self) -> int:
        return sum(s is None for s in self.sites)

    def with_left(self, left: int) -> "ConstraintPattern":
        return ConstraintPattern(left, self.core, self.right)

    def with_right(self, right: int) -> "ConstraintPattern":
        return ConstraintPattern(self.left, self.core, right)

    def refix(self, spins: Sequence[Spin]) -> "ConstraintPattern":
        """Same geometry with the fixed spins replaced, in order."""
        it = iter(spins)
        return ConstraintPattern(self.left, tuple(None if s is None else next(it) for s in self.core), self.right)

    def flipped(self) -> "ConstraintPattern":
        return self.refix([s.flipped() for s in self.core if s is not None])

    def reversed(self) -> "ConstraintPattern":
        return ConstraintPattern(self.right, self.core[::-1], self.left)

    def __str__(self) -> str:
        return "".join("." if s is None else s.symbol for s in self.sites)


# ---------------------------------------------------------------- enumeration


def _check_cap(free: int, cap: int | None) -> int:
    cap = DEFAULT_ENUMERATION_CAP if cap is None else cap
    if cap > HARD_CAP:
        raise ValueError(f"enumeration cap {cap} exceeds the hard limit {HARD_CAP}")
    if free > cap:
        raise ResourceCapError(f"2**{free} configurations exceed the enumeration cap 2**{cap}")
    return cap


def _head_rows(sites: Sequence[Site], row: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    c = np.array([row[0]], dtype=np.int64)
    d = np.array([row[1]], dtype=np.int64)
    for s in sites:
        if s is None:
            c, d = np.concatenate([c + d, c]), np.concatenate([d, c + d])
        elif s is Spin.UP:
            c = c + d
        else:
            d = c + d
    return c, d


def product_matrices(sites: Sequence[Site]) -> np.ndarray:
    """All products over ``sites`` as an (N, 4) array of rows (a, b, c, d)."""
    m = np.array([[1, 0, 0, 1]], dtype=np.int64)
    for s in sites:
        a, b, c, d = m.T
        up = np.stack([a + b, b, c + d, d], axis=1)
        down = np.stack([a, a + b, c, c + d], axis=1)
        if s is None:
            m = np.concatenate([up, down])
        elif s is Spin.UP:
            m = up
        else:
            m = down
    return m


def _split(sites: Sequence[Site]) -> int:
    """Index where the tail starts so that the tail holds <= TAIL_BITS free sites."""
    free = 0
    for i in range(len(sites) - 1, -1, -1):
        if sites[i] is None:
            if free == TAIL_BITS:
                return i + 1
            free += 1
    return 0


def _weighted_sum(sites, row, x: float, beta: float, workers: int) -> float:
    cut = _split(sites)
    hc, hd = _head_rows(sites[:cut], row)
    tail = product_matrices(sites[cut:]).astype(np.float64)
    s00, s01, s10, s11 = tail.T
    two_beta = -2.0 * beta

    def partial(i: int) -> float:
        c = float(hc[i])
        d = float(hd[i])
        den = (c * s00 + d * s10) * x + (c * s01 + d * s11)
        if beta == 0:
            return float(den.size)
        return float(np.sum(np.power(den, two_beta)))

    idx = range(hc.size)
    if workers > 1 and hc.size > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(partial, idx))
    else:
        parts = [partial(i) for i in idx]
    return math.fsum(parts)


def _weighted_sum_mp(sites, row, x, beta, prec: int):
    c, d = _head_rows(sites, row)
    with mpmath.workprec(prec + 16):
        x = mpmath.mpf(x)
        b2 = -2 * mpmath.mpf(beta)
        total = mpmath.fsum(mpmath.exp(b2 * mpmath.log(int(ci) * x + int(di))) for ci, di in zip(c, d))
    with mpmath.workprec(prec):
        return +total


_PREFIX_ROW = {Kind.KNAUF: (1, 1), Kind.TILDE: (0, 1)}


def _sum_sites(sites, kind: Kind, params: ChainParams, cap, workers):
    free = sum(s is None for s in sites)
    _check_cap(free, cap)
    row = _PREFIX_ROW[kind]
    if params.float_precision > 53:
        if free > EXTENDED_PRECISION_CAP:
            raise ResourceCapError(
                f"extended-precision enumeration is limited to 2**{EXTENDED_PRECISION_CAP} terms"
            )
        return _weighted_sum_mp(sites, row, params.x, params.beta, params.float_precision)
    return _weighted_sum(tuple(sites), row, float(params.x), float(params.beta), workers)


def z_brute(spec: PartitionSpec, cap: int | None = None, workers: int = 1):
    """Exhaustive sum of the 2**k configuration weights."""
    return _sum_sites((None,) * spec.k, spec.kind, spec.params, cap, workers)


def z_constrained(pat: ConstraintPattern, params: ChainParams, cap: int | None = None, workers: int = 1):
    """Sum of Knauf-kind weights over configurations matching ``pat``."""
    return _sum_sites(pat.sites, Kind.KNAUF, params, cap, workers)


def z_knauf(k: int, x: float, beta: float, **kw) -> float:
    return z_brute(PartitionSpec(Kind.KNAUF, k, ChainParams(x, beta)), **kw)


# ------------------------------------------------------------------ recursion


def z_recursive(spec: PartitionSpec, cap: int = RECURSION_CAP, form: str = "rec") -> float:
    """Unroll the two-branch length recursion down to the initial condition.

    ``form="rec"``: Z_{k+1}(x) = (1+x)**(-2b) Z_k(x/(1+x)) + Z_k(x+1), valid
    for both kinds. ``form="mrec"`` uses the even variant
    Z_k(x) = (1+x)**(-2b) [Z_{k-1}(x/(1+x)) + Z_{k-1}(1/(1+x))], valid for
    the Knauf kind only.
    """
    if spec.k > cap:
        raise ResourceCapError(f"recursion depth {spec.k} exceeds cap {cap}")
    if form not in ("rec", "mrec"):
        raise ValueError(f"unknown recursion form {form!r}")
    if form == "mrec" and spec.kind is not Kind.KNAUF:
        raise ValueError("the even recursion holds only for the Knauf kind")
    b2 = -2.0 * spec.params.beta
    args = np.array([float(spec.params.x)])
    wts = np.ones(1)
    for _ in range(spec.k):
        shrink = args / (1.0 + args)
        other = args + 1.0 if form == "rec" else 1.0 / (1.0 + args)
        factor = (1.0 + args) ** b2
        if form == "rec":
            wts = np.concatenate([wts * factor, wts])
        else:
            wts = np.concatenate([wts * factor, wts * factor])
        args = np.concatenate([shrink, other])
    if spec.kind is Kind.KNAUF:
        leaves = (1.0 + args) ** b2
    else:
        leaves = np.ones_like(args)
    return float(np.sum(wts * leaves))


# ----------------------------------------------------------------------- grid


def z_grid(k: int, beta: float, nodes: int = DEFAULT_NODES) -> GridFunction:
    """Z_{k-1}(., beta) on [0, 1] as half of K_beta**k applied to 1.

    The returned function carries the evenness extension, so it can be
    evaluated at x > 1 as well.
    """
    if k < 1:
        raise ValueError("z_grid needs k >= 1")
    return transfer_power(k, beta, nodes).scaled(0.5)
