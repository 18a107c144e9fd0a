"""Spin expectation values: finite chains by enumeration, infinite chains in closed form.

Closed forms are polynomials in the leading eigenvalue lam of the transfer
operator and hold below the transition (beta < 1) for the Knauf chain
(x = 0) with the left end sent to infinity. Every closed form has an
enumeration counterpart: finite left lengths, then geometric extrapolation
in the left length.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from fareychain.chain import ChainParams, Spin
from fareychain.errors import DomainError, UnsupportedPatternError
from fareychain.partition import (
    ConstraintPattern,
    Kind,
    PartitionSpec,
    product_matrices,
    z_brute,
    z_constrained,
)
from fareychain.spectral import CRITICAL_BETA, SpectralResult

UP, DOWN = Spin.UP, Spin.DOWN


class Mode(enum.Enum):
    FINITE = "finite"
    INFINITE_LEFT = "infinite-left"
    INFINITE_BOTH = "infinite-both"


@dataclass(frozen=True)
class ExpectationQuery:
    """A pattern to evaluate; in the infinite modes ``pattern.left`` (and
    ``pattern.right`` for INFINITE_BOTH) is ignored."""

    pattern: ConstraintPattern
    params: ChainParams
    mode: Mode = Mode.FINITE

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))


@dataclass(frozen=True)
class UnDnValues:
    n: int
    x: float
    u: float
    d: float


class NonGeometricDecayWarning(UserWarning):
    pass


def _require_subcritical(beta: float, res: SpectralResult | None = None):
    if beta >= CRITICAL_BETA:
        raise DomainError("infinite-chain closed forms need beta < 1")
    if res is not None and not math.isclose(res.beta, beta, rel_tol=0, abs_tol=1e-15):
        raise ValueError(f"spectral result is for beta={res.beta}, not {beta}")


# ------------------------------------------------------------- finite chains


@lru_cache(maxsize=256)
def _z_full(length: int, x: float, beta: float, cap) -> float:
    return z_brute(PartitionSpec(Kind.KNAUF, length, ChainParams(x, beta)), cap=cap)


def expect_finite(q: ExpectationQuery, cap: int | None = None) -> float:
    """Probability of the pattern's fixed spins in a finite Knauf-kind chain."""
    if q.mode is not Mode.FINITE:
        raise ValueError("expect_finite handles finite chains only")
    pat, p = q.pattern, q.params
    num = z_constrained(pat, p, cap=cap)
    den = _z_full(pat.length, float(p.x), float(p.beta), cap)
    return num / den


def finite(pattern: ConstraintPattern | str, x: float, beta: float, cap: int | None = None) -> float:
    if isinstance(pattern, str):
        pattern = ConstraintPattern.parse(pattern)
    return expect_finite(ExpectationQuery(pattern, ChainParams(x, beta)), cap=cap)


def one_spin_K(left: int, right: int, beta: float, cap: int | None = None) -> float:
    """(Z_l(0) - Z_l(1)) / (Z_l|A0 (A0+A1)^r at x=0), each term by enumeration."""
    z0 = _z_full(left, 0.0, float(beta), cap)
    z1 = _z_full(left, 1.0, float(beta), cap)
    num = z_constrained(ConstraintPattern.single(left, UP, right), ChainParams(0.0, beta), cap=cap)
    return (z0 - z1) / num


def expect_one_spin_via_K(left: int, right: int, beta: float, cap: int | None = None) -> float:
    """Up-spin probability at x = 0 written as 1/(2 - K)."""
    K = one_spin_K(left, right, beta, cap)
    # rounding can push K a hair outside [0, 1] when beta = 0
    if not -1e-12 <= K <= 1 + 1e-12:
        raise ArithmeticError(f"K = {K} outside [0, 1]")
    return 1.0 / (2.0 - K)


# ------------------------------------------------------- infinite-left chains


def expect_right_edge_infinite(r: int, beta: float, res: SpectralResult) -> float:
    """Up-spin probability r + 1 sites from the right end of a left-infinite chain."""
    _require_subcritical(beta, res)
    lam = res.lam
    return 0.5 * (1.0 + (2.0 - lam) / lam ** (r + 1))


def u_n_d_n(n: int, x: float, beta: float, res: SpectralResult, path: str = "operator") -> UnDnValues:
    """U_n(x) = a(x)|A0 (A0+A1)^n and D_n(x) = a(x)|A1 (A0+A1)^n.

    ``path="operator"`` sums the 2**n slash actions on the numerical
    eigenfunction (arguments beyond 1 go through evenness).
    ``path="closed"`` uses the closed forms available at x = 0 and x = 1.
    """
    _require_subcritical(beta, res)
    if n < 0:
        raise ValueError("n must be nonnegative")
    lam = res.lam
    if path == "closed":
        if x == 0:
            a0 = res.a(0.0)
            u = (0.5 * (lam ** (n + 1) - lam) + 1.0) * a0
            d = (0.5 * (lam ** (n + 1) + lam) - 1.0) * a0
        elif x == 1:
            u = d = 0.5 * lam ** (n + 1) * res.a(1.0)
        else:
            raise UnsupportedPatternError("closed forms for U_n, D_n exist only at x = 0 and x = 1")
        return UnDnValues(n, float(x), u, d)
    if path != "operator":
        raise ValueError(f"unknown path {path!r}")
    free = (None,) * n
    return UnDnValues(
        n,
        float(x),
        _slash_sum(res, (UP,) + free, x),
        _slash_sum(res, (DOWN,) + free, x),
    )


def _slash_sum(res: SpectralResult, sites, x: float) -> float:
    a, b, c, d = product_matrices(sites).astype(np.float64).T
    den = c * x + d
    vals = den ** (-2.0 * res.beta) * res.a((a * x + b) / den)
    return math.fsum(vals)


class ClusterKind(enum.Enum):
    """Right-edge clusters of a left-infinite chain at x = 0.

    For the two-spin kinds the chain ends with ``s1 <n free> s2 ^...^``
    where the block ``s2 ^...^`` has r >= 1 sites. UP_RUN is a block of r
    up spins; DOWN_UP_RUN is a down spin followed by r - 1 up spins.
    """

    UU = "UU"
    DU = "DU"
    UD = "UD"
    DD = "DD"
    UP_RUN = "U-run"
    DOWN_UP_RUN = "D-U-run"


def cluster_core(kind: ClusterKind, n: int, r: int) -> tuple:
    """Fixed right-edge block of a cluster as pattern sites."""
    kind = ClusterKind(kind)
    if kind is ClusterKind.UP_RUN:
        return (UP,) * r
    if kind is ClusterKind.DOWN_UP_RUN:
        return (DOWN,) + (UP,) * (r - 1)
    first = UP if kind.value[0] == "U" else DOWN
    second = UP if kind.value[1] == "U" else DOWN
    return (first,) + (None,) * n + (second,) + (UP,) * (r - 1)


def expect_cluster(kind: ClusterKind, n: int, r: int, beta: float, res: SpectralResult) -> float:
    kind = ClusterKind(kind)
    _require_subcritical(beta, res)
    min_r = 0 if kind is ClusterKind.UP_RUN else 1
    if r < min_r or n < 0:
        raise UnsupportedPatternError(f"{kind.value} needs r >= {min_r} and n >= 0")
    lam = res.lam
    if kind is ClusterKind.UP_RUN:
        return 1.0 / lam**r
    if kind is ClusterKind.DOWN_UP_RUN:
        return (lam - 1.0) / lam**r
    if kind in (ClusterKind.UD, ClusterKind.DD):
        return (lam - 1.0) / (2.0 * lam**r)
    edge = (2.0 - lam) / lam ** (n + 1)
    sign = 1.0 if kind is ClusterKind.UU else -1.0
    return (1.0 + sign * edge) / (2.0 * lam**r)


def bounds_two_spin_infinite(
    n: int, beta: float, res: SpectralResult, normalization: str = "unit"
) -> tuple[float, float]:
    """Bounds on the up-up correlation at gap n in a doubly infinite chain.

    The bounds scale with a(0). ``"unit"`` uses the solver normalization
    a(0) = 1; ``"natural"`` uses a(0) = lim Z_k(0)/lam**k, the scale in
    which the bounds bracket the actual probability.
    """
    _require_subcritical(beta, res)
    lam = res.lam
    if normalization == "unit":
        a0 = 1.0
    elif normalization == "natural":
        if res.natural_scale is None:
            raise ValueError("spectral result carries no natural scale")
        a0 = res.natural_scale
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    lo = (lam - 1.0) * a0 / (2.0 * lam)
    hi = (1.0 + (2.0 - lam) / lam ** (n + 1)) * a0 / (2.0 * lam)
    assert lo <= hi * (1 + 1e-12), (lo, hi)
    return lo, hi


def closed_form_infinite_left(pattern: ConstraintPattern, x: float, res: SpectralResult) -> float:
    """Closed-form value of a left-infinite pattern, if it has one.

    ``pattern.left`` is ignored. Raises UnsupportedPatternError outside the
    known family.
    """
    _require_subcritical(res.beta)
    core, right = pattern.core, pattern.right
    if x == 1 and len(core) == 1:
        return 0.5
    if x != 0:
        raise UnsupportedPatternError("closed forms beyond a single spin are known only at x = 0")
    if len(core) == 1:
        up = expect_right_edge_infinite(right, res.beta, res)
        return up if core[0] is UP else 1.0 - up
    if right != 0:
        raise UnsupportedPatternError("two-spin closed forms need the cluster at the right edge")
    r = len(core)
    if all(s is UP for s in core):
        return expect_cluster(ClusterKind.UP_RUN, 0, r, res.beta, res)
    if core[0] is DOWN and all(s is UP for s in core[1:]):
        return expect_cluster(ClusterKind.DOWN_UP_RUN, 0, r, res.beta, res)
    # s1 <gap> s2 ^^..^
    second = 1
    while core[second] is None:
        second += 1
    n = second - 1
    tail = core[second + 1 :]
    if any(s is not UP for s in tail) or any(s is not None for s in core[1:second]):
        raise UnsupportedPatternError(f"no closed form for pattern {pattern}")
    name = ("U" if core[0] is UP else "D") + ("U" if core[second] is UP else "D")
    return expect_cluster(ClusterKind(name), n, 1 + len(tail), res.beta, res)


# ---------------------------------------------------------------- extrapolation


def _triple_limit(l3, v3) -> tuple[float, float | None]:
    """Limit of a + b q**l through three points; also returns q per unit length."""
    (l1, l2, l_3), (v1, v2, vv3) = l3, v3
    d1, d2 = v2 - v1, vv3 - v2
    if d1 == 0 and d2 == 0:
        return vv3, None
    if d1 == 0:
        return vv3, None
    h1, h2 = l2 - l1, l_3 - l2
    ratio = d2 / d1

    def g(q):
        return q**h1 * (q**h2 - 1.0) / (q**h1 - 1.0) - ratio

    top = h2 / h1
    if not 0 < ratio < top:
        return vv3, None
    q = brentq(g, 1e-12, 1 - 1e-15, xtol=1e-16, rtol=1e-15)
    qh = q**h2
    return vv3 + d2 * qh / (1.0 - qh), q


def extrapolate_infinite_left(values: Sequence[float], lengths: Sequence[int]) -> tuple[float, float]:
    """Estimate lim v_l for a sequence with geometric tail v_l = a + b q**l.

    Fits the last three points exactly; the error bar is the change from
    the fit through the preceding triple (or the size of the correction
    itself when only three points are given). Warns when the per-unit
    decay ratios of consecutive triples differ by more than 20%.
    """
    v = [float(t) for t in values]
    ls = [int(t) for t in lengths]
    if len(v) != len(ls) or len(v) < 3:
        raise ValueError("need at least three (length, value) pairs")
    if any(b <= a for a, b in zip(ls, ls[1:])):
        raise ValueError("lengths must be strictly increasing")
    fits = [_triple_limit(ls[i : i + 3], v[i : i + 3]) for i in range(len(v) - 2)]
    est, q = fits[-1]
    qs = [qq for _, qq in fits if qq is not None]
    if len(fits) >= 2:
        err = abs(est - fits[-2][0])
    else:
        err = abs(est - v[-1])
    if q is None and v[-1] != v[-2]:
        warnings.warn("sequence does not show geometric decay", NonGeometricDecayWarning, stacklevel=2)
    elif len(qs) >= 2 and max(qs) > 1.2 * min(qs):
        warnings.warn(
            f"decay ratios inconsistent: {min(qs):.4g}..{max(qs):.4g}", NonGeometricDecayWarning, stacklevel=2
        )
    return est, err


def enumerate_infinite_left(
    pattern: ConstraintPattern, x: float, beta: float, lefts: Sequence[int], cap: int | None = None
) -> tuple[float, float, list[float]]:
    """Finite-left enumeration at each length in ``lefts``, extrapolated.

    Returns ``(estimate, error, raw_values)``.
    """
    raw = [finite(pattern.with_left(l), x, beta, cap=cap) for l in lefts]
    est, err = extrapolate_infinite_left(raw, lefts)
    return est, err, raw


def expect(q: ExpectationQuery, res: SpectralResult | None = None, lefts: Sequence[int] | None = None) -> float:
    """Dispatch a query to enumeration or to a closed form."""
    if q.mode is Mode.FINITE:
        return expect_finite(q)
    x, beta = q.params.x, q.params.beta
    if q.mode is Mode.INFINITE_BOTH:
        pat = q.pattern
        if len(pat.core) == 1 and (x == 1 or beta < CRITICAL_BETA):
            return 0.5
        raise UnsupportedPatternError("doubly infinite chains: single spins only (see bounds_two_spin_infinite)")
    _require_subcritical(beta)
    if res is not None:
        try:
            return closed_form_infinite_left(q.pattern, x, res)
        except UnsupportedPatternError:
            if lefts is None:
                raise
    if lefts is None:
        raise ValueError("enumeration route needs the left lengths to extrapolate from")
    return enumerate_infinite_left(q.pattern, x, beta, lefts)[0]
