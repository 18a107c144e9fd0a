"""Transfer operator of the Farey map and its leading eigenpair.

The operator acts on functions of [0, 1] by

    (K phi)(x) = (1+x)**(-2 beta) * [phi(x/(1+x)) + phi(1/(1+x))],

and is discretized by collocation on Chebyshev-Lobatto nodes. Both
pre-images lie in [0, 1], so one application is an exact matrix-vector
product against barycentric interpolation rows.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import mpmath
import numpy as np

from fareychain.errors import ConvergenceError, DomainError
from fareychain.grid import GridFunction, barycentric_weights, interpolation_matrix, lobatto_nodes

log = logging.getLogger(__name__)

CRITICAL_BETA = 1.0
NEAR_CRITICAL = (0.95, 1.05)
DEFAULT_NODES = 64


@lru_cache(maxsize=64)
def _transfer_matrix(n: int, beta: float) -> np.ndarray:
    x = lobatto_nodes(n)
    w = barycentric_weights(n)
    both = interpolation_matrix(x, w, np.concatenate([x / (1.0 + x), 1.0 / (1.0 + x)]))
    branches = both[:n] + both[n:]
    mat = (1.0 + x)[:, None] ** (-2.0 * beta) * branches
    mat.setflags(write=False)
    return mat


def transfer_matrix(n: int, beta: float) -> np.ndarray:
    """Collocation matrix of K_beta on n Lobatto nodes (read-only, cached)."""
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    return _transfer_matrix(int(n), float(beta))


def transfer_apply(f: GridFunction, beta: float) -> GridFunction:
    return f.with_values(transfer_matrix(f.size, beta) @ f.values)


def transfer_power(k: int, beta: float, nodes: int = DEFAULT_NODES) -> GridFunction:
    """``K_beta**k`` applied to the constant function 1."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    mat = transfer_matrix(nodes, beta)
    v = np.ones(nodes)
    for _ in range(k):
        v = mat @ v
    return GridFunction(v, even_beta=beta)


@dataclass(frozen=True)
class SpectralResult:
    """Leading eigenpair of K_beta with diagnostics.

    ``eigenfunction`` is normalized to a(0) = 1 and carries the evenness
    extension a(x) = x**(-2 beta) a(1/x) for x > 1. ``natural_scale`` is
    lim Z_k(0)/lambda**k, i.e. a(0) in the normalization where a is the
    limit of Z_k/lambda**k itself (None when beta >= 1).
    """

    beta: float
    lam: float
    eigenfunction: GridFunction
    residual_linf: float
    lewis_residual: float
    iterations: int
    converged: bool
    grade: str
    error_estimate: float
    natural_scale: float | None = None
    stop_reason: str = "tolerance"

    @property
    def nodes(self) -> int:
        return self.eigenfunction.size

    @property
    def subcritical(self) -> bool:
        return self.beta < CRITICAL_BETA

    def a(self, x):
        return self.eigenfunction(x)


def _grade(beta: float, converged: bool) -> str:
    if beta >= CRITICAL_BETA:
        return "critical"
    if converged:
        return "converged"
    return "slow-gap"


def leading_eigen(
    beta: float,
    nodes: int = DEFAULT_NODES,
    tol: float = 1e-14,
    max_iter: int | None = None,
) -> SpectralResult:
    """Power iteration for the leading eigenpair of K_beta.

    Starts from the constant function, renormalizes to a(0) = 1 at each
    step and takes lambda = (K a)(0). The stopping test uses the observed
    contraction ratio of successive lambda differences, so slow
    convergence near beta = 1 is not mistaken for convergence.

    For beta in the near-critical window or beyond, failure to meet
    ``tol`` is reported through ``grade`` rather than raised; there the
    iteration also stops at the last iterate that is still positive on
    every node, since the discretized operator stops being positivity
    preserving once the eigenfunction develops its 1/x singularity.
    """
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    lenient = beta >= NEAR_CRITICAL[0]
    if max_iter is None:
        max_iter = 200_000 if lenient else 20_000
    mat = transfer_matrix(nodes, beta)
    v = np.ones(nodes)
    lam = prev = math.nan
    prev_diff = math.inf
    err = math.inf
    log_growth = 0.0
    log_scales = []
    converged = False
    it = 0
    stop_reason = "max_iter"
    for it in range(1, max_iter + 1):
        w = mat @ v
        if not np.all(np.isfinite(w)):
            raise ConvergenceError(f"non-finite iterate at step {it} (beta={beta})")
        if np.any(w <= 0):
            # the grid cannot carry the singular eigenfunction at and beyond
            # beta = 1; keep the last positive iterate
            if not lenient or it == 1:
                raise ConvergenceError(f"iterate lost positivity at step {it} (beta={beta})")
            stop_reason = "positivity"
            it -= 1
            break
        lam = float(w[0])
        log_growth += math.log(lam)
        log_scales.append(log_growth)
        v = w / lam
        if it > 1:
            diff = abs(lam - prev)
            ratio = diff / prev_diff if prev_diff > 0 else 0.0
            if 0 < ratio < 1:
                err = diff * ratio / (1 - ratio)
            else:
                err = diff
            if diff == 0.0 or (err <= tol and diff <= tol):
                converged = True
                stop_reason = "tolerance"
                break
            prev_diff = diff
        prev = lam
    mat_v = mat @ v
    residual = float(np.max(np.abs(lam * v - mat_v)))
    eig = GridFunction(v, even_beta=beta)

    natural = None
    if beta < CRITICAL_BETA and converged:
        # K^k 1 (0) = prod of the growth factors = 2 Z_{k-1}(0)
        natural = 0.5 * math.exp(log_scales[-1] - (it - 1) * math.log(lam))

    grade = _grade(beta, converged)
    result = SpectralResult(
        beta=float(beta),
        lam=lam,
        eigenfunction=eig,
        residual_linf=residual,
        lewis_residual=math.nan,
        iterations=it,
        converged=converged,
        grade=grade,
        error_estimate=err,
        natural_scale=natural,
        stop_reason=stop_reason,
    )
    result = _with_lewis(result)
    if not converged:
        if lenient:
            log.info("beta=%g: graded %s after %d iterations (err~%.2e)", beta, grade, it, err)
        else:
            raise ConvergenceError(
                f"power iteration did not converge for beta={beta} in {max_iter} steps", result
            )
    return result


def _with_lewis(res: SpectralResult) -> SpectralResult:
    return replace(res, lewis_residual=lewis_residual(res))


def lewis_residual(res: SpectralResult, points=None) -> float:
    """sup |lam a(x) - a(x+1) - (1+x)**(-2 beta) a(x/(x+1))|.

    ``a(x+1)`` comes from the evenness extension, never from extrapolating
    the grid. Evaluated on the nodes unless ``points`` in [0, 1] are given.
    """
    x = res.eigenfunction.nodes if points is None else np.asarray(points, dtype=float)
    a = res.eigenfunction
    b = res.beta
    r = res.lam * a(x) - a(x + 1.0) - (1.0 + x) ** (-2.0 * b) * a(x / (x + 1.0))
    return float(np.max(np.abs(r)))


def eigen_identities(res: SpectralResult) -> tuple[float, float]:
    """Defects of a(1) = (lam-1) a(0) and a(2) = lam (lam-1) a(0) / 2."""
    a0 = res.a(0.0)
    lam = res.lam
    return abs(res.a(1.0) - (lam - 1.0) * a0), abs(res.a(2.0) - 0.5 * lam * (lam - 1.0) * a0)


def free_energy(res: SpectralResult) -> float:
    if res.beta <= 0:
        raise DomainError("free energy -ln(lambda)/beta is undefined at beta = 0")
    if res.beta >= CRITICAL_BETA:
        return 0.0
    return -math.log(res.lam) / res.beta


def correlation_lengths(res: SpectralResult, strict: bool = True) -> tuple[float, float]:
    """Bulk and right-edge correlation lengths ``(xi, xi_r)``.

    xi_r = 1/ln(lam). The bulk length is 1/ln(lam/lam_1) with the
    sub-leading eigenvalue lam_1 = 1 below the transition; its overall
    prefactor is not fixed and is reported as 1. At beta >= 1 both
    diverge: raises in strict mode, else returns ``(inf, inf)``.
    """
    if res.beta >= CRITICAL_BETA or res.lam <= 1.0:
        if strict:
            raise DomainError("correlation lengths diverge for beta >= 1")
        return math.inf, math.inf
    xi_r = 1.0 / math.log(res.lam)
    sub_leading = 1.0
    xi = 1.0 / math.log(res.lam / sub_leading)
    return xi, xi_r


def zeta(s, prec: int = 53):
    """Riemann zeta for real s > 1 by Euler-Maclaurin summation.

    Evaluated with mpmath at ``prec`` bits plus guard bits; returns a float
    when ``prec`` is 53, else an mpf.
    """
    if not s > 1:
        raise DomainError(f"zeta(s) requires s > 1, got {s}")
    guard = prec + 24
    with mpmath.workprec(guard):
        s = mpmath.mpf(s)
        n_terms = 12 + prec // 3
        m = 8 + prec // 6
        N = mpmath.mpf(n_terms)
        head = mpmath.fsum(mpmath.power(j, -s) for j in range(1, n_terms))
        tail = mpmath.power(N, 1 - s) / (s - 1) + mpmath.power(N, -s) / 2
        rising = s  # s (s+1) ... (s+2j-2)
        corr = []
        for j in range(1, m + 1):
            term = mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j) * rising * mpmath.power(N, -s - 2 * j + 1)
            corr.append(term)
            rising *= (s + 2 * j - 1) * (s + 2 * j)
        value = head + tail + mpmath.fsum(corr)
    if prec == 53:
        return float(value)
    with mpmath.workprec(prec):
        return +value


def zeta_limit(beta: float) -> float:
    """Stationary value 2 zeta(2 beta - 1) / zeta(2 beta) of K_beta**k 1 at x=0 for beta > 1."""
    if not beta > 1:
        raise DomainError("the stationary limit exists only for beta > 1")
    return 2.0 * zeta(2 * beta - 1) / zeta(2 * beta)
