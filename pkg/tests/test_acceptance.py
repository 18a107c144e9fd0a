"""Acceptance criteria, one pass/fail line each.

Run standalone with ``python3 tests/test_acceptance.py`` or under pytest,
where the lines appear in the terminal summary.
"""

import itertools
import math
import time
import timeit
from dataclasses import dataclass

import numpy as np
import pytest

from fareychain.chain import ChainParams, Spin
from fareychain.expectations import (
    ClusterKind,
    cluster_core,
    enumerate_infinite_left,
    expect_cluster,
    expect_right_edge_infinite,
    finite,
)
from fareychain.partition import (
    ConstraintPattern,
    Kind,
    PartitionSpec,
    z_brute,
    z_grid,
    z_knauf,
    z_recursive,
)
from fareychain.spectral import (
    _transfer_matrix,
    eigen_identities,
    leading_eigen,
    transfer_power,
    zeta,
    zeta_limit,
)
from fareychain.verify import eigenfunction_evenness_defect

UP, DOWN = Spin.UP, Spin.DOWN
RESULTS: dict[str, "Outcome"] = {}


@dataclass
class Outcome:
    passed: bool
    detail: str

    def line(self, name):
        return f"{'PASS' if self.passed else 'FAIL'}  {name}: {self.detail}"


def record(name):
    def wrap(fn):
        def run(*args):
            out = fn(*args)
            RESULTS[name if not args else f"{name}[{','.join(map(str, args))}]"] = out
            return out

        run.__name__ = fn.__name__
        return run

    return wrap


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# ------------------------------------------------------------------ criteria


@record("1 operator identity K^k 1 = 2 Z_{k-1}")
def operator_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for beta in (0.3, 0.7, 1.2):
        for k in range(1, 13):
            g = transfer_power(k, beta, 64)
            z = np.array([z_knauf(k - 1, x, beta) for x in g.nodes])
            worst = max(worst, float(np.max(np.abs(g.values - 2 * z) / (2 * z))))
    secs = time.perf_counter() - t0
    return Outcome(worst <= 1e-10 and secs < 10, f"max rel {worst:.2e} (tol 1e-10), {secs:.2f}s (< 10s)")


@record("2 brute vs recursion")
def brute_vs_recursion():
    t0 = time.perf_counter()
    worst = 0.0
    for beta in (0.3, 0.7, 1.0, 1.5):
        for x in (0.0, 1 / 3, 1.0, 2.5):
            for k in range(0, 17):
                s = PartitionSpec(Kind.KNAUF, k, ChainParams(x, beta))
                b = z_brute(s)
                for form in ("rec", "mrec"):
                    worst = max(worst, rel(z_recursive(s, form=form), b))
    secs = time.perf_counter() - t0
    return Outcome(worst <= 1e-10 and secs < 60, f"max rel {worst:.2e} (tol 1e-10), {secs:.2f}s (< 60s)")


@record("3 sum rule")
def sum_rule():
    worst = 0.0
    for beta in (0.0, 0.3, 0.7, 1.0, 1.5):
        for x in (0.0, 1 / 3, 1.0, 2.5):
            z = [z_knauf(i, x, beta) for i in range(14)]
            for k in range(0, 15):
                tilde = z_brute(PartitionSpec(Kind.TILDE, k, ChainParams(x, beta)))
                worst = max(worst, rel(tilde, math.fsum([1.0] + z[:k])))
    return Outcome(worst <= 1e-12, f"max rel {worst:.2e} (tol 1e-12)")


@record("4 evenness of Z and of the eigenfunction")
def evenness():
    worst_z = 0.0
    xs = np.geomspace(0.05, 20.0, 9)
    for beta in (0.3, 0.7, 1.0, 1.5):
        for k in range(0, 13):
            for x in xs:
                lhs = z_knauf(k, x, beta)
                worst_z = max(worst_z, rel(x ** (-2 * beta) * z_knauf(k, 1 / x, beta), lhs))
    # 64 nodes resolve a(x) to ~2e-7 at beta=0.9; 128 bring it to ~1e-11
    worst_a = max(eigenfunction_evenness_defect(leading_eigen(b, nodes=128)) for b in (0.3, 0.5, 0.7, 0.9))
    ok = worst_z <= 1e-10 and worst_a <= 1e-8
    return Outcome(ok, f"Z rel {worst_z:.2e} (tol 1e-10), a(x) on 128 nodes {worst_a:.2e} (tol 1e-8)")


@record("5 eigen identities a(1), a(2)")
def eigen_identity_check():
    parts, ok = [], True
    for beta, tol in ((0.3, 1e-8), (0.5, 1e-8), (0.7, 1e-8), (0.9, 1e-6)):
        d = max(eigen_identities(leading_eigen(beta)))
        ok &= d <= tol
        parts.append(f"b={beta}: {d:.1e}")
    return Outcome(ok, ", ".join(parts))


@record("6 exact endpoints of lambda")
def endpoints():
    l0 = leading_eigen(0.0).lam
    r1 = leading_eigen(1.0)
    ok = abs(l0 - 2) <= 1e-12 and abs(r1.lam - 1) <= 1e-3
    return Outcome(ok, f"|lam(0)-2| = {abs(l0 - 2):.1e} (1e-12), |lam(1)-1| = {abs(r1.lam - 1):.2e} (1e-3), grade {r1.grade}")


@record("7a zeta oracle")
def zeta_oracle():
    d2 = abs(zeta(2) - math.pi**2 / 6)
    d4 = abs(zeta(4) - math.pi**4 / 90)
    return Outcome(max(d2, d4) <= 1e-12, f"zeta(2) {d2:.1e}, zeta(4) {d4:.1e} (tol 1e-12)")


@record("7b zeta limit at k=24")
def zeta_limit_check(beta):
    target = zeta_limit(beta)
    seq = [transfer_power(k, beta, 64).values[0] for k in range(1, 25)]
    gaps = [target - v for v in seq]
    monotone = all(0 < b < a for a, b in zip(gaps, gaps[1:]))
    gap = abs(seq[-1] - target)
    return Outcome(gap <= 5e-3 and monotone, f"beta={beta}: |K^24 1(0) - limit| = {gap:.2e} (tol 5e-3), monotone={monotone}")


@record("8 right-edge law")
def right_edge_law():
    t0 = time.perf_counter()
    res = leading_eigen(0.5)
    lefts = list(range(14, 23))
    parts, worst = [], 0.0
    for r in range(4):
        est, _, _ = enumerate_infinite_left(ConstraintPattern.single(0, UP, r), 0.0, 0.5, lefts)
        d = abs(est - expect_right_edge_infinite(r, 0.5, res))
        worst = max(worst, d)
        parts.append(f"r={r}: {d:.1e}")
    secs = time.perf_counter() - t0
    return Outcome(worst <= 1e-3 and secs < 300, ", ".join(parts) + f" (tol 1e-3), {secs:.1f}s (< 300s)")


@record("9 x=1 symmetries")
def x1_symmetries():
    worst = 0.0
    for beta in (0.3, 0.8, 1.0, 1.6):
        for l in range(12):
            for r in range(12 - l):
                worst = max(worst, abs(finite(ConstraintPattern.single(l, UP, r), 1.0, beta) - 0.5))
        for l, n, r in itertools.product(range(5), range(4), range(5)):
            if l + n + r + 2 > 12:
                continue
            f = lambda a, b, left, right: finite(ConstraintPattern.pair(left, a, n, b, right), 1.0, beta)
            uu, dd = f(UP, UP, l, r), f(DOWN, DOWN, l, r)
            ud, du, rev = f(UP, DOWN, l, r), f(DOWN, UP, l, r), f(DOWN, UP, r, l)
            worst = max(worst, abs(uu - dd), abs(ud - du), abs(ud - rev))
    return Outcome(worst <= 1e-12, f"max defect {worst:.1e} (tol 1e-12)")


@record("10 cluster spin-symmetry restoration")
def cluster_restoration():
    res = leading_eigen(0.5)
    lam = res.lam
    bitwise = True
    for r in range(1, 5):
        for kind in (ClusterKind.UD, ClusterKind.DD, ClusterKind.UP_RUN, ClusterKind.DOWN_UP_RUN):
            ref = expect_cluster(kind, 0, r, 0.5, res)
            bitwise &= all(expect_cluster(kind, n, r, 0.5, res) == ref for n in range(12))
        bitwise &= expect_cluster(ClusterKind.UD, 0, r, 0.5, res) == expect_cluster(ClusterKind.DD, 5, r, 0.5, res)
    worst = 0.0
    lefts = list(range(12, 19))
    for kind in (ClusterKind.UD, ClusterKind.DD):
        for n in range(3):
            for r in (1, 2):
                est, _, _ = enumerate_infinite_left(ConstraintPattern(0, cluster_core(kind, n, r), 0), 0.0, 0.5, lefts)
                worst = max(worst, abs(est - (lam - 1) / (2 * lam**r)))
    return Outcome(bitwise and worst <= 5e-3, f"n-independent bitwise={bitwise}, enumeration gap {worst:.1e} (tol 5e-3)")


@record("11 critical-limit behaviour")
def critical_limit():
    lams = [leading_eigen(b).lam for b in (0.9, 0.95, 0.99)]
    ok = True
    for r in range(0, 5):
        runs = [1 / l**r for l in lams]
        downs = [(l - 1) / l**r for l in lams]
        inc = all(b > a for a, b in zip(runs, runs[1:])) if r else all(v == 1 for v in runs)
        dec = all(b < a for a, b in zip(downs, downs[1:]))
        ok &= inc and dec and runs[-1] <= 1 and downs[-1] > 0
    detail = f"1/lam^4: {', '.join(f'{1 / l**4:.4f}' for l in lams)}; (lam-1): {', '.join(f'{l - 1:.4f}' for l in lams)}"
    return Outcome(ok, detail)


@record("12 grid vs brute speed at k=20")
def performance():
    def grid():
        _transfer_matrix.cache_clear()  # include building the operator
        return z_grid(21, 0.5, 64)(0.0)

    def brute():
        return z_knauf(20, 0.0, 0.5)

    t_grid = min(timeit.repeat(grid, number=1, repeat=7))
    t_brute = min(timeit.repeat(brute, number=1, repeat=5))
    g, b = grid(), brute()
    speedup = t_brute / t_grid
    ok = speedup >= 100 and rel(g, b) <= 1e-10
    return Outcome(ok, f"best of repeats: grid {t_grid * 1e3:.2f} ms (cold cache), brute {t_brute * 1e3:.1f} ms, speedup {speedup:.0f}x (>= 100x)")


CRITERIA = [
    (operator_identity, ()),
    (brute_vs_recursion, ()),
    (sum_rule, ()),
    (evenness, ()),
    (eigen_identity_check, ()),
    (endpoints, ()),
    (zeta_oracle, ()),
    (zeta_limit_check, (1.5,)),
    (zeta_limit_check, (2.0,)),
    (right_edge_law, ()),
    (x1_symmetries, ()),
    (cluster_restoration, ()),
    (critical_limit, ()),
    (performance, ()),
]


@pytest.mark.parametrize(
    "fn,args",
    CRITERIA,
    ids=[fn.__name__ + ("-" + "-".join(map(str, a)) if a else "") for fn, a in CRITERIA],
)
def test_criterion(fn, args):
    out = fn(*args)
    print(out.line(fn.__name__))
    assert out.passed, out.detail


if __name__ == "__main__":
    for fn, args in CRITERIA:
        fn(*args)
    for name, out in RESULTS.items():
        print(out.line(name))
