import itertools
import math
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fareychain.chain import ChainParams, Spin
from fareychain.errors import DomainError, UnsupportedPatternError
from fareychain.expectations import (
    ClusterKind,
    ExpectationQuery,
    Mode,
    NonGeometricDecayWarning,
    bounds_two_spin_infinite,
    closed_form_infinite_left,
    cluster_core,
    enumerate_infinite_left,
    expect,
    expect_cluster,
    expect_one_spin_via_K,
    expect_right_edge_infinite,
    extrapolate_infinite_left,
    finite,
    one_spin_K,
    u_n_d_n,
)
from fareychain.partition import ConstraintPattern
from fareychain.spectral import leading_eigen

UP, DOWN = Spin.UP, Spin.DOWN


@pytest.fixture(scope="module")
def res05():
    return leading_eigen(0.5)


@given(st.integers(0, 6), st.integers(0, 6), st.floats(0.0, 1.5))
@settings(max_examples=30, deadline=None)
def test_single_spin_is_half_at_x_one(left, right, beta):
    assert finite(ConstraintPattern.single(left, UP, right), 1.0, beta) == pytest.approx(0.5, abs=1e-12)


@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3), st.floats(0.0, 1.5))
@settings(max_examples=30, deadline=None)
def test_pair_symmetries_at_x_one(l, n, r, beta):
    f = lambda a, b, left, right: finite(ConstraintPattern.pair(left, a, n, b, right), 1.0, beta)
    assert f(UP, UP, l, r) == pytest.approx(f(DOWN, DOWN, l, r), abs=1e-12)
    assert f(UP, DOWN, l, r) == pytest.approx(f(DOWN, UP, l, r), abs=1e-12)
    assert f(UP, DOWN, l, r) == pytest.approx(f(DOWN, UP, r, l), abs=1e-12)


@given(st.integers(0, 3), st.integers(0, 3), st.floats(0.0, 4.0), st.floats(0.0, 1.5))
@settings(max_examples=25, deadline=None)
def test_probabilities_sum_to_one(l, r, x, beta):
    base = ConstraintPattern(l, (UP, None, UP), r)
    total = math.fsum(finite(base.refix(s), x, beta) for s in itertools.product((UP, DOWN), repeat=2))
    assert total == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("beta", [0.0, 0.5, 1.0, 1.4])
def test_one_spin_via_K_matches_enumeration(beta):
    for left, right in [(0, 0), (3, 2), (6, 0), (2, 7)]:
        K = one_spin_K(left, right, beta)
        assert -1e-12 <= K <= 1 + 1e-12
        direct = finite(ConstraintPattern.single(left, UP, right), 0.0, beta)
        assert expect_one_spin_via_K(left, right, beta) == pytest.approx(direct, rel=1e-12)
        assert direct >= 0.5


def test_right_edge_law_limits(res05):
    lam = res05.lam
    assert expect_right_edge_infinite(0, 0.5, res05) == pytest.approx(0.5 * (1 + (2 - lam) / lam))
    deep = expect_right_edge_infinite(200, 0.5, res05)
    assert deep == pytest.approx(0.5, abs=1e-12)


def test_right_edge_law_matches_extrapolation(res05):
    lefts = list(range(10, 17))
    for r in (0, 1):
        est, err, raw = enumerate_infinite_left(ConstraintPattern.single(0, UP, r), 0.0, 0.5, lefts)
        assert abs(est - expect_right_edge_infinite(r, 0.5, res05)) < 1e-4
        assert len(raw) == len(lefts)


def test_u_n_d_n_paths_agree(res05):
    for n in range(6):
        for x in (0.0, 1.0):
            op = u_n_d_n(n, x, 0.5, res05)
            cl = u_n_d_n(n, x, 0.5, res05, path="closed")
            assert op.u == pytest.approx(cl.u, rel=1e-9)
            assert op.d == pytest.approx(cl.d, rel=1e-9)
    with pytest.raises(UnsupportedPatternError):
        u_n_d_n(1, 0.5, 0.5, res05, path="closed")


@given(st.integers(0, 6), st.floats(0.0, 3.0))
@settings(max_examples=20, deadline=None)
def test_u_plus_d_is_lambda_power_times_a(n, x):
    res = leading_eigen(0.5)
    v = u_n_d_n(n, x, 0.5, res)
    assert v.u + v.d == pytest.approx(res.lam ** (n + 1) * res.a(x), rel=1e-9)


def test_cluster_closed_forms_n_independent(res05):
    for kind in (ClusterKind.UD, ClusterKind.DD):
        for r in (1, 2, 3):
            ref = expect_cluster(kind, 0, r, 0.5, res05)
            assert all(expect_cluster(kind, n, r, 0.5, res05) == ref for n in range(10))
            assert ref == (res05.lam - 1) / (2 * res05.lam**r)


def test_cluster_pairs_add_up(res05):
    for n in range(4):
        for r in range(1, 4):
            uu = expect_cluster(ClusterKind.UU, n, r, 0.5, res05)
            du = expect_cluster(ClusterKind.DU, n, r, 0.5, res05)
            ud = expect_cluster(ClusterKind.UD, n, r, 0.5, res05)
            dd = expect_cluster(ClusterKind.DD, n, r, 0.5, res05)
            run = expect_cluster(ClusterKind.UP_RUN, 0, r, 0.5, res05)
            assert uu + du == pytest.approx(run, rel=1e-14)
            assert uu + du + ud + dd == pytest.approx(
                expect_cluster(ClusterKind.UP_RUN, 0, r - 1, 0.5, res05), rel=1e-14
            )


def test_cluster_validation(res05):
    with pytest.raises(UnsupportedPatternError):
        expect_cluster(ClusterKind.UU, 0, 0, 0.5, res05)
    with pytest.raises(DomainError):
        expect_cluster(ClusterKind.UU, 0, 1, 1.0, leading_eigen(1.0))
    with pytest.raises(ValueError):
        expect_cluster(ClusterKind.UU, 0, 1, 0.7, res05)


def test_closed_form_dispatch(res05):
    dd = ConstraintPattern(0, cluster_core(ClusterKind.DD, 2, 2), 0)
    assert closed_form_infinite_left(dd, 0.0, res05) == expect_cluster(ClusterKind.DD, 2, 2, 0.5, res05)
    run = ConstraintPattern(0, (UP, UP, UP), 0)
    assert closed_form_infinite_left(run, 0.0, res05) == expect_cluster(ClusterKind.UP_RUN, 0, 3, 0.5, res05)
    assert closed_form_infinite_left(ConstraintPattern.single(0, UP, 3), 1.0, res05) == 0.5
    down = closed_form_infinite_left(ConstraintPattern.single(0, DOWN, 1), 0.0, res05)
    assert down == pytest.approx(1 - expect_right_edge_infinite(1, 0.5, res05))
    with pytest.raises(UnsupportedPatternError):
        closed_form_infinite_left(ConstraintPattern.parse("^.v."), 0.0, res05)
    with pytest.raises(UnsupportedPatternError):
        closed_form_infinite_left(ConstraintPattern.parse("^v"), 0.5, res05)


def test_dispatcher_routes(res05):
    p = ChainParams(0.0, 0.5)
    pat = ConstraintPattern.single(3, UP, 1)
    assert expect(ExpectationQuery(pat, p)) == finite(pat, 0.0, 0.5)
    inf = ExpectationQuery(pat, p, Mode.INFINITE_LEFT)
    assert expect(inf, res05) == expect_right_edge_infinite(1, 0.5, res05)
    assert expect(ExpectationQuery(pat, p, "infinite-both")) == 0.5
    odd = ExpectationQuery(ConstraintPattern.parse("^.v."), p, Mode.INFINITE_LEFT)
    with pytest.raises(UnsupportedPatternError):
        expect(odd, res05)
    assert 0 < expect(odd, res05, lefts=range(8, 14)) < 1


@given(st.floats(-2, 2), st.floats(0.1, 3), st.floats(0.3, 0.9))
@settings(max_examples=40, deadline=None)
def test_extrapolation_recovers_geometric_limits(a, b, q):
    lengths = list(range(4, 12))
    values = [a + b * q**l for l in lengths]
    est, err = extrapolate_infinite_left(values, lengths)
    assert est == pytest.approx(a, abs=1e-8 * (1 + abs(b)))


def test_extrapolation_warns_on_non_geometric():
    lengths = list(range(1, 9))
    values = [1 / l for l in lengths]
    with pytest.warns(NonGeometricDecayWarning):
        extrapolate_infinite_left(values, lengths)


def test_extrapolation_input_checks():
    with pytest.raises(ValueError):
        extrapolate_infinite_left([1, 2], [1, 2])
    with pytest.raises(ValueError):
        extrapolate_infinite_left([1, 2, 3], [1, 3, 2])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert extrapolate_infinite_left([0.3, 0.3, 0.3], [1, 2, 3])[0] == 0.3


def test_two_spin_bounds(res05):
    lo, hi = bounds_two_spin_infinite(3, 0.5, res05)
    assert 0 < lo <= hi
    nlo, nhi = bounds_two_spin_infinite(3, 0.5, res05, normalization="natural")
    assert nlo / lo == pytest.approx(res05.natural_scale)
    # a long symmetric chain with the pair in the middle sits inside the bounds
    m = 8
    centre = finite(ConstraintPattern.pair(m, UP, 3, UP, m), 0.0, 0.5)
    assert nlo <= centre <= nhi
    with pytest.raises(ValueError):
        bounds_two_spin_infinite(3, 0.5, res05, normalization="bogus")
