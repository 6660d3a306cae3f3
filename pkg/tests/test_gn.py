import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nutaxis.gn import (
    BumpSum,
    BumpSumSampler,
    GNCase,
    TrigSampler,
    check_scaling_identity,
    estimate_gn_ratio,
    gn1_case,
    gn1_theta,
    gn2_case,
    gn2_theta,
    gn_ratio,
    rescale_to_unit,
)
from nutaxis.grid import make_grid


@pytest.mark.parametrize(
    "p,q,r,expected",
    [(4, 2, 2, 0.25), (3, 1, 1, 2.0 / 3.0), (6, 2, 2, 1.0 / 3.0), (8, 4, 2, 1.0 / 6.0)],
)
def test_gn1_theta_hand_values(p, q, r, expected):
    assert gn1_theta(p, q, r) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("q,r,expected", [(2, 2, 0.5), (1, 1, 1.0), (4, 2, 1.0 / 3.0)])
def test_gn2_theta_hand_values(q, r, expected):
    assert gn2_theta(q, r) == pytest.approx(expected, rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(
    q=st.floats(0.5, 4.0),
    dp=st.floats(0.1, 6.0),
    r=st.floats(1.0, 5.0),
)
def test_gn1_theta_satisfies_relation(q, dp, r):
    p = q + dp
    th = gn1_theta(p, q, r)
    assert 0.0 <= th <= 1.0
    assert 1.0 / p == pytest.approx(th * (1.0 / r - 1.0) + (1.0 - th) / q, abs=1e-13)


@settings(max_examples=60, deadline=None)
@given(q=st.floats(0.5, 6.0), r=st.floats(1.0, 6.0))
def test_gn2_theta_satisfies_relation(q, r):
    th = gn2_theta(q, r)
    assert abs(th * (1.0 - r) / r + (1.0 - th) / q) < 1e-13


def test_case_validation():
    with pytest.raises(ValueError):
        GNCase(4, 2, 2, 2, 0.3, TrigSampler(), "gn1", (1.0,))  # wrong theta
    with pytest.raises(ValueError):
        gn1_case(2, 3, 2, 2)  # q >= p
    with pytest.raises(ValueError):
        gn1_case(4, 2, 2, 5)  # sigma > p
    with pytest.raises(ValueError):
        GNCase(np.inf, 2, 2, 1, gn2_theta(2, 2), TrigSampler(), "gn2", (1.0,))
    with pytest.raises(ValueError):
        GNCase(4, 2, 2, 2, 0.25, TrigSampler(), "gn3", (1.0,))
    with pytest.raises(ValueError):
        gn1_case(4, 2, 2, 2, epsilons=(1.0, 0.0))


def test_case_penalty_exponents():
    assert gn1_case(4, 2, 2, 2).penalty_exponent == pytest.approx(0.25)
    assert gn1_case(3, 1, 1, 1).penalty_exponent == pytest.approx(2.0 / 3.0)
    assert gn2_case(2, 2).penalty_exponent == pytest.approx(0.5)
    assert "4" in gn1_case(4, 2, 2, 2).label


@settings(max_examples=25, deadline=None)
@given(
    m=st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.0]),
    eps=st.sampled_from([1.0, 0.5, 0.25, 0.125]),
    seed=st.integers(0, 2**16),
)
def test_scaling_identity_exact_on_matched_grids(m, eps, seed):
    f = BumpSumSampler(seed=seed).functions(1, eps)[0]
    assert check_scaling_identity(f, m, eps, n_cells=1024) <= 1e-10


def test_scaling_identity_rejects_small_m():
    f = BumpSumSampler().functions(1, 1.0)[0]
    with pytest.raises(ValueError):
        check_scaling_identity(f, 0.5, 0.5)


def test_rescale_to_unit_keeps_values():
    g = make_grid(0.25, 64)
    vals = np.sin(g.centers)
    out, unit = rescale_to_unit(vals, g)
    assert unit.epsilon == 1.0 and np.array_equal(out, vals)
    # the substitution y = eps x maps centers onto centers
    np.testing.assert_allclose(unit.centers, 0.25 * g.centers, atol=1e-15)
    with pytest.raises(ValueError):
        rescale_to_unit(vals[:-2], g)


def test_gn_ratio_gaussian_closed_form():
    # f = exp(-x^2/2): |f|_4^4 = sqrt(pi/2), |f'|_2^2 = sqrt(pi)/2, |f|_2^2 = sqrt(pi)
    eps = 0.125
    f = BumpSum(np.array([1.0]), np.array([0.0]), np.array([1.0]))
    case = gn1_case(4, 2, 2, 2, sampler=BumpSumSampler())
    lhs = (math.pi / 2) ** 0.125
    main = (math.sqrt(math.pi) / 2) ** (0.5 * 0.25) * math.pi ** (0.25 * 0.75)
    rhs = main + eps**0.25 * math.pi**0.25
    assert gn_ratio(f, case, eps) == pytest.approx(lhs / rhs, rel=1e-9)


def test_gn_ratio_zero_function():
    f = BumpSum(np.array([0.0]), np.array([0.0]), np.array([1.0]))
    assert gn_ratio(f, gn2_case(2, 2, sampler=BumpSumSampler()), 0.5) == 0.0


def test_estimate_requires_enough_samples():
    with pytest.raises(ValueError):
        estimate_gn_ratio(gn1_case(4, 2, 2, 2), 50)


def test_trig_sampler_is_eps_invariant():
    res = estimate_gn_ratio(gn1_case(4, 2, 2, 2, sampler=TrigSampler(n_cells=512)), 100)
    np.testing.assert_allclose(res.max_ratio, res.max_ratio[0], rtol=1e-12)
    assert res.variation == pytest.approx(1.0)


def test_sampler_reproducible():
    a = BumpSumSampler(seed=3).functions(5, 0.5)
    b = BumpSumSampler(seed=3).functions(5, 0.25)
    assert all(np.array_equal(x.c, y.c) and np.array_equal(x.w, y.w) for x, y in zip(a, b))


@pytest.mark.slow
@pytest.mark.parametrize("case", [gn1_case(4, 2, 2, 2), gn2_case(2, 2)], ids=lambda c: c.label)
def test_bump_ratio_bounded(case):
    case = GNCase(case.p, case.q, case.r, case.sigma, case.theta, BumpSumSampler(), case.variant, case.epsilons)
    res = estimate_gn_ratio(case, 100)
    assert res.passed
    assert np.all(res.scaling_errors <= 1e-10)
    rows = res.to_csv().strip().splitlines()
    assert len(rows) == 1 + len(case.epsilons)
