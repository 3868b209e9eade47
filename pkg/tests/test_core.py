from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdssd.core import (
    ContinuousGenerator,
    DiscreteKernel,
    auto_eps,
    discretize,
    lazy,
    stationary_pmf,
    stationary_pmf_generator,
    to_number,
    validate_discrete,
)
from bdssd.errors import ChainConstructionError, EpsOutOfRange, EpsTooLarge, NotErgodic
from bdssd.sampling import random_ergodic_kernel
from bdssd.specfile import load_fixture
from bdssd.spectral import eigenvalues_discrete

from conftest import power_iteration_stationary


def test_to_number_parses_strings_exactly():
    assert to_number("3/4", "rational") == F(3, 4)
    assert to_number("0.49", "rational") == F(49, 100)
    assert to_number(0.49, "rational") == F(49, 100)
    assert to_number("1/3", "float") == pytest.approx(1 / 3)
    for bad in (float("nan"), float("inf"), True, "abc"):
        with pytest.raises(ChainConstructionError):
            to_number(bad, "float")


def test_ehrenfest_report(e2):
    rep = validate_discrete(e2)
    assert rep.ergodic and rep.monotone and rep.strictly_monotone
    assert not rep.absorbing_top
    assert rep.ok
    assert e2.p == (F(1, 2), F(1, 4), 0)
    assert e2.q == (0, F(1, 4), F(1, 2))


def test_counterexample_report(cex):
    rep = cex.report
    assert rep.absorbing_top and rep.strictly_monotone
    assert not rep.ergodic
    assert rep.monotonicity == "strict"


def test_deterministic_absorption_d1():
    K = DiscreteKernel(["1"], ["0"])
    rep = K.report
    # p_0 + q_1 = 1, so the chain is monotone but not strictly monotone
    assert rep.absorbing_top and rep.monotone and not rep.ergodic
    assert not rep.strictly_monotone
    assert K.r == (0, 1)
    assert DiscreteKernel(["3/4"], ["0"]).report.strictly_monotone


def test_hold_derived_and_rows_sum_to_one(e2):
    m = e2.matrix()
    assert all(sum(row) == 1 for row in m)
    assert e2.mode == "rational"


def test_violations_reported_not_raised():
    K = DiscreteKernel([0.7, 0.5], [0.6, 0.1], [0.1, 0.2, 0.9], mode="float")
    kinds = {v.kind for v in K.report.violations}
    assert "RowSumExceeded" in kinds
    assert "NegativeEntry" not in kinds or True
    assert not K.report.ok


def test_construction_rejects_bad_shapes():
    with pytest.raises(ChainConstructionError):
        DiscreteKernel([], [])
    with pytest.raises(ChainConstructionError):
        DiscreteKernel([0.5, 0.5], [0.5])
    with pytest.raises(ChainConstructionError):
        ContinuousGenerator([1, -1], [1, 1])


def test_stationary_ehrenfest(e2):
    assert stationary_pmf(e2).weights == (F(1, 4), F(1, 2), F(1, 4))


def test_stationary_symmetric_walk():
    K = DiscreteKernel(["1/2"], ["1/2"])
    assert stationary_pmf(K).weights == (F(1, 2), F(1, 2))


def test_stationary_matches_power_iteration(rng):
    for d in (3, 4, 5):
        P = random_ergodic_kernel(rng, d)
        pi = np.array(stationary_pmf(P))
        oracle = power_iteration_stationary(P.matrix())
        np.testing.assert_allclose(pi, oracle, atol=1e-12)


def test_stationary_needs_ergodic(cex):
    with pytest.raises(NotErgodic):
        stationary_pmf(cex)


def test_lazy_examples(cex, e2):
    lz = lazy(cex, F(2, 5))
    assert lz.matrix()[1, 1] == F(608, 1000)
    le = lazy(e2, F(1, 2))
    assert le.r == (F(3, 4),) * 3
    assert le.p[:2] == (F(1, 4), F(1, 8))
    assert le.q[1:] == (F(1, 8), F(1, 4))
    near = lazy(e2.as_float(), 1 - 1e-9)
    np.testing.assert_allclose(near.matrix(), e2.as_float().matrix(), atol=1e-9)
    for eps in (0, 1, 1.5):
        with pytest.raises(EpsOutOfRange):
            lazy(e2, eps)


def test_lazy_preserves_stationary(e2):
    pi = stationary_pmf(e2).weights
    for eps in (F(1, 10), F(1, 2), F(9, 10)):
        assert stationary_pmf(lazy(e2, eps)).weights == pi


def test_lazy_maps_eigenvalues(cex):
    base = eigenvalues_discrete(cex).values
    lz = eigenvalues_discrete(lazy(cex, 0.3)).values
    np.testing.assert_allclose(np.sort(1 - 0.3 * (1 - base)), lz, atol=1e-13)


def test_discretize_examples(e2c):
    # max_i(lambda_i + mu_i) = 2, so the automatic step is 1/4 and recovers E2
    assert auto_eps(e2c) == F(1, 4)
    assert (discretize(e2c).matrix() == load_fixture("e2").matrix()).all()
    K = discretize(e2c, F(1, 6))
    assert K.r == (F(2, 3), F(2, 3), F(2, 3))
    assert K.p[:2] == (F(1, 3), F(1, 6))
    assert K.q[1:] == (F(1, 6), F(1, 3))
    zero = ContinuousGenerator([0, 0], [0, 0])
    assert discretize(zero, F(1, 3)).r == (1, 1, 1)
    D = discretize(ContinuousGenerator([3], [0]), F(1, 3))
    assert D.p[0] == 1 and D.report.absorbing_top
    with pytest.raises(EpsTooLarge):
        discretize(e2c, F(3, 4))


def test_discretize_spectrum_relation(e2c):
    from bdssd.spectral import eigenvalues_generator

    nus = eigenvalues_generator(e2c).values
    eps = 0.1
    np.testing.assert_allclose(np.sort(1 - eps * nus), eigenvalues_discrete(discretize(e2c.as_float(), eps)).values, atol=1e-13)


def test_stationary_generator(e2c):
    assert stationary_pmf_generator(e2c).weights == (F(1, 4), F(1, 2), F(1, 4))


probs = st.fractions(min_value=0, max_value=1, max_denominator=50)


@st.composite
def rational_kernels(draw):
    d = draw(st.integers(1, 5))
    birth, death = [], []
    prev_death = F(0)
    for i in range(d + 1):
        p = draw(probs) if i < d else F(0)
        q = draw(st.fractions(min_value=0, max_value=1 - p, max_denominator=50)) if i > 0 else F(0)
        if i < d:
            birth.append(p)
        if i > 0:
            death.append(q)
        prev_death = q
    del prev_death
    return DiscreteKernel(birth, death)


@settings(max_examples=150, deadline=None)
@given(rational_kernels())
def test_rows_exact_and_flags_consistent(K):
    assert all(sum(row) == 1 for row in K.matrix())
    rep = K.report
    assert rep.ok
    if rep.strictly_monotone:
        assert rep.monotone


@settings(max_examples=100, deadline=None)
@given(rational_kernels())
def test_eigen_sign_implies_monotonicity(K):
    vals = eigenvalues_discrete(K.as_float()).values
    rep = K.report
    if vals.min() > 1e-9:
        assert rep.strictly_monotone
    if vals.min() >= 1e-9:
        assert rep.monotone
