import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdssd.absorption import geometric_convolution
from bdssd.core import ContinuousGenerator, DiscreteKernel
from bdssd.coupling import (
    ContinuousContext,
    RngSpec,
    SpectralContext,
    coordinate_table,
    dual_birth_probability,
    ehrenfest,
    independence_test,
    ks_discrete,
    monte_carlo_sst,
    occupation_mc,
    run_coordinate_dual,
    run_coupled_continuous,
    run_coupled_discrete,
    simulate_continuous,
    simulate_discrete,
    tv_distance,
)
from bdssd.errors import CapExceeded, HypothesisViolated, InvalidState, NegativeEigenvalue
from bdssd.sampling import random_ergodic_generator, random_ergodic_kernel


def reduced_ehrenfest_birth(d, xh, y):
    return (d - xh) * (xh + 1) / (2 * xh * (xh + 1 - y) + (d - xh) * (xh + 1))


def test_birth_probability_examples(e2):
    assert dual_birth_probability(e2, 0, 0) == pytest.approx(1.0)
    assert dual_birth_probability(e2, 1, 0) == pytest.approx(1 / 3, abs=1e-15)
    for xh in range(2):
        assert dual_birth_probability(e2, xh, xh + 1) == 1.0
    with pytest.raises(InvalidState):
        dual_birth_probability(e2, 0, 2)
    with pytest.raises(InvalidState):
        dual_birth_probability(e2, 2, 0)


def test_birth_probability_reduced_formula():
    for d in (3, 5, 8):
        ctx = SpectralContext.build(ehrenfest(d))
        for xh in range(d):
            for y in range(xh + 1):
                assert ctx.birth_probability(xh, y) == pytest.approx(reduced_ehrenfest_birth(d, xh, y), abs=1e-12)


def test_negative_spectrum_rejected():
    P = DiscreteKernel([0.9, 0.9], [0.9, 0.05], mode="float")
    with pytest.raises(NegativeEigenvalue):
        run_coupled_discrete(P, RngSpec(1))


def test_dual_rate_examples(e2c):
    ctx = ContinuousContext.build(e2c)
    assert ctx.dual_rate(0, 0) == pytest.approx(2.0, abs=1e-14)
    assert ctx.dual_rate(1, 0) == pytest.approx(1.0, abs=1e-14)
    for xh in range(2):
        for x in range(xh + 1):
            assert ctx.dual_rate(xh, x) == pytest.approx((2 - xh) * (xh + 1) / (xh + 1 - x), abs=1e-13)


def test_coordinate_rules():
    tab = coordinate_table(2)
    assert tab[1, 1, 2] == 1.0  # xh=1, x=1, y=2
    assert np.all(tab[:, :, 0] == 0.0)  # y = x - 1
    assert tab[1, 0, 1] == 0.5


def test_trajectory_reproducible(e2):
    a = run_coupled_discrete(e2, RngSpec(42, 7))
    b = run_coupled_discrete(e2, RngSpec(42, 7))
    np.testing.assert_array_equal(a.x, b.x)
    np.testing.assert_array_equal(a.xhat, b.xhat)
    assert np.all(a.x <= a.xhat)
    assert a.t_hat == a.sojourns.sum()
    others = [tuple(run_coupled_discrete(e2, RngSpec(42, r)).x) for r in range(20)]
    assert len(set(others)) > 1


def test_path_runner_matches_batch(e2, e2c):
    batch = simulate_discrete(e2.as_float(), 20, seed=5)
    for r in range(20):
        tr = run_coupled_discrete(e2, RngSpec(5, r))
        assert tr.t_hat == batch.t_hat[r]
        assert tr.x[-1] == batch.x_at[r]
        np.testing.assert_array_equal(tr.sojourns, batch.sojourns[r])
    cb = simulate_continuous(e2c, 20, seed=9)
    for r in range(20):
        tr = run_coupled_continuous(e2c, RngSpec(9, r))
        assert tr.t_hat == pytest.approx(cb.t_hat[r], rel=1e-12)
        assert tr.x[-1] == cb.x_at[r]
    cd = simulate_discrete(ehrenfest(2), 10, seed=3, coordinate_dual=True)
    for r in range(10):
        tr = run_coordinate_dual(2, RngSpec(3, r))
        assert tr.t_hat == cd.t_hat[r]


def test_batch_independent_of_chunking(e2, e2c):
    a = simulate_discrete(e2, 1000, seed=11, chunk=1000)
    b = simulate_discrete(e2, 1000, seed=11, chunk=37)
    np.testing.assert_array_equal(a.t_hat, b.t_hat)
    np.testing.assert_array_equal(a.x_at, b.x_at)
    np.testing.assert_array_equal(a.gap_pairs, b.gap_pairs)
    c = simulate_continuous(e2c, 500, seed=11, chunk=500)
    e = simulate_continuous(e2c, 500, seed=11, chunk=64)
    np.testing.assert_array_equal(c.t_hat, e.t_hat)


def test_continuous_paths_respect_ordering(e2c):
    for r in range(30):
        tr = run_coupled_continuous(e2c, RngSpec(1, r))
        assert np.all(tr.x <= tr.xhat)
        assert np.all(np.diff(tr.times) > 0)


def test_caps():
    with pytest.raises(CapExceeded):
        run_coupled_discrete(ehrenfest(6), RngSpec(0), max_steps=2)


def test_coordinate_dual_needs_ehrenfest(cex):
    P = random_ergodic_kernel(np.random.default_rng(0), 3)
    with pytest.raises(HypothesisViolated):
        simulate_discrete(P, 10, seed=1, coordinate_dual=True)


def test_sst_ehrenfest(e2):
    rep = monte_carlo_sst(e2, 100_000, seed=2024)
    assert rep.ks <= 0.006
    assert rep.tv <= 0.01
    assert rep.p_value >= 1e-3
    assert all(rep.checks().values())


def test_sst_continuous(e2c):
    rep = monte_carlo_sst(e2c, 100_000, seed=2024)
    assert rep.ks <= 0.006
    assert rep.p_value >= 1e-3
    assert all(rep.checks().values())


def test_sst_coordinate(e2):
    rep = monte_carlo_sst(e2, 100_000, seed=77, coordinate_dual=True)
    assert rep.ks <= 0.006
    assert all(rep.checks().values())


def test_sst_single_replica(e2, e2c):
    for chain in (e2, e2c):
        rep = monte_carlo_sst(chain, 1, seed=0)
        assert rep.degenerate and rep.p_value is None
        assert rep.notes


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 5))
def test_random_chains_pass_sst(seed, d):
    rng = np.random.default_rng(seed)
    P = random_ergodic_kernel(rng, d)
    rep = monte_carlo_sst(P, 20_000, seed=seed)
    checks = rep.checks(alpha=1e-6, z=6)
    assert checks["ks"] and checks["sojourns"] and checks["transitions"]
    G = random_ergodic_generator(rng, d)
    rep = monte_carlo_sst(G, 20_000, seed=seed)
    checks = rep.checks(alpha=1e-6, z=6)
    assert checks["ks"] and checks["sojourns"] and checks["transitions"]


def test_statistics_helpers():
    law = geometric_convolution([0.5])
    samples = np.ones(10, dtype=np.int64)
    assert ks_discrete(samples, law.weights) == pytest.approx(0.5)
    assert tv_distance(np.array([0, 0, 1, 1]), [0.5, 0.5]) == 0.0
    assert tv_distance(np.array([0, 0]), [0.5, 0.5]) == 0.5
    chi2, dof, p = independence_test(np.array([0, 1, 0, 1]), np.array([0, 0, 1, 1]))
    assert dof == 1 and 0 <= p <= 1
    assert independence_test(np.zeros(5, dtype=int), np.arange(5)) == (None, None, None)


def test_occupation_mc(e2c_abs):
    est, se = occupation_mc(e2c_abs, [1.0, 1.0], 50_000, seed=3)
    assert abs(est - 0.4) <= 5 * se
    assert se > 0 and math.isfinite(se)


def test_occupation_requires_positive_births():
    with pytest.raises(HypothesisViolated):
        occupation_mc(ContinuousGenerator([1, 0], [1, 0]), [1.0, 1.0], 10, seed=0)
