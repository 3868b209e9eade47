"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) or through pytest, where
the lines are repeated in an "acceptance criteria" summary section.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from bdssd.absorption import (
    absorption_cdf_continuous,
    absorption_pmf,
    auto_time_grid,
    discretized_cdf,
    gaussian_split_residual,
    geometric_convolution,
    hypoexponential_cdf,
    lazy_pgf_identity_check,
    occupation_laplace,
    pgf_product,
)
from bdssd.core import auto_eps, stationary_pmf, stationary_pmf_generator
from bdssd.coupling import dual_move_z, ehrenfest, gap_pair_z, monte_carlo_sst, simulate_discrete, simulate_occupation
from bdssd.duality import anti_dual, classical_dual, intertwining_residual, spectral_dual_discrete, spectral_dual_generator
from bdssd.sampling import (
    random_absorbing_generator,
    random_absorbing_kernel,
    random_ergodic_generator,
    random_ergodic_kernel,
)
from bdssd.specfile import load_fixture
from bdssd.spectral import eigenvalues_discrete, eigenvalues_generator

from conftest import record_acceptance

pytestmark = pytest.mark.acceptance

MASTER_SEED = 20240611


def _rngs(count, salt):
    seq = np.random.SeedSequence([MASTER_SEED, salt])
    return [np.random.default_rng(s) for s in seq.spawn(count)]


def test_criterion_1_discrete_theorem_positive_spectrum():
    start = time.perf_counter()
    worst = 0.0
    for i, rng in enumerate(_rngs(200, 1)):
        d = 2 + i % 5
        P = random_absorbing_kernel(rng, d, positive_eigs=True)
        thetas = eigenvalues_discrete(P).nontrivial
        assert thetas.min() > 0
        worst = max(worst, absorption_pmf(P).l1_distance(geometric_convolution(thetas)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed <= 60
    record_acceptance(1, "pmf vs geometric convolution, 200 kernels", ok, f"max L1 {worst:.3e}, {elapsed:.1f}s")
    assert ok


def test_criterion_2_discrete_theorem_negative_spectrum():
    start = time.perf_counter()
    cex = load_fixture("cex")
    thetas = eigenvalues_discrete(cex).nontrivial
    assert thetas.min() == pytest.approx((26 - math.sqrt(3026)) / 100, abs=1e-15)
    pmf = absorption_pmf(cex)
    grid = np.linspace(-0.9, 0.9, 21)[1:]
    worst = max(abs(pmf.pgf(u) - pgf_product(thetas, u)) for u in grid)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed <= 1
    record_acceptance(2, "pgf grid on the negative-eigenvalue kernel", ok, f"max gap {worst:.3e}, {elapsed:.3f}s")
    assert ok


def test_criterion_3_continuous_theorem():
    start = time.perf_counter()
    worst = 0.0
    for i, rng in enumerate(_rngs(100, 3)):
        G = random_absorbing_generator(rng, 2 + i % 4)
        nus = eigenvalues_generator(G).nontrivial
        times = auto_time_grid(nus, 100)
        worst = max(worst, absorption_cdf_continuous(G, times).sup_distance(hypoexponential_cdf(nus, times)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed <= 60
    record_acceptance(3, "uniformized cdf vs hypoexponential, 100 generators", ok, f"max sup {worst:.3e}, {elapsed:.1f}s")
    assert ok


def test_criterion_4_anti_dual_roundtrip():
    start = time.perf_counter()
    exact = 0
    worst = Fraction(0)
    for i, rng in enumerate(_rngs(200, 4)):
        Ps = random_absorbing_kernel(rng, 1 + i % 6, mode="rational")
        back = classical_dual(anti_dual(Ps).primal)
        resid = intertwining_residual(back.link, back.primal, back.dual)
        exact += back.dual == Ps and resid == 0
        worst = max(worst, Fraction(resid))
    elapsed = time.perf_counter() - start
    ok = exact == 200 and elapsed <= 120
    record_acceptance(4, "rational anti-dual roundtrip, 200 kernels", ok, f"{exact}/200 exact, max residual {float(worst)}, {elapsed:.1f}s")
    assert ok


def test_criterion_5_spectral_dual_intertwining():
    resid = qmin = qd = 0.0
    for i, rng in enumerate(_rngs(200, 5)):
        P = random_ergodic_kernel(rng, 1 + i % 8)
        pair = spectral_dual_discrete(P)
        fam = pair.qfamily
        pi = np.array(stationary_pmf(P))
        resid = max(resid, pair.residual)
        qmin = min(qmin, min(float(Q.min()) for Q in fam.matrices))
        qd = max(qd, float(np.abs(fam[-1] - np.outer(np.ones(P.d + 1), pi)).sum(axis=1).max()))
    cres = cqmin = cqd = 0.0
    for i, rng in enumerate(_rngs(100, 55)):
        G = random_ergodic_generator(rng, 1 + i % 6)
        pair = spectral_dual_generator(G)
        fam = pair.qfamily
        pi = np.array(stationary_pmf_generator(G))
        cres = max(cres, pair.residual)
        cqmin = min(cqmin, min(float(Q.min()) for Q in fam.matrices))
        cqd = max(cqd, float(np.abs(fam[-1] - np.outer(np.ones(G.d + 1), pi)).sum(axis=1).max()))
    ok = max(resid, qd, cres, cqd) <= 1e-10 and min(qmin, cqmin) >= -1e-10
    record_acceptance(
        5,
        "spectral dual, 200 kernels + 100 generators",
        ok,
        f"residual {resid:.2e}/{cres:.2e}, min Q entry {qmin:.2e}/{cqmin:.2e}, |Q_d - 1 pi| {qd:.2e}/{cqd:.2e}",
    )
    assert ok


@pytest.mark.parametrize("name", ["e2", "e2c"])
def test_criterion_6_sample_path_couplings(name):
    start = time.perf_counter()
    rep = monte_carlo_sst(load_fixture(name), 100_000, seed=MASTER_SEED)
    checks = rep.checks(ks_tol=0.006, tv_tol=0.01, alpha=1e-3, z=5.0)
    elapsed = time.perf_counter() - start
    ok = all(checks.values()) and elapsed <= 120
    zs = ", ".join(f"{z:.2f}" for z in rep.sojourn_z)
    record_acceptance(
        6,
        f"coupling on {name.upper()}, N=1e5",
        ok,
        f"KS {rep.ks:.4f}, TV {rep.tv:.4f}, p {rep.p_value:.3f}, sojourn z [{zs}], max transition z {rep.transition_z:.2f}, {elapsed:.1f}s",
    )
    assert ok


def test_criterion_7_coordinate_dual():
    P = ehrenfest(2)
    thetas = np.maximum(eigenvalues_discrete(P).nontrivial, 0.0)
    coord = simulate_discrete(P, 100_000, seed=MASTER_SEED + 7, coordinate_dual=True)
    spec = simulate_discrete(P, 100_000, seed=MASTER_SEED + 8)
    marginal = np.abs(dual_move_z(coord, thetas))
    pair_z = np.abs(gap_pair_z(coord, spec))
    # single-time gap law, for reference: both couplings share the link, so no difference is expected
    single = np.abs(_single_gap_z(coord, spec))
    ok = marginal.max() <= 5 and pair_z.max() > 3
    record_acceptance(
        7,
        "coordinate-checking dual vs spectral coupling",
        ok,
        f"marginal dual-move max |z| {marginal.max():.2f}; consecutive gap-pair max |z| {pair_z.max():.1f}; "
        f"single-gap max |z| {single.max():.2f}",
    )
    assert ok


def _single_gap_z(a, b):
    ca = a.gap_pairs.sum(axis=0).astype(float)
    cb = b.gap_pairs.sum(axis=0).astype(float)
    na, nb = ca.sum(), cb.sum()
    pooled = (ca + cb) / (na + nb)
    se = np.sqrt(pooled * (1 - pooled) * (1 / na + 1 / nb))
    return np.where(se > 0, (ca / na - cb / nb) / np.where(se > 0, se, 1), 0.0)


def test_criterion_8_occupation_times():
    Gs = load_fixture("e2c-absorbing")
    occ = simulate_occupation(Gs, 1_000_000, seed=MASTER_SEED)
    rng = np.random.default_rng(MASTER_SEED + 8)
    worst_z = 0.0
    for _ in range(5):
        u = rng.uniform(0.1, 3.0, Gs.d)
        vals = np.exp(-occ @ u)
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        worst_z = max(worst_z, abs(vals.mean() - occupation_laplace(Gs, u)) / se)
    worst_res = 0.0
    for i, r in enumerate(_rngs(100, 8)):
        G = random_absorbing_generator(r, 1 + i % 5)
        worst_res = max(worst_res, gaussian_split_residual(G, r.uniform(0.05, 5.0, G.d)))
    ok = worst_z <= 3 and worst_res <= 1e-10
    record_acceptance(8, "occupation transform vs MC and Gaussian split", ok, f"max |z| {worst_z:.2f}, max split residual {worst_res:.2e}")
    assert ok


def test_criterion_9_lazy_and_discretization_bridge():
    cex = load_fixture("cex")
    lazy_res = [lazy_pgf_identity_check(cex, eps, 0.5) for eps in (0.2, 0.4)]
    Gs = load_fixture("e2c-absorbing")
    eps0 = float(auto_eps(Gs))
    times = np.linspace(0.0, 12.0, 1201)
    exact = absorption_cdf_continuous(Gs, times)
    dists = [discretized_cdf(Gs, eps0 / k, times).sup_distance(exact) for k in (1, 2, 4)]
    ok = max(lazy_res) <= 1e-9 and dists[0] > dists[1] > dists[2]
    record_acceptance(
        9,
        "lazy pgf identity and discretization limit",
        ok,
        f"lazy residuals {lazy_res[0]:.2e}, {lazy_res[1]:.2e}; sup distances " + ", ".join(f"{x:.4f}" for x in dists),
    )
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
