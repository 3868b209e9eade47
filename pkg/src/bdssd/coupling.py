"""Seeded sample-path couplings of a chain with its pure-birth spectral dual.

Discrete time: at each step the primal moves under P, then the dual moves
from xh to xh + 1 with a probability built from the link rows (certainly if
the primal lands on xh + 1).  Continuous time: the primal clock races an
exponential dual clock whose rate depends on the current pair of states.
The dual's absorption time is a strong stationary time for the primal, and
its inter-birth waits are independent geometric (exponential) variables.

Randomness is counter-based: replica ``r`` of seed ``s`` owns a SplitMix64
stream, so any replica can be regenerated alone and results do not depend on
batching.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import _kernels
from .absorption import geometric_convolution, hypoexponential_cdf
from .core import ContinuousGenerator, DiscreteKernel, stationary_pmf, stationary_pmf_generator
from .errors import (
    CapExceeded,
    HypothesisViolated,
    IntertwiningError,
    InvalidState,
    NotErgodic,
)
from .spectral import eigenvalues_discrete, eigenvalues_generator, q_family_continuous, q_family_discrete

log = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 10**7
DEFAULT_MAX_TIME = 1e9
DEFAULT_CHUNK = 200_000


# ------------------------------------------------------------ RNG ----


def seed_key(seed: int) -> np.uint64:
    """64-bit stream key derived from a master seed."""
    return np.random.SeedSequence(int(seed)).generate_state(1, np.uint64)[0]


@dataclass(frozen=True)
class RngSpec:
    """A master seed and one replica index within it."""

    seed: int
    replica: int = 0

    @property
    def base(self) -> np.uint64:
        return _kernels.replica_bases(seed_key(self.seed), self.replica, 1)[0]


class _Stream:
    """Scalar view of one replica's stream, consuming draws in kernel order."""

    def __init__(self, spec: RngSpec):
        self.base = spec.base
        self.ctr = np.uint64(0)

    def next(self) -> float:
        with np.errstate(over="ignore"):
            u = float(_kernels.u01_np(np.array([self.base]), np.array([self.ctr]))[0])
            self.ctr = self.ctr + np.uint64(1)
        return u


# ------------------------------------------------------- contexts ----


@dataclass(frozen=True)
class SpectralContext:
    """Everything the discrete coupling needs: eigenvalues, link, transition table."""

    kernel: DiscreteKernel
    thetas: np.ndarray
    link: np.ndarray

    @classmethod
    def build(cls, P: DiscreteKernel) -> "SpectralContext":
        P = P.as_float()
        if not P.report.ergodic:
            raise NotErgodic("the spectral coupling needs an ergodic kernel")
        fam = q_family_discrete(P)  # raises NegativeEigenvalue
        thetas = np.maximum(np.asarray(fam.spectrum.nontrivial, dtype=float), 0.0)
        return cls(P, thetas, fam.link)

    @property
    def d(self) -> int:
        return self.kernel.d

    def birth_probability(self, xhat: int, y: int) -> float:
        d = self.d
        if not 0 <= xhat < d:
            raise InvalidState(f"dual state {xhat} must lie in 0..{d - 1}")
        if not 0 <= y <= d:
            raise InvalidState(f"primal state {y} outside 0..{d}")
        if y > xhat + 1:
            raise InvalidState(f"primal state {y} exceeds dual state {xhat} + 1")
        if y == xhat + 1:
            return 1.0
        th = self.thetas[xhat]
        up = (1.0 - th) * self.link[xhat + 1, y]
        den = th * self.link[xhat, y] + up
        if den <= 0.0:
            raise InvalidState(f"pair (xhat={xhat}, y={y}) lies outside the link support")
        return min(up / den, 1.0)

    def table(self) -> np.ndarray:
        """``btab[xh, x, dy]``: dual birth probability when the primal moves x -> x + dy - 1."""
        d = self.d
        tab = np.zeros((d + 1, d + 1, 3))
        for xh in range(d):
            for x in range(xh + 1):
                for dy in range(3):
                    y = x + dy - 1
                    if 0 <= y <= d and (self.link[xh, y] > 0 or self.link[xh + 1, y] > 0):
                        tab[xh, x, dy] = self.birth_probability(xh, y)
        return tab


def dual_birth_probability(ctx, xhat: int, y: int) -> float:
    """Probability that the dual steps from ``xhat`` to ``xhat + 1`` when the primal lands on ``y``.

    ``ctx`` is a :class:`SpectralContext` or a kernel it can be built from.
    """
    if isinstance(ctx, DiscreteKernel):
        ctx = SpectralContext.build(ctx)
    return ctx.birth_probability(xhat, y)


@dataclass(frozen=True)
class ContinuousContext:
    generator: ContinuousGenerator
    nus: np.ndarray  # descending
    link: np.ndarray

    @classmethod
    def build(cls, G: ContinuousGenerator) -> "ContinuousContext":
        G = G.as_float()
        if not G.ergodic:
            raise NotErgodic("the spectral coupling needs an ergodic generator")
        fam = q_family_continuous(G)
        return cls(G, np.asarray(fam.spectrum.nontrivial, dtype=float), fam.link)

    @property
    def d(self) -> int:
        return self.generator.d

    def dual_rate(self, xhat: int, x: int) -> float:
        """nu_xhat * link[xhat + 1, x] / link[xhat, x]."""
        if not 0 <= xhat < self.d:
            raise InvalidState(f"dual state {xhat} must lie in 0..{self.d - 1}")
        den = self.link[xhat, x]
        if den <= 0.0:
            raise InvalidState(f"pair (xhat={xhat}, x={x}) lies outside the link support")
        return float(self.nus[xhat] * self.link[xhat + 1, x] / den)

    def table(self) -> np.ndarray:
        d = self.d
        tab = np.zeros((d + 1, d + 1))
        for xh in range(d):
            for x in range(d + 1):
                if self.link[xh, x] > 0:
                    tab[xh, x] = self.dual_rate(xh, x)
        return tab


def ehrenfest(d: int, hold=0.5) -> DiscreteKernel:
    """Ehrenfest kernel on {0..d} with holding probability ``hold``."""
    move = 1.0 - hold
    birth = [move * (d - i) / d for i in range(d)]
    death = [move * i / d for i in range(1, d + 1)]
    return DiscreteKernel(birth, death, mode="float")


def coordinate_table(d: int) -> np.ndarray:
    """Birth table of the coordinate-checking dual of the lazy Ehrenfest chain."""
    tab = np.zeros((d + 1, d + 1, 3))
    for xh in range(d):
        for x in range(xh + 1):
            tab[xh, x, 1] = 1.0 - xh / d
            if x < d:
                tab[xh, x, 2] = (d - xh) / (d - x)
    return tab


def _is_ehrenfest(P: DiscreteKernel) -> bool:
    ref = ehrenfest(P.d).as_arrays()
    return all(np.allclose(a, b, atol=1e-12, rtol=0) for a, b in zip(P.as_float().as_arrays(), ref))


# --------------------------------------------------- trajectories ----


@dataclass(frozen=True)
class CoupledTrajectory:
    """One run of a primal chain X and its dual Xh, both started at 0.

    ``times[k]`` is the epoch of the k-th recorded state pair; ``sojourns[i]``
    is how long the dual spent at level i.
    """

    times: np.ndarray
    x: np.ndarray
    xhat: np.ndarray
    t_hat: float
    sojourns: np.ndarray
    kind: str

    def check(self):
        if self.x[0] != 0 or self.xhat[0] != 0:
            raise IntertwiningError("trajectory does not start at (0, 0)")
        if np.any(self.x > self.xhat):
            raise IntertwiningError("primal overtook the dual")
        steps = np.diff(self.xhat)
        if np.any((steps != 0) & (steps != 1)):
            raise IntertwiningError("dual moved by something other than 0 or +1")
        if not math.isclose(float(np.sum(self.sojourns)), float(self.t_hat), rel_tol=1e-12, abs_tol=1e-12):
            raise IntertwiningError("sojourns do not add up to the absorption time")
        return self

    def to_rows(self):
        return list(zip(self.times.tolist(), self.x.tolist(), self.xhat.tolist()))


def _discrete_path(P, table, link, rng: RngSpec, max_steps, kind):
    p, q, r = P.as_float().as_arrays()
    cum_death = q
    cum_hold = q + r
    d = P.d
    stream = _Stream(rng)
    x = xh = t = entry = 0
    xs, xhs = [0], [0]
    soj = np.zeros(d, dtype=np.int64)
    while xh < d:
        if t >= max_steps:
            raise CapExceeded(f"dual not absorbed within {max_steps} steps")
        u = stream.next()
        dy = 0 if u < cum_death[x] else (1 if u < cum_hold[x] else 2)
        up = stream.next() < table[xh, x, dy]
        x = x + dy - 1
        t += 1
        if up:
            soj[xh] = t - entry
            entry = t
            xh += 1
        if x > xh or link[xh, x] <= 0.0:
            raise IntertwiningError(f"pair (xhat={xh}, x={x}) left the link support at step {t}")
        xs.append(x)
        xhs.append(xh)
    n = len(xs)
    return CoupledTrajectory(np.arange(n), np.array(xs), np.array(xhs), t, soj, kind).check()


def run_coupled_discrete(P: DiscreteKernel, rng: RngSpec, max_steps=DEFAULT_MAX_STEPS) -> CoupledTrajectory:
    """Simulate X under P together with its spectral dual until the dual hits d."""
    ctx = P if isinstance(P, SpectralContext) else SpectralContext.build(P)
    return _discrete_path(ctx.kernel, ctx.table(), ctx.link, rng, max_steps, "discrete")


def run_coordinate_dual(dim: int, rng: RngSpec, max_steps=DEFAULT_MAX_STEPS) -> CoupledTrajectory:
    """Lazy Ehrenfest chain on {0..dim} with the coordinate-checking dual."""
    P = ehrenfest(dim)
    link = SpectralContext.build(P).link
    return _discrete_path(P, coordinate_table(dim), link, rng, max_steps, "coordinate")


def run_coupled_continuous(G: ContinuousGenerator, rng: RngSpec, max_time=DEFAULT_MAX_TIME) -> CoupledTrajectory:
    """Race the primal jump clock against the dual clock until the dual hits d."""
    ctx = G if isinstance(G, ContinuousContext) else ContinuousContext.build(G)
    lam, mu = ctx.generator.as_arrays()
    rtab = ctx.table()
    link = ctx.link
    d = ctx.d
    stream = _Stream(rng)
    x = xh = 0
    t = entry = 0.0
    ts, xs, xhs = [0.0], [0], [0]
    soj = np.zeros(d)
    while xh < d:
        if t > max_time:
            raise CapExceeded(f"dual not absorbed by time {max_time}")
        a = lam[x] + mu[x]
        e1 = -math.log1p(-stream.next()) / a
        rate = rtab[xh, x]
        u = stream.next()
        e2 = -math.log1p(-u) / rate if rate > 0.0 else math.inf
        u = stream.next()
        if e1 < e2:
            t += e1
            if u * a < lam[x]:
                x += 1
            else:
                x -= 1
            if x == xh + 1:
                soj[xh] = t - entry
                entry = t
                xh += 1
        else:
            t += e2
            soj[xh] = t - entry
            entry = t
            xh += 1
        if link[xh, x] <= 0.0:
            raise IntertwiningError(f"pair (xhat={xh}, x={x}) left the link support at time {t}")
        ts.append(t)
        xs.append(x)
        xhs.append(xh)
    return CoupledTrajectory(np.array(ts), np.array(xs), np.array(xhs), t, soj, "continuous").check()


# ---------------------------------------------------------- batches ----


@dataclass
class DiscreteBatch:
    t_hat: np.ndarray
    x_at: np.ndarray
    sojourns: np.ndarray
    transitions: np.ndarray  # (d+1, 3): counts of down / hold / up moves per primal state
    dual_moves: np.ndarray  # (d, 2): counts of dual holds / births per dual level
    gap_pairs: np.ndarray  # (d+1, d+1): consecutive (xh - x) pairs


@dataclass
class ContinuousBatch:
    t_hat: np.ndarray
    x_at: np.ndarray
    sojourns: np.ndarray
    occupation: np.ndarray
    jumps: np.ndarray  # (d+1, 2): down / up jumps per primal state


def _chunks(n, chunk):
    first = 0
    while first < n:
        size = min(chunk, n - first)
        yield first, size
        first += size


def _raise_status(status, first, what):
    bad = np.flatnonzero(status)
    if bad.size:
        i = int(bad[0])
        if status[i] == _kernels.STATUS_CAP:
            raise CapExceeded(f"replica {first + i}: {what} not absorbed before the cap")
        raise IntertwiningError(f"replica {first + i}: pair left the link support")


def _simulate_discrete_table(P, table, link, n, seed, max_steps, chunk):
    P = P.as_float()
    d = P.d
    p, q, r = P.as_arrays()
    cum_death = np.ascontiguousarray(q)
    cum_hold = np.ascontiguousarray(q + r)
    key = seed_key(seed)
    parts = []
    trans = np.zeros((d + 1, 3), dtype=np.int64)
    moves = np.zeros((d, 2), dtype=np.int64)
    gaps = np.zeros((d + 1) ** 2, dtype=np.int64)
    for first, size in _chunks(n, chunk):
        bases = _kernels.replica_bases(key, first, size)
        t_abs, x_abs, soj, status, tr, dm, df = _kernels.coupled_discrete(
            cum_death, cum_hold, table, link, bases, max_steps, (d + 1) ** 2
        )
        _raise_status(status, first, "dual")
        parts.append((t_abs, x_abs, soj))
        trans += tr
        moves += dm
        gaps += df
    t_abs, x_abs, soj = (np.concatenate(z) for z in zip(*parts))
    return DiscreteBatch(t_abs, x_abs, soj, trans, moves, gaps.reshape(d + 1, d + 1))


def simulate_discrete(
    P: DiscreteKernel, n: int, seed: int, coordinate_dual=False, max_steps=DEFAULT_MAX_STEPS, chunk=DEFAULT_CHUNK
) -> DiscreteBatch:
    """Replicas 0..n-1 of the discrete coupling (or the coordinate-checking dual)."""
    ctx = SpectralContext.build(P)
    if coordinate_dual:
        if not _is_ehrenfest(P):
            raise HypothesisViolated("the coordinate-checking dual needs the lazy Ehrenfest kernel")
        table = coordinate_table(P.d)
    else:
        table = ctx.table()
    return _simulate_discrete_table(ctx.kernel, table, np.ascontiguousarray(ctx.link), n, seed, max_steps, chunk)


def simulate_continuous(
    G: ContinuousGenerator, n: int, seed: int, max_time=DEFAULT_MAX_TIME, chunk=DEFAULT_CHUNK
) -> ContinuousBatch:
    ctx = ContinuousContext.build(G)
    lam, mu = ctx.generator.as_arrays()
    rtab = ctx.table()
    link = np.ascontiguousarray(ctx.link)
    d = ctx.d
    key = seed_key(seed)
    parts = []
    jumps = np.zeros((d + 1, 2), dtype=np.int64)
    for first, size in _chunks(n, chunk):
        bases = _kernels.replica_bases(key, first, size)
        t_abs, x_abs, soj, occ, status, jp = _kernels.coupled_continuous(lam, mu, rtab, link, bases, max_time)
        _raise_status(status, first, "dual")
        parts.append((t_abs, x_abs, soj, occ))
        jumps += jp
    t_abs, x_abs, soj, occ = (np.concatenate(z) for z in zip(*parts))
    return ContinuousBatch(t_abs, x_abs, soj, occ, jumps)


def simulate_occupation(
    Gstar: ContinuousGenerator, n: int, seed: int, max_time=DEFAULT_MAX_TIME, chunk=DEFAULT_CHUNK
) -> np.ndarray:
    """Occupation times of 0..d-1 before the first visit to d, one row per replica."""
    lam, mu = Gstar.as_float().as_arrays()
    if np.any(lam[:-1] <= 0):
        raise HypothesisViolated("every birth rate below d must be positive")
    key = seed_key(seed)
    parts = []
    for first, size in _chunks(n, chunk):
        occ, status = _kernels.occupation(lam, mu, _kernels.replica_bases(key, first, size), max_time)
        _raise_status(status, first, "primal")
        parts.append(occ)
    return np.concatenate(parts)


def occupation_mc(Gstar: ContinuousGenerator, u, n: int, seed: int):
    """Monte Carlo estimate of E exp(-<u, T>) and its standard error."""
    occ = simulate_occupation(Gstar, n, seed)
    vals = np.exp(-occ @ np.asarray(u, dtype=float))
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return float(vals.mean()), se


# ------------------------------------------------------- statistics ----


def ks_discrete(samples, cdf_weights) -> float:
    """Sup distance between the empirical cdf of integer samples and a lattice cdf."""
    samples = np.asarray(samples, dtype=np.int64)
    top = max(int(samples.max(initial=0)), cdf_weights.size - 1)
    counts = np.bincount(samples, minlength=top + 1)
    emp = np.cumsum(counts) / samples.size
    exact = np.zeros(top + 1)
    exact[: cdf_weights.size] = np.cumsum(cdf_weights)
    exact[cdf_weights.size :] = exact[cdf_weights.size - 1]
    return float(np.max(np.abs(emp - exact)))


def ks_continuous(samples, cdf) -> float:
    s = np.sort(np.asarray(samples, dtype=float))
    n = s.size
    f = cdf(s)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def tv_distance(samples, pi) -> float:
    pi = np.asarray(pi, dtype=float)
    freq = np.bincount(samples, minlength=pi.size) / len(samples)
    return 0.5 * float(np.abs(freq - pi).sum())


def _z(mean, expected, se):
    if se > 0:
        return (mean - expected) / se
    return 0.0 if abs(mean - expected) <= 1e-12 * max(1.0, abs(expected)) else math.inf


@dataclass
class SstReport:
    """Monte Carlo evidence that the dual absorption time is a strong stationary time."""

    n: int
    kind: str
    ks: float
    tv: float
    chi2: float | None
    chi2_dof: int | None
    p_value: float | None
    sojourn_z: list
    transition_z: float
    degenerate: bool = False
    notes: list = field(default_factory=list)

    def checks(self, ks_tol=None, tv_tol=None, alpha=1e-3, z=5.0) -> dict:
        """Pass/fail per statistic.  Default KS and TV bounds are 1.9/sqrt(N) and 3.2/sqrt(N)."""
        root = math.sqrt(max(self.n, 1))
        ks_tol = 1.9 / root if ks_tol is None else ks_tol
        tv_tol = 3.2 / root if tv_tol is None else tv_tol
        return {
            "ks": self.ks <= ks_tol,
            "tv": self.tv <= tv_tol,
            "independence": self.p_value is not None and self.p_value >= alpha,
            "sojourns": all(abs(v) <= z for v in self.sojourn_z),
            "transitions": abs(self.transition_z) <= z,
        }

    def to_dict(self):
        return {
            "replicas": self.n,
            "kind": self.kind,
            "ks": self.ks,
            "tv_stationary": self.tv,
            "chi2": self.chi2,
            "chi2_dof": self.chi2_dof,
            "p_value": self.p_value,
            "sojourn_z": list(self.sojourn_z),
            "max_transition_z": self.transition_z,
            "degenerate": self.degenerate,
            "notes": list(self.notes),
        }


def _decile_bins(t_hat, quantile_fn):
    edges = np.unique([quantile_fn(k / 10) for k in range(1, 10)])
    return np.searchsorted(edges, t_hat, side="left")


def independence_test(bins, states):
    """Chi-square test of independence between binned absorption times and the state at absorption."""
    table = np.zeros((int(bins.max()) + 1, int(states.max()) + 1))
    np.add.at(table, (bins, states), 1)
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if min(table.shape) < 2:
        return None, None, None
    res = stats.chi2_contingency(table, correction=False)
    return float(res.statistic), int(res.dof), float(res.pvalue)


def _transition_z_discrete(P, trans):
    p, q, r = P.as_float().as_arrays()
    probs = np.stack([q, r, p], axis=1)
    worst = 0.0
    for x in range(probs.shape[0]):
        nx = trans[x].sum()
        if nx == 0:
            continue
        for dy in range(3):
            pr = probs[x, dy]
            se = math.sqrt(pr * (1 - pr) / nx)
            zz = _z(trans[x, dy] / nx, pr, se)
            worst = max(worst, abs(zz))
    return worst


def _transition_z_continuous(G, jumps, occupation):
    lam, mu = G.as_float().as_arrays()
    worst = 0.0
    exposure = occupation.sum(axis=0)
    for x in range(lam.size):
        nx = int(jumps[x].sum())
        if nx == 0:
            continue
        a = lam[x] + mu[x]
        pr = lam[x] / a
        worst = max(worst, abs(_z(jumps[x, 1] / nx, pr, math.sqrt(pr * (1 - pr) / nx))))
        # censored exponential holds: jumps / exposure estimates the total rate
        worst = max(worst, abs(_z(nx / exposure[x], a, a / math.sqrt(nx))))
    return worst


def monte_carlo_sst(chain, n: int, seed: int, coordinate_dual=False, chunk=DEFAULT_CHUNK) -> SstReport:
    """Run ``n`` coupled replicas and compare them with the exact laws."""
    if n < 1:
        raise ValueError("need at least one replica")
    notes = []
    if isinstance(chain, DiscreteKernel):
        batch = simulate_discrete(chain, n, seed, coordinate_dual=coordinate_dual, chunk=chunk)
        thetas = np.maximum(eigenvalues_discrete(chain.as_float()).nontrivial, 0.0)
        law = geometric_convolution(thetas)
        cdf = np.cumsum(law.weights)
        ks = ks_discrete(batch.t_hat, law.weights)
        pi = np.array(stationary_pmf(chain), dtype=float)
        means = batch.sojourns.mean(axis=0)
        exp_mean = 1.0 / (1.0 - thetas)
        var = thetas / (1.0 - thetas) ** 2
        quantile = lambda a: int(np.searchsorted(cdf, a - 1e-12))  # noqa: E731
        trans_z = _transition_z_discrete(chain, batch.transitions)
        kind = "coordinate" if coordinate_dual else "discrete"
    elif isinstance(chain, ContinuousGenerator):
        if coordinate_dual:
            raise HypothesisViolated("the coordinate-checking dual is a discrete-time construction")
        batch = simulate_continuous(chain, n, seed, chunk=chunk)
        nus = np.asarray(eigenvalues_generator(chain.as_float()).nontrivial, dtype=float)

        def law_cdf(t):
            return hypoexponential_cdf(nus, t).values

        ks = ks_continuous(batch.t_hat, law_cdf)
        pi = np.array(stationary_pmf_generator(chain), dtype=float)
        means = batch.sojourns.mean(axis=0)
        exp_mean = 1.0 / nus
        var = 1.0 / nus**2
        grid = np.linspace(0.0, float(np.sum(1 / nus) * 20 + 20 / nus.min()), 20001)
        gcdf = law_cdf(grid)
        quantile = lambda a: float(grid[min(np.searchsorted(gcdf, a), grid.size - 1)])  # noqa: E731
        trans_z = _transition_z_continuous(chain, batch.jumps, batch.occupation)
        kind = "continuous"
    else:
        raise TypeError(f"expected a DiscreteKernel or ContinuousGenerator, got {type(chain).__name__}")

    tv = tv_distance(batch.x_at, pi)
    degenerate = n < 2
    if degenerate:
        chi2 = dof = pval = None
        soj_z = [math.nan] * len(means)
        notes.append("single replica: independence p-value and sojourn z-scores undefined")
    else:
        chi2, dof, pval = independence_test(_decile_bins(batch.t_hat, quantile), batch.x_at)
        if pval is None:
            notes.append("contingency table collapsed to one row or column; p-value undefined")
        se = np.sqrt(var / n)
        soj_z = [float(_z(m, e, s)) for m, e, s in zip(means, exp_mean, se)]
    log.debug("sst %s n=%d ks=%.4g tv=%.4g p=%s", kind, n, ks, tv, pval)
    return SstReport(n, kind, ks, tv, chi2, dof, pval, soj_z, float(trans_z), degenerate, notes)


def gap_pair_z(a: DiscreteBatch, b: DiscreteBatch) -> np.ndarray:
    """Two-sample z-scores comparing the (prev gap, new gap) frequencies of two batches."""
    ca = a.gap_pairs.astype(float)
    cb = b.gap_pairs.astype(float)
    na, nb = ca.sum(), cb.sum()
    pooled = (ca + cb) / (na + nb)
    se = np.sqrt(pooled * (1 - pooled) * (1 / na + 1 / nb))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, (ca / na - cb / nb) / se, 0.0)
    return z


def dual_move_z(batch: DiscreteBatch, thetas) -> np.ndarray:
    """z-scores of the dual's per-level birth frequencies against 1 - theta."""
    thetas = np.asarray(thetas, dtype=float)
    tot = batch.dual_moves.sum(axis=1)
    out = np.zeros(thetas.size)
    for i, th in enumerate(thetas):
        if tot[i] == 0:
            continue
        pr = 1.0 - th
        out[i] = _z(batch.dual_moves[i, 1] / tot[i], pr, math.sqrt(pr * (1 - pr) / tot[i]))
    return out
