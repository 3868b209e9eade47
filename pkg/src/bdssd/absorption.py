"""Absorption-time laws: lattice pmfs, pgfs, uniformized cdfs, hypoexponential
cdfs, and occupation-time Laplace transforms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal, stats

from . import _kernels
from .core import ContinuousGenerator, DiscreteKernel, auto_eps, discretize, lazy
from .errors import (
    CapExceeded,
    HypothesisViolated,
    NegativeEigenvalue,
    NoAbsorption,
    NonpositiveRate,
    PoleProximity,
    SingularMatrix,
    ThetaOutOfRange,
)
from .spectral import eigenvalues_discrete

DEFAULT_TOL = 1e-12
STEP_CAP = 10**7
HYPO_GAP = 1e-8
# closed-form hypoexponential weights beyond this magnitude lose ~1e-9 to cancellation
HYPO_WEIGHT_CAP = 1e6


@dataclass(frozen=True)
class LatticePmf:
    """Law on {0, 1, 2, ...}: ``weights[t] = P(T = t)`` up to the horizon, plus tail mass."""

    weights: np.ndarray
    tail: float

    @property
    def horizon(self) -> int:
        return self.weights.size - 1

    def mean(self) -> float:
        return float(np.dot(np.arange(self.weights.size), self.weights))

    def cdf(self, t=None):
        c = np.cumsum(self.weights)
        if t is None:
            return c
        t = np.floor(np.asarray(t, dtype=float)).astype(np.int64)
        out = np.where(t < 0, 0.0, c[np.clip(t, 0, self.horizon)])
        return out

    def pgf(self, u) -> float:
        """E u^T over the horizon (error at most |u|^horizon * tail for |u| <= 1)."""
        u = float(u)
        powers = u ** np.arange(self.weights.size)
        return float(np.dot(self.weights, powers))

    def l1_distance(self, other: "LatticePmf") -> float:
        n = max(self.weights.size, other.weights.size)
        a = np.zeros(n)
        b = np.zeros(n)
        a[: self.weights.size] = self.weights
        b[: other.weights.size] = other.weights
        return float(np.abs(a - b).sum())


@dataclass(frozen=True)
class TimeGridCdf:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape:
            raise ValueError("times and values differ in shape")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def sup_distance(self, other: "TimeGridCdf") -> float:
        if not np.array_equal(self.times, other.times):
            raise ValueError("cdfs live on different grids")
        return float(np.max(np.abs(self.values - other.values)))


def _first_passage(p, q, r, tol, cap):
    """Per-step absorption increments for the chain started at 0."""
    d = p.size - 1
    a = np.zeros(d + 1)
    a[0] = 1.0
    out = np.zeros(64)
    steps_done = 0
    chunk = 64
    while True:
        if steps_done + chunk > out.size:
            out = np.concatenate([out, np.zeros(max(out.size, chunk))])
        a = _kernels.advance(a, p, q, r, chunk, out, steps_done)
        steps_done += chunk
        tail = float(a[:d].sum())
        if tail < tol:
            return out[:steps_done], tail
        if steps_done >= cap:
            raise CapExceeded(f"tail {tail:.3e} still above {tol:g} after {steps_done} steps")
        chunk = min(chunk * 2, cap - steps_done)


def _require_absorbing(kernel: DiscreteKernel):
    rep = kernel.report
    if not rep.absorbing_top:
        raise HypothesisViolated("top state is not absorbing")
    stuck = [i for i in range(kernel.d) if not kernel.birth[i] > 0]
    if stuck:
        raise NoAbsorption(f"birth probability is zero at states {stuck}; d is unreachable")


def absorption_pmf(Pstar: DiscreteKernel, tol=DEFAULT_TOL, cap=STEP_CAP) -> LatticePmf:
    """Law of the absorption time at d for the chain started at 0."""
    _require_absorbing(Pstar)
    p, q, r = Pstar.as_arrays()
    inc, tail = _first_passage(p, q, r, tol, cap)
    # out[t] is mass absorbed at step t+1; trim trailing zeros past the horizon
    w = np.concatenate([[0.0], inc])
    last = np.flatnonzero(w)
    w = w[: last[-1] + 1] if last.size else w[:1]
    return LatticePmf(w, tail)


def geometric_convolution(thetas, tol=DEFAULT_TOL) -> LatticePmf:
    """Law of a sum of independent geometrics P(k) = (1 - theta) theta^(k-1), k >= 1."""
    th = np.asarray(list(thetas), dtype=float)
    if th.size and not np.all((th >= 0.0) & (th < 1.0)):
        raise ThetaOutOfRange(f"failure probabilities must lie in [0, 1), got {th}")
    if th.size == 0:
        return LatticePmf(np.array([1.0]), 0.0)
    # the sum is dominated by a negative binomial at the largest theta, which sizes the horizon
    worst = float(th.max())
    horizon = 64
    if worst > 0:
        horizon = max(horizon, th.size + int(stats.nbinom.isf(tol / 4, th.size, 1.0 - worst)) + 1)
    while True:
        acc = np.zeros(horizon + 1)
        acc[0] = 1.0
        for t in th:
            # pgf factor (1 - t) u / (1 - t u): shift by one, then g_k = t g_{k-1} + (1 - t) a_{k-1}
            shifted = np.concatenate([[0.0], acc[:-1]])
            acc = signal.lfilter([1.0 - t], [1.0, -t], shifted)
        tail = max(1.0 - math.fsum(acc), 0.0)
        if tail < tol:
            last = np.flatnonzero(acc)
            return LatticePmf(acc[: last[-1] + 1], tail)
        if horizon >= STEP_CAP:
            raise CapExceeded(f"geometric convolution tail {tail:.3e} above {tol:g}")
        horizon *= 2


def pgf_product(thetas, u) -> float:
    """prod_j (1 - theta_j) u / (1 - theta_j u)."""
    out = 1.0
    for t in thetas:
        den = 1.0 - t * u
        if abs(den) < 1e-14:
            raise PoleProximity(f"1 - theta*u = {den:.3e} for theta={t}, u={u}")
        out *= (1.0 - t) * u / den
    return float(out)


def lazy_pgf_identity_check(Pstar: DiscreteKernel, eps, s) -> float:
    """|E s^{T(eps)} - E v^T| with v = eps s / (1 - (1 - eps) s).

    T(eps) is the absorption time of the lazy chain (1 - eps) I + eps P*.
    """
    lz = lazy(Pstar, eps)
    if eigenvalues_discrete(lz).values.min() <= 0.0:
        raise NegativeEigenvalue(f"lazy kernel with eps={eps} lacks positive eigenvalues")
    e = float(eps)
    s = float(s)
    v = e * s / (1.0 - (1.0 - e) * s)
    left = absorption_pmf(lz).pgf(s)
    right = absorption_pmf(Pstar).pgf(v)
    return abs(left - right)


def _require_absorbing_gen(gen: ContinuousGenerator):
    if not gen.absorbing_top:
        raise HypothesisViolated("top state is not absorbing")
    stuck = [i for i in range(gen.d) if not gen.birth[i] > 0]
    if stuck:
        raise NoAbsorption(f"birth rate is zero at states {stuck}; d is unreachable")


def _poisson_cutoff(mean, tol):
    k = int(mean + 10.0 * math.sqrt(mean) + 30)
    while stats.poisson.sf(k, mean) > tol:
        k = int(k * 1.5) + 10
    return k


def absorption_cdf_continuous(Gstar: ContinuousGenerator, times, tol=DEFAULT_TOL) -> TimeGridCdf:
    """P(T <= t) by uniformization with the kernel I + G*/L, L = max_i(lambda_i + mu_i)."""
    _require_absorbing_gen(Gstar)
    times = np.asarray(times, dtype=float)
    if times.size and times.min() < 0:
        raise ValueError("times must be nonnegative")
    g = Gstar.as_float()
    rate = float(g.max_rate)
    lam, mu = g.as_arrays()
    p = lam / rate
    q = mu / rate
    r = 1.0 - p - q
    r[-1] = 1.0
    kmax = _poisson_cutoff(rate * float(times.max(initial=0.0)), tol)
    a = np.zeros(g.d + 1)
    a[0] = 1.0
    inc = np.zeros(kmax + 1)
    _kernels.advance(a, p, q, r, kmax + 1, inc, 0)
    absorbed = np.concatenate([[0.0], np.cumsum(inc)])[: kmax + 1]
    ks = np.arange(kmax + 1)
    out = np.empty(times.size)
    for j, t in enumerate(times):
        if t == 0.0:
            out[j] = 0.0
            continue
        w = stats.poisson.pmf(ks, rate * t)
        out[j] = min(float(np.dot(w, absorbed)), 1.0)
    return TimeGridCdf(times, out)


def hypoexponential_cdf(nus, times) -> TimeGridCdf:
    """cdf of a sum of independent exponentials with rates ``nus``.

    Uses 1 - sum_i w_i exp(-nu_i t), w_i = prod_{j != i} nu_j/(nu_j - nu_i), when
    the rates are separated; otherwise uniformizes the pure-birth generator.
    """
    nus = np.asarray(list(nus), dtype=float)
    times = np.asarray(times, dtype=float)
    if nus.size == 0:
        return TimeGridCdf(times, np.where(times >= 0, 1.0, 0.0))
    if nus.min() <= 0:
        raise NonpositiveRate(f"rates must be positive, got {nus}")
    top = nus.max()
    srt = np.sort(nus)
    close = nus.size > 1 and np.min(np.diff(srt)) <= HYPO_GAP * top
    weights = None
    if not close:
        weights = np.empty(nus.size)
        for i, a in enumerate(nus):
            others = np.delete(nus, i)
            weights[i] = np.prod(others / (others - a))
        if np.max(np.abs(weights)) > HYPO_WEIGHT_CAP:
            weights = None
    if weights is None:
        chain = ContinuousGenerator(list(nus), [0.0] * nus.size, mode="float")
        return absorption_cdf_continuous(chain, times)
    vals = 1.0 - np.exp(-np.outer(times, nus)) @ weights
    vals = np.clip(vals, 0.0, 1.0)
    vals[times <= 0] = 0.0
    return TimeGridCdf(times, vals)


def discretized_cdf(Gstar: ContinuousGenerator, eps, times) -> TimeGridCdf:
    """P(eps * T(eps) <= t) where T(eps) is the absorption time of I + eps G*."""
    pmf = absorption_pmf(discretize(Gstar, eps))
    steps = np.floor(np.asarray(times, dtype=float) / float(eps) + 1e-9)
    return TimeGridCdf(times, pmf.cdf(steps))


def _minus_g0(Gstar: ContinuousGenerator) -> np.ndarray:
    return -Gstar.as_float().matrix()[:-1, :-1]


def _logdet(m, what):
    sign, logdet = np.linalg.slogdet(m)
    if sign <= 0 or not np.isfinite(logdet):
        raise SingularMatrix(f"{what} is singular; is the chain irreducible up to absorption?")
    return logdet


def occupation_laplace(Gstar: ContinuousGenerator, u) -> float:
    """E exp(-<u, T>) for the occupation times T_0..T_{d-1} before hitting d.

    Equals det(-G_0) / det(-G_0 + U), G_0 being G* without its last row and
    column and U = diag(u).
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (Gstar.d,):
        raise ValueError(f"u needs {Gstar.d} entries, got shape {u.shape}")
    if not np.all(u > 0):
        raise ValueError("every occupation weight must be strictly positive")
    m = _minus_g0(Gstar)
    if min(float(x) for x in Gstar.birth) <= 0 or np.linalg.matrix_rank(m) < m.shape[0]:
        raise SingularMatrix("-G_0 is singular; the chain is reducible before hitting d")
    num = _logdet(m, "-G_0")
    den = _logdet(m + np.diag(u), "-G_0 + U")
    return float(np.exp(num - den))


def hitting_laplace(Gstar: ContinuousGenerator, s) -> float:
    """E exp(-s T) for the hitting time of d: det(-G_0) / det(-G_0 + s I)."""
    return occupation_laplace(Gstar, np.full(Gstar.d, float(s)))


def symmetrizing_measure(Gstar: ContinuousGenerator) -> np.ndarray:
    """Reversibility weights of the rates among 0..d-1, normalized to sum 1."""
    lam, mu = Gstar.as_float().as_arrays()
    d = Gstar.d
    if d > 1 and np.any(mu[1:d] <= 0):
        raise HypothesisViolated("death rates on 1..d-1 must be positive to symmetrize G_0")
    w = np.ones(d)
    for i in range(1, d):
        w[i] = w[i - 1] * lam[i - 1] / mu[i]
    return w / w.sum()


def gaussian_split_covariance(Gstar: ContinuousGenerator) -> np.ndarray:
    """Sigma = S^{-1} / 2 with S = D (-G_0) D^{-1}, D = diag(sqrt(pi))."""
    pi = symmetrizing_measure(Gstar)
    dvec = np.sqrt(pi)
    S = dvec[:, None] * _minus_g0(Gstar) / dvec[None, :]
    asym = float(np.max(np.abs(S - S.T)))
    if asym > 1e-12 * max(1.0, float(np.max(np.abs(S)))):
        raise HypothesisViolated(f"D(-G_0)D^-1 is not symmetric (gap {asym:.3e})")
    S = 0.5 * (S + S.T)
    try:
        chol = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix("D(-G_0)D^-1 is not positive definite") from exc
    inv_chol = np.linalg.inv(chol)
    return 0.5 * inv_chol.T @ inv_chol


def gaussian_split_residual(Gstar: ContinuousGenerator, u) -> float:
    """|det(-G_0)/det(-G_0 + U) - det(I + 2 Sigma U)^{-1}|."""
    u = np.asarray(u, dtype=float)
    lt = occupation_laplace(Gstar, u)
    sigma = gaussian_split_covariance(Gstar)
    det = np.linalg.det(np.eye(u.size) + 2.0 * sigma * u[None, :])
    return abs(lt - 1.0 / det)


def sample_gaussian_split(Gstar: ContinuousGenerator, n, rng=None) -> np.ndarray:
    """Draws of Y + Z with Y, Z independent copies of V**2, V ~ N(0, Sigma)."""
    rng = np.random.default_rng(rng)
    sigma = gaussian_split_covariance(Gstar)
    v = rng.multivariate_normal(np.zeros(Gstar.d), sigma, size=(2, n), method="cholesky")
    return (v**2).sum(axis=0)


def auto_time_grid(nus, points=100, quantile=1 - 1e-6) -> np.ndarray:
    """Grid from 0 to roughly the ``quantile`` of the hypoexponential law."""
    nus = np.asarray(list(nus), dtype=float)
    mean = float(np.sum(1.0 / nus))
    sd = float(math.sqrt(np.sum(1.0 / nus**2)))
    slowest = 1.0 / float(nus.min())
    top = mean + 6.0 * sd + slowest * -math.log(1.0 - quantile)
    return np.linspace(0.0, top, points)


__all__ = [
    "LatticePmf",
    "TimeGridCdf",
    "absorption_pmf",
    "geometric_convolution",
    "pgf_product",
    "lazy_pgf_identity_check",
    "absorption_cdf_continuous",
    "hypoexponential_cdf",
    "discretized_cdf",
    "occupation_laplace",
    "hitting_laplace",
    "symmetrizing_measure",
    "gaussian_split_covariance",
    "gaussian_split_residual",
    "sample_gaussian_split",
    "auto_time_grid",
    "auto_eps",
]
