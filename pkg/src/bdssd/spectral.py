"""Spectra of birth-and-death kernels/generators and the Q_k polynomial families.

A birth-and-death matrix with positive off-diagonal products p_i q_{i+1} is
diagonally similar to the symmetric tridiagonal matrix with the same diagonal
and off-diagonal sqrt(p_i q_{i+1}).  Eigenvalues come from Sturm-sequence
bisection on that matrix; zero products split the matrix into independent
blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import ContinuousGenerator, DiscreteKernel, stationary_pmf, stationary_pmf_generator
from .errors import (
    NegativeEigenvalue,
    NotErgodic,
    RepeatedEigenvalue,
    StochasticityViolation,
)

CLAMP_TOL = 1e-10
NEG_EIG_TOL = 1e-12
PIN_TOL = 1e-8
# hard failure threshold for ||Q_d - 1 pi||; tests hold the family to 1e-10
STATIONARY_HARD_TOL = 1e-8


@dataclass(frozen=True)
class Spectrum:
    """Real spectrum, stored ascending.

    For ``kind="discrete"`` these are eigenvalues of P (top value 1).  For
    ``kind="generator"`` they are eigenvalues of -G (bottom value 0).
    """

    values: np.ndarray
    kind: str

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __iter__(self):
        return iter(self.values)

    @property
    def nontrivial(self) -> np.ndarray:
        """The d non-unit eigenvalues (discrete, ascending) or d nonzero rates of -G (descending)."""
        if self.kind == "discrete":
            return self.values[:-1]
        return self.values[:0:-1]

    @property
    def paper_order(self) -> np.ndarray:
        """theta_0 <= ... <= theta_d = 1, or nu_0 >= ... >= nu_d = 0."""
        if self.kind == "discrete":
            return self.values
        return self.values[::-1]

    def to_list(self):
        return [float(x) for x in self.values]


def _block_spectrum(diag, prods):
    """Eigenvalues of a tridiagonal matrix given its diagonal and off-diagonal products."""
    n = diag.size
    out = []
    start = 0
    for i in range(n):
        if i == n - 1 or prods[i] == 0.0:
            block = slice(start, i + 1)
            if i == start:
                out.append(np.array([diag[start]]))
            else:
                out.append(_kernels.sturm_eigs(diag[block].copy(), prods[start:i].copy()))
            start = i + 1
    return np.sort(np.concatenate(out))


def _pin(values, target):
    k = int(np.argmin(np.abs(values - target)))
    if abs(values[k] - target) <= PIN_TOL * max(1.0, abs(target)):
        values = values.copy()
        values[k] = target
    return values


def eigenvalues_discrete(kernel: DiscreteKernel) -> Spectrum:
    """Full spectrum of a discrete kernel.

    An ergodic kernel has its eigenvalue nearest 1 set to exactly 1; an
    absorbing top state contributes an exact 1 through its singleton block.
    """
    p, q, r = kernel.as_arrays()
    prods = p[:-1] * q[1:]
    values = _block_spectrum(r, prods)
    if kernel.report.ergodic:
        values = _pin(values, 1.0)
    return Spectrum(values, "discrete")


def eigenvalues_generator(gen: ContinuousGenerator) -> Spectrum:
    """Spectrum of -G with the eigenvalue nearest 0 set to exactly 0 when G is conservative."""
    lam, mu = gen.as_arrays()
    prods = lam[:-1] * mu[1:]
    values = _block_spectrum(lam + mu, prods)
    values = _pin(values, 0.0)
    return Spectrum(values, "generator")


@dataclass(frozen=True)
class QFamily:
    """Matrices Q_0..Q_d and the diagnostics gathered while building them."""

    matrices: tuple
    spectrum: Spectrum
    min_entry: float
    row_sum_error: float
    stationary_residual: float

    @property
    def link(self) -> np.ndarray:
        """Lower-triangular matrix whose k-th row is delta_0 Q_k."""
        return np.array([m[0] for m in self.matrices])

    def __getitem__(self, k):
        return self.matrices[k]

    def __len__(self):
        return len(self.matrices)


def _clamp_rows(m, k, clamp):
    low = float(m.min())
    if low < -clamp:
        raise StochasticityViolation(
            f"Q_{k} has entry {low:.3e} below -{clamp:g}; eigenvalues inaccurate or input not birth-and-death"
        )
    if low < 0.0:
        m = np.where(m < 0.0, 0.0, m)
        m = m / m.sum(axis=1, keepdims=True)
    return m, low


def _finish(mats, spec, pi, low):
    rows = max(float(np.max(np.abs(m.sum(axis=1) - 1.0))) for m in mats)
    resid = float(np.max(np.abs(mats[-1] - pi[None, :]).sum(axis=1)))
    if resid > STATIONARY_HARD_TOL:
        raise StochasticityViolation(f"rows of Q_d differ from pi by {resid:.3e}")
    return QFamily(tuple(mats), spec, low, rows, resid)


def _nonnegative_thetas(spec):
    thetas = np.array(spec.nontrivial, dtype=float)
    if thetas.size and thetas.min() < -NEG_EIG_TOL:
        raise NegativeEigenvalue(f"smallest eigenvalue {thetas.min():.6g} is negative")
    return np.maximum(thetas, 0.0)


def q_family_discrete(kernel: DiscreteKernel, spec: Spectrum | None = None, clamp=CLAMP_TOL) -> QFamily:
    """Q_{k+1} = (Q_k P - theta_k Q_k) / (1 - theta_k) with Q_0 = I."""
    if not kernel.report.ergodic:
        raise NotErgodic("Q family needs an ergodic kernel")
    spec = spec or eigenvalues_discrete(kernel)
    thetas = _nonnegative_thetas(spec)
    P = kernel.as_float().matrix()
    n = kernel.d + 1
    q = np.eye(n)
    mats = [q]
    low = 0.0
    for k, th in enumerate(thetas):
        if 1.0 - th < 1e-13:
            raise RepeatedEigenvalue(f"theta_{k} = {th!r} is numerically 1 before k = d")
        q = (q @ P - th * q) / (1.0 - th)
        q, m = _clamp_rows(q, k + 1, clamp)
        low = min(low, m)
        mats.append(q)
    pi = np.array(stationary_pmf(kernel), dtype=float)
    return _finish(mats, spec, pi, low)


def q_family_continuous(gen: ContinuousGenerator, spec: Spectrum | None = None, clamp=CLAMP_TOL) -> QFamily:
    """Q_{k+1} = Q_k + Q_k G / nu_k with nu_0 >= nu_1 >= ... the nonzero rates of -G."""
    if not gen.ergodic:
        raise NotErgodic("Q family needs an ergodic generator")
    spec = spec or eigenvalues_generator(gen)
    nus = np.array(spec.nontrivial, dtype=float)
    G = gen.as_float().matrix()
    scale = max(float(gen.as_float().max_rate), 1e-300)
    n = gen.d + 1
    q = np.eye(n)
    mats = [q]
    low = 0.0
    for k, nu in enumerate(nus):
        if nu < 1e-13 * scale:
            raise RepeatedEigenvalue(f"nu_{k} = {nu!r} is numerically 0 before k = d")
        q = q + (q @ G) / nu
        q, m = _clamp_rows(q, k + 1, clamp)
        low = min(low, m)
        mats.append(q)
    pi = np.array(stationary_pmf_generator(gen), dtype=float)
    return _finish(mats, spec, pi, low)
