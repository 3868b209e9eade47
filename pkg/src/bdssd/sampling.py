"""Seeded random chains for property tests, benchmarks and the acceptance suite."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .core import ContinuousGenerator, DiscreteKernel
from .spectral import eigenvalues_discrete

MAX_TRIES = 10_000


def _rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def _rational_row(rng, denom, need_birth, need_death):
    """(p, q) with denominator ``denom``, each positive when required, p + q <= 1."""
    lo_p = 1 if need_birth else 0
    p = int(rng.integers(lo_p, denom))
    lo_q = 1 if need_death else 0
    if denom - p < lo_q:
        p = denom - lo_q
    q = int(rng.integers(lo_q, denom - p + 1))
    return Fraction(p, denom), Fraction(q, denom)


def random_absorbing_kernel(rng, d, mode="float", positive_eigs=False, min_birth=0.05) -> DiscreteKernel:
    """Strictly monotone kernel with absorbing top and positive birth/death below d.

    ``positive_eigs`` rejects draws until every eigenvalue is strictly positive.
    In rational mode entries are fractions with denominators between 4 and 40.
    """
    rng = _rng(rng)
    for _ in range(MAX_TRIES):
        if mode == "rational":
            denoms = rng.integers(4, 41, size=d)
            rows = [_rational_row(rng, int(denoms[i]), True, 0 < i) for i in range(d)]
            birth = [r[0] for r in rows]
            death = [r[1] for r in rows[1:]] + [Fraction(0)]
        else:
            lazy = rng.uniform(0.3, 1.0) if positive_eigs else 1.0
            w = rng.dirichlet(np.ones(3), size=d) * lazy
            birth = list(np.maximum(w[:, 2], min_birth * lazy))
            death = list(w[1:, 0]) + [0.0]
            if any(birth[i] + (death[i - 1] if i else 0.0) > 1.0 for i in range(d)):
                continue
        K = DiscreteKernel(birth, death, mode=mode)
        rep = K.report
        if not (rep.ok and rep.strictly_monotone and rep.absorbing_top):
            continue
        if positive_eigs and eigenvalues_discrete(K.as_float()).values.min() <= 1e-9:
            continue
        return K
    raise RuntimeError("rejection sampler exhausted its attempts")


def random_ergodic_kernel(rng, d, nonnegative_eigs=True, min_rate=0.02) -> DiscreteKernel:
    """Ergodic kernel, optionally conditioned on a nonnegative spectrum by rejection."""
    rng = _rng(rng)
    for _ in range(MAX_TRIES):
        lazy = rng.uniform(0.4, 1.0) if nonnegative_eigs else 1.0
        w = rng.dirichlet(np.ones(3), size=d + 1) * lazy
        birth = list(np.maximum(w[:d, 2], min_rate))
        death = list(np.maximum(w[1:, 0], min_rate))
        p = birth + [0.0]
        q = [0.0] + death
        if any(p[i] + q[i] > 1.0 - min_rate for i in range(d + 1)):
            continue
        K = DiscreteKernel(birth, death, mode="float")
        if not K.report.ergodic:
            continue
        if nonnegative_eigs and eigenvalues_discrete(K).values.min() < 1e-9:
            continue
        return K
    raise RuntimeError("rejection sampler exhausted its attempts")


def random_absorbing_generator(rng, d, low=0.2, high=5.0) -> ContinuousGenerator:
    """Absorbing-top generator with positive birth rates below d and positive death rates on 1..d-1."""
    rng = _rng(rng)
    birth = rng.uniform(low, high, size=d)
    death = np.append(rng.uniform(low, high, size=d - 1), 0.0)
    return ContinuousGenerator(list(birth), list(death), mode="float")


def random_ergodic_generator(rng, d, low=0.2, high=5.0) -> ContinuousGenerator:
    rng = _rng(rng)
    birth = rng.uniform(low, high, size=d)
    death = rng.uniform(low, high, size=d)
    return ContinuousGenerator(list(birth), list(death), mode="float")
