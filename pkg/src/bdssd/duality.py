"""Strong stationary duals of birth-and-death chains.

Three constructions, each in discrete and continuous time:

* classical dual: absorbing chain linked to P by truncated stationary laws;
* anti-dual: the monotone ergodic chain whose classical dual is a given
  absorbing chain;
* spectral dual: pure-birth chain whose holds (rates) are the eigenvalues,
  linked by the rows of the Q_k family.

In rational mode the classical and anti-dual algebra is exact.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import (
    ContinuousGenerator,
    DiscreteKernel,
    auto_eps,
    discretize,
    stationary_pmf,
    stationary_pmf_generator,
    to_number,
)
from .errors import (
    HypothesisViolated,
    IntertwiningError,
    NoFeasibleEta,
    NotErgodic,
    NotMonotone,
    ShapeMismatch,
)
from .spectral import (
    QFamily,
    eigenvalues_discrete,
    eigenvalues_generator,
    q_family_continuous,
    q_family_discrete,
)

RESIDUAL_TOL = 1e-10
RESIDUAL_HARD_TOL = 1e-8
CONDITIONING_WARN = 1e12
ETA_FLOOR = 1e-15


@dataclass(frozen=True)
class Link:
    """Lower-triangular stochastic matrix; rows are dual states, columns primal states."""

    matrix: np.ndarray
    kind: str = ""

    @property
    def d(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def lower_triangular(self) -> bool:
        m = self.matrix
        return all(m[i, j] == 0 for i in range(m.shape[0]) for j in range(i + 1, m.shape[1]))

    @property
    def sharp(self) -> bool:
        d = self.d
        return all(self.matrix[i, d] == 0 for i in range(d))

    def as_float(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)


@dataclass(frozen=True)
class DualPair:
    primal: DiscreteKernel | ContinuousGenerator
    dual: DiscreteKernel | ContinuousGenerator
    link: Link
    residual: float
    kind: str
    qfamily: QFamily | None = field(default=None, repr=False)

    @property
    def sharp(self) -> bool:
        return self.link.sharp

    @property
    def time(self) -> str:
        return "discrete" if isinstance(self.primal, DiscreteKernel) else "continuous"


@dataclass(frozen=True)
class AntiDualResult:
    pair: DualPair
    H: tuple
    h_top: object
    eta: object
    margin: float | None
    warnings: tuple = ()
    discretized_residual: float | None = None

    @property
    def primal(self):
        return self.pair.primal

    @property
    def dual(self):
        return self.pair.dual


def _matrix_of(obj):
    if isinstance(obj, (DiscreteKernel, ContinuousGenerator)):
        return obj.matrix()
    return np.asarray(obj)


def intertwining_residual(link, primal, dual) -> float:
    """Induced infinity norm of ``link @ A_primal - A_dual @ link``.

    Exact when every operand holds Fractions.
    """
    kinds = {type(x) for x in (primal, dual) if isinstance(x, (DiscreteKernel, ContinuousGenerator))}
    if len(kinds) > 1:
        raise ShapeMismatch("primal and dual must both be kernels or both be generators")
    L = link.matrix if isinstance(link, Link) else np.asarray(link)
    A = _matrix_of(primal)
    B = _matrix_of(dual)
    if not (L.shape == A.shape == B.shape) or L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ShapeMismatch(f"shapes {L.shape}, {A.shape}, {B.shape} do not match")
    exact = L.dtype == object and A.dtype == object and B.dtype == object
    if not exact:
        L, A, B = (np.array(m, dtype=float) for m in (L, A, B))
    diff = L.dot(A) - B.dot(L)
    norm = max(sum(abs(x) for x in row) for row in diff)
    return float(norm)


def _truncated_link(pi, mode):
    n = len(pi)
    zero = Fraction(0) if mode == "rational" else 0.0
    m = np.full((n, n), zero, dtype=object if mode == "rational" else float)
    H = []
    acc = zero
    for x in pi:
        acc = acc + x
        H.append(acc)
    H[-1] = Fraction(1) if mode == "rational" else 1.0
    for i in range(n):
        for j in range(i + 1):
            m[i, j] = pi[j] / H[i]
    return m, tuple(H)


def _check_residual(residual, what):
    if residual > RESIDUAL_HARD_TOL:
        raise IntertwiningError(f"{what}: intertwining residual {residual:.3e}")


def classical_dual(P: DiscreteKernel) -> DualPair:
    """Classical (set-valued) dual of a monotone ergodic kernel.

    q*_i = (H_{i-1}/H_i) p_i,  r*_i = 1 - (p_i + q_{i+1}),  p*_i = (H_{i+1}/H_i) q_{i+1}
    with H the stationary cdf of P.
    """
    rep = P.report
    if not rep.ergodic:
        raise NotErgodic("classical dual needs an ergodic kernel")
    if not rep.monotone:
        raise NotMonotone("classical dual needs a monotone kernel (p_{i-1} + q_i <= 1)")
    mode = P.mode
    pi = stationary_pmf(P).weights
    link, H = _truncated_link(pi, mode)
    d = P.d
    p, q = P.p, P.q
    q_ext = q + (q[0],)  # q_{d+1} = 0
    one = Fraction(1) if mode == "rational" else 1.0
    death = [H[i - 1] / H[i] * p[i] for i in range(1, d + 1)]
    birth = [H[i + 1] / H[i] * q[i + 1] for i in range(d)]
    hold = [one - (p[i] + q_ext[i + 1]) for i in range(d + 1)]
    if mode == "float":
        hold = [max(h, 0.0) for h in hold]
    dual = DiscreteKernel(birth, death, hold, mode=mode)
    resid = intertwining_residual(link, P, dual)
    _check_residual(resid, "classical dual")
    return DualPair(P, dual, Link(link, "truncated-stationary"), resid, "classical")


def classical_dual_generator(G: ContinuousGenerator) -> DualPair:
    """Continuous analogue: mu*_i = (H_{i-1}/H_i) lambda_i, lambda*_i = (H_{i+1}/H_i) mu_{i+1}."""
    if not G.ergodic:
        raise NotErgodic("classical dual needs an ergodic generator")
    mode = G.mode
    pi = stationary_pmf_generator(G).weights
    link, H = _truncated_link(pi, mode)
    d = G.d
    lam, mu = G.lam, G.mu
    death = [H[i - 1] / H[i] * lam[i] for i in range(1, d + 1)]
    birth = [H[i + 1] / H[i] * mu[i + 1] for i in range(d)]
    dual = ContinuousGenerator(birth, death, mode=mode)
    resid = intertwining_residual(link, G, dual)
    _check_residual(resid, "classical dual")
    return DualPair(G, dual, Link(link, "truncated-stationary"), resid, "classical")


def _backsolve_H(h_top, up, down, mode):
    """Strictly increasing H with H_d = 1, H_{d-1} = h_top and
    (H_i/H_{i-1} - 1) down_i = (1 - H_i/H_{i+1}) up_i for 1 <= i <= d-1.

    ``up`` and ``down`` are full length-(d+1) parameter tuples."""
    d = len(up) - 1
    one = Fraction(1) if mode == "rational" else 1.0
    H = [None] * (d + 1)
    H[d] = one
    H[d - 1] = h_top
    for i in range(d - 1, 0, -1):
        H[i - 1] = H[i] / (one + (up[i] / down[i]) * (one - H[i] / H[i + 1]))
    return H


def _anti_params(H, up, down, mode):
    """Birth/death parameters of the anti-dual from its stationary cdf H."""
    d = len(up) - 1
    one = Fraction(1) if mode == "rational" else 1.0
    birth = [(one - H[0] / H[1]) * up[0]]
    birth += [H[i] / H[i - 1] * down[i] for i in range(1, d)]
    death = [H[i - 1] / H[i] * up[i - 1] for i in range(1, d + 1)]
    return birth, death


def _anti_hypotheses(up, down, d, absorbing, what):
    problems = []
    if not absorbing:
        problems.append("top state is not absorbing")
    problems += [f"birth at {i} is not positive" for i in range(d) if not up[i] > 0]
    problems += [f"death at {i} is not positive" for i in range(1, d) if not down[i] > 0]
    if problems:
        raise HypothesisViolated(f"{what}: " + "; ".join(problems))


def anti_dual(Pstar: DiscreteKernel, margin=1e-3, h_top=None) -> AntiDualResult:
    """Monotone ergodic kernel P whose classical dual is ``Pstar``.

    H_{d-1} = 1 - eta with eta halved from 1/2 until every hold of P is at
    least ``margin``.  Passing ``h_top`` fixes H_{d-1} instead.
    """
    rep = Pstar.report
    d = Pstar.d
    mode = Pstar.mode
    ps, qs = Pstar.p, Pstar.q
    _anti_hypotheses(ps, qs, d, rep.absorbing_top, "anti_dual")
    if not rep.strictly_monotone:
        raise HypothesisViolated("anti_dual: needs p*_{i-1} + q*_i < 1 for 1 <= i <= d")
    one = Fraction(1) if mode == "rational" else 1.0

    def build(h):
        H = _backsolve_H(h, ps, qs, mode)
        birth, death = _anti_params(H, ps, qs, mode)
        p_full = birth + [0 * one]
        q_full = [0 * one] + death
        hold = [one - p_full[i] - q_full[i] for i in range(d + 1)]
        return H, birth, death, hold

    if h_top is not None:
        h = to_number(h_top, mode)
        if not 0 < h < 1:
            raise HypothesisViolated(f"H_(d-1) must lie in (0, 1), got {h_top}")
        H, birth, death, hold = build(h)
        if min(hold) < 0:
            raise HypothesisViolated(
                f"H_(d-1) = {h_top} gives a negative hold {min(hold)}; choose it closer to 1"
            )
        eta = one - h
    else:
        limit = [one] + [one - qs[i] - ps[i - 1] for i in range(1, d + 1)]
        if margin >= min(limit):
            raise NoFeasibleEta(
                f"margin {margin} is not below the limiting minimum hold {float(min(limit)):.6g}",
                limit_holds=tuple(limit),
            )
        eta = one / 2
        while True:
            h = one - eta
            H, birth, death, hold = build(h)
            if min(hold) >= margin:
                break
            eta = eta / 2
            if eta < ETA_FLOOR:
                raise NoFeasibleEta(
                    f"no H_(d-1) reached hold margin {margin} before eta < {ETA_FLOOR:g}",
                    limit_holds=tuple(limit),
                )
    P = DiscreteKernel(birth, death, hold, mode=mode)
    pair = classical_dual(P)
    _assert_reproduces(pair.dual, Pstar)
    return AntiDualResult(pair, tuple(H), h, eta, margin if h_top is None else None)


def _assert_reproduces(got, want):
    if got.mode == "rational" and want.mode == "rational":
        if got != want:
            raise IntertwiningError("classical dual of the anti-dual does not reproduce the input")
        return
    a = np.array(got.as_float().matrix())
    b = np.array(want.as_float().matrix())
    err = float(np.max(np.abs(a - b)))
    if err > RESIDUAL_HARD_TOL:
        raise IntertwiningError(f"classical dual of the anti-dual is off by {err:.3e}")


def anti_dual_generator(Gstar: ContinuousGenerator, h_top=None) -> AntiDualResult:
    """Ergodic generator G whose classical dual is ``Gstar``.

    The H recursion is the discrete one with (mu*, lambda*) in place of
    (q*, p*).  No hold constraint exists in continuous time, so H_{d-1}
    defaults to 1/2.  H-ratios above 1e12 raise a warning.
    """
    d = Gstar.d
    mode = Gstar.mode
    lam_s, mu_s = Gstar.lam, Gstar.mu
    _anti_hypotheses(lam_s, mu_s, d, Gstar.absorbing_top, "anti_dual_generator")
    one = Fraction(1) if mode == "rational" else 1.0
    h = one / 2 if h_top is None else to_number(h_top, mode)
    if not 0 < h < 1:
        raise HypothesisViolated(f"H_(d-1) must lie in (0, 1), got {h_top}")
    H = _backsolve_H(h, lam_s, mu_s, mode)
    birth, death = _anti_params(H, lam_s, mu_s, mode)
    G = ContinuousGenerator(birth, death, mode=mode)

    notes = []
    worst = max(float(H[i]) / float(H[i - 1]) for i in range(1, d + 1))
    if worst > CONDITIONING_WARN:
        msg = f"H-ratio {worst:.3e} exceeds {CONDITIONING_WARN:g}; anti-dual is badly conditioned"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)

    pair = classical_dual_generator(G)
    _assert_reproduces_gen(pair.dual, Gstar)

    # the same relation read through I + eps G for a shared eps
    eps = min(auto_eps(G), auto_eps(Gstar))
    disc = classical_dual(discretize(G, eps))
    target = discretize(Gstar, eps)
    a = np.array(disc.dual.as_float().matrix())
    b = np.array(target.as_float().matrix())
    dres = float(np.max(np.abs(a - b).sum(axis=1)))
    if dres > RESIDUAL_HARD_TOL:
        raise IntertwiningError(f"discretized classical-dual check is off by {dres:.3e}")
    return AntiDualResult(pair, tuple(H), h, one - h, None, tuple(notes), dres)


def _assert_reproduces_gen(got, want):
    if got.mode == "rational" and want.mode == "rational":
        if got != want:
            raise IntertwiningError("classical dual of the anti-dual does not reproduce the input")
        return
    a = np.array(got.as_float().matrix())
    b = np.array(want.as_float().matrix())
    scale = max(1.0, float(np.max(np.abs(b))))
    err = float(np.max(np.abs(a - b))) / scale
    if err > RESIDUAL_HARD_TOL:
        raise IntertwiningError(f"classical dual of the anti-dual is off by {err:.3e}")


def spectral_dual_discrete(P: DiscreteKernel) -> DualPair:
    """Pure-birth dual holding with probability theta_i at state i."""
    if not P.report.ergodic:
        raise NotErgodic("spectral dual needs an ergodic kernel")
    spec = eigenvalues_discrete(P)
    qf = q_family_discrete(P, spec)
    thetas = [max(float(t), 0.0) for t in spec.nontrivial]
    d = P.d
    dual = DiscreteKernel(
        [1.0 - t for t in thetas], [0.0] * d, thetas + [1.0], mode="float"
    )
    link = Link(qf.link, "spectral")
    resid = intertwining_residual(link, P.as_float(), dual)
    _check_residual(resid, "spectral dual")
    return DualPair(P, dual, link, resid, "spectral", qf)


def spectral_dual_generator(G: ContinuousGenerator) -> DualPair:
    """Pure-birth dual with birth rate nu_i at state i (nu_0 >= ... >= nu_{d-1})."""
    if not G.ergodic:
        raise NotErgodic("spectral dual needs an ergodic generator")
    spec = eigenvalues_generator(G)
    qf = q_family_continuous(G, spec)
    nus = [float(x) for x in spec.nontrivial]
    dual = ContinuousGenerator(nus, [0.0] * G.d, mode="float")
    link = Link(qf.link, "spectral")
    resid = intertwining_residual(link, G.as_float(), dual)
    _check_residual(resid, "spectral dual")
    return DualPair(G, dual, link, resid, "spectral", qf)
