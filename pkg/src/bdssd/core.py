"""Birth-and-death kernels and generators on {0, ..., d}.

Chains hold their parameters either as exact ``Fraction`` values
(``mode="rational"``) or as binary64 floats (``mode="float"``).  Rational
mode keeps the duality algebra exact; float mode is for simulation and
larger ``d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Sequence

import numpy as np

from .errors import (
    ChainConstructionError,
    EpsOutOfRange,
    EpsTooLarge,
    NotErgodic,
)

FLOAT_TOL = 1e-10

MODES = ("rational", "float")


def to_number(value, mode: str):
    """Convert ``value`` to a Fraction (rational mode) or float.

    Strings such as ``"3/4"`` or ``"0.49"`` parse exactly.  Floats are taken
    through their shortest repr, so ``0.49`` becomes ``49/100``.
    """
    if isinstance(value, str):
        try:
            exact = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ChainConstructionError(f"not a number: {value!r}") from exc
        return exact if mode == "rational" else float(exact)
    if isinstance(value, bool):
        raise ChainConstructionError(f"not a number: {value!r}")
    if isinstance(value, Rational):
        return Fraction(value) if mode == "rational" else float(value)
    try:
        x = float(value)
    except (TypeError, ValueError) as exc:
        raise ChainConstructionError(f"not a number: {value!r}") from exc
    if not math.isfinite(x):
        raise ChainConstructionError(f"non-finite entry: {value!r}")
    return Fraction(repr(x)) if mode == "rational" else x


def infer_mode(values) -> str:
    for v in values:
        if isinstance(v, (str, Rational)) and not isinstance(v, bool):
            continue
        return "float"
    return "rational"


def _as_tuple(values, name):
    if values is None:
        return None
    if isinstance(values, (str, bytes)):
        raise ChainConstructionError(f"{name} must be a sequence")
    return tuple(values)


def _zero(mode):
    return Fraction(0) if mode == "rational" else 0.0


def _one(mode):
    return Fraction(1) if mode == "rational" else 1.0


def _close(a, b, mode, tol=FLOAT_TOL):
    if mode == "rational":
        return a == b
    return abs(a - b) <= tol


@dataclass(frozen=True)
class Violation:
    kind: str  # "NegativeEntry" | "RowSumExceeded" | "HoldMismatch"
    index: int
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    absorbing_top: bool
    ergodic: bool
    monotone: bool
    strictly_monotone: bool
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def monotonicity(self) -> str:
        if self.strictly_monotone:
            return "strict"
        if self.monotone:
            return "monotone"
        return "non-monotone"

    def to_dict(self):
        return {
            "ok": self.ok,
            "absorbing_top": self.absorbing_top,
            "ergodic": self.ergodic,
            "monotone": self.monotone,
            "strictly_monotone": self.strictly_monotone,
            "monotonicity": self.monotonicity,
            "violations": [
                {"kind": v.kind, "index": v.index, "detail": v.detail}
                for v in self.violations
            ],
        }


@dataclass(frozen=True, eq=False)
class DiscreteKernel:
    """Tridiagonal transition kernel.

    ``birth`` holds p_0..p_{d-1}, ``death`` holds q_1..q_d and ``hold`` holds
    r_0..r_d.  When ``hold`` is omitted it is derived as 1 - p_i - q_i.
    """

    birth: Sequence
    death: Sequence
    hold: Sequence | None = None
    mode: str | None = None

    def __post_init__(self):
        birth = _as_tuple(self.birth, "birth")
        death = _as_tuple(self.death, "death")
        hold = _as_tuple(self.hold, "hold")
        d = len(birth)
        if d < 1:
            raise ChainConstructionError("state space {0..d} needs d >= 1")
        if len(death) != d:
            raise ChainConstructionError(
                f"death has {len(death)} entries, expected d={d} (indices 1..d)"
            )
        if hold is not None and len(hold) != d + 1:
            raise ChainConstructionError(
                f"hold has {len(hold)} entries, expected d+1={d + 1}"
            )
        raw = birth + death + (hold or ())
        mode = self.mode or infer_mode(raw)
        if mode not in MODES:
            raise ChainConstructionError(f"unknown numeric mode {mode!r}")
        birth = tuple(to_number(v, mode) for v in birth)
        death = tuple(to_number(v, mode) for v in death)
        if hold is None:
            p = birth + (_zero(mode),)
            q = (_zero(mode),) + death
            hold = tuple(_one(mode) - p[i] - q[i] for i in range(d + 1))
        else:
            hold = tuple(to_number(v, mode) for v in hold)
        object.__setattr__(self, "birth", birth)
        object.__setattr__(self, "death", death)
        object.__setattr__(self, "hold", hold)
        object.__setattr__(self, "mode", mode)

    @property
    def d(self) -> int:
        return len(self.birth)

    @property
    def p(self) -> tuple:
        """Birth probabilities p_0..p_d with p_d = 0."""
        return self.birth + (_zero(self.mode),)

    @property
    def q(self) -> tuple:
        """Death probabilities q_0..q_d with q_0 = 0."""
        return (_zero(self.mode),) + self.death

    @property
    def r(self) -> tuple:
        return self.hold

    def matrix(self) -> np.ndarray:
        """Dense (d+1)x(d+1) matrix; object dtype holding Fractions in rational mode."""
        n = self.d + 1
        dtype = object if self.mode == "rational" else float
        m = np.full((n, n), _zero(self.mode), dtype=dtype)
        p, q, r = self.p, self.q, self.r
        for i in range(n):
            m[i, i] = r[i]
            if i + 1 < n:
                m[i, i + 1] = p[i]
            if i > 0:
                m[i, i - 1] = q[i]
        return m

    def as_float(self) -> "DiscreteKernel":
        if self.mode == "float":
            return self
        return DiscreteKernel(
            [float(x) for x in self.birth],
            [float(x) for x in self.death],
            [float(x) for x in self.hold],
            mode="float",
        )

    def as_arrays(self):
        """Float arrays (p, q, r), each of length d+1."""
        return (
            np.array([float(x) for x in self.p]),
            np.array([float(x) for x in self.q]),
            np.array([float(x) for x in self.r]),
        )

    @cached_property
    def report(self) -> ValidationReport:
        return validate_discrete(self)

    def __eq__(self, other):
        if not isinstance(other, DiscreteKernel):
            return NotImplemented
        return (self.birth, self.death, self.hold) == (
            other.birth,
            other.death,
            other.hold,
        )

    def __hash__(self):
        return hash((self.birth, self.death, self.hold))

    def to_spec(self) -> dict:
        return {
            "type": "discrete",
            "d": self.d,
            "birth": [_export(x) for x in self.birth],
            "death": [_export(x) for x in self.death],
            "hold": [_export(x) for x in self.hold],
        }


@dataclass(frozen=True, eq=False)
class ContinuousGenerator:
    """Tridiagonal rate matrix: ``birth`` is lambda_0..lambda_{d-1}, ``death`` is mu_1..mu_d."""

    birth: Sequence
    death: Sequence
    mode: str | None = None

    def __post_init__(self):
        birth = _as_tuple(self.birth, "birth")
        death = _as_tuple(self.death, "death")
        d = len(birth)
        if d < 1:
            raise ChainConstructionError("state space {0..d} needs d >= 1")
        if len(death) != d:
            raise ChainConstructionError(
                f"death has {len(death)} entries, expected d={d} (indices 1..d)"
            )
        mode = self.mode or infer_mode(birth + death)
        if mode not in MODES:
            raise ChainConstructionError(f"unknown numeric mode {mode!r}")
        birth = tuple(to_number(v, mode) for v in birth)
        death = tuple(to_number(v, mode) for v in death)
        for i, v in enumerate(birth):
            if v < 0:
                raise ChainConstructionError(f"negative birth rate at {i}: {v}")
        for i, v in enumerate(death, start=1):
            if v < 0:
                raise ChainConstructionError(f"negative death rate at {i}: {v}")
        object.__setattr__(self, "birth", birth)
        object.__setattr__(self, "death", death)
        object.__setattr__(self, "mode", mode)

    @property
    def d(self) -> int:
        return len(self.birth)

    @property
    def lam(self) -> tuple:
        """Birth rates lambda_0..lambda_d with lambda_d = 0."""
        return self.birth + (_zero(self.mode),)

    @property
    def mu(self) -> tuple:
        """Death rates mu_0..mu_d with mu_0 = 0."""
        return (_zero(self.mode),) + self.death

    def matrix(self) -> np.ndarray:
        n = self.d + 1
        dtype = object if self.mode == "rational" else float
        g = np.full((n, n), _zero(self.mode), dtype=dtype)
        lam, mu = self.lam, self.mu
        for i in range(n):
            g[i, i] = -(lam[i] + mu[i])
            if i + 1 < n:
                g[i, i + 1] = lam[i]
            if i > 0:
                g[i, i - 1] = mu[i]
        return g

    def as_float(self) -> "ContinuousGenerator":
        if self.mode == "float":
            return self
        return ContinuousGenerator(
            [float(x) for x in self.birth], [float(x) for x in self.death], mode="float"
        )

    def as_arrays(self):
        """Float arrays (lambda, mu), each of length d+1."""
        return (
            np.array([float(x) for x in self.lam]),
            np.array([float(x) for x in self.mu]),
        )

    @property
    def absorbing_top(self) -> bool:
        return self.mu[self.d] == 0

    @property
    def ergodic(self) -> bool:
        return all(x > 0 for x in self.birth) and all(x > 0 for x in self.death)

    @property
    def max_rate(self):
        lam, mu = self.lam, self.mu
        return max(lam[i] + mu[i] for i in range(self.d + 1))

    def __eq__(self, other):
        if not isinstance(other, ContinuousGenerator):
            return NotImplemented
        return (self.birth, self.death) == (other.birth, other.death)

    def __hash__(self):
        return hash((self.birth, self.death))

    def to_spec(self) -> dict:
        return {
            "type": "continuous",
            "d": self.d,
            "birth": [_export(x) for x in self.birth],
            "death": [_export(x) for x in self.death],
        }


def _export(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    return float(x)


@dataclass(frozen=True)
class Pmf:
    """Probability mass function on {0..d}."""

    weights: tuple
    mode: str = field(default="float")

    def __post_init__(self):
        w = tuple(self.weights)
        if any(x < 0 for x in w):
            raise ValueError("pmf weights must be nonnegative")
        total = sum(w)
        if not _close(total, _one(self.mode), self.mode, 1e-12):
            raise ValueError(f"pmf weights sum to {total}, not 1")
        object.__setattr__(self, "weights", w)

    @property
    def cdf(self) -> tuple:
        out, acc = [], _zero(self.mode)
        for x in self.weights:
            acc = acc + x
            out.append(acc)
        out[-1] = _one(self.mode)
        return tuple(out)

    def __array__(self, dtype=None, copy=None):
        return np.array([float(x) for x in self.weights], dtype=dtype or float)

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, i):
        return self.weights[i]


def point_mass(d: int, at: int = 0, mode: str = "float") -> Pmf:
    w = [_zero(mode)] * (d + 1)
    w[at] = _one(mode)
    return Pmf(tuple(w), mode)


def validate_discrete(kernel: DiscreteKernel) -> ValidationReport:
    """Classify ``kernel`` and collect constraint violations.

    Violations (negative entries, p_i + q_i > 1, holds not completing a row)
    are reported rather than raised.
    """
    mode = kernel.mode
    d = kernel.d
    p, q, r = kernel.p, kernel.q, kernel.r
    tol = 0 if mode == "rational" else FLOAT_TOL
    violations = []
    for name, seq in (("birth", p), ("death", q), ("hold", r)):
        for i, v in enumerate(seq):
            if v < -tol:
                violations.append(Violation("NegativeEntry", i, f"{name}[{i}] = {v}"))
    for i in range(d + 1):
        if p[i] + q[i] > 1 + tol:
            violations.append(
                Violation("RowSumExceeded", i, f"p_{i} + q_{i} = {p[i] + q[i]} > 1")
            )
        s = p[i] + q[i] + r[i]
        if not _close(s, _one(mode), mode):
            violations.append(Violation("HoldMismatch", i, f"row {i} sums to {s}"))

    absorbing_top = q[d] == 0 and _close(r[d], _one(mode), mode)
    ergodic = (
        all(p[i] > 0 for i in range(d))
        and all(q[i] > 0 for i in range(1, d + 1))
        and any(x > 0 for x in r)
    )
    sums = [p[i - 1] + q[i] for i in range(1, d + 1)]
    monotone = all(s <= 1 + tol for s in sums)
    if mode == "rational":
        strict = all(s < 1 for s in sums)
    else:
        strict = all(s < 1 - 1e-15 for s in sums)
    return ValidationReport(
        absorbing_top=absorbing_top,
        ergodic=ergodic,
        monotone=monotone,
        strictly_monotone=strict,
        violations=tuple(violations),
    )


def stationary_pmf(kernel: DiscreteKernel) -> Pmf:
    """Stationary law from detailed balance: pi_{i+1}/pi_i = p_i/q_{i+1}."""
    if not kernel.report.ergodic:
        raise NotErgodic("stationary_pmf needs an ergodic kernel")
    return _balance_pmf(kernel.p, kernel.q, kernel.mode)


def stationary_pmf_generator(gen: ContinuousGenerator) -> Pmf:
    if not gen.ergodic:
        raise NotErgodic("stationary law needs an ergodic generator")
    return _balance_pmf(gen.lam, gen.mu, gen.mode)


def _balance_pmf(up, down, mode):
    d = len(up) - 1
    w = [_one(mode)]
    for i in range(d):
        w.append(w[-1] * up[i] / down[i + 1])
    total = sum(w)
    w = [x / total for x in w]
    if mode == "float":
        # renormalize once more so the sum is 1 to the last ulp
        s = math.fsum(w)
        w = [x / s for x in w]
    return Pmf(tuple(w), mode)


def lazy(kernel: DiscreteKernel, eps) -> DiscreteKernel:
    """Return the kernel (1 - eps) I + eps P."""
    if not 0 < eps < 1:
        raise EpsOutOfRange(f"eps must lie in (0, 1), got {eps}")
    mode = kernel.mode
    e = to_number(eps, mode)
    one = _one(mode)
    return DiscreteKernel(
        [e * x for x in kernel.birth],
        [e * x for x in kernel.death],
        [one - e + e * x for x in kernel.hold],
        mode=mode,
    )


def auto_eps(gen: ContinuousGenerator):
    """Time step 1/(2 max_i(lambda_i + mu_i)); holds of I + eps G are then >= 1/2."""
    m = gen.max_rate
    if m == 0:
        return _one(gen.mode)
    return _one(gen.mode) / (2 * m)


def discretize(gen: ContinuousGenerator, eps=None) -> DiscreteKernel:
    """Return the kernel I + eps G (``eps=None`` selects :func:`auto_eps`)."""
    mode = gen.mode
    e = auto_eps(gen) if eps is None else to_number(eps, mode)
    if not e > 0:
        raise EpsOutOfRange(f"eps must be positive, got {eps}")
    lam, mu = gen.lam, gen.mu
    tol = 0 if mode == "rational" else 1e-12
    for i in range(gen.d + 1):
        if e * (lam[i] + mu[i]) > 1 + tol:
            raise EpsTooLarge(
                f"eps*(lambda_{i} + mu_{i}) = {e * (lam[i] + mu[i])} exceeds 1"
            )
    birth = [e * x for x in gen.birth]
    death = [e * x for x in gen.death]
    one = _one(mode)
    hold = [one - e * (lam[i] + mu[i]) for i in range(gen.d + 1)]
    if mode == "float":
        hold = [max(h, 0.0) for h in hold]
    return DiscreteKernel(birth, death, hold, mode=mode)
