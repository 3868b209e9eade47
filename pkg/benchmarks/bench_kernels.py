"""Time the numba loop kernels against the numpy kernels on the same inputs.

Usage: python benchmarks/bench_kernels.py [--repeat 3] [--replicas 100000]

Without numba installed the loop kernels run as plain Python and are slow;
the table then shows the cost of not installing the ``accel`` extra.
"""

import argparse
import time

import numpy as np

from bdssd import _kernels
from bdssd._accel import HAS_NUMBA
from bdssd.absorption import absorption_pmf
from bdssd.core import DiscreteKernel
from bdssd.coupling import ContinuousContext, SpectralContext, seed_key
from bdssd.sampling import random_absorbing_kernel, random_ergodic_generator, random_ergodic_kernel


def best_of(fn, repeat):
    fn()  # warm-up (numba compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(replicas):
    rng = np.random.default_rng(0)

    n = 200
    diag = rng.normal(size=n)
    offsq = rng.uniform(0.1, 1.0, n - 1)
    yield "sturm bisection (n=200)", lambda f: f(diag, offsq), _kernels.sturm_eigs_loop, _kernels.sturm_eigs_np

    # slowly absorbing chain, iterated only as far as the absorption tail is
    # resolved (running further drives the mass into subnormal floats)
    K = DiscreteKernel([0.05] * 6, [0.3] * 5 + [0.0], mode="float")
    p, q, r = K.as_arrays()
    steps = absorption_pmf(K).horizon

    def adv(f):
        a = np.zeros(7)
        a[0] = 1.0
        f(a, p, q, r, steps, np.zeros(steps), 0)

    yield f"first-passage advance (d=6, {steps} steps)", adv, _kernels.advance_loop, _kernels.advance_np

    P = random_ergodic_kernel(rng, 4)
    ctx = SpectralContext.build(P)
    pk, qk, rk = ctx.kernel.as_arrays()
    tab = ctx.table()
    link = np.ascontiguousarray(ctx.link)
    bases = _kernels.replica_bases(seed_key(1), 0, replicas)
    yield (
        f"discrete coupling (d=4, {replicas} replicas)",
        lambda f: f(qk.copy(), qk + rk, tab, link, bases, 10**7, 25),
        _kernels.coupled_discrete_loop,
        _kernels.coupled_discrete_np,
    )

    G = random_ergodic_generator(rng, 4)
    cctx = ContinuousContext.build(G)
    lam, mu = cctx.generator.as_arrays()
    rtab = cctx.table()
    clink = np.ascontiguousarray(cctx.link)
    yield (
        f"continuous coupling (d=4, {replicas} replicas)",
        lambda f: f(lam, mu, rtab, clink, bases, 1e9),
        _kernels.coupled_continuous_loop,
        _kernels.coupled_continuous_np,
    )

    lam_a = np.array([2.0, 2.0, 0.0])
    mu_a = np.array([0.0, 1.0, 0.0])
    yield (
        f"occupation times (d=2, {replicas} replicas)",
        lambda f: f(lam_a, mu_a, bases, 1e9),
        _kernels.occupation_loop,
        _kernels.occupation_np,
    )


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--replicas", type=int, default=100_000)
    args = ap.parse_args(argv)
    label = "numba" if HAS_NUMBA else "python loop"
    print(f"{'kernel':45s} {label:>12s} {'numpy':>12s} {'ratio':>8s}")
    for name, call, loop, vec in cases(args.replicas):
        t_loop = best_of(lambda: call(loop), args.repeat)
        t_np = best_of(lambda: call(vec), args.repeat)
        print(f"{name:45s} {t_loop * 1e3:10.2f}ms {t_np * 1e3:10.2f}ms {t_np / t_loop:7.1f}x")


if __name__ == "__main__":
    main()
