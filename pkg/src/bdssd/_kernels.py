"""Hot numeric kernels.

Each kernel exists as a loop (``*_loop``, numba-compiled when available) and
as a vectorized numpy function (``*_np``).  The public name without suffix
points at one of them according to :data:`bdssd._accel.USE_NUMBA`.

Random numbers come from counter-keyed SplitMix64 streams: replica ``r`` owns
the state ``base[r]`` and its ``j``-th draw is ``mix(base[r] + (j+1)*GAMMA)``.
Both implementations consume draws in the same order, so trajectories agree
bit for bit whichever backend runs them.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0

STATUS_OK = 0
STATUS_CAP = 1
STATUS_SUPPORT = 2


# ---------------------------------------------------------------- RNG ----


def _mix64_py(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


mix64 = njit(_mix64_py)


def _u01_py(base, ctr):
    z = mix64(base + (ctr + _ONE) * GAMMA)
    return np.float64(z >> _S11) * _INV53


u01 = njit(_u01_py)


def mix64_np(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
        return z ^ (z >> _S31)


def u01_np(base, ctr):
    """Uniform [0, 1) draws for arrays of stream states and counters."""
    with np.errstate(over="ignore"):
        z = mix64_np(base + (ctr + _ONE) * GAMMA)
    return (z >> _S11).astype(np.float64) * _INV53


def replica_bases(key, first, count):
    """Stream states for replicas first..first+count-1 under a 64-bit key."""
    idx = np.arange(first, first + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64_np(np.uint64(key) ^ mix64_np(idx * GAMMA + GAMMA))


# ------------------------------------------------- Sturm bisection ----


def _gershgorin(diag, offsq):
    n = diag.size
    off = np.sqrt(offsq)
    lo = np.inf
    hi = -np.inf
    for i in range(n):
        rad = 0.0
        if i > 0:
            rad += off[i - 1]
        if i < n - 1:
            rad += off[i]
        lo = min(lo, diag[i] - rad)
        hi = max(hi, diag[i] + rad)
    span = max(hi - lo, abs(hi), abs(lo), 1e-300)
    return lo - 4e-16 * span, hi + 4e-16 * span


def _sturm_eigs_loop(diag, offsq):
    n = diag.size
    out = np.empty(n)
    lo0, hi0 = _gershgorin(diag, offsq)
    big = 1.0
    for i in range(n - 1):
        big = max(big, offsq[i])
    pivmin = 2.2250738585072014e-308 * big
    for k in range(n):
        a = lo0
        b = hi0
        for _ in range(2200):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            # number of eigenvalues below mid
            count = 0
            qv = diag[0] - mid
            if abs(qv) < pivmin:
                qv = -pivmin
            if qv < 0.0:
                count += 1
            for i in range(1, n):
                qv = diag[i] - mid - offsq[i - 1] / qv
                if abs(qv) < pivmin:
                    qv = -pivmin
                if qv < 0.0:
                    count += 1
            if count > k:
                b = mid
            else:
                a = mid
        out[k] = 0.5 * (a + b)
    return out


_gershgorin = njit(_gershgorin)
sturm_eigs_loop = njit(_sturm_eigs_loop)


def sturm_eigs_np(diag, offsq):
    """All eigenvalues of a symmetric tridiagonal matrix, ascending.

    ``diag`` is the main diagonal and ``offsq`` the squared off-diagonal.
    Every eigenvalue is bisected simultaneously until its bracket cannot be
    split in binary64.
    """
    diag = np.asarray(diag, dtype=float)
    offsq = np.asarray(offsq, dtype=float)
    n = diag.size
    off = np.sqrt(offsq)
    rad = np.zeros(n)
    rad[1:] += off
    rad[:-1] += off
    lo0 = float(np.min(diag - rad))
    hi0 = float(np.max(diag + rad))
    span = max(hi0 - lo0, abs(hi0), abs(lo0), 1e-300)
    lo = np.full(n, lo0 - 4e-16 * span)
    hi = np.full(n, hi0 + 4e-16 * span)
    pivmin = np.finfo(float).tiny * max(1.0, float(offsq.max(initial=0.0)))
    ks = np.arange(n)
    for _ in range(2200):
        mid = 0.5 * (lo + hi)
        live = (mid > lo) & (mid < hi)
        if not live.any():
            break
        qv = diag[0] - mid
        qv = np.where(np.abs(qv) < pivmin, -pivmin, qv)
        count = (qv < 0).astype(np.int64)
        for i in range(1, n):
            qv = diag[i] - mid - offsq[i - 1] / qv
            qv = np.where(np.abs(qv) < pivmin, -pivmin, qv)
            count += qv < 0
        above = count > ks
        hi = np.where(live & above, mid, hi)
        lo = np.where(live & ~above, mid, lo)
    return 0.5 * (lo + hi)


# ------------------------------------------- first-passage iteration ----


def _advance_loop(a, p, q, r, steps, out, offset):
    """Push the row vector ``a`` through the kernel ``steps`` times.

    ``out[offset + t]`` receives the mass entering the absorbing top state at
    step t+1 (that is a[d-1] * p[d-1] before the step).
    """
    n = a.size
    d = n - 1
    nxt = np.empty(n)
    for t in range(steps):
        out[offset + t] = a[d - 1] * p[d - 1]
        for i in range(n):
            s = a[i] * r[i]
            if i > 0:
                s += a[i - 1] * p[i - 1]
            if i < d:
                s += a[i + 1] * q[i + 1]
            nxt[i] = s
        for i in range(n):
            a[i] = nxt[i]
    return a


advance_loop = njit(_advance_loop)


ADVANCE_BLOCK = 256


def advance_np(a, p, q, r, steps, out, offset):
    """Blocked version of :func:`advance_loop`.

    With P the tridiagonal kernel, the absorbed mass at step k of a block is
    ``a @ P^k[:, d-1] * p[d-1]``, so a block of B steps costs one (d+1) x B
    product plus a multiplication by P^B.
    """
    n = a.size
    d = n - 1
    P = np.diag(r) + np.diag(p[:-1], 1) + np.diag(q[1:], -1)
    block = min(ADVANCE_BLOCK, max(steps, 1))
    W = np.empty((n, block))
    col = np.zeros(n)
    col[d - 1] = p[d - 1]
    for k in range(block):
        W[:, k] = col
        col = P @ col
    PB = np.linalg.matrix_power(P, block)
    a = np.array(a, dtype=float)
    done = 0
    while done < steps:
        size = min(block, steps - done)
        out[offset + done : offset + done + size] = a @ W[:, :size]
        a = a @ PB if size == block else a @ np.linalg.matrix_power(P, size)
        done += size
    return a


# -------------------------------------------------- discrete coupling ----


def _coupled_discrete_loop(
    cum_death, cum_hold, btab, link, bases, max_steps, diff_len
):
    """Run one dual-coupled discrete replica per entry of ``bases``.

    ``btab[xh, x, dy]`` is the probability that the dual moves up when the
    primal goes from x to x + dy - 1.  ``link`` is used only to assert the
    support condition link[xh, x] > 0.  ``diff`` counts consecutive pairs of
    gaps xh - x, flattened as ``prev * (d + 1) + cur``.
    """
    nrep = bases.size
    d = link.shape[0] - 1
    t_abs = np.zeros(nrep, dtype=np.int64)
    x_abs = np.zeros(nrep, dtype=np.int64)
    soj = np.zeros((nrep, d), dtype=np.int64)
    status = np.zeros(nrep, dtype=np.int64)
    trans = np.zeros((d + 1, 3), dtype=np.int64)
    dual_moves = np.zeros((d, 2), dtype=np.int64)
    diff = np.zeros(diff_len, dtype=np.int64)
    for rep in range(nrep):
        base = bases[rep]
        ctr = np.uint64(0)
        x = 0
        xh = 0
        t = 0
        entry = 0
        prev = 0
        while xh < d:
            if t >= max_steps:
                status[rep] = STATUS_CAP
                break
            u = u01(base, ctr)
            ctr += _ONE
            if u < cum_death[x]:
                dy = 0
            elif u < cum_hold[x]:
                dy = 1
            else:
                dy = 2
            trans[x, dy] += 1
            u = u01(base, ctr)
            ctr += _ONE
            up = u < btab[xh, x, dy]
            x = x + dy - 1
            t += 1
            if up:
                dual_moves[xh, 1] += 1
                soj[rep, xh] = t - entry
                entry = t
                xh += 1
            else:
                dual_moves[xh, 0] += 1
            if x > xh or link[xh, x] <= 0.0:
                status[rep] = STATUS_SUPPORT
                break
            cur = xh - x
            diff[prev * (d + 1) + cur] += 1
            prev = cur
        t_abs[rep] = t
        x_abs[rep] = x
    return t_abs, x_abs, soj, status, trans, dual_moves, diff


coupled_discrete_loop = njit(_coupled_discrete_loop)


def coupled_discrete_np(cum_death, cum_hold, btab, link, bases, max_steps, diff_len):
    nrep = bases.size
    d = link.shape[0] - 1
    t_abs = np.zeros(nrep, dtype=np.int64)
    x_abs = np.zeros(nrep, dtype=np.int64)
    soj = np.zeros((nrep, d), dtype=np.int64)
    status = np.zeros(nrep, dtype=np.int64)
    trans = np.zeros((d + 1, 3), dtype=np.int64)
    dual_moves = np.zeros((d, 2), dtype=np.int64)
    diff = np.zeros(diff_len, dtype=np.int64)

    x = np.zeros(nrep, dtype=np.int64)
    xh = np.zeros(nrep, dtype=np.int64)
    entry = np.zeros(nrep, dtype=np.int64)
    ctr = np.zeros(nrep, dtype=np.uint64)
    live = np.arange(nrep)
    t = 0
    while live.size:
        if t >= max_steps:
            status[live] = STATUS_CAP
            break
        b = bases[live]
        c = ctr[live]
        xl = x[live]
        xhl = xh[live]
        prev = xhl - xl
        u = u01_np(b, c)
        dy = np.where(u < cum_death[xl], 0, np.where(u < cum_hold[xl], 1, 2))
        np.add.at(trans, (xl, dy), 1)
        u = u01_np(b, c + _ONE)
        ctr[live] = c + np.uint64(2)
        up = u < btab[xhl, xl, dy]
        xl = xl + dy - 1
        t += 1
        np.add.at(dual_moves, (xhl, up.astype(np.int64)), 1)
        movers = live[up]
        soj[movers, xhl[up]] = t - entry[movers]
        entry[movers] = t
        xhl = xhl + up
        x[live] = xl
        xh[live] = xhl
        bad = (xl > xhl) | (link[xhl, np.minimum(xl, d)] <= 0.0)
        if bad.any():
            status[live[bad]] = STATUS_SUPPORT
        good = ~bad
        np.add.at(diff, prev[good] * (d + 1) + xhl[good] - xl[good], 1)
        done = bad | (xhl == d)
        t_abs[live[done]] = t
        live = live[~done]
    x_abs[:] = x
    if live.size:
        t_abs[live] = t
    return t_abs, x_abs, soj, status, trans, dual_moves, diff


# ------------------------------------------------ continuous coupling ----


def _coupled_continuous_loop(lam, mu, rtab, link, bases, max_time):
    nrep = bases.size
    d = lam.size - 1
    t_abs = np.zeros(nrep)
    x_abs = np.zeros(nrep, dtype=np.int64)
    soj = np.zeros((nrep, d))
    occ = np.zeros((nrep, d + 1))
    status = np.zeros(nrep, dtype=np.int64)
    jumps = np.zeros((d + 1, 2), dtype=np.int64)
    for rep in range(nrep):
        base = bases[rep]
        ctr = np.uint64(0)
        x = 0
        xh = 0
        t = 0.0
        entry = 0.0
        while xh < d:
            if t > max_time:
                status[rep] = STATUS_CAP
                break
            a = lam[x] + mu[x]
            e1 = -np.log1p(-u01(base, ctr)) / a
            ctr += _ONE
            rate = rtab[xh, x]
            u = u01(base, ctr)
            ctr += _ONE
            e2 = -np.log1p(-u) / rate if rate > 0.0 else np.inf
            u = u01(base, ctr)
            ctr += _ONE
            if e1 < e2:
                t += e1
                occ[rep, x] += e1
                if u * a < lam[x]:
                    jumps[x, 1] += 1
                    x += 1
                else:
                    jumps[x, 0] += 1
                    x -= 1
                if x == xh + 1:
                    soj[rep, xh] = t - entry
                    entry = t
                    xh += 1
            else:
                t += e2
                occ[rep, x] += e2
                soj[rep, xh] = t - entry
                entry = t
                xh += 1
            if link[xh, x] <= 0.0:
                status[rep] = STATUS_SUPPORT
                break
        t_abs[rep] = t
        x_abs[rep] = x
    return t_abs, x_abs, soj, occ, status, jumps


coupled_continuous_loop = njit(_coupled_continuous_loop)


def coupled_continuous_np(lam, mu, rtab, link, bases, max_time):
    nrep = bases.size
    d = lam.size - 1
    t_abs = np.zeros(nrep)
    x_abs = np.zeros(nrep, dtype=np.int64)
    soj = np.zeros((nrep, d))
    occ = np.zeros((nrep, d + 1))
    status = np.zeros(nrep, dtype=np.int64)
    jumps = np.zeros((d + 1, 2), dtype=np.int64)

    x = np.zeros(nrep, dtype=np.int64)
    xh = np.zeros(nrep, dtype=np.int64)
    t = np.zeros(nrep)
    entry = np.zeros(nrep)
    ctr = np.zeros(nrep, dtype=np.uint64)
    live = np.arange(nrep)
    with np.errstate(divide="ignore", invalid="ignore"):
        while live.size:
            over = t[live] > max_time
            if over.any():
                status[live[over]] = STATUS_CAP
                live = live[~over]
                if not live.size:
                    break
            b = bases[live]
            c = ctr[live]
            xl = x[live]
            xhl = xh[live]
            a = lam[xl] + mu[xl]
            e1 = -np.log1p(-u01_np(b, c)) / a
            rate = rtab[xhl, xl]
            e2 = np.where(rate > 0.0, -np.log1p(-u01_np(b, c + _ONE)) / rate, np.inf)
            u = u01_np(b, c + np.uint64(2))
            ctr[live] = c + np.uint64(3)
            primal = e1 < e2
            step = np.where(primal, e1, e2)
            tl = t[live] + step
            np.add.at(occ, (live, xl), step)
            upj = u * a < lam[xl]
            jp = primal & upj
            jm = primal & ~upj
            np.add.at(jumps, (xl[jp], 1), 1)
            np.add.at(jumps, (xl[jm], 0), 1)
            xl = xl + jp - jm
            birth = ~primal | (xl == xhl + 1)
            movers = live[birth]
            soj[movers, xhl[birth]] = tl[birth] - entry[movers]
            entry[movers] = tl[birth]
            xhl = xhl + birth
            t[live] = tl
            x[live] = xl
            xh[live] = xhl
            bad = link[xhl, xl] <= 0.0
            if bad.any():
                status[live[bad]] = STATUS_SUPPORT
            done = bad | (xhl == d)
            live = live[~done]
    t_abs[:] = t
    x_abs[:] = x
    return t_abs, x_abs, soj, occ, status, jumps


# ------------------------------------------------- occupation times ----


def _occupation_loop(lam, mu, bases, max_time):
    """Occupation times of states 0..d-1 before hitting d, started at 0."""
    nrep = bases.size
    d = lam.size - 1
    occ = np.zeros((nrep, d))
    status = np.zeros(nrep, dtype=np.int64)
    for rep in range(nrep):
        base = bases[rep]
        ctr = np.uint64(0)
        x = 0
        t = 0.0
        while x < d:
            if t > max_time:
                status[rep] = STATUS_CAP
                break
            a = lam[x] + mu[x]
            e = -np.log1p(-u01(base, ctr)) / a
            u = u01(base, ctr + _ONE)
            ctr += np.uint64(2)
            t += e
            occ[rep, x] += e
            if u * a < lam[x]:
                x += 1
            else:
                x -= 1
    return occ, status


occupation_loop = njit(_occupation_loop)


def occupation_np(lam, mu, bases, max_time):
    nrep = bases.size
    d = lam.size - 1
    occ = np.zeros((nrep, d))
    status = np.zeros(nrep, dtype=np.int64)
    x = np.zeros(nrep, dtype=np.int64)
    t = np.zeros(nrep)
    ctr = np.zeros(nrep, dtype=np.uint64)
    live = np.arange(nrep)
    while live.size:
        over = t[live] > max_time
        if over.any():
            status[live[over]] = STATUS_CAP
            live = live[~over]
            if not live.size:
                break
        b = bases[live]
        c = ctr[live]
        xl = x[live]
        a = lam[xl] + mu[xl]
        e = -np.log1p(-u01_np(b, c)) / a
        u = u01_np(b, c + _ONE)
        ctr[live] = c + np.uint64(2)
        t[live] += e
        occ[live, xl] += e
        xl = np.where(u * a < lam[xl], xl + 1, xl - 1)
        x[live] = xl
        live = live[xl < d]
    return occ, status


if USE_NUMBA:
    sturm_eigs = sturm_eigs_loop
    advance = advance_loop
    coupled_discrete = coupled_discrete_loop
    coupled_continuous = coupled_continuous_loop
    occupation = occupation_loop
else:
    sturm_eigs = sturm_eigs_np
    advance = advance_np
    coupled_discrete = coupled_discrete_np
    coupled_continuous = coupled_continuous_np
    occupation = occupation_np
