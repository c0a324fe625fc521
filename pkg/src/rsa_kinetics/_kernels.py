"""Compiled kernels for length sampling, the three simulators and the
multidisperse march.

An ldf reaches this module as ``(code, par, xs, ys, zs)``: see
``LengthDistribution.packed``.  Codes: 0 discrete, 1 power, 2 inverse power,
3 exponential, 4 tabulated.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


# ------------------------------------------------------------ length draws


@njit(**_JIT)
def _discrete_index(xs, ys, L, u, first):
    # first=True weighs atom i by q_i (L - l_i), else by q_i on l_i <= L
    total = 0.0
    for i in range(xs.shape[0]):
        if xs[i] < L or (not first and xs[i] <= L):
            total += ys[i] * (L - xs[i]) if first else ys[i]
    target = u * total
    last = 0
    acc = 0.0
    for i in range(xs.shape[0]):
        if xs[i] < L or (not first and xs[i] <= L):
            w = ys[i] * (L - xs[i]) if first else ys[i]
            if w > 0.0:
                last = i
                acc += w
                if target < acc:
                    return i
    return last


@njit(**_JIT)
def _tab_inverse(xs, ys, zs, L, u):
    n = xs.shape[0]
    g = min(L, xs[n - 1])
    # Z at g
    j = np.searchsorted(xs, g, side="right") - 1
    if j > n - 2:
        j = n - 2
    t = g - xs[j]
    slope = (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j])
    zg = zs[j] + ys[j] * t + 0.5 * slope * t * t
    target = u * zg
    i = np.searchsorted(zs, target, side="right") - 1
    if i > j:
        i = j
    if i < 0:
        i = 0
    r = target - zs[i]
    a = ys[i]
    s = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
    disc = a * a + 2.0 * s * r
    if disc < 0.0:
        disc = 0.0
    denom = a + math.sqrt(disc)
    x = 2.0 * r / denom if denom > 0.0 else 0.0
    hi = g - xs[i]
    if x > hi:
        x = hi
    if x < 0.0:
        x = 0.0
    return xs[i] + x


@njit(**_JIT)
def _inverse_cdf(code, par, xs, ys, zs, L, u):
    """Continuous inverse CDF of nu / Z(L) on [1, L]."""
    if code == 1:
        return 1.0 + (L - 1.0) * u ** (1.0 / par)
    if code == 2:
        lnL = math.log(L)
        if par == 1.0:
            return math.exp(u * lnL)
        e = 1.0 - par
        # l**e = 1 - u (1 - L**e)
        w = u * math.expm1(e * lnL)
        return math.exp(math.log1p(w) / e)
    if code == 3:
        a = par
        if a > 0.0:
            return L + math.log(u + (1.0 - u) * math.exp(-a * (L - 1.0))) / a
        return 1.0 + math.log1p(u * math.expm1(a * (L - 1.0))) / a
    return _tab_inverse(xs, ys, zs, L, u)


@njit(**_JIT)
def draw_truncated(code, par, xs, ys, zs, L, rng):
    """One length from nu / Z(L); returns (length, type index)."""
    u = rng.random()
    if code == 0:
        i = _discrete_index(xs, ys, L, u, False)
        return xs[i], i
    ell = _inverse_cdf(code, par, xs, ys, zs, L, u)
    if ell > L:
        ell = L
    if ell < 1.0:
        ell = 1.0
    return ell, 0


@njit(**_JIT)
def draw_first(code, par, xs, ys, zs, L, rng):
    """One first-parked length, density proportional to (L - l) nu(l)."""
    if code == 0:
        i = _discrete_index(xs, ys, L, rng.random(), True)
        return xs[i], i
    span = L - 1.0
    while True:
        ell, i = draw_truncated(code, par, xs, ys, zs, L, rng)
        if rng.random() * span < L - ell:
            return ell, 0


@njit(**_JIT)
def sample_truncated_many(code, par, xs, ys, zs, L, rng, n):
    out = np.empty(n)
    for r in range(n):
        out[r], _ = draw_truncated(code, par, xs, ys, zs, L, rng)
    return out


@njit(**_JIT)
def sample_first_many(code, par, xs, ys, zs, L, rng, n):
    out = np.empty(n)
    for r in range(n):
        out[r], _ = draw_first(code, par, xs, ys, zs, L, rng)
    return out


# ------------------------------------------------------------ exact sampler


@njit(**_JIT)
def exact_run(code, par, xs, ys, zs, L, rng, record, lefts, lens, types, counts):
    """Gap recursion with an explicit stack.

    Fills ``counts`` (pre-zeroed) and, when ``record``, the segment arrays.
    Returns (number of segments, empty space).
    """
    cap = 64
    st_a = np.empty(cap)
    st_g = np.empty(cap)
    sp = 0
    empty = 0.0
    nseg = 0
    if L > 1.0:
        st_a[0] = 0.0
        st_g[0] = L
        sp = 1
    else:
        empty = L
    while sp > 0:
        sp -= 1
        a = st_a[sp]
        g = st_g[sp]
        if g <= 1.0:
            empty += g
            continue
        ell, i = draw_first(code, par, xs, ys, zs, g, rng)
        b = a + rng.random() * (g - ell)
        counts[i] += 1
        if record:
            lefts[nseg] = b
            lens[nseg] = ell
            types[nseg] = i
        nseg += 1
        if sp + 2 > cap:
            cap *= 2
            na = np.empty(cap)
            ng = np.empty(cap)
            na[:sp] = st_a[:sp]
            ng[:sp] = st_g[:sp]
            st_a = na
            st_g = ng
        st_a[sp] = a
        st_g[sp] = b - a
        st_a[sp + 1] = b + ell
        st_g[sp + 1] = (a + g) - (b + ell)
        sp += 2
    return nseg, empty


@njit(**_JIT)
def exact_batch(code, par, xs, ys, zs, L, rng, out):
    """Rows of ``out``: empty space, total count, per-type counts."""
    k = out.shape[1] - 2
    counts = np.zeros(k, dtype=np.int64)
    dummy_f = np.empty(0)
    dummy_i = np.empty(0, dtype=np.int64)
    for r in range(out.shape[0]):
        counts[:] = 0
        nseg, empty = exact_run(code, par, xs, ys, zs, L, rng, False, dummy_f, dummy_f, dummy_i, counts)
        out[r, 0] = empty
        out[r, 1] = nseg
        for i in range(k):
            out[r, 2 + i] = counts[i]


# ------------------------------------------------------------ rejection loop


@njit(**_JIT)
def rejection_run(code, par, xs, ys, zs, L, rng, cap, literal, record, lefts, lens, types, counts):
    """Sequential attempts until every free component has length <= 1.

    With ``literal`` each attempt draws b on [0, L] and l from nu / Z(L).
    Otherwise b is drawn on the union of the windows [a_j, a_j + g_j - 1] of
    live components and l from nu / Z(g_max): the same attempt law
    conditioned on an event that contains every success, so the parking
    sequence has the same distribution.

    Returns (segments, empty space, attempts, saturated flag).
    """
    size = int(L) + 2
    ca = np.empty(size)
    cg = np.empty(size)
    m = 0
    dead = 0.0
    if L > 1.0:
        ca[0] = 0.0
        cg[0] = L
        m = 1
    else:
        dead = L
    attempts = 0
    nseg = 0
    while m > 0:
        if attempts >= cap:
            break
        attempts += 1
        if literal:
            b = rng.random() * L
            ell, i = draw_truncated(code, par, xs, ys, zs, L, rng)
            lo = 0
            hi = m
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if ca[mid] <= b:
                    lo = mid
                else:
                    hi = mid
            j = lo
            if b < ca[j] or b + ell > ca[j] + cg[j]:
                continue
        else:
            gmax = 0.0
            wsum = 0.0
            for q in range(m):
                wsum += cg[q] - 1.0
                if cg[q] > gmax:
                    gmax = cg[q]
            target = rng.random() * wsum
            j = m - 1
            acc = 0.0
            for q in range(m):
                acc += cg[q] - 1.0
                if target < acc:
                    j = q
                    break
            off = target - (acc - (cg[j] - 1.0))
            if off < 0.0:
                off = 0.0
            b = ca[j] + off
            ell, i = draw_truncated(code, par, xs, ys, zs, gmax, rng)
            if b + ell > ca[j] + cg[j]:
                continue
        counts[i] += 1
        if record:
            lefts[nseg] = b
            lens[nseg] = ell
            types[nseg] = i
        nseg += 1
        a = ca[j]
        end = ca[j] + cg[j]
        g_left = b - a
        g_right = end - (b + ell)
        keep = 0
        if g_left > 1.0:
            keep += 1
        else:
            dead += g_left
        if g_right > 1.0:
            keep += 1
        else:
            dead += g_right
        # replace component j by the surviving pieces
        if keep == 0:
            for q in range(j, m - 1):
                ca[q] = ca[q + 1]
                cg[q] = cg[q + 1]
            m -= 1
        elif keep == 1:
            if g_left > 1.0:
                cg[j] = g_left
            else:
                ca[j] = b + ell
                cg[j] = g_right
        else:
            for q in range(m, j + 1, -1):
                ca[q] = ca[q - 1]
                cg[q] = cg[q - 1]
            cg[j] = g_left
            ca[j + 1] = b + ell
            cg[j + 1] = g_right
            m += 1
    saturated = m == 0
    if not saturated:
        for q in range(m):
            dead += cg[q]
    return nseg, dead, attempts, saturated


@njit(**_JIT)
def rejection_batch(code, par, xs, ys, zs, L, rng, cap, literal, out):
    """As ``exact_batch``; the last column holds the attempt count, negated
    when the cap was hit."""
    k = out.shape[1] - 3
    counts = np.zeros(k, dtype=np.int64)
    dummy_f = np.empty(0)
    dummy_i = np.empty(0, dtype=np.int64)
    for r in range(out.shape[0]):
        counts[:] = 0
        nseg, empty, att, sat = rejection_run(
            code, par, xs, ys, zs, L, rng, cap, literal, False, dummy_f, dummy_f, dummy_i, counts
        )
        out[r, 0] = empty
        out[r, 1] = nseg
        for i in range(k):
            out[r, 2 + i] = counts[i]
        out[r, 2 + k] = att if sat else -att


# ------------------------------------------------------------ ghost process


@njit(**_JIT)
def ghost_run(lengths, probs, L, rng, counts):
    """Multidisperse ghost process; returns the total number parked.

    Only candidates whose span meets a live component (length > 1) can
    change the outcome.  Component j is chosen with weight g_j + lbar and
    the type with weight q_i (g_j + l_i), giving a centre uniform on the
    window of spans that meet component j.  A candidate that also meets
    component j - 1 is redrawn, so each relevant candidate is counted once.
    """
    n = lengths.shape[0]
    lbar = 0.0
    for i in range(n):
        lbar += lengths[i] * probs[i]
    size = int(L) + 2
    ca = np.empty(size)
    cg = np.empty(size)
    m = 0
    if L > 1.0:
        ca[0] = 0.0
        cg[0] = L
        m = 1
    total = 0
    while m > 0:
        wsum = 0.0
        for q in range(m):
            wsum += cg[q] + lbar
        target = rng.random() * wsum
        j = m - 1
        acc = 0.0
        for q in range(m):
            acc += cg[q] + lbar
            if target < acc:
                j = q
                break
        g = cg[j]
        target = rng.random() * (g + lbar)
        i = n - 1
        acc = 0.0
        for p in range(n):
            acc += probs[p] * (g + lengths[p])
            if target < acc:
                i = p
                break
        ell = lengths[i]
        lo = ca[j] - ell + rng.random() * (g + ell)
        hi = lo + ell
        if j > 0 and lo < ca[j - 1] + cg[j - 1]:
            continue
        if lo >= ca[j] and hi <= ca[j] + g:
            counts[i] += 1
            total += 1
        # components j..r meet (lo, hi)
        r = j
        while r + 1 < m and ca[r + 1] < hi:
            r += 1
        left_g = lo - ca[j]
        right_a = hi
        right_g = ca[r] + cg[r] - hi
        left_a = ca[j]
        pieces = 0
        pa0 = 0.0
        pg0 = 0.0
        pa1 = 0.0
        pg1 = 0.0
        if left_g > 1.0:
            pa0 = left_a
            pg0 = left_g
            pieces = 1
        if right_g > 1.0:
            if pieces == 0:
                pa0 = right_a
                pg0 = right_g
            else:
                pa1 = right_a
                pg1 = right_g
            pieces += 1
        removed = r - j + 1
        shift = pieces - removed
        if shift < 0:
            for q in range(r + 1, m):
                ca[q + shift] = ca[q]
                cg[q + shift] = cg[q]
        elif shift > 0:
            for q in range(m - 1, r, -1):
                ca[q + shift] = ca[q]
                cg[q + shift] = cg[q]
        m += shift
        if pieces >= 1:
            ca[j] = pa0
            cg[j] = pg0
        if pieces == 2:
            ca[j + 1] = pa1
            cg[j + 1] = pg1
    return total


@njit(**_JIT)
def ghost_batch(lengths, probs, L, rng, out):
    k = lengths.shape[0]
    counts = np.zeros(k, dtype=np.int64)
    for r in range(out.shape[0]):
        counts[:] = 0
        total = ghost_run(lengths, probs, L, rng, counts)
        covered = 0.0
        for i in range(k):
            covered += lengths[i] * counts[i]
            out[r, 2 + i] = counts[i]
        out[r, 0] = L - covered
        out[r, 1] = total


# ------------------------------------------------------------ recurrences


@njit(cache=True)
def march_counts(lengths, probs, offsets, m1, n, h, k):
    """Forward march of E[N_k] on nodes 0..n with step h.

    ``offsets[i] = l_i / h`` and ``m1 = 1 / h``.  The cumulative integral of
    the solution runs from node m1 with composite Simpson and a trapezoid
    on the last panel when the panel count is odd.  The value at node m1 is
    the right limit.
    """
    nt = lengths.shape[0]
    vals = np.zeros(n + 1)
    cum = np.zeros(n + 1)
    for j in range(m1, n + 1):
        L = j * h
        den = 0.0
        num = 0.0
        for i in range(nt):
            if j > offsets[i]:
                w = probs[i] * (L - lengths[i])
                den += w
                if i == k:
                    num += w
                num += 2.0 * probs[i] * cum[j - offsets[i]]
        if den == 0.0:
            vals[j] = 1.0 if k == 0 else 0.0
        else:
            vals[j] = num / den
        r = j - m1
        if r >= 2 and r % 2 == 0:
            cum[j] = cum[j - 2] + h / 3.0 * (vals[j - 2] + 4.0 * vals[j - 1] + vals[j])
        elif r >= 1:
            cum[j] = cum[j - 1] + 0.5 * h * (vals[j - 1] + vals[j])
    return vals, cum


@njit(cache=True)
def self_convolution(vals, jump, h):
    """c[p] = int_0^{p h} v(t) v(p h - t) dt by the trapezoid rule.

    ``jump`` is a node where v steps from 0 (left) to vals[jump] (right);
    the mean of the one-sided limits is used there, which makes the rule
    the exact sum of the piecewise trapezoid rules.
    """
    n = vals.shape[0] - 1
    c = np.zeros(n + 1)
    for p in range(1, n + 1):
        s = 0.0
        for t in range(p + 1):
            a = vals[t]
            b = vals[p - t]
            if t == jump:
                a *= 0.5
            if p - t == jump:
                b *= 0.5
            w = 0.5 if (t == 0 or t == p) else 1.0
            s += w * a * b
        c[p] = h * s
    return c


@njit(cache=True)
def march_second_moment(lengths, probs, offsets, m1, n, h, k, first_cum, conv):
    """Forward march of E[N_k^2] given the first moment's cumulative
    integral and self-convolution."""
    nt = lengths.shape[0]
    vals = np.zeros(n + 1)
    cum = np.zeros(n + 1)
    for j in range(m1, n + 1):
        L = j * h
        den = 0.0
        num = 0.0
        for i in range(nt):
            if j > offsets[i]:
                p = j - offsets[i]
                w = probs[i] * (L - lengths[i])
                den += w
                if i == k:
                    num += w + 4.0 * probs[i] * first_cum[p]
                num += 2.0 * probs[i] * (conv[p] + cum[p])
        if den == 0.0:
            vals[j] = 1.0 if k == 0 else 0.0
        else:
            vals[j] = num / den
        r = j - m1
        if r >= 2 and r % 2 == 0:
            cum[j] = cum[j - 2] + h / 3.0 * (vals[j - 2] + 4.0 * vals[j - 1] + vals[j])
        elif r >= 1:
            cum[j] = cum[j - 1] + 0.5 * h * (vals[j - 1] + vals[j])
    return vals
