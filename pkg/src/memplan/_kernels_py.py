"""Pure-Python kernels; the reference semantics for the compiled ``_kernels`` module.

Both implementations must perform the same floating-point operations in
the same order so that search results are bit-identical across backends.

Chunk arrays are 0-based here; in the comments chunk ``i`` is 1-based.
``sweep_times`` vectorizes over candidates with numpy but keeps, for every
candidate, the scalar kernels' sequence of operations.
"""

import numpy as np


def fwd_time(comp, pref, n_persist):
    """Sum over i = 1..N+1 of max(comp(i-1), prefetch(i)); prefetch(i) = 0 for i <= n_persist."""
    n = len(comp)
    total = 0.0
    for i in range(1, n + 2):
        a = comp[i - 2] if i >= 2 else 0.0
        p = pref[i - 1] if n_persist < i <= n else 0.0
        total += a if a >= p else p
    return float(total)


def bwd_time(comp, recomp, pref, red, off, n_persist, n_buffer):
    """Backward visits chunks N..1; step i overlaps the prefetch of i-1 and the
    reduce/offload of i+1.  The i = 0 step carries the trailing reduce of chunk 1."""
    n = len(comp)
    limit = n - n_buffer
    total = 0.0
    for i in range(n, -1, -1):
        a = comp[i - 1] + recomp[i - 1] if i >= 1 else 0.0
        j = i - 1
        p = pref[j - 1] if (j >= 1 and n_persist < j <= limit) else 0.0
        k = i + 1
        if 1 <= k <= n:
            r = red[k - 1] + off[k - 1] if k > n_persist else red[k - 1]
        else:
            r = 0.0
        m = a if a >= p else p
        total += m if m >= r else r
    return float(total)


def sweep_times(comp_f, pref_f, comp_b, recomp, pref_b, red, off, persist, buffers):
    comp_f, pref_f = np.asarray(comp_f, dtype=np.float64), np.asarray(pref_f, dtype=np.float64)
    comp_b, recomp = np.asarray(comp_b, dtype=np.float64), np.asarray(recomp, dtype=np.float64)
    pref_b, red, off = (np.asarray(x, dtype=np.float64) for x in (pref_b, red, off))
    ps = np.asarray(persist, dtype=np.int64)
    limit = len(comp_b) - np.asarray(buffers, dtype=np.int64)
    n = len(comp_f)
    zero = np.zeros(len(ps))

    tf = zero.copy()
    for i in range(1, n + 2):
        a = comp_f[i - 2] if i >= 2 else 0.0
        p = np.where(ps < i, pref_f[i - 1], 0.0) if i <= n else zero
        tf += np.where(a >= p, a, p)

    tb = zero.copy()
    for i in range(n, -1, -1):
        a = comp_b[i - 1] + recomp[i - 1] if i >= 1 else 0.0
        j = i - 1
        p = np.where((ps < j) & (j <= limit), pref_b[j - 1], 0.0) if j >= 1 else zero
        k = i + 1
        if 1 <= k <= n:
            r = np.where(k > ps, red[k - 1] + off[k - 1], red[k - 1])
        else:
            r = zero
        m = np.where(a >= p, a, p)
        tb += np.where(m >= r, m, r)
    return tf, tb


def replay_peak(d_cur_prior, d_peak_prior, d_cur_op, d_peak_op, act, optimized, bump, cur0):
    """Operator-wise backward replay; returns (peak, final current) in bytes."""
    cur = int(cur0)
    peak = cur
    for i in range(len(act) - 1, -1, -1):
        p2 = cur + d_peak_prior[i]
        p3 = cur + d_cur_prior[i] + d_peak_op[i] + bump[i]
        if p2 > peak:
            peak = p2
        if p3 > peak:
            peak = p3
        cur = cur + d_cur_prior[i] + d_cur_op[i]
        if not optimized[i]:
            cur -= act[i]
    return int(peak), int(cur)
