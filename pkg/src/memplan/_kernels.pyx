# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled cost-model kernels.  Semantics mirror ``_kernels_py`` operation for operation."""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


cdef inline double _fwd(const double[:] comp, const double[:] pref, Py_ssize_t n_persist) noexcept nogil:
    cdef Py_ssize_t n = comp.shape[0]
    cdef Py_ssize_t i
    cdef double total = 0.0, a, p
    for i in range(1, n + 2):
        a = comp[i - 2] if i >= 2 else 0.0
        p = pref[i - 1] if (n_persist < i and i <= n) else 0.0
        total += a if a >= p else p
    return total


cdef inline double _bwd(const double[:] comp, const double[:] recomp, const double[:] pref,
                        const double[:] red, const double[:] off,
                        Py_ssize_t n_persist, Py_ssize_t n_buffer) noexcept nogil:
    cdef Py_ssize_t n = comp.shape[0]
    cdef Py_ssize_t limit = n - n_buffer
    cdef Py_ssize_t i, j, k
    cdef double total = 0.0, a, p, r, m
    i = n
    while i >= 0:
        a = comp[i - 1] + recomp[i - 1] if i >= 1 else 0.0
        j = i - 1
        p = pref[j - 1] if (j >= 1 and n_persist < j and j <= limit) else 0.0
        k = i + 1
        if k >= 1 and k <= n:
            r = red[k - 1] + off[k - 1] if k > n_persist else red[k - 1]
        else:
            r = 0.0
        m = a if a >= p else p
        total += m if m >= r else r
        i -= 1
    return total


def _f64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def fwd_time(comp, pref, Py_ssize_t n_persist):
    return _fwd(_f64(comp), _f64(pref), n_persist)


def bwd_time(comp, recomp, pref, red, off, Py_ssize_t n_persist, Py_ssize_t n_buffer):
    return _bwd(_f64(comp), _f64(recomp), _f64(pref), _f64(red), _f64(off), n_persist, n_buffer)


def sweep_times(comp_f, pref_f, comp_b, recomp, pref_b, red, off, persist, buffers):
    cdef const double[:] cf = _f64(comp_f)
    cdef const double[:] pf = _f64(pref_f)
    cdef const double[:] cb = _f64(comp_b)
    cdef const double[:] rc = _f64(recomp)
    cdef const double[:] pb = _f64(pref_b)
    cdef const double[:] rd = _f64(red)
    cdef const double[:] of = _f64(off)
    cdef const int64_t[:] ps = np.ascontiguousarray(persist, dtype=np.int64)
    cdef const int64_t[:] bs = np.ascontiguousarray(buffers, dtype=np.int64)
    cdef Py_ssize_t m = ps.shape[0], t
    out_f = np.empty(m, dtype=np.float64)
    out_b = np.empty(m, dtype=np.float64)
    cdef double[:] tf = out_f
    cdef double[:] tb = out_b
    cdef Py_ssize_t last = -1
    cdef double last_f = 0.0
    with nogil:
        for t in range(m):
            if ps[t] != last:
                last = ps[t]
                last_f = _fwd(cf, pf, last)
            tf[t] = last_f
            tb[t] = _bwd(cb, rc, pb, rd, of, ps[t], bs[t])
    return out_f, out_b


def replay_peak(d_cur_prior, d_peak_prior, d_cur_op, d_peak_op, act, optimized, bump, cur0):
    cdef const int64_t[:] dcp = np.ascontiguousarray(d_cur_prior, dtype=np.int64)
    cdef const int64_t[:] dpp = np.ascontiguousarray(d_peak_prior, dtype=np.int64)
    cdef const int64_t[:] dco = np.ascontiguousarray(d_cur_op, dtype=np.int64)
    cdef const int64_t[:] dpo = np.ascontiguousarray(d_peak_op, dtype=np.int64)
    cdef const int64_t[:] ac = np.ascontiguousarray(act, dtype=np.int64)
    cdef const unsigned char[:] opt = np.ascontiguousarray(optimized, dtype=np.uint8)
    cdef const int64_t[:] bp = np.ascontiguousarray(bump, dtype=np.int64)
    cdef int64_t cur = cur0
    cdef int64_t peak = cur
    cdef int64_t p2, p3
    cdef Py_ssize_t i = ac.shape[0] - 1
    with nogil:
        while i >= 0:
            p2 = cur + dpp[i]
            p3 = cur + dcp[i] + dpo[i] + bp[i]
            if p2 > peak:
                peak = p2
            if p3 > peak:
                peak = p3
            cur = cur + dcp[i] + dco[i]
            if not opt[i]:
                cur -= ac[i]
            i -= 1
    return int(peak), int(cur)
