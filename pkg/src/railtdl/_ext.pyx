# cython: boundscheck=False, wraparound=False, initializedcheck=False
# Compiled twins of railtdl._kernels_py -- same inputs, same float operation
# order, bit-identical outputs.  Keep the two files in sync.

import numpy as np

cimport numpy as cnp


def markov_scan(const double[:, ::1] u, const double[::1] p01,
                const double[::1] p11, const cnp.uint8_t[::1] s0):
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t L = u.shape[1]
    states = np.empty((m + 1, L), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] sv = states
    cdef Py_ssize_t t, l
    cdef cnp.uint8_t s
    cdef double pb, ps
    for l in range(L):
        s = s0[l]
        sv[0, l] = s
        pb = p01[l]
        ps = p11[l]
        for t in range(m):
            if s:
                s = 1 if u[t, l] < ps else 0
            else:
                s = 1 if u[t, l] < pb else 0
            sv[t + 1, l] = s
    return states


def phase_fill(const cnp.uint8_t[:, ::1] states, const double[::1] phase0,
               const double[::1] incr, const cnp.int64_t[::1] offsets):
    cdef Py_ssize_t n = states.shape[0]
    cdef Py_ssize_t L = states.shape[1]
    phases = np.zeros((n, L), dtype=np.float64)
    cdef double[:, ::1] pv = phases
    cdef Py_ssize_t t, l
    cdef cnp.int64_t b
    cdef double ph = 0.0, inc = 0.0
    cdef cnp.uint8_t prev
    for l in range(L):
        b = offsets[l]
        prev = 0
        for t in range(n):
            if states[t, l]:
                if prev:
                    ph = ph + inc
                else:
                    ph = phase0[b]
                    inc = incr[b]
                    b += 1
                pv[t, l] = ph
            prev = states[t, l]
    return phases
