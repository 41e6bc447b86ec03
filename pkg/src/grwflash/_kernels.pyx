# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled gate-sequence kernel (see grwflash.kernels for the reference version)."""
import numpy as np

ctypedef double complex cplx


def apply_gate_sequence(cplx[:, ::1] state, int N, int Ld,
                        const long[::1] starts, const long[::1] sizes,
                        const cplx[:, :, ::1] blocks, const long[::1] phase_idx,
                        const cplx[:, ::1] phases, bint inverse):
    cdef Py_ssize_t dim = state.shape[0]
    cdef Py_ssize_t batch = state.shape[1]
    cdef Py_ssize_t G = starts.shape[0]
    cdef Py_ssize_t g, p, pp, pre, post, q, i, j, b, s, r, c, base
    cdef cplx acc
    cdef cplx ph
    cdef cplx buf[8]
    cdef cplx[::1] flat = np.asarray(state).reshape(-1)
    with nogil:
        for g in range(G):
            b = sizes[g]
            s = starts[g]
            if inverse and phase_idx[g] >= 0:
                for r in range(dim):
                    ph = phases[phase_idx[g], r]
                    for c in range(batch):
                        state[r, c] = state[r, c] * ph
            pre = 1
            for p in range(N):
                post = batch
                for pp in range(N - 1 - p):
                    post = post * Ld
                for pp in range(pre):
                    for q in range(post):
                        base = (pp * Ld + s) * post + q
                        for j in range(b):
                            buf[j] = flat[base + j * post]
                        for i in range(b):
                            acc = 0
                            for j in range(b):
                                acc = acc + blocks[g, i, j] * buf[j]
                            flat[base + i * post] = acc
                pre = pre * Ld
            if not inverse and phase_idx[g] >= 0:
                for r in range(dim):
                    ph = phases[phase_idx[g], r]
                    for c in range(batch):
                        state[r, c] = state[r, c] * ph
