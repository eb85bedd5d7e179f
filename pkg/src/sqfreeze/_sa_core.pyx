#cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled single-spin-flip Metropolis kernel.

This must stay numerically identical to ``_sa_fallback.run_shots``: same RNG
consumption order (one uniform per init spin, n-1 per sweep permutation, one
per proposal whether or not it is used) and the same floating-point operation
order. Any change here must be mirrored there, and vice versa; the pair is
locked together by the bit-identity tests.
"""

from libc.math cimport exp

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

from numpy.random import PCG64, SeedSequence

cnp.import_array()


def run_shots(
    cnp.float64_t[::1] h,
    cnp.int64_t[::1] ptr,
    cnp.int64_t[::1] idx,
    cnp.float64_t[::1] val,
    cnp.float64_t[::1] betas,
    int shots,
    object seed,
):
    """Anneal ``shots`` independent restarts; returns int8 spins (shots, n).

    Adjacency is CSR over spin positions: neighbours of i are
    idx[ptr[i]:ptr[i+1]] with symmetric coupling values val[...].
    Shot k consumes its own generator PCG64(SeedSequence((seed, k))).
    """
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t sweeps = betas.shape[0]
    if n < 1:
        raise ValueError("kernel requires at least one spin")

    out_arr = np.empty((shots, n), dtype=np.int8)
    cdef cnp.int8_t[:, ::1] out = out_arr
    cdef cnp.int8_t[::1] s = np.empty(n, dtype=np.int8)
    cdef cnp.float64_t[::1] field = np.empty(n, dtype=np.float64)
    cdef cnp.int64_t[::1] perm = np.empty(n, dtype=np.int64)

    cdef bitgen_t *rng
    cdef Py_ssize_t k, i, j, p, t, q, pos
    cdef double u, de, beta, f, dv
    cdef cnp.int64_t tmp
    cdef cnp.int8_t snew

    for k in range(shots):
        bg = PCG64(SeedSequence((seed, k)))
        capsule = bg.capsule
        rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

        for i in range(n):
            u = rng.next_double(rng.state)
            s[i] = 1 if u < 0.5 else -1
        # local fields: field[i] = h_i + sum_j J_ij s_j, accumulated in CSR order
        for i in range(n):
            f = h[i]
            for p in range(ptr[i], ptr[i + 1]):
                f += val[p] * s[idx[p]]
            field[i] = f

        for t in range(sweeps):
            beta = betas[t]
            for i in range(n):
                perm[i] = i
            for i in range(n - 1, 0, -1):
                u = rng.next_double(rng.state)
                j = <Py_ssize_t> (u * (i + 1))
                tmp = perm[i]
                perm[i] = perm[j]
                perm[j] = tmp
            for pos in range(n):
                q = perm[pos]
                # draw unconditionally so the stream position is input-independent
                u = rng.next_double(rng.state)
                de = -2.0 * s[q] * field[q]
                if de <= 0.0 or u < exp(-beta * de):
                    snew = -s[q]
                    s[q] = snew
                    dv = 2.0 * snew
                    for p in range(ptr[q], ptr[q + 1]):
                        field[idx[p]] += dv * val[p]

        for i in range(n):
            out[k, i] = s[i]
    return out_arr
