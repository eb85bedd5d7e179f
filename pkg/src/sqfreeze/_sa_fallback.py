"""Pure-Python twin of the compiled annealing kernel.

Kept step-for-step equivalent to ``_sa_core.run_shots``: the RNG stream is
consumed in the same order (numpy's Generator.random fills arrays with the
same next_double sequence the compiled loop draws one at a time) and every
floating-point accumulation happens in the same order, so both kernels return
bit-identical sample arrays. Orders of magnitude slower; meant as a portable
fallback and as a readable reference for the compiled loop.
"""

from math import exp

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence


def run_shots(h, ptr, idx, val, betas, shots, seed):
    """Anneal ``shots`` independent restarts; returns int8 spins (shots, n)."""
    n = len(h)
    if n < 1:
        raise ValueError("kernel requires at least one spin")
    sweeps = len(betas)
    out = np.empty((shots, n), dtype=np.int8)
    h_l = [float(x) for x in h]
    ptr_l = [int(x) for x in ptr]
    idx_l = [int(x) for x in idx]
    val_l = [float(x) for x in val]
    betas_l = [float(x) for x in betas]
    # one uniform per init spin, n-1 per sweep permutation, one per proposal
    draws = n + sweeps * (2 * n - 1)

    for k in range(shots):
        gen = Generator(PCG64(SeedSequence((seed, k))))
        u = gen.random(draws)
        c = 0
        s = [0] * n
        for i in range(n):
            s[i] = 1 if u[c] < 0.5 else -1
            c += 1
        field = [0.0] * n
        for i in range(n):
            f = h_l[i]
            for p in range(ptr_l[i], ptr_l[i + 1]):
                f += val_l[p] * s[idx_l[p]]
            field[i] = f

        for t in range(sweeps):
            beta = betas_l[t]
            perm = list(range(n))
            for i in range(n - 1, 0, -1):
                j = int(u[c] * (i + 1))
                c += 1
                perm[i], perm[j] = perm[j], perm[i]
            for pos in range(n):
                q = perm[pos]
                uu = u[c]
                c += 1
                de = -2.0 * s[q] * field[q]
                if de <= 0.0 or uu < exp(-beta * de):
                    snew = -s[q]
                    s[q] = snew
                    dv = 2.0 * snew
                    for p in range(ptr_l[q], ptr_l[q + 1]):
                        field[idx_l[p]] += dv * val_l[p]

        out[k] = s
    return out
