"""Compare the compiled annealing kernel against the pure-Python fallback.

Both kernels are required to produce bit-identical spins for the same
arguments, so this script first checks identity on a small workload and then
times each on workloads sized to its speed.

Usage:
    python benchmarks/kernel_benchmark.py [--n 64] [--seed 0]
"""

import argparse
import time

import numpy as np

from sqfreeze import _sa_fallback
from sqfreeze.generators import random_complete_ising
from sqfreeze.samplers import SamplerParams, _beta_schedule, _csr_adjacency

try:
    from sqfreeze import _sa_core
except ImportError:
    _sa_core = None


def kernel_inputs(n, seed):
    model = random_complete_ising(n, seed)
    h, rows, cols, vals = model.to_arrays()
    ptr, idx, val = _csr_adjacency(model.num_vars, rows, cols, vals)
    return h, ptr, idx, val


def flips_per_second(run, args, shots, sweeps, n):
    betas = _beta_schedule(SamplerParams(sa_sweeps=sweeps))
    start = time.perf_counter()
    run(*args, betas, shots, 0)
    elapsed = time.perf_counter() - start
    return shots * sweeps * n / elapsed, elapsed


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=64, help="model size")
    parser.add_argument("--seed", type=int, default=0, help="instance seed")
    cli = parser.parse_args()

    args = kernel_inputs(cli.n, cli.seed)

    if _sa_core is None:
        print("compiled kernel not built; timing the fallback only")
    else:
        betas = _beta_schedule(SamplerParams(sa_sweeps=50))
        a = _sa_core.run_shots(*args, betas, 20, 123)
        b = _sa_fallback.run_shots(*args, betas, 20, 123)
        if not np.array_equal(a, b):
            raise SystemExit("kernels disagree; benchmark aborted")
        print(f"bit-identity check passed (n={cli.n}, 20 shots, 50 sweeps)")

    print(f"{'kernel':<10} {'shots':>6} {'sweeps':>7} {'seconds':>9} {'flips/s':>12}")
    rate_pure, secs = flips_per_second(
        _sa_fallback.run_shots, args, shots=5, sweeps=100, n=cli.n
    )
    print(f"{'pure':<10} {5:>6} {100:>7} {secs:>9.3f} {rate_pure:>12.3e}")

    if _sa_core is not None:
        rate_fast, secs = flips_per_second(
            _sa_core.run_shots, args, shots=200, sweeps=1000, n=cli.n
        )
        print(f"{'compiled':<10} {200:>6} {1000:>7} {secs:>9.3f} {rate_fast:>12.3e}")
        print(f"speedup: {rate_fast / rate_pure:.0f}x")


if __name__ == "__main__":
    main()
