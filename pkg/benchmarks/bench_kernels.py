"""Compare the compiled and NumPy circuit kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times a full evolution of a batch of states from the initial surface to the
horizon with each available backend and checks that they agree.
"""
import argparse
import time

import numpy as np

from grwflash import kernels
from grwflash.evolution import Circuit, GateParams
from grwflash.lattice import Cut, Strip


def run(backend: str, circuit: Circuit, states: np.ndarray, repeat: int) -> tuple[float, np.ndarray]:
    kernels.use_backend(backend)
    src = Cut.flat(circuit.strip.L, 0)
    dst = Cut.flat(circuit.strip.L, circuit.strip.T_max)
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = circuit.evolve_array(states, src, dst)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, default=9)
    ap.add_argument("--T", type=int, default=12)
    ap.add_argument("--N", type=int, default=2)
    ap.add_argument("--batch", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    circuit = Circuit(Strip(args.L, args.T), GateParams(theta=0.4, gamma=0.7), args.N)
    dim = (2 * args.L) ** args.N
    rng = np.random.default_rng(0)
    states = rng.normal(size=(dim, args.batch)) + 1j * rng.normal(size=(dim, args.batch))

    results = {}
    for backend in kernels.available_backends():
        results[backend] = run(backend, circuit, states, args.repeat)
        print(f"{backend:>7}: {results[backend][0] * 1e3:9.2f} ms  (dim={dim}, batch={args.batch})")
    if len(results) == 2:
        diff = np.max(np.abs(results["cython"][1] - results["numpy"][1]))
        print(f"speed-up: {results['numpy'][0] / results['cython'][0]:.2f}x  max |difference|: {diff:.2e}")
    else:
        print("compiled backend not built; only the NumPy kernels were timed")


if __name__ == "__main__":
    main()
