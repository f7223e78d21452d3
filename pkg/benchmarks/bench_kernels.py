"""Time the compiled and numpy kernels on swarm-sized inputs.

Usage: python3 benchmarks/bench_kernels.py [--pairs 208] [--queries 200] [--repeat 5]
"""

import argparse
import math
import timeit

import numpy as np

from lipinval import kernels


def workloads(pairs: int, queries: int, n: int, m: int, seed: int):
    rng = np.random.default_rng(seed)
    S = rng.normal(size=(pairs, n))
    Y = rng.normal(size=(pairs, m))
    Q = rng.normal(size=(queries, n))
    lip = np.full(m, 1.2)
    eps_t = np.full(m, 0.01)
    eps_v = np.full(m, 0.001)
    return {
        "envelope": lambda mod, p: mod.envelope(S, Y, lip, eps_t, Q, p),
        "pairwise_slope_max": lambda mod, p: mod.pairwise_slope_max(S, Y, eps_v, 0.001, p),
        "distances": lambda mod, p: [mod.distances(S, q, p) for q in Q],
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=208)
    parser.add_argument("--queries", type=int, default=200)
    parser.add_argument("--dim", type=int, default=9)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    found = kernels.backends()
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(found)}")
    jobs = workloads(args.pairs, args.queries, args.dim, args.dim, args.seed)
    print(f"{'kernel':<20} {'p':>4} " + " ".join(f"{name + ' ms':>12}" for name in found) + "  speedup")
    for name, job in jobs.items():
        for p in (1.0, math.inf):
            best = {}
            for backend, mod in found.items():
                job(mod, p)  # warm up
                runs = timeit.repeat(lambda: job(mod, p), number=1, repeat=args.repeat)
                best[backend] = 1000 * min(runs)
            cols = " ".join(f"{best[b]:>12.3f}" for b in found)
            ratio = best["numpy"] / best["cython"] if "cython" in best else float("nan")
            print(f"{name:<20} {p:>4g} {cols}  {ratio:6.1f}x")


if __name__ == "__main__":
    main()
