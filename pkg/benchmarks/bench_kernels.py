"""Compare the compiled and numpy routing kernels.

    python3 benchmarks/bench_kernels.py [--batch 12] [--repeat 200]

Times one ES generation (a batch of parameter vectors) of the routing
fitness on several catalog problems, plus a batch of ``exp(iH)``, for every
available backend.
"""
import argparse
import timeit

import numpy as np

from cvcluster._backend import available_backends
from cvcluster.routing import RoutingConfig

PROBLEMS = ["grid:2x3", "grid:2x4", "complete:6", "grid:2x5"]


def bench(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=12, help="parameter vectors per call (ES lambda)")
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args(argv)

    backends = available_backends()
    rng = np.random.default_rng(0)
    names = sorted(backends)
    print(f"{'case':<22}" + "".join(f"{n:>14}" for n in names) + f"{'speedup':>10}")

    for spec in PROBLEMS:
        problem, _ = RoutingConfig(graph=spec).build()
        thetas = rng.uniform(-np.pi, np.pi, (args.batch, problem.dim))
        ref = problem.fitness_batch(thetas, backend=backends["python"])
        times = {}
        for name in names:
            got = problem.fitness_batch(thetas, backend=backends[name])
            assert np.allclose(got, ref, rtol=1e-10, atol=1e-12), name
            times[name] = bench(lambda k=backends[name]: problem.fitness_batch(thetas, backend=k), args.repeat)
        row = f"{'fitness ' + spec:<22}" + "".join(f"{1e6 * times[n] / args.batch:>11.2f} us" for n in names)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)

    for d in (3, 5):
        theta = rng.standard_normal((args.batch, d * d))
        times = {n: bench(lambda k=backends[n]: k.expi_hermitian(theta, d), args.repeat) for n in names}
        row = f"{f'expi d={d}':<22}" + "".join(f"{1e6 * times[n] / args.batch:>11.2f} us" for n in names)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)
    print("times are per parameter vector")


if __name__ == "__main__":
    main()
