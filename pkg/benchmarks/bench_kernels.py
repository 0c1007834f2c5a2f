"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from dmscope import _pykernels

try:
    from dmscope import _ckernels
except ImportError:
    _ckernels = None


def cases():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 50, size=5000).astype(float)
    b = a + rng.normal(scale=10, size=5000)
    cp = rng.integers(0, 500, size=70)
    cq = rng.integers(0, 500, size=70)
    scores = rng.uniform(5, 50, size=200_000)
    n = 128
    supply = rng.random(n)
    demand = rng.random(n)
    demand *= supply.sum() / demand.sum()
    cost = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).astype(float)
    return {
        "uniform_field 1e6": lambda k: k.uniform_field(7, 0, 1_000_000),
        "kendall_counts K=5000": lambda k: k.kendall_counts(a, b),
        "cdf_l1_counts 70 bins": lambda k: k.cdf_l1_counts(cp, cq),
        "bin_counts 2e5 scores": lambda k: k.bin_counts(scores, 10.0, 0.5, 70),
        "transport_simplex 128x128": lambda k: k.transport_simplex(supply, demand, cost),
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("cython", _ckernels))
    else:
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':<28}" + "".join(f"{name:>12}" for name, _ in backends) + f"{'speedup':>10}")
    for label, fn in cases().items():
        times = [min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
                 for _, k in backends]
        row = f"{label:<28}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
