"""Compare the compiled training kernel against the pure-Python fallback.

Both kernels execute the same floating-point operation sequence, so their
outputs are bit-identical; this benchmark quantifies the speed difference
on the default workload (20x20 map, 1400 steps, 4 stimuli).

Usage: python3 benchmarks/bench_backends.py [repeats]
"""

import sys
import time

import numpy as np

from somsim import backend
from somsim.core import TrainingConfig, init_map, train
from somsim.stimuli import DOMAIN, gen_primary_inputs


def bench(kernel, repeats):
    times = []
    final = None
    for rep in range(repeats):
        sset = gen_primary_inputs(rep)
        fmap = init_map(20, 20, 2, [DOMAIN, DOMAIN], rng_seed=rep + 1)
        cfg = TrainingConfig(rng_seed=rep + 2)
        t0 = time.perf_counter()
        out, _ = train(fmap, sset, cfg, kernel=kernel)
        times.append(time.perf_counter() - t0)
        final = out.weights
    return min(times), sum(times) / len(times), final


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 10
    kernels = {"python": backend.get_kernel("python")}
    try:
        kernels["compiled"] = backend.get_kernel("compiled")
    except Exception as exc:
        print(f"compiled kernel unavailable ({exc}); benchmarking fallback only")

    results = {}
    for name, kernel in kernels.items():
        best, mean, final = bench(kernel, repeats)
        results[name] = (best, mean, final)
        print(f"{name:>9}: best {best * 1e3:8.2f} ms   mean {mean * 1e3:8.2f} ms")

    if len(results) == 2:
        py, cy = results["python"], results["compiled"]
        identical = np.array_equal(py[2], cy[2])
        print(f"speedup (best): {py[0] / cy[0]:.1f}x")
        print(f"final weights bit-identical: {identical}")
        if not identical:
            raise SystemExit("backend outputs diverged")


if __name__ == "__main__":
    main()
