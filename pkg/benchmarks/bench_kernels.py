"""Compiled vs pure-Python kernel timings.

    python benchmarks/bench_kernels.py [--side 16] [--repeat 3]
"""

import argparse
import statistics
import time

import numpy as np

from hconvex import _kernels
from hconvex.cubical import betti_of
from hconvex.voxel import Frame, GridSpec, ball, rasterize


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def workloads(side, seed):
    rng = np.random.default_rng(seed)
    noise = rng.random((side,) * 4) < 0.55
    g = GridSpec.cube(-1.5, 1.5, side, 4)
    shell = rasterize(ball([0] * 4, 1.0, "eq", 0.2, "inner"), Frame.quaternion_line(), g)
    solid = np.pad(rng.random((side - 2,) * 4) < 0.7, 1)
    return {
        "label (full)": lambda: _kernels.label(noise, True),
        "outside_reach": lambda: _kernels.outside_reach(solid),
        "betti (S3 shell)": lambda: betti_of(shell),
        "betti (random)": lambda: betti_of(noise[: side // 2, : side // 2]),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--side", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)
    backends = _kernels.available_backends()
    jobs = workloads(a.side, a.seed)
    print(f"side={a.side} cells={a.side ** 4} backends={backends}")
    print(f"{'kernel':<20}" + "".join(f"{b:>14}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in jobs.items():
        best = {}
        for b in backends:
            with _kernels.using(b):
                best[b], _ = best_of(fn, a.repeat)
        row = f"{name:<20}" + "".join(f"{best[b] * 1000:>11.1f} ms" for b in backends)
        if "compiled" in best and "pure" in best:
            row += f"   {best['pure'] / best['compiled']:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
