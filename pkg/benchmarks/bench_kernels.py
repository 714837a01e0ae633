#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Both backends consume identical pre-drawn random arrays (results are
bit-identical); this script only compares wall-clock time for the two hot
paths: landscape region growth and per-cell degradation sampling.

Run: python benchmarks/bench_kernels.py [--sizes 200,500,1000] [--repeat 5]
"""
import argparse
import time

import numpy as np

from lcval import kernels
from lcval.synth import DegradationSpec, degrade, generate_landscape

MIX = {1: 0.55, 2: 0.30, 3: 0.08, 4: 0.07}


def median_time(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def bench_backend(name, grow, degrade_cells, sizes, repeat):
    # route synth through the chosen implementation
    kernels.grow_step = grow
    kernels.degrade_cells = degrade_cells
    rows = []
    for side in sizes:
        t_grow = median_time(
            lambda: generate_landscape(7, side, side, 20.0, MIX, blob_scale=8), repeat
        )
        truth = generate_landscape(7, side, side, 20.0, MIX, blob_scale=8)
        spec = DegradationSpec.diagonal(tuple(MIX), 0.9, unclassified_rate=0.02)
        t_degrade = median_time(lambda: degrade(truth, spec, seed=11), repeat)
        rows.append((side, t_grow, t_degrade))
        print(
            f"  {name:>6}  {side:>5}x{side:<5}  grow {t_grow * 1e3:9.2f} ms   "
            f"degrade {t_degrade * 1e3:9.2f} ms"
        )
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="200,500,1000")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    impls = kernels.implementations()
    if "numba" not in impls:
        print("numba not available; nothing to compare")
        return

    # warm up JIT compilation outside the timed region
    kernels.grow_step, kernels.degrade_cells = impls["numba"]
    generate_landscape(0, 64, 64, 20.0, MIX)
    degrade(
        generate_landscape(0, 64, 64, 20.0, MIX),
        DegradationSpec.diagonal(tuple(MIX), 0.9),
        seed=0,
    )

    original = (kernels.grow_step, kernels.degrade_cells)
    try:
        print(f"median of {args.repeat} runs per cell count")
        results = {}
        for name in ("numpy", "numba"):
            results[name] = bench_backend(name, *impls[name], sizes, args.repeat)
        print()
        print(f"{'grid':>12}  {'grow speedup':>14}  {'degrade speedup':>16}")
        for (side, g_np, d_np), (_, g_nb, d_nb) in zip(results["numpy"], results["numba"]):
            print(
                f"{side:>7}x{side:<5} {g_np / g_nb:>13.1f}x {d_np / d_nb:>15.1f}x"
            )
    finally:
        kernels.grow_step, kernels.degrade_cells = original


if __name__ == "__main__":
    main()
