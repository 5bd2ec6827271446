#!/usr/bin/env python3
"""Benchmark the frame-pipeline kernels: numba JIT vs pure numpy.

Runs each kernel on realistic workloads (camera-native frames scaled to the
normal viewing size, luma extraction, palette mapping for 8-bit PNG) and
reports the median wall time of each implementation plus the speedup. The
outputs of the two paths are also compared so a drift would fail loudly.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats N]

To see what the daemon would do on a machine without a working JIT, run the
daemon itself with GVSS_DISABLE_NUMBA=1; this script always times both paths.
"""
from __future__ import annotations

import argparse
import statistics
import sys
import time

import numpy as np

from gvss.pipeline import kernels


def time_callable(fn, *args, repeats: int) -> float:
    """Median seconds per call."""
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def workloads(rng: np.random.Generator):
    vga = rng.integers(0, 256, (480, 640, 3), dtype=np.uint8)
    hd = rng.integers(0, 256, (1080, 1920, 3), dtype=np.uint8)
    normal_flat = rng.integers(0, 256, (320 * 240, 3), dtype=np.uint8)
    palette = rng.integers(0, 256, (256, 3), dtype=np.uint8)
    return [
        ("scale 640x480 -> 320x240", kernels.scale_nearest_numpy, "scale_nearest_numba",
         (vga, 240, 320)),
        ("scale 1920x1080 -> 320x240", kernels.scale_nearest_numpy, "scale_nearest_numba",
         (hd, 240, 320)),
        ("luma 640x480", kernels.luma_numpy, "luma_numba", (vga,)),
        ("luma 1920x1080", kernels.luma_numpy, "luma_numba", (hd,)),
        ("palette map 320x240 / 256 colors", kernels.palette_map_numpy, "palette_map_numba",
         (normal_flat, palette)),
    ]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=7,
                        help="timed runs per kernel (median is reported)")
    args = parser.parse_args()

    if not kernels.NUMBA_ENABLED:
        print("numba is unavailable (or GVSS_DISABLE_NUMBA is set); "
              "nothing to compare against.", file=sys.stderr)
        return 1

    rng = np.random.default_rng(20090101)
    rows = []
    for name, numpy_fn, numba_name, call_args in workloads(rng):
        numba_fn = getattr(kernels, numba_name)
        expected = numpy_fn(*call_args)
        got = numba_fn(*call_args)  # first call also pays any JIT compile cost
        if not np.array_equal(expected, got):
            print(f"MISMATCH in {name}: the two implementations disagree", file=sys.stderr)
            return 1
        numpy_s = time_callable(numpy_fn, *call_args, repeats=args.repeats)
        numba_s = time_callable(numba_fn, *call_args, repeats=args.repeats)
        rows.append((name, numpy_s, numba_s))

    width = max(len(name) for name, *_ in rows)
    print(f"{'workload':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for name, numpy_s, numba_s in rows:
        speedup = numpy_s / numba_s if numba_s else float("inf")
        print(f"{name:<{width}}  {numpy_s * 1e3:>8.2f}ms  {numba_s * 1e3:>8.2f}ms  {speedup:>7.1f}x")
    print("\nboth implementations produced identical outputs on every workload")
    return 0


if __name__ == "__main__":
    sys.exit(main())
