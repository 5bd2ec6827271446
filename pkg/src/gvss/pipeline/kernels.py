"""Per-pixel kernels used by the frame pipeline.

Each kernel has two implementations with byte-identical results: a pure-numpy
one and a numba ``@njit`` one. The numba path is used when numba imports
cleanly; set ``GVSS_DISABLE_NUMBA=1`` to force the numpy path (useful on
platforms without a working JIT, and for benchmarking — see
``benchmarks/bench_kernels.py``).

All arithmetic is integer so the two paths cannot drift.
"""
from __future__ import annotations

import os

import numpy as np

_PALETTE_CHUNK = 1 << 16


def _numba_disabled_by_env() -> bool:
    return os.environ.get("GVSS_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")


NUMBA_ENABLED = False
if not _numba_disabled_by_env():
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False


def scale_nearest_numpy(pixels: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Nearest-neighbor resample of an (h, w, 3) uint8 array.

    Source coordinate for output (y, x) is (y*h//out_h, x*w//out_w), which
    makes the identity size a byte-exact copy.
    """
    h, w, _ = pixels.shape
    ys = (np.arange(out_h, dtype=np.int64) * h) // out_h
    xs = (np.arange(out_w, dtype=np.int64) * w) // out_w
    return np.ascontiguousarray(pixels[ys][:, xs])


def luma_numpy(pixels: np.ndarray) -> np.ndarray:
    """Rec.601 luma, rounded half-up: (299R + 587G + 114B + 500) // 1000."""
    p = pixels.astype(np.uint32)
    y = (299 * p[..., 0] + 587 * p[..., 1] + 114 * p[..., 2] + 500) // 1000
    return y.astype(np.uint8)


def palette_map_numpy(flat: np.ndarray, palette: np.ndarray) -> np.ndarray:
    """Index of the nearest palette color (squared RGB distance) per pixel.

    Ties resolve to the lowest palette index. `flat` is (n, 3) uint8,
    `palette` is (k, 3) uint8 with k <= 256.
    """
    pal = palette.astype(np.int32)
    out = np.empty(flat.shape[0], dtype=np.uint8)
    for start in range(0, flat.shape[0], _PALETTE_CHUNK):
        chunk = flat[start : start + _PALETTE_CHUNK].astype(np.int32)
        diff = chunk[:, None, :] - pal[None, :, :]
        dist = (diff * diff).sum(axis=2)
        out[start : start + _PALETTE_CHUNK] = dist.argmin(axis=1).astype(np.uint8)
    return out


if NUMBA_ENABLED:

    @njit(cache=True)
    def scale_nearest_numba(pixels, out_h, out_w):  # pragma: no cover - jit
        h, w, _ = pixels.shape
        out = np.empty((out_h, out_w, 3), np.uint8)
        for y in range(out_h):
            sy = (y * h) // out_h
            for x in range(out_w):
                sx = (x * w) // out_w
                out[y, x, 0] = pixels[sy, sx, 0]
                out[y, x, 1] = pixels[sy, sx, 1]
                out[y, x, 2] = pixels[sy, sx, 2]
        return out

    @njit(cache=True)
    def luma_numba(pixels):  # pragma: no cover - jit
        h, w, _ = pixels.shape
        out = np.empty((h, w), np.uint8)
        for y in range(h):
            for x in range(w):
                r = np.int32(pixels[y, x, 0])
                g = np.int32(pixels[y, x, 1])
                b = np.int32(pixels[y, x, 2])
                out[y, x] = np.uint8((299 * r + 587 * g + 114 * b + 500) // 1000)
        return out

    @njit(cache=True)
    def palette_map_numba(flat, palette):  # pragma: no cover - jit
        n = flat.shape[0]
        k = palette.shape[0]
        out = np.empty(n, np.uint8)
        for i in range(n):
            r = np.int32(flat[i, 0])
            g = np.int32(flat[i, 1])
            b = np.int32(flat[i, 2])
            best = np.int64(1 << 40)
            best_j = 0
            for j in range(k):
                dr = r - np.int32(palette[j, 0])
                dg = g - np.int32(palette[j, 1])
                db = b - np.int32(palette[j, 2])
                d = np.int64(dr * dr + dg * dg + db * db)
                if d < best:
                    best = d
                    best_j = j
            out[i] = np.uint8(best_j)
        return out

    scale_nearest = scale_nearest_numba
    luma = luma_numba
    palette_map = palette_map_numba
else:
    scale_nearest = scale_nearest_numpy
    luma = luma_numpy
    palette_map = palette_map_numpy
