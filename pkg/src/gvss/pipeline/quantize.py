"""Median-cut color quantization for the indexed-PNG encoding."""
from __future__ import annotations

import numpy as np

MAX_PALETTE = 256


def color_census(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distinct colors of an (h, w, 3) uint8 image plus per-color counts.

    Colors come back in ascending packed-RGB order (lexicographic by R, G, B),
    which keeps the exact-palette path deterministic.
    """
    flat = pixels.reshape(-1, 3).astype(np.uint32)
    keys = (flat[:, 0] << 16) | (flat[:, 1] << 8) | flat[:, 2]
    uniq, counts = np.unique(keys, return_counts=True)
    colors = np.empty((uniq.shape[0], 3), dtype=np.uint8)
    colors[:, 0] = (uniq >> 16) & 0xFF
    colors[:, 1] = (uniq >> 8) & 0xFF
    colors[:, 2] = uniq & 0xFF
    return colors, counts


def median_cut_palette(colors: np.ndarray, counts: np.ndarray, max_colors: int = MAX_PALETTE) -> np.ndarray:
    """Reduce (k, 3) distinct colors to <= max_colors representatives.

    Classic median cut: repeatedly split the box with the widest channel
    range at its count-weighted median, then emit each box's count-weighted
    mean color (rounded half-up). Deterministic for fixed inputs.
    """
    if colors.shape[0] <= max_colors:
        return colors.astype(np.uint8)

    c = colors.astype(np.int64)
    boxes: list[np.ndarray] = [np.arange(colors.shape[0])]
    while len(boxes) < max_colors:
        widest = -1
        widest_range = 0
        for i, box in enumerate(boxes):
            if box.shape[0] < 2:
                continue
            spread = int((c[box].max(axis=0) - c[box].min(axis=0)).max())
            if spread > widest_range:
                widest_range = spread
                widest = i
        if widest < 0:
            break
        box = boxes.pop(widest)
        sub = c[box]
        chan = int((sub.max(axis=0) - sub.min(axis=0)).argmax())
        order = np.argsort(sub[:, chan], kind="stable")
        box = box[order]
        cum = np.cumsum(counts[box])
        half = cum[-1] / 2.0
        split = int(np.searchsorted(cum, half)) + 1
        split = min(max(split, 1), box.shape[0] - 1)
        boxes.append(box[:split])
        boxes.append(box[split:])

    palette = np.empty((len(boxes), 3), dtype=np.uint8)
    for i, box in enumerate(boxes):
        w = counts[box].astype(np.int64)
        total = int(w.sum())
        sums = (c[box] * w[:, None]).sum(axis=0)
        # integer half-up rounding of sums/total
        palette[i] = ((2 * sums + total) // (2 * total)).astype(np.uint8)
    return palette
