"""Embedded 5x7 bitmap font for the timestamp overlay.

Covers exactly the characters a ``YYYY-MM-DD HH:MM:SS`` string needs.
"""
from __future__ import annotations

import numpy as np

GLYPH_W = 5
GLYPH_H = 7
GLYPH_SPACING = 1

_GLYPHS = {
    "0": (
        "01110",
        "10001",
        "10011",
        "10101",
        "11001",
        "10001",
        "01110",
    ),
    "1": (
        "00100",
        "01100",
        "00100",
        "00100",
        "00100",
        "00100",
        "01110",
    ),
    "2": (
        "01110",
        "10001",
        "00001",
        "00010",
        "00100",
        "01000",
        "11111",
    ),
    "3": (
        "11111",
        "00010",
        "00100",
        "00010",
        "00001",
        "10001",
        "01110",
    ),
    "4": (
        "00010",
        "00110",
        "01010",
        "10010",
        "11111",
        "00010",
        "00010",
    ),
    "5": (
        "11111",
        "10000",
        "11110",
        "00001",
        "00001",
        "10001",
        "01110",
    ),
    "6": (
        "00110",
        "01000",
        "10000",
        "11110",
        "10001",
        "10001",
        "01110",
    ),
    "7": (
        "11111",
        "00001",
        "00010",
        "00100",
        "01000",
        "01000",
        "01000",
    ),
    "8": (
        "01110",
        "10001",
        "10001",
        "01110",
        "10001",
        "10001",
        "01110",
    ),
    "9": (
        "01110",
        "10001",
        "10001",
        "01111",
        "00001",
        "00010",
        "01100",
    ),
    "-": (
        "00000",
        "00000",
        "00000",
        "11111",
        "00000",
        "00000",
        "00000",
    ),
    ":": (
        "00000",
        "00100",
        "00000",
        "00000",
        "00000",
        "00100",
        "00000",
    ),
    " ": (
        "00000",
        "00000",
        "00000",
        "00000",
        "00000",
        "00000",
        "00000",
    ),
}

_BLANK = _GLYPHS[" "]


def text_width(text: str, scale: int) -> int:
    """Pixel width of `text` rendered at `scale` (no trailing spacing column)."""
    if not text:
        return 0
    n = len(text)
    return (n * GLYPH_W + (n - 1) * GLYPH_SPACING) * scale


def text_mask(text: str, scale: int) -> np.ndarray:
    """Boolean glyph mask of shape (GLYPH_H*scale, text_width(text, scale)).

    Characters outside the font render blank. Deterministic for fixed inputs.
    """
    if scale < 1:
        raise ValueError("font scale must be >= 1")
    cols = []
    for i, ch in enumerate(text):
        rows = _GLYPHS.get(ch, _BLANK)
        glyph = np.array([[c == "1" for c in row] for row in rows], dtype=bool)
        cols.append(glyph)
        if i != len(text) - 1:
            cols.append(np.zeros((GLYPH_H, GLYPH_SPACING), dtype=bool))
    if not cols:
        return np.zeros((GLYPH_H * scale, 0), dtype=bool)
    mask = np.concatenate(cols, axis=1)
    if scale > 1:
        mask = np.kron(mask, np.ones((scale, scale), dtype=bool))
    return mask
