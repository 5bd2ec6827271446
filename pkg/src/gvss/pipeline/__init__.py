"""Pure frame transformations: scaling, timestamp overlay, encoding.

Everything here is stateless and deterministic — identical inputs produce
byte-identical outputs — so request handlers can call into it concurrently
and golden tests stay stable.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from datetime import datetime
from enum import Enum, IntEnum

import numpy as np
from PIL import Image

from gvss.camera import Frame
from gvss.pipeline import font
from gvss.pipeline.kernels import luma, palette_map, scale_nearest
from gvss.pipeline.quantize import MAX_PALETTE, color_census, median_cut_palette

MIN_DIMENSION = 8
MAX_DIMENSION = 4096

JPEG_QUALITY = 75

PNG_MAGIC = b"\x89PNG"
JPEG_MAGIC = b"\xff\xd8"


class Encoding(str, Enum):
    JPEG = "jpeg"
    PNG24 = "png24"
    PNG8 = "png8"
    PNG_GRAY = "pnggray"


class FontSize(IntEnum):
    SMALL = 1
    MEDIUM = 2
    LARGE = 3


# (bytes per pixel, assumed compression ratio) per encoding, for the
# client-side buffer pre-sizing estimate. An estimate, not a bound.
_SIZE_ESTIMATE_TABLE = {
    Encoding.JPEG: (3, 12),
    Encoding.PNG24: (3, 2),
    Encoding.PNG8: (1, 2),
    Encoding.PNG_GRAY: (1, 2),
}

MEDIA_TYPES = {
    Encoding.JPEG: "image/jpeg",
    Encoding.PNG24: "image/png",
    Encoding.PNG8: "image/png",
    Encoding.PNG_GRAY: "image/png",
}


@dataclass(frozen=True)
class RenderSettings:
    """A client's delivery preferences for one rendered frame."""

    target_width: int
    target_height: int
    constrain: bool = True
    encoding: Encoding = Encoding.JPEG
    show_time: bool = True
    font_size: FontSize = FontSize.MEDIUM

    def __post_init__(self):
        for name, value in (("target_width", self.target_width), ("target_height", self.target_height)):
            if not (MIN_DIMENSION <= value <= MAX_DIMENSION):
                raise ValueError(
                    f"{name} must be within {MIN_DIMENSION}..{MAX_DIMENSION}, got {value}"
                )


@dataclass(frozen=True)
class EncodedImage:
    data: bytes
    encoding: Encoding
    media_type: str
    width: int  # 0 when unknown, e.g. bytes read back from storage
    height: int


def scaled_size(src_w: int, src_h: int, settings: RenderSettings) -> tuple[int, int]:
    """Output dimensions for `scale` without touching pixels.

    Constrained mode picks the smaller of the two target/source ratios so the
    aspect ratio survives; that same rule upscales when the target exceeds
    the source.
    """
    if not settings.constrain:
        return settings.target_width, settings.target_height
    tw, th = settings.target_width, settings.target_height
    # floor(src * min(tw/src_w, th/src_h)), kept in integers so no float
    # rounding can shave a pixel off.
    if tw * src_h <= th * src_w:
        out_w, out_h = tw, (src_h * tw) // src_w
    else:
        out_w, out_h = (src_w * th) // src_h, th
    return max(1, out_w), max(1, out_h)


def scale(frame: Frame, settings: RenderSettings) -> Frame:
    """Nearest-neighbor resample to the settings' size (identity is a no-op)."""
    out_w, out_h = scaled_size(frame.width, frame.height, settings)
    if (out_w, out_h) == (frame.width, frame.height):
        return frame
    pixels = scale_nearest(frame.pixels, out_h, out_w)
    return Frame(out_w, out_h, pixels, frame.captured_at, frame.sequence)


def overlay_timestamp(frame: Frame, when: datetime, font_size: FontSize) -> Frame:
    """Stamp `YYYY-MM-DD HH:MM:SS` onto the frame.

    White 5x7 glyphs (scaled by font_size) on an opaque black band flush with
    the bottom-left corner, 2px of padding around the text. The band clips to
    the frame; an over-wide string is cut off, never dropped.
    """
    text = when.strftime("%Y-%m-%d %H:%M:%S")
    fs = int(font_size)
    mask = font.text_mask(text, fs)
    band_h = font.GLYPH_H * fs + 4
    band_w = min(frame.width, mask.shape[1] + 4)
    y0 = max(0, frame.height - band_h)

    pixels = frame.pixels.copy()
    pixels[y0:, :band_w] = 0

    gy = y0 + 2
    gx = 2
    sub = mask[: max(0, frame.height - gy), : max(0, frame.width - gx)]
    if sub.size:
        region = pixels[gy : gy + sub.shape[0], gx : gx + sub.shape[1]]
        region[sub] = 255
    return Frame(frame.width, frame.height, pixels, frame.captured_at, frame.sequence)


def _encode_png8(pixels: np.ndarray) -> bytes:
    colors, counts = color_census(pixels)
    flat = pixels.reshape(-1, 3)
    if colors.shape[0] <= MAX_PALETTE:
        # Exact path: the palette is the color census itself, so the decoded
        # image reproduces the source pixel for pixel.
        keys = (
            (flat[:, 0].astype(np.uint32) << 16)
            | (flat[:, 1].astype(np.uint32) << 8)
            | flat[:, 2].astype(np.uint32)
        )
        palette_keys = (
            (colors[:, 0].astype(np.uint32) << 16)
            | (colors[:, 1].astype(np.uint32) << 8)
            | colors[:, 2].astype(np.uint32)
        )
        indices = np.searchsorted(palette_keys, keys).astype(np.uint8)
        palette = colors
    else:
        palette = median_cut_palette(colors, counts, MAX_PALETTE)
        indices = palette_map(np.ascontiguousarray(flat), np.ascontiguousarray(palette))
    img = Image.fromarray(indices.reshape(pixels.shape[:2]), mode="P")
    img.putpalette(palette.flatten().tolist())
    buf = io.BytesIO()
    img.save(buf, "PNG")
    return buf.getvalue()


def encode(frame: Frame, encoding: Encoding) -> EncodedImage:
    """Serialize the frame per the requested format.

    JPEG is baseline at quality 75; PNG24 is lossless truecolor; PNG8 is
    indexed with a median-cut palette when the source has more than 256
    distinct colors (and is lossless otherwise); PNG-grayscale stores the
    Rec.601 luma of each pixel.
    """
    px = frame.pixels
    buf = io.BytesIO()
    if encoding is Encoding.JPEG:
        Image.fromarray(px, mode="RGB").save(buf, "JPEG", quality=JPEG_QUALITY)
        data = buf.getvalue()
    elif encoding is Encoding.PNG24:
        Image.fromarray(px, mode="RGB").save(buf, "PNG")
        data = buf.getvalue()
    elif encoding is Encoding.PNG8:
        data = _encode_png8(px)
    elif encoding is Encoding.PNG_GRAY:
        Image.fromarray(luma(px), mode="L").save(buf, "PNG")
        data = buf.getvalue()
    else:
        raise ValueError(f"unsupported encoding: {encoding!r}")
    return EncodedImage(data, encoding, MEDIA_TYPES[encoding], frame.width, frame.height)


def approximate_image_size(settings: RenderSettings) -> int:
    """Rough encoded-size estimate for pre-sizing receive buffers.

    ceil(w * h * bytes_per_pixel / compression_ratio) from a fixed per-format
    table; monotone in pixel count, not an upper bound.
    """
    bpp, ratio = _SIZE_ESTIMATE_TABLE[settings.encoding]
    raw = settings.target_width * settings.target_height * bpp
    return (raw + ratio - 1) // ratio


def render(frame: Frame, settings: RenderSettings, when: datetime) -> EncodedImage:
    """Scale, then overlay the clock (if asked), then encode — in that order,
    so the font size is measured in output pixels."""
    out = scale(frame, settings)
    if settings.show_time:
        out = overlay_timestamp(out, when, settings.font_size)
    return encode(out, settings.encoding)
