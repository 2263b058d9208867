"""Deterministic synthetic fixtures: text-like pages and paper textures.

These generators exist so tests and demos never depend on binary assets:
a page or texture is fully determined by its size and seed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .raster import Raster, encode, quantize
from .rng import Substream, derive_key
from .synthesis import value_noise

_PAGE_TAG = 0x50414745  # stream domain for page layout draws
_TEXTURE_TAG = 0x54455854


def synthetic_text_page(
    width: int, height: int, seed: int = 0, channels: int = 3
) -> Raster:
    """A white page with dark dash "text" lines.

    All pixels are achromatic (equal channels) so hue/saturation edits of
    the paper tone leave the ink untouched.  Layout, dash lengths, and ink
    shades all come from one substream keyed by the seed.
    """
    rng = Substream(derive_key(seed, _PAGE_TAG, width, height, channels))
    page = np.full((height, width), 255, dtype=np.uint8)
    margin_x = max(2, width // 12)
    margin_y = max(2, height // 12)
    line_height = max(4, height // 16)
    glyph_height = max(2, line_height * 2 // 3)
    y = margin_y
    while y + glyph_height <= height - margin_y:
        x = margin_x
        # first line is a wider "heading" with a darker shade
        shade = int(rng.integers(20, 70))
        while x < width - margin_x:
            dash = int(rng.integers(3, max(4, width // 10)))
            gap = int(rng.integers(2, 6))
            x_end = min(x + dash, width - margin_x)
            page[y : y + glyph_height, x:x_end] = shade
            x = x_end + gap
        y += line_height + max(1, line_height // 3)
    if channels == 3:
        page = np.repeat(page[:, :, None], 3, axis=2)
    return Raster(page)


def paper_texture(width: int, height: int, seed: int = 0) -> Raster:
    """A soft blotchy sheet in the 205..255 range, RGB."""
    rng = Substream(derive_key(seed, _TEXTURE_TAG, width, height))
    field = value_noise(width, height, base_scale=max(8, width // 4), octaves=3,
                        persistence=0.55, rng=rng)
    sheet = 205.0 + field.array[:, :, 0].astype(np.float64) * (50.0 / 255.0)
    gray = quantize(sheet)
    return Raster(np.repeat(gray[:, :, None], 3, axis=2))


def build_corpus(directory, count: int = 20, seed: int = 0) -> list[Path]:
    """Write ``count`` varied synthetic pages as PNGs; returns their paths.

    Sizes cycle through a small set and channels alternate gray/RGB so the
    corpus exercises both layouts.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sizes = ((160, 120), (200, 150), (256, 192), (320, 240))
    paths = []
    for i in range(count):
        w, h = sizes[i % len(sizes)]
        channels = 1 if i % 2 else 3
        page = synthetic_text_page(w, h, seed=derive_key(seed, i), channels=channels)
        path = directory / f"page_{i:02d}.png"
        path.write_bytes(encode(page))
        paths.append(path)
    return paths


def build_texture_dir(directory, count: int = 3, seed: int = 0, white: bool = False) -> list[Path]:
    """Write paper textures (or plain white sheets) usable as a texture dir."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        if white:
            sheet = Raster.blank(96, 128, 3, 255)
        else:
            sheet = paper_texture(96 + 16 * i, 128, seed=derive_key(seed, i))
        path = directory / f"texture_{i:02d}.png"
        path.write_bytes(encode(sheet))
        paths.append(path)
    return paths
