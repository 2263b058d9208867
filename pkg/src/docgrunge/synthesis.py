"""Compositing and procedural mask/texture generation.

The :func:`blend` compositor places a foreground onto a background under a
pixel blend mode and leaves everything outside the placed region untouched.
Masks follow one convention throughout the library: 0 marks noisy/ink pixels,
255 marks clean/background.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .errors import PlacementError, RasterError
from .raster import Raster, gaussian_kernel, luma, quantize, threshold_otsu, to_rgb
from .rng import Substream

BLEND_MODES = frozenset(
    {"normal", "multiply", "darken", "lighten", "screen", "overlay", "min", "max"}
)

ANCHORS = frozenset(
    {"center", "top_edge", "bottom_edge", "left_edge", "right_edge", "absolute", "random"}
)


@dataclass(frozen=True)
class Placement:
    """Where a foreground lands on the background.

    ``edge_offset`` pushes edge anchors inward; ``tile_count`` repeats the
    foreground evenly along the chosen edge (punch holes, staples).  The
    ``absolute`` anchor pins the top-left corner at (x, y) and clips.
    """

    anchor: str = "center"
    x: int = 0
    y: int = 0
    edge_offset: int = 0
    tile_count: int = 1

    def __post_init__(self):
        if self.anchor not in ANCHORS:
            raise PlacementError(f"unknown anchor '{self.anchor}'")
        if self.tile_count < 1:
            raise PlacementError(f"tile_count must be >= 1, got {self.tile_count}")


def _blend_values(mode: str, fg: np.ndarray, bg: np.ndarray, alpha: float) -> np.ndarray:
    if mode == "normal":
        return alpha * fg + (1.0 - alpha) * bg
    if mode == "multiply":
        return fg * bg / 255.0
    if mode in ("darken", "min"):
        return np.minimum(fg, bg)
    if mode in ("lighten", "max"):
        return np.maximum(fg, bg)
    if mode == "screen":
        return 255.0 - (255.0 - fg) * (255.0 - bg) / 255.0
    if mode == "overlay":
        low = 2.0 * fg * bg / 255.0
        high = 255.0 - 2.0 * (255.0 - fg) * (255.0 - bg) / 255.0
        return np.where(bg < 128.0, low, high)
    raise RasterError(f"unknown blend mode '{mode}'")


def _tile_origins(
    p: Placement, fg_w: int, fg_h: int, bg_w: int, bg_h: int, rng: Substream | None
) -> list[tuple[int, int]]:
    max_x = bg_w - fg_w
    max_y = bg_h - fg_h
    n = p.tile_count

    def along(extent: int, size: int, i: int) -> int:
        center = (i + 0.5) * extent / n
        return int(np.clip(round(center - size / 2.0), 0, extent - size))

    if p.anchor == "center":
        return [(max_x // 2, max_y // 2)]
    if p.anchor == "absolute":
        return [(p.x, p.y)]
    if p.anchor == "random":
        if rng is None:
            raise PlacementError("random placement needs an rng")
        return [(int(rng.integers(0, max_x + 1)), int(rng.integers(0, max_y + 1)))]
    if p.anchor == "top_edge":
        return [(along(bg_w, fg_w, i), p.edge_offset) for i in range(n)]
    if p.anchor == "bottom_edge":
        return [(along(bg_w, fg_w, i), max_y - p.edge_offset) for i in range(n)]
    if p.anchor == "left_edge":
        return [(p.edge_offset, along(bg_h, fg_h, i)) for i in range(n)]
    return [(max_x - p.edge_offset, along(bg_h, fg_h, i)) for i in range(n)]


def blend(
    fg: Raster,
    bg: Raster,
    mode: str = "normal",
    alpha: float = 1.0,
    placement: Placement | None = None,
    rng: Substream | None = None,
) -> Raster:
    """Composite ``fg`` onto ``bg``; returns a raster with ``bg``'s geometry.

    Channel counts are reconciled by promoting gray to RGB when the two
    differ.  Pixels outside the placed region are copied from ``bg``
    bit-exactly.  ``alpha`` only affects the ``normal`` mode.
    """
    if mode not in BLEND_MODES:
        raise RasterError(f"unknown blend mode '{mode}'")
    if not 0.0 <= alpha <= 1.0:
        raise RasterError(f"alpha must be in [0, 1], got {alpha}")
    if fg.width > bg.width or fg.height > bg.height:
        raise PlacementError(
            f"foreground {fg.width}x{fg.height} exceeds background {bg.width}x{bg.height}"
        )
    if fg.channels != bg.channels:
        fg, bg = to_rgb(fg), to_rgb(bg)
    placement = placement or Placement()

    out = bg.to_array()
    fg_f = fg.array.astype(np.float64)
    for ox, oy in _tile_origins(placement, fg.width, fg.height, bg.width, bg.height, rng):
        # clip the placed rectangle to the background
        x0, y0 = max(ox, 0), max(oy, 0)
        x1, y1 = min(ox + fg.width, bg.width), min(oy + fg.height, bg.height)
        if x0 >= x1 or y0 >= y1:
            continue
        sub_fg = fg_f[y0 - oy : y1 - oy, x0 - ox : x1 - ox]
        sub_bg = out[y0:y1, x0:x1].astype(np.float64)
        out[y0:y1, x0:x1] = quantize(_blend_values(mode, sub_fg, sub_bg, alpha))
    return Raster(out)


# -- foreground lifting -------------------------------------------------------


def extract_foreground(r: Raster) -> tuple[Raster, Raster]:
    """Lift ink from a document: Otsu on luma, then a 3x3 majority vote.

    Returns ``(mask, ink)`` where the mask is 255 on foreground pixels and
    the ink raster keeps those pixels, with everything else white.
    """
    t, _ = threshold_otsu(r)
    fg = (luma(r) < t).astype(np.int64)
    votes = ndimage.correlate(fg, np.ones((3, 3), dtype=np.int64), mode="nearest")
    fg = votes >= 5
    mask = Raster((fg * 255).astype(np.uint8))
    ink = np.where(fg[:, :, np.newaxis], r.array, np.uint8(255))
    return mask, Raster(ink)


# -- procedural generation ----------------------------------------------------


def make_blob_mask(
    width: int,
    height: int,
    clusters: int,
    points_per_cluster: int,
    spread_sigma: float,
    rng: Substream,
    blur_sigma: float = 2.0,
    threshold: int = 128,
) -> Raster:
    """Clustered blob noise mask: 0 where blobs land, 255 where clean.

    Cluster centers are uniform over the canvas; each cluster scatters
    Gaussian points which are splatted, blurred, peak-normalized and
    thresholded.  Zero points yields an all-clean mask.
    """
    if clusters < 1:
        raise RasterError(f"clusters must be >= 1, got {clusters}")
    if points_per_cluster < 0 or spread_sigma < 0:
        raise RasterError("points_per_cluster and spread_sigma must be non-negative")
    field = np.zeros((height, width), dtype=np.float64)
    centers_x = rng.uniform(clusters) * width
    centers_y = rng.uniform(clusters) * height
    if points_per_cluster > 0:
        off_x = rng.normalish((clusters, points_per_cluster)) * spread_sigma
        off_y = rng.normalish((clusters, points_per_cluster)) * spread_sigma
        px = np.floor(centers_x[:, np.newaxis] + off_x + 0.5).astype(np.int64).ravel()
        py = np.floor(centers_y[:, np.newaxis] + off_y + 0.5).astype(np.int64).ravel()
        keep = (px >= 0) & (px < width) & (py >= 0) & (py < height)
        np.add.at(field, (py[keep], px[keep]), 1.0)
    if blur_sigma > 0:
        k = gaussian_kernel(blur_sigma)
        field = ndimage.correlate1d(field, k, axis=1, mode="nearest")
        field = ndimage.correlate1d(field, k, axis=0, mode="nearest")
    peak = field.max()
    if peak > 0:
        field = field * (255.0 / peak)
    mask = np.where(field >= threshold, 0, 255).astype(np.uint8)
    return Raster(mask)


def value_noise(
    width: int,
    height: int,
    base_scale: float,
    octaves: int,
    persistence: float,
    rng: Substream,
) -> Raster:
    """Multi-octave bilinear lattice noise, normalized to the full [0, 255].

    Each octave halves the lattice spacing and scales amplitude by
    ``persistence``.  A single large-scale octave produces a smooth field.
    """
    if octaves < 1:
        raise RasterError(f"octaves must be >= 1, got {octaves}")
    if base_scale <= 0:
        raise RasterError(f"base_scale must be positive, got {base_scale}")
    total = np.zeros((height, width), dtype=np.float64)
    amplitude = 1.0
    for octave in range(octaves):
        spacing = max(base_scale / (2.0**octave), 1.0)
        grid_w = int(np.ceil(width / spacing)) + 2
        grid_h = int(np.ceil(height / spacing)) + 2
        lattice = rng.uniform((grid_h, grid_w))
        xs = np.arange(width, dtype=np.float64) / spacing
        ys = np.arange(height, dtype=np.float64) / spacing
        x0 = np.floor(xs).astype(np.int64)
        y0 = np.floor(ys).astype(np.int64)
        fx = (xs - x0)[np.newaxis, :]
        fy = (ys - y0)[:, np.newaxis]
        top = lattice[np.ix_(y0, x0)] * (1 - fx) + lattice[np.ix_(y0, x0 + 1)] * fx
        bot = lattice[np.ix_(y0 + 1, x0)] * (1 - fx) + lattice[np.ix_(y0 + 1, x0 + 1)] * fx
        total += amplitude * (top * (1 - fy) + bot * fy)
        amplitude *= persistence
    lo, hi = total.min(), total.max()
    if hi > lo:
        total = (total - lo) * (255.0 / (hi - lo))
    else:
        total = np.full_like(total, 127.5)
    return Raster(quantize(total))
