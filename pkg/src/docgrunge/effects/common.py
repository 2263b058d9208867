"""Helpers shared by several effects: ink masks, stroke stamping, dithers."""

from __future__ import annotations

import numpy as np

from ..raster import Raster, luma, threshold_otsu

# Standard 4x4 Bayer index matrix.
_BAYER4 = np.array(
    [
        [0, 8, 2, 10],
        [12, 4, 14, 6],
        [3, 11, 1, 9],
        [15, 7, 13, 5],
    ],
    dtype=np.float64,
)


def ink_mask(img: Raster) -> np.ndarray:
    """(h, w) bool mask of ink pixels.

    Dark means ink: luma at or below min(otsu, 128).  Capping at 128 keeps
    mid-gray backgrounds out; taking Otsu when it is lower adapts to pages
    whose ink/paper split sits darker than that.  A constant dark page counts
    entirely as ink.
    """
    t, _ = threshold_otsu(img)
    return luma(img) <= min(t, 128)


def bayer_binarize(gray: np.ndarray) -> np.ndarray:
    """Ordered 4x4 dither of a (h, w) uint8 array to {0, 255}.

    A pixel turns white when its value exceeds the tile threshold
    (index + 0.5) * 255 / 16; an even 50% gray maps to exactly half on.
    """
    h, w = gray.shape
    reps = (int(np.ceil(h / 4)), int(np.ceil(w / 4)))
    tile = np.tile((_BAYER4 + 0.5) * (255.0 / 16.0), reps)[:h, :w]
    return np.where(gray > tile, 255, 0).astype(np.uint8)


def _fs_loop(acc: np.ndarray, out: np.ndarray) -> None:
    """Floyd-Steinberg core: int32 accumulator in, {0,255} out.

    Left-to-right raster scan (no serpentine).  The error split is exact
    integer arithmetic: 7/16, 3/16 and 5/16 round down and the down-right
    neighbor absorbs the remainder, so total error mass is conserved and the
    result is identical on every platform.
    """
    h, w = acc.shape
    for y in range(h):
        for x in range(w):
            v = acc[y, x]
            nv = 255 if v >= 128 else 0
            out[y, x] = nv
            err = v - nv
            d7 = (err * 7) // 16
            d3 = (err * 3) // 16
            d5 = (err * 5) // 16
            d1 = err - d7 - d3 - d5
            if x + 1 < w:
                acc[y, x + 1] += d7
            if y + 1 < h:
                if x > 0:
                    acc[y + 1, x - 1] += d3
                acc[y + 1, x] += d5
                if x + 1 < w:
                    acc[y + 1, x + 1] += d1


try:  # optional compiled fast path; the fallback computes identical bytes
    from numba import njit

    _fs_compiled = njit(cache=True, nogil=True)(_fs_loop)
except Exception:  # pragma: no cover - depends on environment
    _fs_compiled = _fs_loop


def floyd_steinberg(gray: np.ndarray) -> np.ndarray:
    """Error-diffusion binarization of a (h, w) uint8 array to {0, 255}."""
    acc = gray.astype(np.int32)
    out = np.empty_like(gray)
    _fs_compiled(acc, out)
    return out


def stamp_polyline(mask: np.ndarray, points: np.ndarray, thickness: float) -> None:
    """Mark a polyline into a (h, w) bool mask with round caps/joins.

    ``points`` is (n, 2) float (x, y).  Pixels whose center lies within
    thickness/2 of any segment are set.
    """
    h, w = mask.shape
    radius = max(thickness / 2.0, 0.5)
    for i in range(len(points) - 1):
        x0, y0 = points[i]
        x1, y1 = points[i + 1]
        lo_x = max(int(np.floor(min(x0, x1) - radius)), 0)
        hi_x = min(int(np.ceil(max(x0, x1) + radius)) + 1, w)
        lo_y = max(int(np.floor(min(y0, y1) - radius)), 0)
        hi_y = min(int(np.ceil(max(y0, y1) + radius)) + 1, h)
        if lo_x >= hi_x or lo_y >= hi_y:
            continue
        xs, ys = np.meshgrid(
            np.arange(lo_x, hi_x, dtype=np.float64),
            np.arange(lo_y, hi_y, dtype=np.float64),
        )
        dx, dy = x1 - x0, y1 - y0
        seg_sq = dx * dx + dy * dy
        if seg_sq == 0:
            dist_sq = (xs - x0) ** 2 + (ys - y0) ** 2
        else:
            t = np.clip(((xs - x0) * dx + (ys - y0) * dy) / seg_sq, 0.0, 1.0)
            dist_sq = (xs - (x0 + t * dx)) ** 2 + (ys - (y0 + t * dy)) ** 2
        mask[lo_y:hi_y, lo_x:hi_x] |= dist_sq <= radius * radius


def flatten_quadratic(p0, p1, p2, tolerance: float = 0.25) -> np.ndarray:
    """Flatten a quadratic Bezier into a polyline within ``tolerance`` px.

    The chord deviation of a uniform split into n pieces is bounded by
    |p0 - 2 p1 + p2| / (8 n^2), which gives the segment count in closed form.
    """
    p0 = np.asarray(p0, dtype=np.float64)
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    bend = np.linalg.norm(p0 - 2.0 * p1 + p2)
    n = max(int(np.ceil(np.sqrt(bend / (8.0 * tolerance)))), 1)
    t = np.linspace(0.0, 1.0, n + 1)[:, np.newaxis]
    return (1 - t) ** 2 * p0 + 2 * (1 - t) * t * p1 + t**2 * p2
