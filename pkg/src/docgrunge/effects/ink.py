"""Ink-phase effects: degradations of the printed content itself."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..raster import Raster, gaussian_blur, luma, quantize
from ..rng import Substream
from ..synthesis import make_blob_mask
from .common import ink_mask
from .registry import EffectDef, Field, register


def _shift_with_fill(arr: np.ndarray, dx: int, dy: int, fill: int = 255) -> np.ndarray:
    """Integer-shift a (h, w, c) array; vacated pixels take ``fill``."""
    out = np.full_like(arr, fill)
    h, w = arr.shape[:2]
    sx0, sx1 = max(0, -dx), min(w, w - dx)
    sy0, sy1 = max(0, -dy), min(h, h - dy)
    if sx0 < sx1 and sy0 < sy1:
        out[sy0 + dy : sy1 + dy, sx0 + dx : sx1 + dx] = arr[sy0:sy1, sx0:sx1]
    return out


def bleed_through(img: Raster, params: dict, rng: Substream) -> Raster:
    """Verso ink ghosting: the page's mirror image showing through.

    The horizontally mirrored page is blurred, shifted, mixed in at
    ``alpha``, and composited darken-only, so no pixel ever gets brighter.
    """
    alpha = params["alpha"]
    ghost = img.array[:, ::-1].copy()
    if params["blur_sigma"] > 0:
        ghost = gaussian_blur(Raster(ghost), params["blur_sigma"]).to_array()
    ghost = _shift_with_fill(ghost, params["offset_x"], params["offset_y"])
    mixed = quantize(alpha * ghost.astype(np.float64) + (1.0 - alpha) * img.array.astype(np.float64))
    return Raster(np.minimum(img.array, mixed))


def low_ink_lines(img: Raster, params: dict, rng: Substream) -> Raster:
    """Horizontal streaks where the printer ran dry.

    Either every ``period``-th row (periodic mode, random phase) or
    ``line_count`` random rows; ink pixels on those rows move toward white
    by the ``lighten`` fraction.
    """
    h = img.height
    selected = np.zeros(h, dtype=bool)
    if params["periodic"]:
        period = min(params["period"], h)
        phase = rng.choice(period)
        selected[phase::period] = True
    elif params["line_count"] > 0:
        order = np.argsort(rng.uniform(h), kind="stable")
        selected[order[: params["line_count"]]] = True
    if not selected.any() or params["lighten"] == 0:
        return img
    ink = ink_mask(img)
    hit = ink & selected[:, np.newaxis]
    f = img.array.astype(np.float64)
    lightened = quantize(f + params["lighten"] * (255.0 - f))
    return Raster(np.where(hit[:, :, np.newaxis], lightened, img.array))


def ink_bleed(img: Raster, params: dict, rng: Substream) -> Raster:
    """Ink wicking outward at strokes.

    Edge pixels (Sobel magnitude above its own Otsu split) each take the
    darkest value in their kernel window with probability ``intensity``.
    """
    from ..errors import ParamError
    from ..raster import threshold_otsu  # local to avoid cycle at import time

    k = params["kernel"]
    if k not in (3, 5):
        raise ParamError(f"kernel must be 3 or 5, got {k}")
    gray = luma(img).astype(np.float64)
    gx = ndimage.sobel(gray, axis=1, mode="nearest")
    gy = ndimage.sobel(gray, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)
    peak = mag.max()
    fire_u = rng.uniform(gray.shape)  # one draw per pixel, always
    if peak == 0:
        return img
    mag8 = quantize(mag * (255.0 / peak))
    t, _ = threshold_otsu(Raster(mag8))
    fire = (mag8 >= t) & (fire_u < params["intensity"])
    darkest = ndimage.minimum_filter(img.array, size=(k, k, 1), mode="nearest")
    return Raster(np.where(fire[:, :, np.newaxis], darkest, img.array))


def letterpress(img: Raster, params: dict, rng: Substream) -> Raster:
    """Uneven press impression: blobby paleness inside ink regions only."""
    blob = make_blob_mask(
        img.width,
        img.height,
        clusters=params["clusters"],
        points_per_cluster=params["points"],
        spread_sigma=params["spread_sigma"],
        rng=rng,
        blur_sigma=params["blur_sigma"],
        threshold=params["threshold"],
    ).array[:, :, 0]
    ink = ink_mask(img)
    f = img.array.astype(np.float64)
    lift = params["lighten_max"] * (255.0 - blob[:, :, np.newaxis]) / 255.0
    lightened = quantize(f + lift * (255.0 - f))
    return Raster(np.where(ink[:, :, np.newaxis], lightened, img.array))


register(
    EffectDef(
        kind="bleed_through",
        phase="ink",
        default_phase="ink",
        fn=bleed_through,
        fields=(
            Field("alpha", "float", 0.25, lo=0.0, hi=1.0),
            Field("blur_sigma", "float", 1.5, lo=0.0, hi=16.0),
            Field("offset_x", "int", 8, lo=-64, hi=64),
            Field("offset_y", "int", 4, lo=-64, hi=64),
        ),
        midrange={"alpha": 0.4, "blur_sigma": 2.0, "offset_x": 10, "offset_y": 5},
        identity={"alpha": 0.0},
    )
)

register(
    EffectDef(
        kind="low_ink_lines",
        phase="ink",
        default_phase="ink",
        fn=low_ink_lines,
        fields=(
            Field("line_count", "int", 4, lo=0, hi=4096),
            Field("periodic", "bool", False),
            Field("period", "int", 8, lo=1, hi=4096),
            Field("lighten", "float", 0.6, lo=0.0, hi=1.0),
        ),
        midrange={"line_count": 12, "periodic": False, "lighten": 0.7},
        identity={"line_count": 0, "periodic": False},
    )
)

register(
    EffectDef(
        kind="ink_bleed",
        phase="ink",
        default_phase="ink",
        fn=ink_bleed,
        fields=(
            Field("intensity", "float", 0.45, lo=0.0, hi=1.0),
            Field("kernel", "int", 3, lo=3, hi=5),
        ),
        midrange={"intensity": 0.5, "kernel": 3},
        identity={"intensity": 0.0},
    )
)

register(
    EffectDef(
        kind="letterpress",
        phase="ink",
        default_phase="ink",
        fn=letterpress,
        fields=(
            Field("clusters", "int", 80, lo=1, hi=4096),
            Field("points", "int", 60, lo=0, hi=100000),
            Field("spread_sigma", "float", 6.0, lo=0.0, hi=256.0),
            Field("blur_sigma", "float", 1.5, lo=0.0, hi=16.0),
            Field("threshold", "int", 96, lo=0, hi=255),
            Field("lighten_max", "float", 0.6, lo=0.0, hi=1.0),
        ),
        midrange={"clusters": 120, "points": 80, "spread_sigma": 6.0, "lighten_max": 0.7},
        identity={"lighten_max": 0.0},
    )
)
