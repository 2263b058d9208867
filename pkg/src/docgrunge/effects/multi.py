"""Effects usable in any phase: tone textures, device bands, dithers,
geometry, and scribbles."""

from __future__ import annotations

import numpy as np

from ..errors import ParamError
from ..raster import Raster, luma, quantize, resample, rotate_about_center, round_half_away, warp_affine
from ..rng import Substream
from ..synthesis import value_noise
from .common import bayer_binarize, floyd_steinberg, flatten_quadratic, stamp_polyline
from .registry import EffectDef, Field, register


def brightness_texturize(img: Raster, params: dict, rng: Substream) -> Raster:
    """Per-pixel brightness jitter: the HSV value channel scales by (1 + u),
    u ~ U[-deviation, deviation], once per pass.

    Scaling V in HSV equals scaling all RGB channels by the same ratio, so
    this works directly on RGB and avoids hue quantization loss entirely.
    """
    dev = params["deviation"]
    out = img.array.astype(np.float64)
    for _ in range(params["passes"]):
        u = rng.uniform((img.height, img.width)) * 2.0 * dev - dev
        v = out.max(axis=2)
        v_new = np.clip(round_half_away(v * (1.0 + u)), 0.0, 255.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(v > 0, v_new / v, 0.0)
        out = np.clip(round_half_away(out * ratio[:, :, np.newaxis]), 0.0, 255.0)
    return Raster(out.astype(np.uint8))


def dirty_drum(img: Raster, params: dict, rng: Substream) -> Raster:
    """Periodic gain bands from a dirty printer drum.

    ``direction`` names the band orientation: "v" makes vertical strips
    (gain varies across x), "h" horizontal strips.
    """
    bw = params["band_width"]
    extent = img.width if params["direction"] == "v" else img.height
    n = int(np.ceil(extent / bw))
    i = params["intensity"]
    gains = rng.uniform_in(1.0 - i, 1.0 + i, n)
    per_px = gains[np.arange(extent) // bw]
    f = img.array.astype(np.float64)
    if params["direction"] == "v":
        f = f * per_px[np.newaxis, :, np.newaxis]
    else:
        f = f * per_px[:, np.newaxis, np.newaxis]
    return Raster(quantize(f))


def dirty_rollers(img: Raster, params: dict, rng: Substream) -> Raster:
    """Horizontal bands of random height sharing one random gain each."""
    if params["band_width_min"] > params["band_width_max"]:
        raise ParamError("band_width_min exceeds band_width_max")
    if params["gain_min"] > params["gain_max"]:
        raise ParamError("gain_min exceeds gain_max")
    h = img.height
    gain_rows = np.empty(h, dtype=np.float64)
    y = 0
    while y < h:
        bw = int(rng.integers(params["band_width_min"], params["band_width_max"] + 1))
        gain_rows[y : y + bw] = rng.uniform_in(params["gain_min"], params["gain_max"])
        y += bw
    f = img.array.astype(np.float64) * gain_rows[:, np.newaxis, np.newaxis]
    return Raster(quantize(f))


def dithering(img: Raster, params: dict, rng: Substream) -> Raster:
    """Binarize via ordered (Bayer 4x4) or Floyd-Steinberg error diffusion."""
    g = luma(img)
    if params["mode"] == "ordered":
        binary = bayer_binarize(g)
    else:
        binary = floyd_steinberg(g)
    if img.channels == 3:
        return Raster(np.repeat(binary[:, :, np.newaxis], 3, axis=2))
    return Raster(binary)


def geometric(img: Raster, params: dict, rng: Substream) -> Raster:
    """Crop, scale, rotate, translate, flip - in that order.

    Identity parameters skip every step, so the default configuration is a
    bit-exact copy.  Scaling and cropping change the output size; rotation
    and translation keep the canvas and fill vacated pixels with white.
    """
    out = img
    crop = params["crop"]
    if crop is not None:
        x0, y0, x1, y1 = crop
        if not (0 <= x0 < x1 <= out.width and 0 <= y0 < y1 <= out.height):
            raise ParamError(f"crop {crop} outside image {out.width}x{out.height}")
        if (x0, y0, x1, y1) != (0, 0, out.width, out.height):
            out = Raster(out.array[y0:y1, x0:x1])
    s = params["scale"]
    if s != 1.0:
        out = resample(out, max(1, int(round(out.width * s))), max(1, int(round(out.height * s))))
    if params["rotate_deg"] % 360.0 != 0.0:
        out = rotate_about_center(out, params["rotate_deg"], fill=255)
    tx, ty = params["translate_x"], params["translate_y"]
    if (tx, ty) != (0, 0):
        out = warp_affine(out, [[1.0, 0.0, float(tx)], [0.0, 1.0, float(ty)]], fill=255)
    if params["flip_h"]:
        out = Raster(out.array[:, ::-1])
    if params["flip_v"]:
        out = Raster(out.array[::-1])
    return out


def noise_texturize(img: Raster, params: dict, rng: Substream) -> Raster:
    """Spatially correlated gain noise from a value-noise field mapped onto
    [1 - strength, 1 + strength]."""
    field = value_noise(
        img.width,
        img.height,
        base_scale=params["base_scale"],
        octaves=params["octaves"],
        persistence=0.5,
        rng=rng,
    ).array[:, :, 0]
    strength = params["strength"]
    gain = (1.0 - strength) + (2.0 * strength / 255.0) * field.astype(np.float64)
    return Raster(quantize(img.array.astype(np.float64) * gain[:, :, np.newaxis]))


def pencil_scribbles(img: Raster, params: dict, rng: Substream) -> Raster:
    """Random quadratic pencil strokes, darken-blended in a mid gray."""
    n = params["stroke_count"]
    if n == 0:
        return img
    w, h = img.width, img.height
    mask = np.zeros((h, w), dtype=bool)
    for _ in range(n):
        # 3 control points anywhere on the page
        coords = rng.uniform(6)
        p0 = (coords[0] * (w - 1), coords[1] * (h - 1))
        p1 = (coords[2] * (w - 1), coords[3] * (h - 1))
        p2 = (coords[4] * (w - 1), coords[5] * (h - 1))
        pts = flatten_quadratic(p0, p1, p2, tolerance=0.25)
        stamp_polyline(mask, pts, params["thickness"])
    shade = np.full(img.channels, params["gray"], dtype=np.uint8)
    out = np.where(mask[:, :, np.newaxis], np.minimum(img.array, shade), img.array)
    return Raster(out)


register(
    EffectDef(
        kind="brightness_texturize",
        phase="multi",
        default_phase="paper",
        fn=brightness_texturize,
        fields=(
            Field("deviation", "float", 0.08, lo=0.0, hi=0.5),
            Field("passes", "int", 2, lo=1, hi=3),
        ),
        midrange={"deviation": 0.12, "passes": 2},
        identity={"deviation": 0.0},
    )
)

register(
    EffectDef(
        kind="dirty_drum",
        phase="multi",
        default_phase="ink",
        fn=dirty_drum,
        fields=(
            Field("direction", "str", "v", choices=("h", "v")),
            Field("band_width", "int", 6, lo=1, hi=4096),
            Field("intensity", "float", 0.25, lo=0.0, hi=1.0),
        ),
        midrange={"band_width": 8, "intensity": 0.3},
        identity={"intensity": 0.0},
    )
)

register(
    EffectDef(
        kind="dirty_rollers",
        phase="multi",
        default_phase="ink",
        fn=dirty_rollers,
        fields=(
            Field("band_width_min", "int", 4, lo=1, hi=4096),
            Field("band_width_max", "int", 16, lo=1, hi=4096),
            Field("gain_min", "float", 0.85, lo=0.7, hi=1.3),
            Field("gain_max", "float", 1.15, lo=0.7, hi=1.3),
        ),
        midrange={"band_width_min": 4, "band_width_max": 12, "gain_min": 0.8, "gain_max": 1.2},
        identity={"gain_min": 1.0, "gain_max": 1.0},
    )
)

register(
    EffectDef(
        kind="dithering",
        phase="multi",
        default_phase="post",
        fn=dithering,
        fields=(Field("mode", "str", "ordered", choices=("ordered", "error_diffusion")),),
        midrange={"mode": "error_diffusion"},
        identity=None,  # always two-valued output
    )
)

register(
    EffectDef(
        kind="geometric",
        phase="multi",
        default_phase="post",
        fn=geometric,
        fields=(
            Field("crop", "rect", None, nullable=True),
            Field("scale", "float", 1.0, lo=0.05, hi=8.0),
            Field("rotate_deg", "float", 0.0, lo=-360.0, hi=360.0),
            Field("translate_x", "int", 0, lo=-4096, hi=4096),
            Field("translate_y", "int", 0, lo=-4096, hi=4096),
            Field("flip_h", "bool", False),
            Field("flip_v", "bool", False),
        ),
        midrange={"scale": 0.9, "rotate_deg": 2.0, "translate_x": 6, "translate_y": 4},
        identity={},  # defaults are already a no-op
        changes_dims=True,
    )
)

register(
    EffectDef(
        kind="noise_texturize",
        phase="multi",
        default_phase="paper",
        fn=noise_texturize,
        fields=(
            Field("octaves", "int", 3, lo=1, hi=8),
            Field("base_scale", "float", 64.0, lo=2.0, hi=1024.0),
            Field("strength", "float", 0.2, lo=0.0, hi=1.0),
        ),
        midrange={"octaves": 3, "base_scale": 48.0, "strength": 0.25},
        identity={"strength": 0.0},
    )
)

register(
    EffectDef(
        kind="pencil_scribbles",
        phase="multi",
        default_phase="post",
        fn=pencil_scribbles,
        fields=(
            Field("stroke_count", "int", 4, lo=0, hi=256),
            Field("thickness", "int", 2, lo=1, hi=64),
            Field("gray", "int", 70, lo=0, hi=200),
        ),
        midrange={"stroke_count": 5, "thickness": 2, "gray": 80},
        identity={"stroke_count": 0},
    )
)
