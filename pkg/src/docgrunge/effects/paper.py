"""Paper-phase effects: the sheet the ink gets printed onto."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..raster import (
    Raster,
    decode,
    hsv_to_rgb,
    quantize,
    resample,
    rgb_to_hsv,
    rotate_about_center,
    to_gray,
    to_rgb,
)
from ..rng import Substream
from ..synthesis import Placement, blend
from .common import ink_mask
from .registry import EffectDef, Field, register

TEXTURE_SUFFIXES = (".png", ".jpg", ".jpeg")


def color_paper(img: Raster, params: dict, rng: Substream) -> Raster:
    """Tint the paper: background pixels get a new hue/saturation, ink stays."""
    if params["saturation"] == 0 and img.channels == 1:
        return img  # an achromatic tint keeps a gray page gray
    rgb = to_rgb(img)
    ink = ink_mask(img)
    hsv = rgb_to_hsv(rgb).to_array()
    hsv[:, :, 0] = params["hue"]
    hsv[:, :, 1] = params["saturation"]
    tinted = hsv_to_rgb(Raster(hsv)).array
    return Raster(np.where(ink[:, :, np.newaxis], rgb.array, tinted))


def _default_stamp() -> Raster:
    data = resources.files("docgrunge").joinpath("assets/watermark_default.png").read_bytes()
    return decode(data)


def watermark(img: Raster, params: dict, rng: Substream) -> Raster:
    """Blend a stamp into the paper background; ink pixels are untouched."""
    if params["stamp_path"]:
        stamp = decode(Path(params["stamp_path"]).read_bytes())
    else:
        stamp = _default_stamp()
    if params["rotation_deg"] % 360 != 0:
        stamp = rotate_about_center(stamp, params["rotation_deg"], fill=255)
    if stamp.width > img.width or stamp.height > img.height:
        # oversized stamps scale down to fit, preserving aspect
        s = min(img.width / stamp.width, img.height / stamp.height)
        stamp = resample(stamp, max(1, int(stamp.width * s)), max(1, int(stamp.height * s)))
    placement = Placement(anchor=params["anchor"], edge_offset=params["edge_offset"])
    stamped = blend(stamp, img, "normal", alpha=params["opacity"], placement=placement, rng=rng)
    if stamped.channels != img.channels:  # gray page + rgb stamp promoted
        img = to_rgb(img)
    ink = ink_mask(img)
    return Raster(np.where(ink[:, :, np.newaxis], img.array, stamped.array))


def gamma_correct(img: Raster, params: dict, rng: Substream) -> Raster:
    """Classic power-law remap: out = 255 * (in/255) ** gamma."""
    g = params["gamma"]
    lut = quantize(255.0 * (np.arange(256, dtype=np.float64) / 255.0) ** g)
    return Raster(lut[img.array])


def lighting_gradient(img: Raster, params: dict, rng: Substream) -> Raster:
    """Directional shading: gain max at the center point falling to min
    linearly along the direction vector, clamped outside that span."""
    w, h = img.width, img.height
    cx = params["center_x"] * (w - 1)
    cy = params["center_y"] * (h - 1)
    theta = np.deg2rad(params["direction_deg"])
    dx, dy = np.cos(theta), np.sin(theta)
    xs, ys = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    t = (xs - cx) * dx + (ys - cy) * dy
    corners = [(0, 0), (w - 1, 0), (0, h - 1), (w - 1, h - 1)]
    t_max = max((px - cx) * dx + (py - cy) * dy for px, py in corners)
    if t_max <= 0:
        frac = np.zeros_like(t)
    else:
        frac = np.clip(t / t_max, 0.0, 1.0)
    gain = params["max_gain"] + (params["min_gain"] - params["max_gain"]) * frac
    return Raster(quantize(img.array.astype(np.float64) * gain[:, :, np.newaxis]))


def subtle_noise(img: Raster, params: dict, rng: Substream) -> Raster:
    """Independent uniform integer noise in [-range, range] per sample."""
    r = params["range"]
    noise = rng.integers(-r, r + 1, img.array.shape)
    return Raster(quantize(img.array.astype(np.float64) + noise))


def list_textures(texture_dir: str) -> list[Path]:
    """Texture files under a directory, lexicographic by name."""
    root = Path(texture_dir)
    if not root.is_dir():
        raise ConfigError(f"texture directory '{texture_dir}' does not exist")
    files = sorted(
        (p for p in root.iterdir() if p.suffix.lower() in TEXTURE_SUFFIXES),
        key=lambda p: p.name,
    )
    if not files:
        raise ConfigError(f"texture directory '{texture_dir}' contains no textures")
    return files


def paper_factory(img: Raster, params: dict, rng: Substream) -> Raster:
    """Swap the sheet for a real texture, random-cropped or scaled to size."""
    if not params["texture_dir"]:
        raise ConfigError("paper_factory requires texture_dir")
    files = list_textures(params["texture_dir"])
    path = files[rng.choice(len(files))]
    try:
        tex = decode(path.read_bytes())
    except Exception as exc:
        raise ConfigError(f"cannot read texture '{path}': {exc}") from exc
    tex = to_gray(tex) if img.channels == 1 else to_rgb(tex)
    if (
        params["crop_mode"] == "random_crop"
        and tex.width >= img.width
        and tex.height >= img.height
    ):
        x0 = int(rng.integers(0, tex.width - img.width + 1))
        y0 = int(rng.integers(0, tex.height - img.height + 1))
        return Raster(tex.array[y0 : y0 + img.height, x0 : x0 + img.width])
    return resample(tex, img.width, img.height)


register(
    EffectDef(
        kind="color_paper",
        phase="paper",
        default_phase="paper",
        fn=color_paper,
        fields=(
            Field("hue", "int", 28, lo=0, hi=255),
            Field("saturation", "int", 36, lo=0, hi=255),
        ),
        midrange={"hue": 150, "saturation": 60},
        identity={"saturation": 0},  # exact on achromatic paper
    )
)

register(
    EffectDef(
        kind="watermark",
        phase="paper",
        default_phase="paper",
        fn=watermark,
        fields=(
            Field("stamp_path", "path", None, nullable=True),
            Field("opacity", "float", 0.35, lo=0.0, hi=1.0),
            Field("rotation_deg", "float", 30.0, lo=-360.0, hi=360.0),
            Field(
                "anchor",
                "str",
                "center",
                choices=("center", "top_edge", "bottom_edge", "left_edge", "right_edge", "random"),
            ),
            Field("edge_offset", "int", 0, lo=0, hi=4096),
        ),
        midrange={"opacity": 0.5, "rotation_deg": 45.0},
        identity={"opacity": 0.0},
    )
)

register(
    EffectDef(
        kind="gamma",
        phase="paper",
        default_phase="paper",
        fn=gamma_correct,
        fields=(Field("gamma", "float", 1.4, lo=0.05, hi=8.0),),
        midrange={"gamma": 1.6},
        identity={"gamma": 1.0},
    )
)

register(
    EffectDef(
        kind="lighting_gradient",
        phase="paper",
        default_phase="paper",
        fn=lighting_gradient,
        fields=(
            Field("center_x", "float", 0.5, lo=0.0, hi=1.0),
            Field("center_y", "float", 0.1, lo=0.0, hi=1.0),
            Field("direction_deg", "float", 90.0, lo=-360.0, hi=360.0),
            Field("max_gain", "float", 1.0, lo=1.0, hi=4.0),
            Field("min_gain", "float", 0.55, lo=0.0, hi=1.0),
        ),
        midrange={"min_gain": 0.5, "max_gain": 1.1},
        identity={"max_gain": 1.0, "min_gain": 1.0},
    )
)

register(
    EffectDef(
        kind="subtle_noise",
        phase="paper",
        default_phase="paper",
        fn=subtle_noise,
        fields=(Field("range", "int", 5, lo=0, hi=128),),
        midrange={"range": 8},
        identity={"range": 0},
    )
)

register(
    EffectDef(
        kind="paper_factory",
        phase="paper",
        default_phase="paper",
        fn=paper_factory,
        fields=(
            Field("texture_dir", "path", None, nullable=True),
            Field("crop_mode", "str", "random_crop", choices=("random_crop", "scale_to_fit")),
        ),
        midrange={"crop_mode": "random_crop"},
        identity=None,  # replaces the sheet; only a white texture is neutral
    )
)
