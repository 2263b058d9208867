"""Post-phase effects: what happens to the printed page afterwards."""

from __future__ import annotations

import numpy as np

from ..raster import (
    DisplacementField,
    Raster,
    decode,
    encode,
    luma,
    quantize,
    resample,
    to_gray,
    warp_displacement,
)
from ..rng import Substream
from ..synthesis import Placement, blend, make_blob_mask, value_noise
from .common import bayer_binarize, ink_mask, stamp_polyline
from .registry import EffectDef, Field, register


def bad_photocopy(img: Raster, params: dict, rng: Substream) -> Raster:
    """Copier grunge: blob noise darkened onto the page, optional row banding."""
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
    factor = 1.0 - params["darkness"] * (255.0 - blob) / 255.0
    out = img.array.astype(np.float64) * factor[:, :, np.newaxis]
    if params["banding"]:
        jitter = 1.0 + (rng.uniform(img.height) - 0.5) * 0.1
        out = out * jitter[:, np.newaxis, np.newaxis]
    return Raster(quantize(out))


def _fastener_sprite(artifact: str, size: int, shade: int, channels: int) -> Raster:
    """Small dark shape on white: a punch hole, staple, or clip."""
    size = max(size, 4)
    canvas = np.full((size, size), 255, dtype=np.uint8)
    c = (size - 1) / 2.0
    ys, xs = np.mgrid[0:size, 0:size]
    if artifact == "punch_holes":
        canvas[(xs - c) ** 2 + (ys - c) ** 2 <= (size / 2.0 - 0.5) ** 2] = shade
    elif artifact == "staples":
        bar = max(size // 5, 2)
        canvas[:bar, :] = shade  # crown
        canvas[: size // 2, :bar] = shade  # legs
        canvas[: size // 2, -bar:] = shade
    else:  # clips: two nested outline rectangles
        t = max(size // 8, 1)
        canvas[:t, :] = shade
        canvas[-t:, :] = shade
        canvas[:, :t] = shade
        canvas[:, -t:] = shade
        q = size // 4
        canvas[q : q + t, q:-q] = shade
        canvas[-q - t : -q, q:-q] = shade
    if channels == 3:
        canvas = np.repeat(canvas[:, :, np.newaxis], 3, axis=2)
    return Raster(canvas)


def bindings_and_fasteners(img: Raster, params: dict, rng: Substream) -> Raster:
    """Punch holes, staples or clips tiled along one page edge."""
    count = params["count"]
    if count == 0:
        return img
    sprite = _fastener_sprite(params["artifact"], params["size"], params["shade"], img.channels)
    if params["edge"] in ("left", "right"):
        sprite = Raster(np.transpose(sprite.array, (1, 0, 2)))
    placement = Placement(
        anchor=f"{params['edge']}_edge",
        edge_offset=params["edge_offset"],
        tile_count=count,
    )
    return blend(sprite, img, "darken", placement=placement, rng=rng)


def book_binding(img: Raster, params: dict, rng: Substream) -> Raster:
    """Spine-side curl and shadow.

    Columns within ``bend_radius`` of the spine are pulled toward it with a
    quadratic falloff, modulated vertically so ruled lines bend rather than
    shift; a multiplicative shadow ramps from 0.4 at the spine to 1 at
    ``shadow_width``.
    """
    w, h = img.width, img.height
    x = np.arange(w, dtype=np.float64)
    d = x if params["side"] == "left" else (w - 1) - x
    out = img
    radius = params["bend_radius"]
    if radius > 0:
        falloff = np.clip(1.0 - d / radius, 0.0, 1.0) ** 2
        bulge = np.sin(np.pi * (np.arange(h, dtype=np.float64) + 0.5) / h)
        pull = (radius / 6.0) * falloff[np.newaxis, :] * bulge[:, np.newaxis]
        if params["side"] == "right":
            pull = -pull
        field = DisplacementField.from_pixels(pull, np.zeros((h, w)))
        out = warp_displacement(img, field, fill=255)
    if params["shadow_width"] > 0:
        gain = 0.4 + 0.6 * np.clip(d / params["shadow_width"], 0.0, 1.0)
        out = Raster(quantize(out.array.astype(np.float64) * gain[np.newaxis, :, np.newaxis]))
    return out


def folding(img: Raster, params: dict, rng: Substream) -> Raster:
    """Vertical fold creases: tent-shaped horizontal displacement per fold
    plus a darker (or lighter) seam band.  Fold positions are stratified
    across the width so creases do not pile up."""
    n = params["fold_count"]
    if n == 0:
        return img
    w, h = img.width, img.height
    xs = np.arange(w, dtype=np.float64)
    dx = np.zeros(w, dtype=np.float64)
    seam = np.zeros(w, dtype=np.float64)
    for i in range(n):
        pos = (i + rng.uniform()) * w / n
        halfwidth = rng.uniform_in(w / 16.0, w / 6.0)
        direction = 1.0 if rng.uniform() < 0.5 else -1.0
        tent = np.clip(1.0 - np.abs(xs - pos) / halfwidth, 0.0, 1.0)
        dx += direction * params["max_displacement"] * tent
        seam[np.abs(xs - pos) < params["seam_width"] / 2.0] = params["seam_delta"]
    # overlapping tents must not push past the stated bound
    dx = np.clip(dx, -params["max_displacement"], params["max_displacement"])
    out = img
    if params["max_displacement"] > 0:
        field = DisplacementField.from_pixels(np.tile(dx, (h, 1)), np.zeros((h, w)))
        out = warp_displacement(out, field, fill=255)
    if params["seam_delta"] != 0:
        shifted = out.array.astype(np.float64) + seam[np.newaxis, :, np.newaxis]
        out = Raster(quantize(shifted))
    return out


def jpeg_artifacts(img: Raster, params: dict, rng: Substream) -> Raster:
    """Round-trip through a real JPEG codec at the given quality."""
    return decode(encode(img, "jpeg", quality=params["quality"]))


def _text_lines(ink: np.ndarray, min_fill: float = 0.02, min_gap: int = 3) -> list[tuple[int, int]]:
    """(y0, y1) inclusive text-line bands from an ink mask.

    A row belongs to a line when its ink count exceeds ``min_fill`` of the
    width; bands separated by fewer than ``min_gap`` blank rows merge.
    """
    counts = ink.sum(axis=1)
    textish = counts > min_fill * ink.shape[1]
    rows = np.flatnonzero(textish)
    if rows.size == 0:
        return []
    lines = []
    start = prev = rows[0]
    for y in rows[1:]:
        if y - prev >= min_gap + 1:
            lines.append((int(start), int(prev)))
            start = y
        prev = y
    lines.append((int(start), int(prev)))
    return lines


def markup(img: Raster, params: dict, rng: Substream) -> Raster:
    """Reader's marks: underline, strikethrough, or highlight per text line.

    Text lines come from the ink-mask row projection; each line is marked
    independently with probability ``line_prob``.
    """
    from ..raster import to_rgb

    ink = ink_mask(img)
    lines = _text_lines(ink)
    color = params["color"]
    want_rgb = img.channels == 3 or len(set(color)) > 1
    decided = [(line, rng.uniform() < params["line_prob"]) for line in lines]
    if not any(hit for _, hit in decided):
        return img
    base = to_rgb(img) if want_rgb and img.channels == 1 else img
    out = base.to_array()
    colvec = np.array(color if base.channels == 3 else [color[0]], dtype=np.float64)
    thickness = params["thickness"]
    style = params["style"]
    for (y0, y1), hit in decided:
        if not hit:
            continue
        cols = np.flatnonzero(ink[y0 : y1 + 1].any(axis=0))
        if cols.size == 0:
            continue
        x0, x1 = int(cols[0]), int(cols[-1])
        if style == "highlight":
            band0 = max(y0 - 1, 0)
            band1 = min(y1 + 2, base.height)
            region = out[band0:band1, x0 : x1 + 1].astype(np.float64)
            out[band0:band1, x0 : x1 + 1] = quantize(region * colvec / 255.0)
            continue
        if style == "underline":
            y_line = min(y1 + 2 + thickness / 2.0, base.height - 1)
        else:  # strikethrough
            y_line = (y0 + y1) / 2.0
        step = 8
        px = np.arange(x0, x1 + 1, step, dtype=np.float64)
        if px[-1] != x1:
            px = np.append(px, float(x1))
        jitter = (rng.uniform(len(px)) - 0.5) * thickness
        pts = np.stack([px, np.clip(y_line + jitter, 0, base.height - 1)], axis=1)
        stroke = np.zeros((base.height, base.width), dtype=bool)
        stamp_polyline(stroke, pts, thickness)
        region = stroke[:, :, np.newaxis]
        out = np.where(region, np.minimum(out, colvec.astype(np.uint8)), out)
    return Raster(out)


def faxify(img: Raster, params: dict, rng: Substream) -> Raster:
    """Fax rendering: downscale, binarize (fixed threshold or 4x4 halftone),
    then blow back up with nearest-neighbor so the dot structure shows."""
    g = to_gray(img)
    scale = params["target_scale"]
    dw = max(1, int(round(img.width * scale)))
    dh = max(1, int(round(img.height * scale)))
    small = resample(g, dw, dh) if (dw, dh) != (img.width, img.height) else g
    vals = small.array[:, :, 0]
    if params["halftone"]:
        binary = bayer_binarize(vals)
    else:
        binary = np.where(vals >= params["threshold"], 255, 0).astype(np.uint8)
    up = resample(Raster(binary), img.width, img.height, method="nearest")
    if img.channels == 3:
        return Raster(np.repeat(up.array, 3, axis=2))
    return up


def page_border(img: Raster, params: dict, rng: Substream) -> Raster:
    """Add scanner-bed borders; output grows by the border widths.

    With ``ragged`` the inner boundary recedes by up to 3 px of smooth value
    noise; the border never intrudes past its own band, so the original
    image area is copied bit-exactly.
    """
    top, right, bottom, left = params["widths"]
    if top == right == bottom == left == 0:
        return img
    color = np.array(params["color"][: img.channels] if img.channels == 3 else [params["color"][0]], dtype=np.uint8)
    out = np.pad(img.array, ((top, bottom), (left, right), (0, 0)), mode="edge")
    oh, ow = out.shape[:2]

    def offsets(n: int) -> np.ndarray:
        if not params["ragged"]:
            return np.zeros(n, dtype=np.int64)
        noise = value_noise(n, 1, base_scale=24.0, octaves=2, persistence=0.5, rng=rng)
        return np.clip(
            np.floor((noise.array[0, :, 0].astype(np.float64) - 127.5) * (6.0 / 255.0) + 0.5),
            -3,
            3,
        ).astype(np.int64)

    if top > 0:
        depth = np.clip(top + np.minimum(offsets(ow), 0), 0, top)
        rows = np.arange(oh)[:, np.newaxis]
        out = np.where((rows < depth[np.newaxis, :])[:, :, np.newaxis], color, out)
    if bottom > 0:
        depth = np.clip(bottom + np.minimum(offsets(ow), 0), 0, bottom)
        rows = np.arange(oh)[:, np.newaxis]
        out = np.where((rows >= oh - depth[np.newaxis, :])[:, :, np.newaxis], color, out)
    if left > 0:
        depth = np.clip(left + np.minimum(offsets(oh), 0), 0, left)
        cols = np.arange(ow)[np.newaxis, :]
        out = np.where((cols < depth[:, np.newaxis])[:, :, np.newaxis], color, out)
    if right > 0:
        depth = np.clip(right + np.minimum(offsets(oh), 0), 0, right)
        cols = np.arange(ow)[np.newaxis, :]
        out = np.where((cols >= ow - depth[:, np.newaxis])[:, :, np.newaxis], color, out)
    return Raster(out)


register(
    EffectDef(
        kind="bad_photocopy",
        phase="post",
        default_phase="post",
        fn=bad_photocopy,
        fields=(
            Field("clusters", "int", 60, lo=1, hi=4096),
            Field("points", "int", 800, lo=0, hi=1000000),
            Field("spread_sigma", "float", 10.0, lo=0.0, hi=256.0),
            Field("blur_sigma", "float", 2.0, lo=0.0, hi=16.0),
            Field("threshold", "int", 110, lo=0, hi=255),
            Field("darkness", "float", 0.6, lo=0.0, hi=1.0),
            Field("banding", "bool", False),
        ),
        midrange={"darkness": 0.65, "banding": True},
        identity={"darkness": 0.0, "banding": False},
    )
)

register(
    EffectDef(
        kind="bindings_and_fasteners",
        phase="post",
        default_phase="post",
        fn=bindings_and_fasteners,
        fields=(
            Field("artifact", "str", "punch_holes", choices=("punch_holes", "staples", "clips")),
            Field("edge", "str", "left", choices=("left", "right", "top", "bottom")),
            Field("count", "int", 3, lo=0, hi=64),
            Field("size", "int", 24, lo=4, hi=512),
            Field("edge_offset", "int", 12, lo=0, hi=4096),
            Field("shade", "int", 40, lo=0, hi=255),
        ),
        midrange={"artifact": "punch_holes", "count": 3, "size": 28},
        identity={"count": 0},
    )
)

register(
    EffectDef(
        kind="book_binding",
        phase="post",
        default_phase="post",
        fn=book_binding,
        fields=(
            Field("bend_radius", "int", 60, lo=0, hi=4096),
            Field("shadow_width", "int", 40, lo=0, hi=4096),
            Field("side", "str", "left", choices=("left", "right")),
        ),
        midrange={"bend_radius": 80, "shadow_width": 50},
        identity={"bend_radius": 0, "shadow_width": 0},
    )
)

register(
    EffectDef(
        kind="folding",
        phase="post",
        default_phase="post",
        fn=folding,
        fields=(
            Field("fold_count", "int", 2, lo=0, hi=64),
            Field("max_displacement", "float", 8.0, lo=0.0, hi=256.0),
            Field("seam_width", "int", 3, lo=0, hi=256),
            Field("seam_delta", "int", -24, lo=-64, hi=64),
        ),
        midrange={"fold_count": 3, "max_displacement": 10.0},
        identity={"fold_count": 0},
    )
)

register(
    EffectDef(
        kind="jpeg",
        phase="post",
        default_phase="post",
        fn=jpeg_artifacts,
        fields=(Field("quality", "int", 25, lo=1, hi=100),),
        midrange={"quality": 20},
        identity=None,  # JPEG is lossy at every quality
    )
)

register(
    EffectDef(
        kind="markup",
        phase="post",
        default_phase="post",
        fn=markup,
        fields=(
            Field("style", "str", "highlight", choices=("underline", "strikethrough", "highlight")),
            Field("color", "color", (255, 238, 120)),
            Field("thickness", "int", 2, lo=1, hi=64),
            Field("line_prob", "float", 0.5, lo=0.0, hi=1.0),
        ),
        midrange={"style": "highlight", "line_prob": 0.6},
        identity={"line_prob": 0.0},
    )
)

register(
    EffectDef(
        kind="faxify",
        phase="post",
        default_phase="post",
        fn=faxify,
        fields=(
            Field("target_scale", "float", 0.5, lo=0.05, hi=1.0),
            Field("halftone", "bool", True),
            Field("threshold", "int", 128, lo=0, hi=255),
        ),
        midrange={"target_scale": 0.5, "halftone": True},
        identity=None,  # output is always two-valued
    )
)

register(
    EffectDef(
        kind="page_border",
        phase="post",
        default_phase="post",
        fn=page_border,
        fields=(
            Field("widths", "rect", (12, 12, 12, 12)),  # top, right, bottom, left
            Field("color", "color", (0, 0, 0)),
            Field("ragged", "bool", True),
        ),
        midrange={"widths": (14, 14, 14, 14), "ragged": True},
        identity={"widths": (0, 0, 0, 0)},
        changes_dims=True,
    )
)
