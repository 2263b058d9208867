"""8-bit raster images and the sampling primitives built on them.

A :class:`Raster` is an immutable gray (1 channel) or RGB (3 channel) image
with interleaved row-major samples.  All arithmetic in this module follows
one quantization rule: compute in float64, round half away from zero, clamp
to [0, 255].  Geometry ops that look outside the source either clamp to the
edge (``resample``) or read a constant fill value (warps).

Displacement fields are stored as signed 1/16-pixel fixed point so warped
geometry is reproducible bit-for-bit across platforms.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import DecodeError, RasterError, UnsupportedFormatError

# BT.601 luma weights.
_LUMA_R, _LUMA_G, _LUMA_B = 0.299, 0.587, 0.114

FIXED_POINT_SCALE = 16  # displacement field units per pixel


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer, ties away from zero (unlike np.round)."""
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize(x: np.ndarray) -> np.ndarray:
    """Float array -> uint8 samples: round half away from zero, clamp."""
    return np.clip(round_half_away(x), 0.0, 255.0).astype(np.uint8)


class Raster:
    """Immutable 8-bit image, gray or RGB.

    Construct via :meth:`from_array` or :meth:`blank`.  The backing array is
    always (height, width, channels) uint8 with the write flag cleared;
    ``to_array`` hands out a mutable copy for editing.
    """

    __slots__ = ("_data",)

    def __init__(self, data: np.ndarray):
        if data.ndim == 2:
            data = data[:, :, np.newaxis]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise RasterError(f"expected (h, w) or (h, w, 1|3) array, got shape {data.shape}")
        if data.dtype != np.uint8:
            raise RasterError(f"expected uint8 samples, got {data.dtype}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise RasterError(f"empty raster {data.shape[1]}x{data.shape[0]}")
        arr = np.ascontiguousarray(data)
        if arr is data:
            arr = data.copy()
        arr.flags.writeable = False
        self._data = arr

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Raster":
        return cls(np.asarray(arr))

    @classmethod
    def blank(cls, width: int, height: int, channels: int = 1, value: int = 255) -> "Raster":
        if channels not in (1, 3):
            raise RasterError(f"channels must be 1 or 3, got {channels}")
        return cls(np.full((height, width, channels), value, dtype=np.uint8))

    # -- accessors ----------------------------------------------------------

    @property
    def width(self) -> int:
        return self._data.shape[1]

    @property
    def height(self) -> int:
        return self._data.shape[0]

    @property
    def channels(self) -> int:
        return self._data.shape[2]

    @property
    def dims(self) -> tuple[int, int, int]:
        """(width, height, channels)."""
        return (self.width, self.height, self.channels)

    @property
    def array(self) -> np.ndarray:
        """Read-only (h, w, c) view of the samples."""
        return self._data

    @property
    def samples(self) -> bytes:
        """Row-major interleaved sample bytes, length w*h*c."""
        return self._data.tobytes()

    def to_array(self) -> np.ndarray:
        """Mutable copy of the samples."""
        return self._data.copy()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Raster):
            return NotImplemented
        return self._data.shape == other._data.shape and bool(
            np.array_equal(self._data, other._data)
        )

    def __hash__(self):
        return hash((self._data.shape, self._data.tobytes()))

    def __repr__(self) -> str:
        return f"Raster({self.width}x{self.height}x{self.channels})"


@dataclass(frozen=True)
class DisplacementField:
    """Per-pixel (dx, dy) offsets in signed 1/16-pixel fixed point.

    ``dx``/``dy`` are (h, w) int32 arrays; a value of 16 moves sampling one
    full pixel.  Integer storage keeps warps bit-reproducible everywhere.
    """

    dx: np.ndarray
    dy: np.ndarray

    def __post_init__(self):
        if self.dx.shape != self.dy.shape or self.dx.ndim != 2:
            raise RasterError(f"mismatched field shapes {self.dx.shape} vs {self.dy.shape}")
        if self.dx.dtype != np.int32 or self.dy.dtype != np.int32:
            raise RasterError("displacement fields must be int32")

    @classmethod
    def from_pixels(cls, dx: np.ndarray, dy: np.ndarray) -> "DisplacementField":
        """Build from float pixel offsets, rounding to the 1/16 px grid."""
        to_fixed = lambda a: round_half_away(np.asarray(a, dtype=np.float64) * FIXED_POINT_SCALE).astype(np.int32)
        return cls(to_fixed(dx), to_fixed(dy))

    @classmethod
    def zero(cls, width: int, height: int) -> "DisplacementField":
        z = np.zeros((height, width), dtype=np.int32)
        return cls(z, z.copy())


# -- codecs -----------------------------------------------------------------

_PNG_COMPRESS_LEVEL = 6  # pinned so identical pixels encode to identical bytes


def decode(data: bytes) -> Raster:
    """Decode PNG or JPEG bytes.

    Gray sources stay single channel, palette and color sources become RGB,
    higher bit depths are reduced to 8.  Alpha is composited onto white.
    """
    buf = io.BytesIO(data)
    try:
        img = Image.open(buf)
        img.load()
    except UnidentifiedImageError as exc:
        raise DecodeError(str(exc), offset=0) from exc
    except Exception as exc:
        raise DecodeError(str(exc), offset=buf.tell()) from exc

    mode = img.mode
    if mode in ("I", "I;16", "I;16B", "I;16L"):
        arr16 = np.asarray(img, dtype=np.uint32)
        img = Image.fromarray((arr16 >> 8).astype(np.uint8), mode="L")
    elif mode == "P":
        img = img.convert("RGB")
    elif mode in ("RGBA", "LA", "PA"):
        base = img.convert("RGBA")
        white = Image.new("RGBA", base.size, (255, 255, 255, 255))
        img = Image.alpha_composite(white, base).convert("RGB" if mode != "LA" else "L")
    elif mode == "1":
        img = img.convert("L")
    elif mode == "CMYK":
        img = img.convert("RGB")

    if img.mode not in ("L", "RGB"):
        img = img.convert("RGB")
    return Raster(np.asarray(img, dtype=np.uint8))


def encode(r: Raster, format: str = "png", quality: int = 90) -> bytes:
    """Encode to PNG (lossless, deterministic bytes) or baseline JPEG."""
    fmt = format.lower()
    arr = r.array[:, :, 0] if r.channels == 1 else r.array
    img = Image.fromarray(arr, mode="L" if r.channels == 1 else "RGB")
    buf = io.BytesIO()
    if fmt == "png":
        img.save(buf, format="PNG", compress_level=_PNG_COMPRESS_LEVEL, optimize=False)
    elif fmt in ("jpeg", "jpg"):
        if not 1 <= quality <= 100:
            raise UnsupportedFormatError(f"jpeg quality must be in [1, 100], got {quality}")
        # 4:4:4 sampling: chroma loss would otherwise dominate at high quality
        img.save(buf, format="JPEG", quality=quality, optimize=False, subsampling=0)
    else:
        raise UnsupportedFormatError(f"unsupported image format '{format}'")
    return buf.getvalue()


# -- color ------------------------------------------------------------------


def luma(r: Raster) -> np.ndarray:
    """(h, w) uint8 BT.601 luma; gray rasters pass through."""
    if r.channels == 1:
        return r.array[:, :, 0]
    f = r.array.astype(np.float64)
    return quantize(_LUMA_R * f[:, :, 0] + _LUMA_G * f[:, :, 1] + _LUMA_B * f[:, :, 2])


def to_gray(r: Raster) -> Raster:
    if r.channels == 1:
        return r
    return Raster(luma(r))


def to_rgb(r: Raster) -> Raster:
    if r.channels == 3:
        return r
    return Raster(np.repeat(r.array, 3, axis=2))


def rgb_to_hsv(r: Raster) -> Raster:
    """RGB -> HSV with all three channels byte-scaled.

    H maps [0, 360) degrees onto [0, 255]; S and V map [0, 1] onto [0, 255].
    Quantizing hue to a byte costs up to ~0.7 degrees, which bounds the
    round-trip error at 3 levels on fully saturated colors.
    """
    rgb = to_rgb(r).array.astype(np.float64)
    red, green, blue = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    v = np.max(rgb, axis=2)
    c = v - np.min(rgb, axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(v > 0, c / v, 0.0)
        hue = np.zeros_like(v)
        nz = c > 0
        r_max = nz & (red == v)
        g_max = nz & (green == v) & ~r_max
        b_max = nz & (blue == v) & ~r_max & ~g_max
        hue[r_max] = ((green - blue)[r_max] / c[r_max]) % 6.0
        hue[g_max] = (blue - red)[g_max] / c[g_max] + 2.0
        hue[b_max] = (red - green)[b_max] / c[b_max] + 4.0
    h_deg = hue * 60.0
    out = np.stack(
        [
            round_half_away(h_deg * (255.0 / 360.0)),
            round_half_away(s * 255.0),
            v,
        ],
        axis=2,
    )
    return Raster(np.clip(out, 0, 255).astype(np.uint8))


def hsv_to_rgb(r: Raster) -> Raster:
    """Inverse of :func:`rgb_to_hsv` (same byte scaling)."""
    if r.channels != 3:
        raise RasterError("hsv_to_rgb expects a 3-channel raster")
    hsv = r.array.astype(np.float64)
    h_deg = hsv[:, :, 0] * (360.0 / 255.0)
    s = hsv[:, :, 1] / 255.0
    v = hsv[:, :, 2]
    hp = (h_deg / 60.0) % 6.0
    c = v * s
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    m = v - c
    sector = np.floor(hp).astype(np.int64) % 6
    zeros = np.zeros_like(c)
    reds = np.choose(sector, [c, x, zeros, zeros, x, c])
    greens = np.choose(sector, [x, c, c, x, zeros, zeros])
    blues = np.choose(sector, [zeros, zeros, x, c, c, x])
    out = np.stack([reds + m, greens + m, blues + m], axis=2)
    return Raster(quantize(out))


# -- sampling ---------------------------------------------------------------


def _bilinear_gather(arr: np.ndarray, xs: np.ndarray, ys: np.ndarray, fill: np.ndarray) -> np.ndarray:
    """Sample float (h, w, c) at float coords; outside reads ``fill``."""
    h, w = arr.shape[:2]
    x0 = np.floor(xs)
    y0 = np.floor(ys)
    fx = (xs - x0)[:, :, np.newaxis]
    fy = (ys - y0)[:, :, np.newaxis]
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)

    def tap(xi, yi):
        valid = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
        vals = arr[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)]
        return np.where(valid[:, :, np.newaxis], vals, fill)

    v00 = tap(x0, y0)
    v10 = tap(x0 + 1, y0)
    v01 = tap(x0, y0 + 1)
    v11 = tap(x0 + 1, y0 + 1)
    top = v00 * (1.0 - fx) + v10 * fx
    bot = v01 * (1.0 - fx) + v11 * fx
    return top * (1.0 - fy) + bot * fy


def resample(r: Raster, width: int, height: int, method: str = "bilinear") -> Raster:
    """Resize with pixel-center alignment; same-size bilinear is an exact copy."""
    if width < 1 or height < 1:
        raise RasterError(f"target size {width}x{height} is empty")
    if method not in ("bilinear", "nearest"):
        raise RasterError(f"unknown resample method '{method}'")
    if (width, height) == (r.width, r.height):
        return r
    sx = r.width / width
    sy = r.height / height
    dst_x = np.arange(width, dtype=np.float64)
    dst_y = np.arange(height, dtype=np.float64)
    if method == "nearest":
        src_x = np.clip(np.floor((dst_x + 0.5) * sx), 0, r.width - 1).astype(np.int64)
        src_y = np.clip(np.floor((dst_y + 0.5) * sy), 0, r.height - 1).astype(np.int64)
        return Raster(r.array[src_y[:, np.newaxis], src_x[np.newaxis, :]])
    src_x = np.clip((dst_x + 0.5) * sx - 0.5, 0.0, r.width - 1.0)
    src_y = np.clip((dst_y + 0.5) * sy - 0.5, 0.0, r.height - 1.0)
    xs, ys = np.meshgrid(src_x, src_y)
    out = _bilinear_gather(r.array.astype(np.float64), xs, ys, np.zeros(r.channels))
    return Raster(quantize(out))


def _fill_vector(r: Raster, fill) -> np.ndarray:
    if np.isscalar(fill):
        return np.full(r.channels, float(fill))
    vec = np.asarray(fill, dtype=np.float64).ravel()
    if vec.size != r.channels:
        raise RasterError(f"fill has {vec.size} components, raster has {r.channels}")
    return vec


def warp_affine(r: Raster, matrix, fill=255) -> Raster:
    """Apply a 2x3 affine map (source -> destination coords), bilinear.

    Destination pixels that map outside the source read the fill color.  A
    singular matrix collapses the image to the fill (degenerate, no error).
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.shape != (2, 3):
        raise RasterError(f"affine matrix must be 2x3, got {m.shape}")
    fillv = _fill_vector(r, fill)
    a, b, c = m[0]
    d, e, f = m[1]
    det = a * e - b * d
    if abs(det) < 1e-12:
        blank = np.tile(quantize(fillv), (r.height, r.width, 1))
        return Raster(blank)
    dst_x, dst_y = np.meshgrid(
        np.arange(r.width, dtype=np.float64), np.arange(r.height, dtype=np.float64)
    )
    tx = dst_x - c
    ty = dst_y - f
    src_x = (e * tx - b * ty) / det
    src_y = (-d * tx + a * ty) / det
    out = _bilinear_gather(r.array.astype(np.float64), src_x, src_y, fillv)
    return Raster(quantize(out))


def warp_displacement(r: Raster, field: DisplacementField, fill=255) -> Raster:
    """Sample each output pixel at (x + dx, y + dy); offsets in 1/16 px."""
    if field.dx.shape != (r.height, r.width):
        raise RasterError(
            f"field shape {field.dx.shape} does not match raster {r.height}x{r.width}"
        )
    fillv = _fill_vector(r, fill)
    dst_x, dst_y = np.meshgrid(
        np.arange(r.width, dtype=np.float64), np.arange(r.height, dtype=np.float64)
    )
    xs = dst_x + field.dx / FIXED_POINT_SCALE
    ys = dst_y + field.dy / FIXED_POINT_SCALE
    out = _bilinear_gather(r.array.astype(np.float64), xs, ys, fillv)
    return Raster(quantize(out))


def rotate_about_center(r: Raster, degrees: float, fill=255) -> Raster:
    """Convenience affine: rotate around the image center, same canvas."""
    theta = np.deg2rad(degrees)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    cx, cy = (r.width - 1) / 2.0, (r.height - 1) / 2.0
    # dst = R @ (src - center) + center
    matrix = [
        [cos_t, -sin_t, cx - cos_t * cx + sin_t * cy],
        [sin_t, cos_t, cy - sin_t * cx - cos_t * cy],
    ]
    return warp_affine(r, matrix, fill=fill)


# -- filtering --------------------------------------------------------------


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D Gaussian taps, radius ceil(3*sigma), normalized to sum 1."""
    if sigma <= 0:
        raise RasterError(f"sigma must be positive, got {sigma}")
    radius = int(np.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(r: Raster, sigma: float) -> Raster:
    """Separable Gaussian blur with edge replication; sigma=0 is a no-op."""
    if sigma == 0:
        return r
    k = gaussian_kernel(sigma)
    f = r.array.astype(np.float64)
    f = ndimage.correlate1d(f, k, axis=1, mode="nearest")
    f = ndimage.correlate1d(f, k, axis=0, mode="nearest")
    return Raster(quantize(f))


def threshold_otsu(r: Raster) -> tuple[int, Raster]:
    """Otsu threshold on luma.

    Returns ``(t, mask)`` where the mask is 255 for samples >= t (the bright
    class) and 0 below.  Among equal-variance thresholds the lowest wins; a
    constant image yields its own value and an all-255 mask.
    """
    y = luma(r)
    hist = np.bincount(y.ravel(), minlength=256).astype(np.int64)
    total = int(y.size)
    counts = np.cumsum(hist)
    weighted = np.cumsum(hist * np.arange(256, dtype=np.int64))
    grand = int(weighted[-1])

    w0 = counts[:-1].astype(np.float64)  # class [0, t) for t = 1..255
    w1 = total - w0
    valid = (w0 > 0) & (w1 > 0)
    if not valid.any():
        t = int(np.argmax(hist))
        mask = np.full((r.height, r.width), 255, dtype=np.uint8)
        return t, Raster(mask)
    sum0 = weighted[:-1].astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = sum0 / w0
        mu1 = (grand - sum0) / w1
        between = np.where(valid, w0 * w1 * (mu0 - mu1) ** 2, -1.0)
    t = int(np.argmax(between)) + 1
    mask = np.where(y >= t, 255, 0).astype(np.uint8)
    return t, Raster(mask)
