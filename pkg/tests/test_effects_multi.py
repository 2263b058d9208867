"""Phase-agnostic effects: tone textures, device bands, dithers, geometry,
and scribbles."""

import numpy as np
import pytest

from conftest import apply_effect, rand_raster
from docgrunge.errors import ParamError
from docgrunge.raster import Raster, rotate_about_center

IDENTITY_CASES = [
    ("brightness_texturize", {"deviation": 0.0}),
    ("dirty_drum", {"intensity": 0.0}),
    ("dirty_rollers", {"gain_min": 1.0, "gain_max": 1.0}),
    ("geometric", {}),
    ("noise_texturize", {"strength": 0.0}),
    ("pencil_scribbles", {"stroke_count": 0}),
]


@pytest.mark.parametrize("kind,params", IDENTITY_CASES)
def test_identity_params_are_noops(kind, params, page_rgb, page_gray):
    for page in (page_rgb, page_gray):
        out = apply_effect(kind, page, params)
        assert np.array_equal(out.array, page.array), kind


# -- brightness_texturize ------------------------------------------------------


def test_brightness_texturize_white_statistics():
    white = Raster.blank(96, 96, 1, 255)
    out = apply_effect("brightness_texturize", white, {"deviation": 0.1, "passes": 1}, seed=1)
    mean = float(out.array.mean())
    assert 0.94 * 255.0 <= mean <= 255.0
    assert float(out.array.std()) > 0.0
    assert int(out.array.max()) <= 255


def test_brightness_texturize_black_is_fixed():
    black = Raster.blank(32, 32, 3, 0)
    out = apply_effect("brightness_texturize", black, {"deviation": 0.3, "passes": 2}, seed=2)
    assert np.array_equal(out.array, black.array)


def test_brightness_texturize_scales_channels_together():
    base = Raster(np.full((48, 48, 3), (200, 100, 50), dtype=np.uint8))
    out = apply_effect("brightness_texturize", base, {"deviation": 0.2, "passes": 1}, seed=3)
    f = out.array.astype(np.float64)
    # hue is preserved: channel ratios move together within rounding
    ratio = f[:, :, 1] / np.maximum(f[:, :, 0], 1.0)
    assert np.abs(ratio - 0.5).max() <= 0.02


# -- dirty_drum ----------------------------------------------------------------


def test_dirty_drum_vertical_bands_piecewise_constant():
    base = Raster.blank(64, 40, 1, 128)
    out = apply_effect(
        "dirty_drum", base, {"direction": "v", "band_width": 8, "intensity": 0.25}, seed=4
    )
    col_means = out.array[:, :, 0].mean(axis=0)
    bands = col_means.reshape(8, 8)
    assert np.all(bands == bands[:, :1])  # constant inside each band
    assert len(np.unique(bands[:, 0])) > 1
    assert int(out.array.min()) >= 96 - 1 and int(out.array.max()) <= 160 + 1


def test_dirty_drum_horizontal_bands():
    base = Raster.blank(40, 32, 1, 128)
    out = apply_effect(
        "dirty_drum", base, {"direction": "h", "band_width": 4, "intensity": 0.2}, seed=5
    )
    row_vals = out.array[:, :, 0]
    assert np.all(row_vals == row_vals[:, :1])
    bands = row_vals[:, 0].reshape(8, 4)
    assert np.all(bands == bands[:, :1])


# -- dirty_rollers -------------------------------------------------------------


def test_dirty_rollers_rowwise_uniform_gains():
    base = Raster.blank(50, 60, 1, 128)
    out = apply_effect(
        "dirty_rollers",
        base,
        {"band_width_min": 4, "band_width_max": 10, "gain_min": 0.8, "gain_max": 1.2},
        seed=6,
    )
    vals = out.array[:, :, 0]
    assert np.all(vals == vals[:, :1])  # each row has one gain
    assert int(vals.min()) >= int(128 * 0.8) - 1
    assert int(vals.max()) <= int(np.ceil(128 * 1.2)) + 1
    # several distinct bands appear over 60 rows
    assert len(np.unique(vals[:, 0])) >= 3


def test_dirty_rollers_validation():
    base = Raster.blank(8, 8, 1, 128)
    with pytest.raises(ParamError):
        apply_effect("dirty_rollers", base, {"band_width_min": 9, "band_width_max": 4})
    with pytest.raises(ParamError):
        apply_effect("dirty_rollers", base, {"gain_min": 1.2, "gain_max": 0.9})


# -- dithering -----------------------------------------------------------------


@pytest.mark.parametrize("mode", ["ordered", "error_diffusion"])
def test_dithering_fixed_points_and_idempotence(mode):
    black = Raster.blank(16, 16, 1, 0)
    white = Raster.blank(16, 16, 1, 255)
    assert np.all(apply_effect("dithering", black, {"mode": mode}).array == 0)
    assert np.all(apply_effect("dithering", white, {"mode": mode}).array == 255)
    mid = rand_raster(7, 32, 32, channels=1)
    once = apply_effect("dithering", mid, {"mode": mode})
    twice = apply_effect("dithering", once, {"mode": mode})
    assert set(np.unique(once.array).tolist()) <= {0, 255}
    assert np.array_equal(once.array, twice.array)


def test_dithering_error_diffusion_preserves_mean():
    mid = Raster.blank(64, 64, 1, 128)
    out = apply_effect("dithering", mid, {"mode": "error_diffusion"})
    assert abs(float(out.array.mean()) - 128.0) <= 2.0
    ramp = Raster(np.tile(np.arange(256, dtype=np.uint8), (64, 1)))
    out = apply_effect("dithering", ramp, {"mode": "error_diffusion"})
    assert abs(float(out.array.mean()) - float(ramp.array.mean())) <= 2.0


def test_dithering_rgb_gets_equal_channels(page_rgb):
    out = apply_effect("dithering", page_rgb, {"mode": "ordered"})
    assert out.channels == 3
    assert np.array_equal(out.array[:, :, 0], out.array[:, :, 1])
    assert np.array_equal(out.array[:, :, 1], out.array[:, :, 2])


# -- geometric -----------------------------------------------------------------


def test_geometric_scale_halves_dims():
    img = rand_raster(8, 100, 80)
    out = apply_effect("geometric", img, {"scale": 0.5})
    assert (out.width, out.height) == (50, 40)


def test_geometric_crop_is_a_slice():
    img = rand_raster(9, 100, 80)
    out = apply_effect("geometric", img, {"crop": (10, 5, 60, 45)})
    assert (out.width, out.height) == (50, 40)
    assert np.array_equal(out.array, img.array[5:45, 10:60])


def test_geometric_bad_crop_rejected():
    img = rand_raster(10, 50, 50)
    with pytest.raises(ParamError):
        apply_effect("geometric", img, {"crop": (40, 0, 60, 20)})


def test_geometric_double_flip_is_identity(page_rgb):
    once = apply_effect("geometric", page_rgb, {"flip_h": True, "flip_v": True})
    twice = apply_effect("geometric", once, {"flip_h": True, "flip_v": True})
    assert not np.array_equal(once.array, page_rgb.array)
    assert np.array_equal(twice.array, page_rgb.array)


def test_geometric_rotation_matches_primitive(page_gray):
    out = apply_effect("geometric", page_gray, {"rotate_deg": 90.0})
    direct = rotate_about_center(page_gray, 90.0, fill=255)
    assert np.array_equal(out.array, direct.array)


def test_geometric_translate_fills_white():
    img = rand_raster(11, 30, 20)
    out = apply_effect("geometric", img, {"translate_x": 4, "translate_y": 3})
    assert np.array_equal(out.array[3:, 4:], img.array[:-3, :-4])
    assert np.all(out.array[:3] == 255)
    assert np.all(out.array[:, :4] == 255)


# -- noise_texturize -----------------------------------------------------------


def test_noise_texturize_band_and_black_fixed():
    base = Raster.blank(96, 96, 1, 128)
    out = apply_effect(
        "noise_texturize", base, {"strength": 0.3, "octaves": 3, "base_scale": 24.0}, seed=12
    )
    assert float(out.array.std()) > 0.0
    assert int(out.array.min()) >= int(128 * 0.7) - 1
    assert int(out.array.max()) <= int(np.ceil(128 * 1.3)) + 1
    black = Raster.blank(32, 32, 1, 0)
    out = apply_effect("noise_texturize", black, {"strength": 0.8}, seed=12)
    assert np.array_equal(out.array, black.array)


def test_noise_texturize_is_spatially_correlated():
    base = Raster.blank(128, 128, 1, 128)
    out = apply_effect(
        "noise_texturize", base, {"strength": 0.3, "octaves": 2, "base_scale": 32.0}, seed=13
    )
    f = out.array[:, :, 0].astype(np.float64)
    adjacent = np.abs(np.diff(f, axis=1)).mean()
    spread = np.abs(f - f.mean()).mean()
    # a smooth gain field moves neighbors together
    assert adjacent < 0.5 * spread


# -- pencil_scribbles ----------------------------------------------------------


def test_pencil_scribbles_darken_only_in_stroke_gray():
    white = Raster.blank(120, 90, 1, 255)
    out = apply_effect(
        "pencil_scribbles", white, {"stroke_count": 3, "thickness": 2, "gray": 70}, seed=14
    )
    changed = out.array != white.array
    assert changed.any()
    assert set(np.unique(out.array[changed]).tolist()) == {70}
    frac = float(changed.mean())
    assert 0.0 < frac < 0.5


def test_pencil_scribbles_never_brighten(page_gray):
    out = apply_effect(
        "pencil_scribbles", page_gray, {"stroke_count": 5, "thickness": 3, "gray": 90}, seed=15
    )
    assert np.all(out.array <= page_gray.array)


def test_pencil_scribbles_deterministic(page_rgb):
    a = apply_effect("pencil_scribbles", page_rgb, {"stroke_count": 4}, seed=16)
    b = apply_effect("pencil_scribbles", page_rgb, {"stroke_count": 4}, seed=16)
    c = apply_effect("pencil_scribbles", page_rgb, {"stroke_count": 4}, seed=17)
    assert np.array_equal(a.array, b.array)
    assert not np.array_equal(a.array, c.array)
