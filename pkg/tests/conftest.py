import numpy as np
import pytest

from docgrunge.effects import get_effect, resolve_params, validate_params
from docgrunge.raster import Raster
from docgrunge.rng import Substream, derive_key
from docgrunge.samples import build_corpus, build_texture_dir, synthetic_text_page


def apply_effect(kind, img, params=None, seed=0):
    """Run one effect directly, with params resolved the way the pipeline does."""
    canonical = validate_params(kind, dict(params or {}))
    resolved = resolve_params(kind, canonical, Substream(derive_key(seed, 1)))
    return get_effect(kind).fn(img, resolved, Substream(derive_key(seed, 2)))


@pytest.fixture
def page_rgb():
    return synthetic_text_page(200, 150, seed=7, channels=3)


@pytest.fixture
def page_gray():
    return synthetic_text_page(200, 150, seed=7, channels=1)


@pytest.fixture
def white_rgb():
    return Raster.blank(96, 80, 3, 255)


@pytest.fixture(scope="session")
def texture_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("textures")
    build_texture_dir(d, count=3, seed=9)
    return str(d)


@pytest.fixture(scope="session")
def white_texture_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("white_textures")
    build_texture_dir(d, count=1, seed=0, white=True)
    return str(d)


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    build_corpus(d, count=20, seed=0)
    return d


def rand_raster(seed, width, height, channels=3):
    rng = np.random.default_rng(seed)
    shape = (height, width) if channels == 1 else (height, width, channels)
    return Raster(rng.integers(0, 256, size=shape, dtype=np.uint8))
