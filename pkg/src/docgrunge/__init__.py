"""docgrunge: document-image degradation pipelines with provenance.

Render-quality pages go in; scanner-, printer- and copier-abused pages come
out.  Effects are organized in three phases (ink, paper, post), every node
is probability-gated, and each run logs exactly what fired with the resolved
parameters, so any output can be reproduced from its provenance.
"""

from .errors import (
    ConfigError,
    DecodeError,
    DocgrungeError,
    EffectError,
    MetricError,
    ParamError,
    PlacementError,
    RasterError,
    SpecError,
    UnsupportedFormatError,
)
from .raster import (
    DisplacementField,
    Raster,
    decode,
    encode,
    gaussian_blur,
    hsv_to_rgb,
    luma,
    resample,
    rgb_to_hsv,
    rotate_about_center,
    threshold_otsu,
    to_gray,
    to_rgb,
    warp_affine,
    warp_displacement,
)
from .rng import Substream, derive_key, hash_text
from .synthesis import (
    BLEND_MODES,
    Placement,
    blend,
    extract_foreground,
    make_blob_mask,
    value_noise,
)
from .effects import catalog, get_effect, resolve_params, validate_params
from .pipeline import (
    AugmentationResult,
    ComposedPipeline,
    EffectNode,
    OneOf,
    PipelineOutput,
    PipelineSpec,
    compose_pipelines,
    default_pipeline,
    gate,
    log_digest,
    print_merge,
    provenance_dict,
    provenance_json,
    run,
    spec_from_json,
    wrap_external,
)
from .evalkit import levenshtein, ocr_harness, psnr, rmse, ssim, word_accuracy
from .samples import build_corpus, build_texture_dir, paper_texture, synthetic_text_page

__version__ = "0.1.0"
