"""pybridge: in-process binding over docgrunge pipelines.

A thin layer for ML training loops: load a spec once, then call
:func:`augment` per sample on plain uint8 numpy arrays and get back a fresh
output array plus the provenance JSON text.

The binding adds only buffer checks and lifetime guarantees; validation,
sampling, and every effect are the core engine's, so error messages and
output bytes match the ``docgrunge`` CLI exactly.  Input buffers are
borrowed for the duration of the call and never written; output arrays own
fresh memory.  There is no module-level mutable state, and the heavy
numeric kernels release the interpreter lock internally, so concurrent
:func:`augment` calls on shared or distinct handles are safe.
"""

from dataclasses import dataclass

import numpy as np

from docgrunge import DocgrungeError, Raster, SpecError, provenance_json, run, spec_from_json
from docgrunge import default_pipeline as _default_spec
from docgrunge.pipeline import PipelineSpec, load_builtin

__all__ = [
    "BoundPipeline",
    "DocgrungeError",
    "SpecError",
    "augment",
    "default_pipeline",
    "load_pipeline",
]

__version__ = "0.1.0"


@dataclass(frozen=True)
class BoundPipeline:
    """Validated pipeline handle plus its base seed.

    Immutable after construction, hence freely shareable between threads;
    a call never touches state on the handle.
    """

    spec: PipelineSpec
    seed: int

    def augment(self, buffer: np.ndarray, seed: int | None = None):
        return augment(self, buffer, seed)


def load_pipeline(spec_json: str) -> BoundPipeline:
    """Bind a pipeline from spec JSON text or a built-in name.

    Anything that starts with ``{`` is parsed as a JSON document; other
    strings name a built-in (``"default"``).  Validation failures propagate
    from the core untouched: a JSON pointer for schema violations, a byte
    offset for malformed documents, the kind string for unknown effects.
    """
    if not isinstance(spec_json, str):
        raise TypeError(f"spec_json must be str, got {type(spec_json).__name__}")
    text = spec_json.strip()
    spec = spec_from_json(spec_json) if text.startswith("{") else load_builtin(text)
    return BoundPipeline(spec=spec, seed=spec.seed)


def default_pipeline(
    texture_dir: str | None = None, p: float = 0.3, seed: int = 0
) -> BoundPipeline:
    """Whole-catalog pipeline with every gate at ``p``, ready to augment."""
    spec = _default_spec(texture_dir=texture_dir, p=p, seed=seed)
    return BoundPipeline(spec=spec, seed=spec.seed)


def augment(
    bp: BoundPipeline, buffer: np.ndarray, seed: int | None = None
) -> tuple[np.ndarray, str]:
    """Degrade one image; returns ``(output array, provenance JSON text)``.

    ``buffer`` must be a C-contiguous uint8 array shaped (h, w) or
    (h, w, 1|3); anything else raises TypeError before any bytes are
    copied.  ``seed`` defaults to the handle's base seed.
    """
    if not isinstance(bp, BoundPipeline):
        raise TypeError(f"expected BoundPipeline, got {type(bp).__name__}")
    if not isinstance(buffer, np.ndarray):
        # no asarray here: coercion could silently copy arbitrary objects
        raise TypeError(f"expected a numpy uint8 array, got {type(buffer).__name__}")
    if buffer.dtype != np.uint8:
        raise TypeError(f"expected uint8 samples, got {buffer.dtype}")
    if buffer.ndim not in (2, 3) or (buffer.ndim == 3 and buffer.shape[2] not in (1, 3)):
        raise TypeError(f"expected (h, w) or (h, w, 1|3) array, got shape {buffer.shape}")
    if not buffer.flags.c_contiguous:
        raise TypeError("expected a C-contiguous buffer, got a strided view")
    result = run(bp.spec, Raster.from_array(buffer), bp.seed if seed is None else seed)
    return result.output.to_array(), provenance_json(result)
