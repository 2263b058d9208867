"""
Quickstart: degrade one page with the default pipeline
======================================================

Builds a synthetic text page, pushes it through the built-in catalog
pipeline, and saves the before/after images plus the run's provenance.
"""

from pathlib import Path

# the library splits a degradation run into ink, paper, and post phases
from docgrunge import default_pipeline, provenance_json, run
from docgrunge.raster import encode
from docgrunge.samples import synthetic_text_page

out_dir = Path(__file__).parent / "output" / "quickstart"
out_dir.mkdir(parents=True, exist_ok=True)

# a clean page: white sheet with dark dashed "text" rows
page = synthetic_text_page(400, 300, seed=7)
(out_dir / "clean.png").write_bytes(encode(page))

# every catalog effect at probability 0.3, in its home phase
spec = default_pipeline(p=0.3)
result = run(spec, page, seed=2024)
(out_dir / "degraded.png").write_bytes(encode(result.output))

# the run log records what fired, with the exact parameters it sampled
(out_dir / "provenance.json").write_text(provenance_json(result) + "\n")

applied = [e.kind for e in result.entries() if e.applied]
print(f"applied {len(applied)} effects: {', '.join(applied)}")
print(f"wrote {out_dir}/clean.png, degraded.png, provenance.json")
