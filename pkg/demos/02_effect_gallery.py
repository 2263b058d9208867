"""
Effect gallery: every catalog entry on the same page
====================================================

Runs each effect once at its midrange parameters and writes one image per
effect, so the whole catalog can be eyeballed side by side.
"""

from pathlib import Path

from docgrunge import EffectNode, PipelineSpec, run
from docgrunge.effects import catalog
from docgrunge.raster import encode
from docgrunge.samples import build_texture_dir, synthetic_text_page

out_dir = Path(__file__).parent / "output" / "gallery"
out_dir.mkdir(parents=True, exist_ok=True)

# paper_factory swaps the sheet for a texture file, so give it a few
textures = out_dir / "textures"
if not textures.exists():
    build_texture_dir(textures, count=3, seed=9)

page = synthetic_text_page(320, 240, seed=11)
(out_dir / "_original.png").write_bytes(encode(page))

for kind, defn in sorted(catalog().items()):
    params = dict(defn.midrange)
    if kind == "paper_factory":
        params["texture_dir"] = str(textures)
    # a single-node pipeline in the effect's home phase, gate always open
    node = EffectNode(kind=kind, p=1.0, params=params)
    spec = PipelineSpec(**{defn.default_phase: (node,)}, texture_dir=str(textures))
    result = run(spec, page, seed=99)
    (out_dir / f"{kind}.png").write_bytes(encode(result.output))
    w, h, _ = result.output.dims
    print(f"{kind:<24} {defn.default_phase:<5} -> {w}x{h}")

print(f"\nwrote {len(catalog())} images under {out_dir}")
