"""
Custom specs: gates, parameter ranges, and one-of groups
========================================================

Pipelines are plain JSON documents.  Parameters may be fixed values or
{"min","max"} ranges sampled per run; a one_of group applies exactly one
of its members when its gate fires.
"""

from docgrunge import log_digest, run, spec_from_json
from docgrunge.samples import synthetic_text_page

SPEC = """
{
  "spec_version": 1,
  "seed": 7,
  "ink": [
    {"kind": "bleed_through", "p": 0.7, "params": {"alpha": {"min": 0.2, "max": 0.5}}},
    {"kind": "low_ink_lines", "p": 0.5, "params": {"line_count": 8}}
  ],
  "paper": [
    {"kind": "color_paper", "p": 1.0, "params": {"hue": 30, "saturation": 40}},
    {"kind": "subtle_noise", "p": 1.0, "params": {"range": 4}}
  ],
  "post": [
    {"one_of": [
      {"kind": "jpeg", "params": {"quality": {"min": 15, "max": 40}}},
      {"kind": "faxify", "params": {"target_scale": 0.6}},
      {"kind": "dithering", "params": {"mode": "error_diffusion"}}
    ], "p": 0.9},
    {"kind": "folding", "p": 0.6}
  ]
}
"""

spec = spec_from_json(SPEC)
page = synthetic_text_page(320, 240, seed=3)

# the same document drawn three ways: the seed decides which gates fire,
# which one-of member is chosen, and what each range samples
for seed in (1, 2, 3):
    result = run(spec, page, seed=seed)
    print(f"seed {seed}  digest {log_digest(result)[:16]}...")
    for e in result.entries():
        if not e.applied:
            continue
        member = f" (member {e.member_index})" if e.member_index is not None else ""
        print(f"  {e.phase}/{e.index} {e.kind}{member} params={e.params}")
