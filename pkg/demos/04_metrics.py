"""
Fidelity metrics: how far did the page drift?
=============================================

RMSE and PSNR measure raw signal error, SSIM perceived structure, and
Levenshtein / word accuracy quantify OCR-style text damage.
"""

from docgrunge import EffectNode, PipelineSpec, run
from docgrunge.evalkit import levenshtein, psnr, rmse, ssim, word_accuracy
from docgrunge.samples import synthetic_text_page

page = synthetic_text_page(320, 240, seed=5)

# degrade the same page a little and a lot
light = PipelineSpec(post=(EffectNode(kind="subtle_noise", params={"range": 3}),))
heavy = PipelineSpec(
    post=(
        EffectNode(kind="bad_photocopy", params={"darkness": 0.8}),
        EffectNode(kind="jpeg", params={"quality": 10}),
    )
)

print(f"{'variant':<10} {'rmse':>8} {'psnr':>8} {'ssim':>8}")
for name, spec in (("light", light), ("heavy", heavy)):
    out = run(spec, page, seed=1).output
    print(f"{name:<10} {rmse(out, page):>8.3f} {psnr(out, page):>8.2f} {ssim(out, page):>8.4f}")

# the text metrics work on strings or token lists
gt = "the quick brown fox jumps over the lazy dog"
ocr = "the quick brown fox jumps ovr the lazy d0g"
print(f"\nlevenshtein(chars) = {levenshtein(ocr, gt)}")
print(f"levenshtein(words) = {levenshtein(ocr.split(), gt.split())}")
print(f"word_accuracy      = {word_accuracy(ocr, gt):.3f}")
