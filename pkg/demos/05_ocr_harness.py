"""
OCR regression harness: clean vs degraded word accuracy
=======================================================

The harness runs an external OCR command (any program that prints text for
an {input} image) over clean/noisy pairs and reports the per-file and mean
word accuracy drop against ground truth.

A real run would point at tesseract, e.g.:
    command = "tesseract {input} stdout --psm 6"
This demo uses a stub that "reads" every page perfectly, so the identity
pipeline shows a 0.0 drop - the plumbing check.
"""

import sys
from pathlib import Path

from docgrunge.evalkit import ocr_harness
from docgrunge.pipeline import PipelineSpec, run as run_pipeline
from docgrunge.raster import encode
from docgrunge.samples import synthetic_text_page

root = Path(__file__).parent / "output" / "ocr"
clean, noisy, gt = root / "clean", root / "noisy", root / "gt"
for d in (clean, noisy, gt):
    d.mkdir(parents=True, exist_ok=True)

# three pages, ground truth alongside; noisy = identity pipeline output
for i in range(3):
    page = synthetic_text_page(200, 150, seed=i)
    (clean / f"doc_{i}.png").write_bytes(encode(page))
    out = run_pipeline(PipelineSpec(), page, seed=i)
    (noisy / f"doc_{i}.png").write_bytes(encode(out.output))
    (gt / f"doc_{i}.txt").write_text("lorem ipsum dolor sit amet")

stub = f"{sys.executable} -c \"print('lorem ipsum dolor sit amet')\" {{input}}"
report = ocr_harness(clean, noisy, gt, stub, jobs=2)
report.write_csv(root / "report.csv")

for row in report.rows:
    print(
        f"{row.file:<12} clean={row.word_accuracy_clean_vs_gt:.3f}"
        f" noisy={row.word_accuracy_noisy_vs_gt:.3f} drop={row.accuracy_drop:.3f}"
    )
print(f"\nmean accuracy drop: {report.mean_accuracy_drop:.6f}")
print(f"wrote {root / 'report.csv'}")
