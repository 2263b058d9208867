"""Image-fidelity metrics and an OCR regression harness.

The metrics quantify how far a degraded page drifted from its source:
RMSE/PSNR for raw signal error, SSIM for perceived structure, and
Levenshtein/word accuracy for OCR text quality.  The harness runs an
external OCR command over clean/noisy image pairs and reports the word
accuracy drop per file and for the corpus.
"""

from __future__ import annotations

import csv
import math
import shlex
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

from .errors import MetricError
from .raster import Raster, gaussian_kernel, luma

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_K1 = 0.01
_K2 = 0.03
_LEVELS = 255.0


def _check_pair(a: Raster, b: Raster) -> None:
    if a.dims != b.dims:
        raise MetricError(f"image dims differ: {a.dims} vs {b.dims}")


def rmse(a: Raster, b: Raster) -> float:
    """Root-mean-square error over all channels, in 8-bit levels."""
    _check_pair(a, b)
    diff = a.array.astype(np.float64) - b.array.astype(np.float64)
    return float(np.sqrt(np.mean(diff * diff)))


def psnr(a: Raster, b: Raster) -> float:
    """Peak signal-to-noise ratio in dB; identical images give inf."""
    err = rmse(a, b)
    if err == 0.0:
        return float("inf")
    return 20.0 * math.log10(_LEVELS / err)


def _gaussian_filter_valid(img: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Separable weighted filtering, cropped to fully covered positions."""
    r = len(weights) // 2
    out = correlate1d(img, weights, axis=0, mode="constant")
    out = correlate1d(out, weights, axis=1, mode="constant")
    return out[r:-r, r:-r]


def ssim(a: Raster, b: Raster) -> float:
    """Mean structural similarity over an 11x11 Gaussian window (sigma 1.5).

    Computed on luma; only windows fully inside the image contribute, so
    both dimensions must be at least 11 pixels.
    """
    _check_pair(a, b)
    if a.width < _SSIM_WINDOW or a.height < _SSIM_WINDOW:
        raise MetricError(
            f"ssim needs at least {_SSIM_WINDOW}x{_SSIM_WINDOW} pixels, got {a.width}x{a.height}"
        )
    x = luma(a).astype(np.float64)
    y = luma(b).astype(np.float64)
    w = gaussian_kernel(_SSIM_SIGMA)  # sigma 1.5 -> radius 5 -> 11 taps
    mu_x = _gaussian_filter_valid(x, w)
    mu_y = _gaussian_filter_valid(y, w)
    xx = _gaussian_filter_valid(x * x, w)
    yy = _gaussian_filter_valid(y * y, w)
    xy = _gaussian_filter_valid(x * y, w)
    var_x = xx - mu_x * mu_x
    var_y = yy - mu_y * mu_y
    cov = xy - mu_x * mu_y
    c1 = (_K1 * _LEVELS) ** 2
    c2 = (_K2 * _LEVELS) ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


# -- text metrics ---------------------------------------------------------------


def levenshtein(a, b) -> int:
    """Edit distance (insert/delete/substitute, all cost 1).

    Works on strings or token sequences.
    """
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def word_accuracy(hypothesis: str, reference: str) -> float:
    """1 - word_edit_distance / reference_word_count, floored at zero.

    Empty reference: 1.0 when the hypothesis is empty too, else 0.0.
    """
    hyp_words = hypothesis.split()
    ref_words = reference.split()
    if not ref_words:
        return 1.0 if not hyp_words else 0.0
    dist = levenshtein(hyp_words, ref_words)
    return max(0.0, 1.0 - dist / len(ref_words))


# -- OCR harness ---------------------------------------------------------------

CSV_COLUMNS = (
    "file",
    "levenshtein",
    "word_accuracy_clean_vs_gt",
    "word_accuracy_noisy_vs_gt",
    "accuracy_drop",
)


@dataclass(frozen=True)
class OcrRow:
    file: str
    levenshtein: int
    word_accuracy_clean_vs_gt: float
    word_accuracy_noisy_vs_gt: float
    accuracy_drop: float
    failed: bool = False


@dataclass(frozen=True)
class OcrReport:
    rows: tuple[OcrRow, ...]
    mean_accuracy_drop: float

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(CSV_COLUMNS)
            for row in self.rows:
                writer.writerow(
                    [
                        row.file,
                        row.levenshtein,
                        f"{row.word_accuracy_clean_vs_gt:.6f}",
                        f"{row.word_accuracy_noisy_vs_gt:.6f}",
                        f"{row.accuracy_drop:.6f}",
                    ]
                )


def _run_ocr(command: str, image_path: Path) -> tuple[str, bool]:
    """Run the OCR command template on one image; returns (text, ok)."""
    args = [arg.replace("{input}", str(image_path)) for arg in shlex.split(command)]
    try:
        proc = subprocess.run(args, capture_output=True, text=True)
    except OSError:
        return "", False
    if proc.returncode != 0:
        return "", False
    return proc.stdout, True


def ocr_harness(
    clean_dir,
    noisy_dir,
    gt_dir,
    command: str,
    jobs: int = 4,
    image_suffixes: tuple[str, ...] = (".png", ".jpg", ".jpeg"),
) -> OcrReport:
    """Score an OCR command on clean/noisy image pairs against ground truth.

    The three directories are joined by file stem; ``command`` must contain
    an ``{input}`` placeholder.  A file whose OCR run fails is scored as if
    the engine returned empty text, and processing continues.
    """
    clean_dir, noisy_dir, gt_dir = Path(clean_dir), Path(noisy_dir), Path(gt_dir)
    stems = {}
    for path in sorted(clean_dir.iterdir()):
        if path.suffix.lower() in image_suffixes:
            stems[path.stem] = path
    pairs = []
    for stem, clean_path in sorted(stems.items()):
        noisy_path = next(
            (noisy_dir / (stem + suffix) for suffix in image_suffixes
             if (noisy_dir / (stem + suffix)).exists()),
            None,
        )
        gt_path = gt_dir / (stem + ".txt")
        if noisy_path is None or not gt_path.exists():
            continue
        pairs.append((clean_path.name, clean_path, noisy_path, gt_path))
    if "{input}" not in command:
        raise MetricError("OCR command must contain an {input} placeholder")

    def score(pair) -> OcrRow:
        name, clean_path, noisy_path, gt_path = pair
        gt_text = gt_path.read_text()
        clean_text, clean_ok = _run_ocr(command, clean_path)
        noisy_text, noisy_ok = _run_ocr(command, noisy_path)
        acc_clean = word_accuracy(clean_text, gt_text)
        acc_noisy = word_accuracy(noisy_text, gt_text)
        return OcrRow(
            file=name,
            levenshtein=levenshtein(noisy_text.strip(), gt_text.strip()),
            word_accuracy_clean_vs_gt=acc_clean,
            word_accuracy_noisy_vs_gt=acc_noisy,
            accuracy_drop=acc_clean - acc_noisy,
            failed=not (clean_ok and noisy_ok),
        )

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        rows = list(pool.map(score, pairs))
    rows.sort(key=lambda r: r.file)
    mean_drop = float(np.mean([r.accuracy_drop for r in rows])) if rows else 0.0
    return OcrReport(rows=tuple(rows), mean_accuracy_drop=mean_drop)
