"""Command line interface.

Subcommands:

* ``augment``   degrade a file or directory tree, write provenance + manifest
* ``preview``   render one input under several seeds into a contact sheet
* ``inspect``   pretty-print a provenance file and re-check its digest
* ``metrics``   print rmse/psnr/ssim for an image pair
* ``ocr-eval``  run an external OCR command over clean/noisy pairs

Exit codes: 0 success, 2 configuration or usage error, 3 partial failure
(some inputs were skipped).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import pipeline as pl
from .errors import DocgrungeError
from .evalkit import ocr_harness, psnr, rmse, ssim
from .raster import Raster, decode, encode
from .rng import derive_key, hash_text

TEXTURES_ENV = "DOCGRUNGE_TEXTURES"
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

# 5x7 glyphs for caption strips; rows are 5-bit masks, MSB leftmost
_FONT = {
    "0": (0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110),
    "1": (0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110),
    "2": (0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111),
    "3": (0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110),
    "4": (0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010),
    "5": (0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110),
    "6": (0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110),
    "7": (0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000),
    "8": (0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110),
    "9": (0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100),
    "#": (0b01010, 0b01010, 0b11111, 0b01010, 0b11111, 0b01010, 0b01010),
    "-": (0b00000, 0b00000, 0b00000, 0b11111, 0b00000, 0b00000, 0b00000),
}


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _load_spec(value: str, texture_dir: str | None) -> pl.PipelineSpec:
    """Resolve --spec: an existing file path first, then a built-in name."""
    path = Path(value)
    if path.exists():
        spec = pl.spec_from_json(path.read_text())
    elif value in pl.BUILTIN_SPECS:
        spec = pl.load_builtin(value, texture_dir=texture_dir)
    else:
        raise DocgrungeError(f"spec '{value}' is neither a file nor a built-in name")
    if texture_dir and not spec.texture_dir:
        spec = replace(spec, texture_dir=texture_dir)
    return spec


def _effective_texture_dir(flag_value: str | None) -> str | None:
    return flag_value or os.environ.get(TEXTURES_ENV) or None


def _iter_inputs(root: Path):
    """Yield (absolute path, output-relative posix path) for image inputs."""
    if root.is_file():
        yield root, root.name
        return
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.suffix.lower() in IMAGE_SUFFIXES:
            yield path, path.relative_to(root).as_posix()


def _write_intermediates(out_root: Path, rel: str, result: pl.PipelineOutput) -> None:
    base = out_root / "intermediates" / Path(rel).with_suffix("")
    base.mkdir(parents=True, exist_ok=True)
    for entry in result.entries():
        if entry.intermediate is None:
            continue
        member = "" if entry.member_index is None else f"_m{entry.member_index}"
        name = f"{entry.phase}_{entry.index:02d}{member}_{entry.kind}.png"
        (base / name).write_bytes(encode(entry.intermediate))


def cmd_augment(args) -> int:
    texture_dir = _effective_texture_dir(args.texture_dir)
    try:
        spec = _load_spec(args.spec, texture_dir)
        if args.save_intermediates:
            spec = replace(spec, save_intermediates=True)
        spec.validate()
    except DocgrungeError as exc:
        return _error(str(exc))
    in_root = Path(args.input)
    if not in_root.exists():
        return _error(f"input path '{in_root}' does not exist")
    out_root = Path(args.output)
    out_root.mkdir(parents=True, exist_ok=True)
    base_seed = args.seed if args.seed is not None else spec.seed
    suffix = ".png" if args.format == "png" else ".jpg"
    inputs = list(_iter_inputs(in_root))
    if not inputs:
        return _error(f"no images found under '{in_root}'")

    def process(item):
        path, rel = item
        try:
            img = decode(path.read_bytes())
        except DocgrungeError as exc:
            return rel, None, str(exc)
        file_seed = derive_key(base_seed, hash_text(rel))
        result = pl.run(spec, img, seed=file_seed)
        out_path = (out_root / rel).with_suffix(suffix)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_bytes(encode(result.output, format=args.format, quality=args.quality))
        prov_path = (out_root / "provenance" / rel).with_suffix(".json")
        prov_path.parent.mkdir(parents=True, exist_ok=True)
        prov_path.write_text(pl.provenance_json(result) + "\n")
        if spec.save_intermediates:
            _write_intermediates(out_root, rel, result)
        return rel, {"file": rel, "seed": file_seed, "log_digest": pl.log_digest(result)}, None

    jobs = max(1, args.jobs)
    if jobs == 1:
        outcomes = [process(item) for item in inputs]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(process, inputs))

    records, skipped = [], 0
    for rel, record, failure in outcomes:
        if failure is not None:
            _warn(f"skipping {rel}: {failure}")
            skipped += 1
        else:
            records.append(record)
    records.sort(key=lambda r: r["file"])
    manifest = {
        "spec_version": pl.SPEC_VERSION,
        "seed": base_seed,
        "files": records,
    }
    (out_root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    if skipped and not records:
        return _error("all inputs failed to decode")
    return 3 if skipped else 0


def _caption(text: str, width: int, height: int = 12) -> np.ndarray:
    """White strip with the text drawn in 5x7 black pixels, left-aligned."""
    strip = np.full((height, width), 255, dtype=np.uint8)
    x, y = 2, (height - 7) // 2
    for ch in text:
        glyph = _FONT.get(ch)
        if glyph is None:
            x += 6
            continue
        if x + 5 > width:
            break
        for row, bits in enumerate(glyph):
            for col in range(5):
                if bits & (1 << (4 - col)):
                    strip[y + row, x + col] = 0
        x += 6
    return strip


def cmd_preview(args) -> int:
    texture_dir = _effective_texture_dir(args.texture_dir)
    try:
        spec = _load_spec(args.spec, texture_dir)
        spec.validate()
        img = decode(Path(args.input).read_bytes())
    except (DocgrungeError, OSError) as exc:
        return _error(str(exc))
    n = args.n
    if n < 1:
        return _error(f"--n must be at least 1, got {n}")
    base_seed = args.seed if args.seed is not None else spec.seed
    variants = [pl.run(spec, img, seed=base_seed + i) for i in range(n)]

    tiles = [v.output for v in variants]
    tile_w = max(t.width for t in tiles)
    tile_h = max(t.height for t in tiles)
    caption_h = 12
    cols = math.ceil(math.sqrt(n))
    rows = math.ceil(n / cols)
    gutter = margin = 8
    cell_h = tile_h + caption_h
    sheet_w = 2 * margin + cols * tile_w + (cols - 1) * gutter
    sheet_h = 2 * margin + rows * cell_h + (rows - 1) * gutter
    channels = max(t.channels for t in tiles)
    sheet = np.full((sheet_h, sheet_w, channels), 255, dtype=np.uint8)
    for i, tile in enumerate(tiles):
        r, c = divmod(i, cols)
        x0 = margin + c * (tile_w + gutter)
        y0 = margin + r * (cell_h + gutter)
        # letterbox: center the variant inside the common tile box
        ox = x0 + (tile_w - tile.width) // 2
        oy = y0 + (tile_h - tile.height) // 2
        arr = tile.array
        if tile.channels != channels:
            arr = np.repeat(arr, channels, axis=2)
        sheet[oy : oy + tile.height, ox : ox + tile.width] = arr
        cap = _caption(f"#{base_seed + i}", tile_w, caption_h)
        sheet[y0 + tile_h : y0 + cell_h, x0 : x0 + tile_w] = cap[:, :, None]
    out = Raster(sheet if channels == 3 else sheet[:, :, 0])
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    Path(args.output).write_bytes(encode(out))
    return 0


def cmd_inspect(args) -> int:
    try:
        doc = json.loads(Path(args.provenance).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        return _error(f"cannot read provenance: {exc}")
    print(f"spec_version: {doc.get('spec_version')}  seed: {doc.get('seed')}")
    for phase in doc.get("phases", []):
        print(f"[{phase.get('phase')}]")
        for node in phase.get("nodes", []):
            mark = "applied" if node.get("applied") else "skipped"
            member = (
                f" member {node['member_index']}" if "member_index" in node else ""
            )
            dims_in = "x".join(str(v) for v in node.get("input_dims", []))
            dims_out = "x".join(str(v) for v in node.get("output_dims", []))
            print(
                f"  {node.get('index'):>2}{member} {node.get('kind'):<22} {mark:<7}"
                f" p={node.get('p')} {dims_in}->{dims_out}"
            )
            if node.get("applied") and node.get("params"):
                print(f"      params: {json.dumps(node['params'], sort_keys=True)}")
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(canonical.encode("utf-8")).hexdigest()
    print(f"digest: {digest}")
    if args.manifest:
        try:
            manifest = json.loads(Path(args.manifest).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            return _error(f"cannot read manifest: {exc}")
        stem = Path(args.provenance).stem
        match = next(
            (f for f in manifest.get("files", []) if Path(f["file"]).stem == stem), None
        )
        if match is None:
            return _error(f"manifest has no entry for '{stem}'")
        if match["log_digest"] == digest:
            print("manifest: MATCH")
        else:
            print("manifest: MISMATCH")
            return 2
    return 0


def cmd_metrics(args) -> int:
    try:
        a = decode(Path(args.a).read_bytes())
        b = decode(Path(args.b).read_bytes())
        values = [("rmse", rmse(a, b)), ("psnr", psnr(a, b)), ("ssim", ssim(a, b))]
    except (DocgrungeError, OSError) as exc:
        return _error(str(exc))
    for name, value in values:
        text = "inf" if math.isinf(value) else f"{value:.6f}"
        print(f"{name}: {text}")
    return 0


def cmd_ocr_eval(args) -> int:
    try:
        report = ocr_harness(
            args.clean, args.noisy, args.gt, args.command, jobs=args.jobs
        )
    except (DocgrungeError, OSError) as exc:
        return _error(str(exc))
    report.write_csv(args.output)
    print(f"files: {len(report.rows)}")
    print(f"mean_accuracy_drop: {report.mean_accuracy_drop:.6f}")
    if any(row.failed for row in report.rows):
        return 3
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="docgrunge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_aug = sub.add_parser("augment", help="degrade a file or directory tree")
    p_aug.add_argument("--input", required=True)
    p_aug.add_argument("--output", required=True)
    p_aug.add_argument("--spec", required=True, help="spec file path or built-in name")
    p_aug.add_argument("--seed", type=int, default=None)
    p_aug.add_argument("--jobs", type=int, default=1)
    p_aug.add_argument("--save-intermediates", action="store_true")
    p_aug.add_argument("--format", choices=("png", "jpeg"), default="png")
    p_aug.add_argument("--quality", type=int, default=90)
    p_aug.add_argument("--texture-dir", default=None)
    p_aug.set_defaults(fn=cmd_augment)

    p_pre = sub.add_parser("preview", help="contact sheet of seed variants")
    p_pre.add_argument("--input", required=True)
    p_pre.add_argument("--output", required=True)
    p_pre.add_argument("--spec", required=True)
    p_pre.add_argument("--seed", type=int, default=None)
    p_pre.add_argument("--n", type=int, default=4)
    p_pre.add_argument("--texture-dir", default=None)
    p_pre.set_defaults(fn=cmd_preview)

    p_ins = sub.add_parser("inspect", help="pretty-print a provenance file")
    p_ins.add_argument("--provenance", required=True)
    p_ins.add_argument("--manifest", default=None)
    p_ins.set_defaults(fn=cmd_inspect)

    p_met = sub.add_parser("metrics", help="rmse/psnr/ssim for an image pair")
    p_met.add_argument("--a", required=True)
    p_met.add_argument("--b", required=True)
    p_met.set_defaults(fn=cmd_metrics)

    p_ocr = sub.add_parser("ocr-eval", help="score an OCR command on image pairs")
    p_ocr.add_argument("--clean", required=True)
    p_ocr.add_argument("--noisy", required=True)
    p_ocr.add_argument("--gt", required=True)
    p_ocr.add_argument("--command", required=True)
    p_ocr.add_argument("--output", required=True)
    p_ocr.add_argument("--jobs", type=int, default=4)
    p_ocr.set_defaults(fn=cmd_ocr_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DocgrungeError as exc:
        return _error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
