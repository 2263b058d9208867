#!/usr/bin/env python3
"""Regenerate the bundled asset files (currently the default watermark stamp).

Run from the repository root:

    python3 tools/gen_assets.py

Assets are procedural and deterministic; this script exists so they are
reproducible rather than opaque binaries.
"""

from pathlib import Path

import numpy as np

import docgrunge as dg

STAMP_SIZE = 160
STRIPE_PERIOD = 48
STRIPE_WIDTH = 20
STRIPE_SHADE = 165


def build_default_stamp() -> dg.Raster:
    """Diagonal gray stripes on white; stays legible at low opacity."""
    ys, xs = np.mgrid[0:STAMP_SIZE, 0:STAMP_SIZE]
    stripes = ((xs + ys) % STRIPE_PERIOD) < STRIPE_WIDTH
    canvas = np.where(stripes, STRIPE_SHADE, 255).astype(np.uint8)
    return dg.Raster(canvas)


def main() -> None:
    assets = Path(__file__).resolve().parent.parent / "src" / "docgrunge" / "assets"
    assets.mkdir(parents=True, exist_ok=True)
    out = assets / "watermark_default.png"
    out.write_bytes(dg.encode(build_default_stamp()))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
