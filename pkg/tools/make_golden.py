#!/usr/bin/env python3
"""Regenerate the golden reference images under tests/golden/.

Run this only when an intentional behavior change invalidates the committed
goldens; the test suite byte-compares against them.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from goldens import GOLDEN_DIR, golden_kinds, golden_raster  # noqa: E402

from docgrunge.raster import encode  # noqa: E402


def main() -> int:
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    for kind in golden_kinds():
        path = GOLDEN_DIR / f"{kind}.png"
        path.write_bytes(encode(golden_raster(kind)))
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
