#!/usr/bin/env python3
"""Write the bundled demo models to fixtures/ as interchange documents.

Usage: python scripts/make_fixtures.py [outdir]
"""

import sys
from pathlib import Path

from nmd.fixtures import secdi_full_span, secdi_model, secdi_model_extended
from nmd.model import save_workbook


def main() -> None:
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("fixtures")
    outdir.mkdir(parents=True, exist_ok=True)
    for name, w in (
        ("secdi-demo", secdi_model()),
        ("secdi-demo-extended", secdi_model_extended()),
        ("secdi-full", secdi_full_span()),
    ):
        path = outdir / f"{name}.nmd.json"
        path.write_bytes(save_workbook(w))
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
