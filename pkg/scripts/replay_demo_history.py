#!/usr/bin/env python3
"""Build a demo model with a populated audit trail: a run of version and
revision commits, one archived snapshot, and an export stamp. Handy for
exercising `nmd history`, `nmd recall`, and the web history view.

Usage: python scripts/replay_demo_history.py [outdir]
"""

import sys
from dataclasses import replace
from datetime import datetime
from decimal import Decimal
from pathlib import Path

from nmd.audit import AuditLog, commit, export_model, render_history
from nmd.fixtures import secdi_model_extended
from nmd.model import LiteralCell, save_workbook, with_cell

COMMITS = [
    # (edit sheet, cell, value, user, timestamp, description)
    ("INPUTS", "B5", 2, "429660", datetime(2009, 4, 9, 14, 34), "Rebind input key"),
    ("SecDI", "L5", 12, "429660", datetime(2009, 4, 17, 12, 41), "Recalibrate row values"),
    ("SecDI", "L6", 25, "429660", datetime(2009, 4, 20, 12, 48), "Further recalibration"),
    ("INPUTS", "B5", 1, "921024", datetime(2009, 5, 20, 15, 41), "Restore input key"),
    ("SecDI", "L7", 31, "427240", datetime(2009, 5, 26, 10, 50), "Final lookup tweak"),
]


def main() -> None:
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo")
    outdir.mkdir(parents=True, exist_ok=True)
    model_path = outdir / "model.nmd.json"
    log = AuditLog(outdir / "model.log")

    w = secdi_model_extended()
    for i, (sheet, cell, value, user, ts, description) in enumerate(COMMITS):
        edited = with_cell(w, sheet, cell, LiteralCell(Decimal(value)))
        w, record = commit(log, w, edited, user, ts, description,
                           archive=i == len(COMMITS) - 1)
        print(f"committed ({record.version}, {record.revision}): {description}")

    _, comment = export_model(log, w, "427240", datetime(2009, 5, 26, 11, 1, 1))
    print(comment)
    model_path.write_bytes(save_workbook(w))
    print(f"wrote {model_path} and {log.path}")
    print()
    print(render_history(log.records), end="")


if __name__ == "__main__":
    main()
