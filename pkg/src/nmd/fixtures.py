"""Small demo workbooks used by the test suite, the scripts, and the
bundled demo server.

`secdi_model` is a four-sheet model with a three-row data region and one
conditional aggregate; `secdi_model_extended` wires an input cell into it
by reference; `secdi_full_span` mirrors the classic 5..754-row layout with
cross-sheet condition columns.
"""

from __future__ import annotations

from decimal import Decimal

from .model import (
    ColumnDef,
    FormulaCell,
    LiteralCell,
    Sheet,
    SheetRole,
    Workbook,
)


def _lit(n: int) -> LiteralCell:
    return LiteralCell(Decimal(n))


def secdi_model() -> Workbook:
    """Calculation sheets SecDI + SEC_GteeADJ, an OUTPUTS sheet reading the
    named aggregate, and a literal-only INPUTS sheet."""
    secdi = Sheet(
        name="SecDI",
        role=SheetRole.CALCULATION,
        first_data_row=5,
        last_data_row=7,
        columns=(
            ColumnDef("B", "Key"),
            ColumnDef("C", "Flag"),
            ColumnDef("L", "Val"),
        ),
        cells={
            "B5": _lit(1), "B6": _lit(1), "B7": _lit(2),
            "C5": _lit(1), "C6": _lit(0), "C7": _lit(1),
            "L5": _lit(10), "L6": _lit(20), "L7": _lit(30),
        },
    )
    gtee = Sheet(
        name="SEC_GteeADJ",
        role=SheetRole.CALCULATION,
        first_data_row=5,
        last_data_row=7,
        columns=(ColumnDef("B", "Key"),),
        cells={
            "B5": _lit(1),
            "M5": FormulaCell(
                "=MAX(IF(SECDI!$B$5:$B$7=SEC_GTEEADJ!$B5,"
                "IF(SECDI!$C$5:$C$7=1,SECDI!$L$5:$L$7)))",
                array=True,
            ),
        },
        named_cells={"MaxVal": "M5"},
    )
    outputs = Sheet(
        name="OUTPUTS",
        role=SheetRole.OUTPUT,
        cells={"B5": FormulaCell("=SEC_GteeADJ.MaxVal")},
    )
    inputs = Sheet(
        name="INPUTS",
        role=SheetRole.INPUT,
        cells={"B5": _lit(1)},
    )
    return Workbook("secdi-demo", (secdi, gtee, outputs, inputs))


def secdi_model_extended() -> Workbook:
    """secdi_model with INPUTS!B5 named `In.Key` feeding SEC_GteeADJ!B5 by
    reference, so input overrides flow into the aggregate."""
    w = secdi_model()
    sheets = []
    for s in w.sheets:
        if s.name == "INPUTS":
            s = Sheet(
                name=s.name, role=s.role,
                first_data_row=s.first_data_row, last_data_row=s.last_data_row,
                columns=s.columns, cells=dict(s.cells),
                named_cells={"In.Key": "B5"},
            )
        if s.name == "SEC_GteeADJ":
            cells = dict(s.cells)
            cells["B5"] = FormulaCell("=In.Key")
            s = Sheet(
                name=s.name, role=s.role,
                first_data_row=s.first_data_row, last_data_row=s.last_data_row,
                columns=s.columns, cells=cells, named_cells=dict(s.named_cells),
            )
        sheets.append(s)
    return Workbook(w.name, tuple(sheets), w.version, w.revision)


def secdi_full_span() -> Workbook:
    """The full-span layout: data rows 5..754, security IDs in column B,
    the link flag on its own sheet, exposure maturities in column L."""
    secdi = Sheet(
        name="SecDI",
        role=SheetRole.CALCULATION,
        columns=(
            ColumnDef("B", "SecurityID"),
            ColumnDef("L", "ExposureResidualMaturity"),
        ),
        cells={"B5": _lit(101), "B6": _lit(102), "L5": _lit(3), "L6": _lit(7)},
    )
    secdi1 = Sheet(
        name="SecDI1",
        role=SheetRole.CALCULATION,
        columns=(ColumnDef("C", "LinkFlag"),),
        cells={"C5": _lit(1), "C6": _lit(0)},
    )
    gtee = Sheet(
        name="SEC_GteeADJ",
        role=SheetRole.CALCULATION,
        columns=(ColumnDef("B", "SecurityID"),),
        cells={"B5": _lit(101)},
    )
    return Workbook("secdi-full", (secdi, secdi1, gtee))
