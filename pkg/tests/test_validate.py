from decimal import Decimal

from nmd.model import (
    ColumnDef,
    FormulaCell,
    LiteralCell,
    Sheet,
    SheetRole,
    Workbook,
    with_cell,
)
from nmd.validate import (
    R1_INPUT_HAS_FORMULA,
    R2_OUTPUT_REFS_NONCALC,
    R3_DUPLICATE_NAME,
    R4_CIRCULAR_DEPENDENCY,
    R5_UNRESOLVED_NAME,
    validate_structure,
)


def rules(findings):
    return [f.rule_id for f in findings]


def test_fix_a_is_compliant(fix_a):
    assert validate_structure(fix_a) == []


def test_extended_fix_a_is_compliant(fix_a_extended):
    assert validate_structure(fix_a_extended) == []


def test_r1_formula_on_input_sheet(fix_a):
    w = with_cell(fix_a, "INPUTS", "C5", FormulaCell("=1+1"))
    findings = validate_structure(w)
    assert rules(findings) == [R1_INPUT_HAS_FORMULA]
    assert findings[0].location == "INPUTS!C5"


def test_r2_output_referencing_non_calculation(fix_a):
    w = with_cell(fix_a, "OUTPUTS", "C5", FormulaCell("=INPUTS!B5+1"))
    findings = validate_structure(w)
    assert R2_OUTPUT_REFS_NONCALC in rules(findings)
    r2 = [f for f in findings if f.rule_id == R2_OUTPUT_REFS_NONCALC]
    assert r2[0].location == "OUTPUTS!C5"
    assert "input" in r2[0].message


def test_r2_output_referencing_itself(fix_a):
    w = with_cell(fix_a, "OUTPUTS", "C5", FormulaCell("=OUTPUTS!B5"))
    assert R2_OUTPUT_REFS_NONCALC in rules(validate_structure(w))


def test_r3_duplicate_name_between_column_and_cell():
    sheet = Sheet(
        "S", SheetRole.CALCULATION,
        columns=(ColumnDef("B", "Key"),),
        named_cells={"Key": "M5"},
    )
    findings = validate_structure(Workbook("dup", (sheet,)))
    assert rules(findings) == [R3_DUPLICATE_NAME]
    assert findings[0].location == "S.Key"
    assert "column B" in findings[0].message and "cell M5" in findings[0].message


def test_r3_duplicate_column_names():
    sheet = Sheet(
        "S", SheetRole.CALCULATION,
        columns=(ColumnDef("B", "Key"), ColumnDef("C", "Key")),
    )
    assert rules(validate_structure(Workbook("dup", (sheet,)))) == [R3_DUPLICATE_NAME]


def test_same_name_on_two_sheets_is_fine(fix_a):
    # SecDI.Key and SEC_GteeADJ.Key coexist
    assert validate_structure(fix_a) == []


def test_r4_cycle(fix_a):
    w = with_cell(fix_a, "SecDI", "X1", FormulaCell("=SECDI!Y1"))
    w = with_cell(w, "SecDI", "Y1", FormulaCell("=SECDI!X1"))
    findings = [f for f in validate_structure(w) if f.rule_id == R4_CIRCULAR_DEPENDENCY]
    assert len(findings) == 1
    assert "SECDI!X1" in findings[0].message and "SECDI!Y1" in findings[0].message


def test_r5_unresolved_name(fix_a):
    w = with_cell(fix_a, "SecDI", "M6", FormulaCell("=NoSuchName+1"))
    findings = [f for f in validate_structure(w) if f.rule_id == R5_UNRESOLVED_NAME]
    assert len(findings) == 1
    assert findings[0].location == "SECDI!M6"
    assert "NoSuchName" in findings[0].message


def test_r5_unparseable_formula(fix_a):
    w = with_cell(fix_a, "SecDI", "M6", FormulaCell("=MAX("))
    findings = [f for f in validate_structure(w) if f.rule_id == R5_UNRESOLVED_NAME]
    assert len(findings) == 1
    assert "does not parse" in findings[0].message


def test_no_formulas_and_unique_names_is_clean():
    sheet = Sheet(
        "S", SheetRole.CALCULATION,
        columns=(ColumnDef("B", "Key"),),
        cells={"B5": LiteralCell(Decimal(1))},
        named_cells={"Single": "M5"},
    )
    assert validate_structure(Workbook("plain", (sheet,))) == []


def test_formula_free_workbooks_can_only_yield_r3():
    import random
    from dataclasses import replace

    from genwb import random_workbook
    from nmd.model import FormulaCell, with_sheet

    rng = random.Random(99)
    for _ in range(25):
        w = random_workbook(rng)
        literal_only = w
        for sheet in w.sheets:
            stripped = {
                a: c for a, c in sheet.cells.items() if not isinstance(c, FormulaCell)
            }
            literal_only = with_sheet(literal_only, replace(sheet, cells=stripped))
        assert set(rules(validate_structure(literal_only))) <= {R3_DUPLICATE_NAME}
