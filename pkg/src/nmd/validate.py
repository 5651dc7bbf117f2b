"""Structured-spreadsheet convention checks.

R1: Input sheets hold no formulas. R2: Output-sheet formulas reference
only Calculation-sheet names or cells. R3: no duplicate defined names
workbook-wide. R4: no dependency cycles. R5: every name used in any
formula resolves (an unparseable formula is reported here too, since none
of its references can resolve).
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import analyze, build_graph
from .model import CellId, FormulaCell, SheetRole, Workbook

R1_INPUT_HAS_FORMULA = "R1_INPUT_HAS_FORMULA"
R2_OUTPUT_REFS_NONCALC = "R2_OUTPUT_REFS_NONCALC"
R3_DUPLICATE_NAME = "R3_DUPLICATE_NAME"
R4_CIRCULAR_DEPENDENCY = "R4_CIRCULAR_DEPENDENCY"
R5_UNRESOLVED_NAME = "R5_UNRESOLVED_NAME"

ALL_RULES = (
    R1_INPUT_HAS_FORMULA,
    R2_OUTPUT_REFS_NONCALC,
    R3_DUPLICATE_NAME,
    R4_CIRCULAR_DEPENDENCY,
    R5_UNRESOLVED_NAME,
)


@dataclass(frozen=True)
class ValidationFinding:
    rule_id: str
    location: str
    message: str


def validate_structure(w: Workbook) -> list[ValidationFinding]:
    """All findings for rules R1..R5; an empty list means compliant."""
    findings: list[ValidationFinding] = []
    analyses = analyze(w)

    # R1: no formulas on Input sheets
    for sheet in w.sheets:
        if sheet.role is not SheetRole.INPUT:
            continue
        for addr in sorted(sheet.cells):
            if isinstance(sheet.cells[addr], FormulaCell):
                findings.append(ValidationFinding(
                    R1_INPUT_HAS_FORMULA,
                    f"{sheet.name.upper()}!{addr}",
                    f"input sheet {sheet.name} holds a formula at {addr}",
                ))

    # R2: output formulas reference only calculation sheets
    for sheet in w.sheets:
        if sheet.role is not SheetRole.OUTPUT:
            continue
        for addr in sorted(sheet.cells):
            if not isinstance(sheet.cells[addr], FormulaCell):
                continue
            analysis = analyses.get(CellId.parse(f"{sheet.name}!{addr}"))
            if analysis is None or analysis.ast is None:
                continue
            for target in analysis.targets:
                target_sheet = w.sheet(target.sheet)
                if target_sheet is not None and target_sheet.role is not SheetRole.CALCULATION:
                    findings.append(ValidationFinding(
                        R2_OUTPUT_REFS_NONCALC,
                        f"{sheet.name.upper()}!{addr}",
                        f"output formula references {target.render()} on "
                        f"{target_sheet.role.value} sheet {target_sheet.name}",
                    ))

    # R3: duplicate defined names (same sheet-qualified name defined twice)
    for sheet in w.sheets:
        defined: dict[str, str] = {}
        for col in sheet.columns:
            if col.name is None:
                continue
            where = f"column {col.letter}"
            if col.name in defined:
                findings.append(ValidationFinding(
                    R3_DUPLICATE_NAME,
                    f"{sheet.name}.{col.name}",
                    f"defined at {defined[col.name]} and again at {where}",
                ))
            else:
                defined[col.name] = where
        for name in sorted(sheet.named_cells):
            where = f"cell {sheet.named_cells[name]}"
            if name in defined:
                findings.append(ValidationFinding(
                    R3_DUPLICATE_NAME,
                    f"{sheet.name}.{name}",
                    f"defined at {defined[name]} and again at {where}",
                ))
            else:
                defined[name] = where

    # R4: dependency cycles (skip unparseable formulas; they are R5's)
    parseable = {c: a for c, a in analyses.items() if a.parse_error is None}
    graph = build_graph(w, parseable)
    for cycle in graph.cycles:
        findings.append(ValidationFinding(
            R4_CIRCULAR_DEPENDENCY,
            str(cycle[0]),
            "dependency cycle: " + " -> ".join(str(c) for c in cycle),
        ))

    # R5: unresolved references and unparseable formulas
    for cell in sorted(analyses):
        analysis = analyses[cell]
        if analysis.parse_error is not None:
            findings.append(ValidationFinding(
                R5_UNRESOLVED_NAME, str(cell),
                f"formula does not parse: {analysis.parse_error}",
            ))
            continue
        for problem in analysis.unresolved:
            findings.append(ValidationFinding(R5_UNRESOLVED_NAME, str(cell), problem))

    findings.sort(key=lambda f: (f.rule_id, f.location, f.message))
    return findings
