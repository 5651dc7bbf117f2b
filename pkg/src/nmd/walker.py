"""The formula walker: precedents, the current formula, and dependents in
one table, with recorded trails exportable as tab-separated reports.

A referenced column range appears as one row under its column name, with
the count of populated rows in the value field; its per-cell neighbors are
still the graph's. Row names drop the sheet prefix exactly when rendering
it would need apostrophe quoting, since the Sheetname field already names
the sheet.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime
from decimal import Decimal

from .engine import EvalResult
from .formula.conditional import decompile_array
from .formula.lexer import FormulaError
from .formula.printer import print_a1, print_named
from .graph import DependencyGraph, build_graph
from .model import (
    CellId,
    CellTarget,
    ColumnTarget,
    FormulaCell,
    QualifiedName,
    Workbook,
    column_index,
    column_of_cell,
    name_of_cell,
    sheet_prefix_needs_quotes,
)
from .values import CellValue, render_value


class WalkError(ValueError):
    pass


@dataclass(frozen=True)
class WalkRow:
    sheetname: str
    name: str
    value: CellValue
    formula: str

    def line(self) -> str:
        return f"{self.sheetname}\t{self.name}\t{render_value(self.value)}\t{self.formula}"


@dataclass(frozen=True)
class Inspection:
    precedents: tuple[WalkRow, ...]
    current: WalkRow
    dependents: tuple[WalkRow, ...]
    # the structured targets behind the rows, index-aligned
    precedent_targets: tuple = ()
    dependent_cells: tuple[CellId, ...] = ()


def _display_name(q: QualifiedName) -> str:
    if sheet_prefix_needs_quotes(q.sheet, q.name):
        return q.name
    return f"{q.sheet}.{q.name}"


def _cell_row_name(w: Workbook, cell: CellId) -> str:
    q = name_of_cell(w, cell)
    if q is not None:
        return _display_name(q)
    col_q = column_of_cell(w, cell)
    if col_q is not None:
        return f"{_display_name(col_q)}@{cell.a1}"
    return str(cell)


def _display_formula(w: Workbook, cell: CellId) -> str:
    content = w.content_at(cell)
    if not isinstance(content, FormulaCell):
        return ""
    from .formula.parser import parse_a1
    from .formula.ast import ArrayConditional

    try:
        ast = parse_a1(content.text)
    except FormulaError:
        return content.text
    try:
        if isinstance(ast, ArrayConditional):
            return print_named(decompile_array(ast, w), w)
        return print_named(ast, w)
    except ValueError:
        return print_a1(ast)


def a1_formula(w: Workbook, cell: CellId) -> str:
    """The cell's formula in canonical A1 text (raw text if unparseable,
    empty for literals)."""
    content = w.content_at(cell)
    if not isinstance(content, FormulaCell):
        return ""
    from .formula.parser import parse_a1

    try:
        return print_a1(parse_a1(content.text))
    except FormulaError:
        return content.text


def _cell_walk_row(w: Workbook, ev: EvalResult, cell: CellId) -> WalkRow:
    sheet = w.sheet(cell.sheet)
    sheetname = sheet.name if sheet is not None else cell.sheet
    return WalkRow(
        sheetname=sheetname,
        name=_cell_row_name(w, cell),
        value=ev.combined(cell),
        formula=_display_formula(w, cell),
    )


def _span_walk_row(w: Workbook, target: ColumnTarget) -> WalkRow:
    sheet = w.sheet(target.sheet)
    assert sheet is not None
    col = sheet.column_by_letter(target.col)
    whole_column = (target.first_row, target.last_row) == (
        sheet.first_data_row,
        sheet.last_data_row,
    )
    if col is not None and col.name is not None and whole_column:
        name = _display_name(QualifiedName(sheet.name, col.name))
    else:
        name = f"{sheet.name.upper()}!{target.col}{target.first_row}:{target.col}{target.last_row}"
    populated = sum(
        1
        for r in range(target.first_row, target.last_row + 1)
        if f"{target.col}{r}" in sheet.cells
    )
    return WalkRow(sheet.name, name, Decimal(populated), "")


def _sort_key(w: Workbook, target) -> tuple:
    if isinstance(target, CellTarget):
        return (target.sheet.upper(), column_index(target.col), target.row)
    return (target.sheet.upper(), column_index(target.col), target.first_row)


def inspect(
    w: Workbook,
    ev: EvalResult,
    cell: CellId | str,
    graph: DependencyGraph | None = None,
) -> Inspection:
    """One walker view: precedent rows (ranges collapsed), the current
    cell's row, and dependent rows, each sorted by sheet then address."""
    if isinstance(cell, str):
        cell = CellId.parse(cell)
    if graph is None:
        graph = build_graph(w)
    sheet = w.sheet(cell.sheet)
    if sheet is None:
        raise WalkError(f"unknown sheet in {cell}")
    if cell not in graph.nodes and sheet.cells.get(cell.a1) is None:
        raise WalkError(f"unknown cell {cell}")

    precedents: list[WalkRow] = []
    targets: list = []
    analysis = graph.analyses.get(cell)
    if analysis is not None and analysis.ast is not None:
        targets = sorted(analysis.targets, key=lambda t: _sort_key(w, t))
        for target in targets:
            if isinstance(target, CellTarget):
                precedents.append(_cell_walk_row(w, ev, target.cell_id()))
            else:
                precedents.append(_span_walk_row(w, target))

    dependent_cells = tuple(sorted(graph.dependents_of(cell)))
    dependents = [_cell_walk_row(w, ev, d) for d in dependent_cells]
    return Inspection(
        tuple(precedents),
        _cell_walk_row(w, ev, cell),
        tuple(dependents),
        tuple(targets),
        dependent_cells,
    )


# ---------------------------------------------------------------------------
# Sessions

INTO_PRECEDENT = "into-precedent"
INTO_DEPENDENT = "into-dependent"
BACK = "back"


@dataclass(frozen=True)
class TrailStep:
    direction: str  # "start" | INTO_PRECEDENT | INTO_DEPENDENT | BACK
    cell: CellId


@dataclass(frozen=True)
class WalkSession:
    workbook: Workbook
    graph: DependencyGraph
    current: CellId | None
    trail: tuple[TrailStep, ...]
    stack: tuple[CellId, ...]
    created_by: str
    created_at: datetime


def new_session(
    w: Workbook,
    start: CellId | str | None,
    created_by: str = "",
    created_at: datetime | None = None,
    graph: DependencyGraph | None = None,
) -> WalkSession:
    if graph is None:
        graph = build_graph(w)
    if created_at is None:
        created_at = datetime.now()
    if start is None:
        return WalkSession(w, graph, None, (), (), created_by, created_at)
    if isinstance(start, str):
        start = CellId.parse(start)
    if w.sheet(start.sheet) is None:
        raise WalkError(f"unknown sheet in {start}")
    return WalkSession(
        w, graph, start, (TrailStep("start", start),), (), created_by, created_at
    )


def _target_cell(w: Workbook, row_target) -> CellId:
    """Where stepping onto a row lands: the cell itself, or the first
    populated cell of a span."""
    if isinstance(row_target, CellTarget):
        return row_target.cell_id()
    sheet = w.sheet(row_target.sheet)
    assert sheet is not None
    for r in range(row_target.first_row, row_target.last_row + 1):
        if f"{row_target.col}{r}" in sheet.cells:
            return CellId.of(sheet.name, row_target.col, r)
    return CellId.of(sheet.name, row_target.col, row_target.first_row)


def step(s: WalkSession, direction: str, index: int) -> WalkSession:
    """Move the cursor to the indexed row of the chosen direction's list
    (the same ordering inspect returns)."""
    if s.current is None:
        raise WalkError("session has no current cell")
    if direction == INTO_PRECEDENT:
        analysis = s.graph.analyses.get(s.current)
        targets = []
        if analysis is not None and analysis.ast is not None:
            targets = sorted(analysis.targets, key=lambda t: _sort_key(s.workbook, t))
        if not 0 <= index < len(targets):
            raise WalkError(f"precedent index {index} out of range (0..{len(targets) - 1})")
        dest = _target_cell(s.workbook, targets[index])
    elif direction == INTO_DEPENDENT:
        deps = sorted(s.graph.dependents_of(s.current))
        if not 0 <= index < len(deps):
            raise WalkError(f"dependent index {index} out of range (0..{len(deps) - 1})")
        dest = deps[index]
    else:
        raise WalkError(f"unknown direction {direction!r}")
    return replace(
        s,
        current=dest,
        trail=s.trail + (TrailStep(direction, dest),),
        stack=s.stack + (s.current,),
    )


def back(s: WalkSession) -> WalkSession:
    """Pop the cursor to where it came from; the pop itself is recorded
    as a trail step."""
    if not s.stack:
        raise WalkError("nothing to go back to")
    dest = s.stack[-1]
    return replace(
        s,
        current=dest,
        trail=s.trail + (TrailStep(BACK, dest),),
        stack=s.stack[:-1],
    )


HEADER = "Sheetname\tName\tValue\tFormula"


def export_trail(s: WalkSession, ev: EvalResult) -> str:
    """Tab-separated report: the header, then one three-section block per
    visited cell in visit order."""
    lines = [HEADER]
    for visit in s.trail:
        view = inspect(s.workbook, ev, visit.cell, s.graph)
        lines.append("")
        lines.append("Precedents")
        lines.extend(row.line() for row in view.precedents)
        lines.append("Current Formula")
        lines.append(view.current.line())
        lines.append("Dependents")
        lines.extend(row.line() for row in view.dependents)
    return "\n".join(lines) + "\n"
