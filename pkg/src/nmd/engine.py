"""Workbook evaluation: full recalculation and what-if overrides.

Array-conditional semantics: rows where any condition fails contribute
nothing; over the selected rows SUM adds, MAX/MIN take extrema, COUNT
counts the numeric entries; an empty selection yields 0. Arithmetic treats
blank as 0. Comparisons are type-aware: blanks coerce to the other side's
zero value (0, "", FALSE), any other cross-type comparison is a #VALUE!
error. Type errors surface as error values and propagate to dependents.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, DivisionByZero, InvalidOperation, Overflow, localcontext

from .formula.ast import (
    ArrayConditional,
    BinaryOp,
    BoolLit,
    CellRef,
    FormulaAst,
    FunctionCall,
    NameRef,
    NumberLit,
    RangeRef,
    TextLit,
)
from .graph import DependencyGraph, build_graph
from .model import (
    CellId,
    CellTarget,
    ColumnTarget,
    LiteralCell,
    QualifiedName,
    SheetRole,
    UnresolvedNameError,
    AmbiguousNameError,
    Workbook,
    name_of_cell,
    resolve_text_name,
    with_cell,
)
from .values import (
    ARITH_PRECISION,
    CellError,
    CellValue,
    DIV_ZERO,
    NAME_ERROR,
    NUM_ERROR,
    TYPE_ERROR,
    values_equal,
)


class CycleError(ValueError):
    def __init__(self, cycles):
        self.cycles = cycles
        rendered = "; ".join(", ".join(str(c) for c in cyc) for cyc in cycles)
        super().__init__(f"dependency cycle: {rendered}")


class InputOverrideError(ValueError):
    pass


@dataclass
class EvalResult:
    """Computed values for every populated cell; formula cells that
    errored appear in `errors` (with their code) instead of `values`."""

    values: dict[CellId, CellValue]
    errors: dict[CellId, str]

    def combined(self, cell: CellId) -> CellValue:
        if cell in self.errors:
            return CellError(self.errors[cell])
        return self.values.get(cell)


# internal marker for IF with an omitted else-branch evaluating false
class _Excluded:
    __slots__ = ()

    def __repr__(self) -> str:
        return "<excluded>"


_EXCLUDED = _Excluded()


def _is_error(v) -> bool:
    return isinstance(v, CellError)


def _compare(op: str, a: CellValue, b: CellValue) -> CellValue:
    if _is_error(a):
        return a
    if _is_error(b):
        return b
    if a is None and b is None:
        a = b = Decimal(0)
    elif a is None:
        a = _zero_like(b)
    elif b is None:
        b = _zero_like(a)
    if isinstance(a, CellError) or isinstance(b, CellError):
        return TYPE_ERROR
    if isinstance(a, bool) != isinstance(b, bool):
        return TYPE_ERROR
    if isinstance(a, bool) and isinstance(b, bool):
        a, b = int(a), int(b)
    elif isinstance(a, Decimal) and isinstance(b, Decimal):
        pass
    elif isinstance(a, str) and isinstance(b, str):
        pass
    else:
        return TYPE_ERROR
    if op == "=":
        return a == b
    if op == "<>":
        return a != b
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "<=":
        return a <= b
    return a >= b


def _zero_like(other: CellValue) -> CellValue:
    if isinstance(other, bool):
        return False
    if isinstance(other, str):
        return ""
    return Decimal(0)


def _arith(op: str, a: CellValue, b: CellValue) -> CellValue:
    if _is_error(a):
        return a
    if _is_error(b):
        return b
    if a is None:
        a = Decimal(0)
    if b is None:
        b = Decimal(0)
    if isinstance(a, bool) or isinstance(b, bool):
        return TYPE_ERROR
    if not isinstance(a, Decimal) or not isinstance(b, Decimal):
        return TYPE_ERROR
    try:
        with localcontext() as ctx:
            ctx.prec = ARITH_PRECISION
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if b == 0:
                return DIV_ZERO
            return a / b
    except DivisionByZero:
        return DIV_ZERO
    except (InvalidOperation, Overflow):
        return NUM_ERROR


def _aggregate(name: str, items: list[CellValue]) -> CellValue:
    """SUM/MAX/MIN/COUNT over collected entries. Errors propagate; blanks
    and non-numeric entries contribute nothing; empty selection is 0."""
    numbers: list[Decimal] = []
    for v in items:
        if v is _EXCLUDED or v is None:
            continue
        if _is_error(v):
            return v
        if isinstance(v, Decimal) and not isinstance(v, bool):
            numbers.append(v)
    if name == "COUNT":
        return Decimal(len(numbers))
    if not numbers:
        return Decimal(0)
    with localcontext() as ctx:
        ctx.prec = ARITH_PRECISION
        if name == "SUM":
            total = Decimal(0)
            for n in numbers:
                total += n
            return total
        if name == "MAX":
            return max(numbers)
        return min(numbers)


class _Evaluator:
    def __init__(self, w: Workbook, graph: DependencyGraph):
        self.w = w
        self.graph = graph
        self.vals: dict[CellId, CellValue] = {}

    def run(self) -> EvalResult:
        if self.graph.cycles:
            raise CycleError(self.graph.cycles)
        for cell in self.graph.topo_order:
            analysis = self.graph.analyses.get(cell)
            if analysis is not None:
                result = self.eval_scalar(analysis.ast, cell)
                if result is _EXCLUDED:
                    result = None
                self.vals[cell] = result
            else:
                content = self.w.content_at(cell)
                if isinstance(content, LiteralCell):
                    self.vals[cell] = content.value
        values: dict[CellId, CellValue] = {}
        errors: dict[CellId, str] = {}
        populated = {
            CellId.parse(f"{s.name}!{a}") for s in self.w.sheets for a in s.cells
        }
        for cell in populated:
            v = self.vals.get(cell)
            if _is_error(v) and cell in self.graph.analyses:
                errors[cell] = v.code
            else:
                values[cell] = v
        return EvalResult(values, errors)

    # -- reads ---------------------------------------------------------

    def read(self, sheet_name: str | None, col: str, row: int, host: CellId) -> CellValue:
        name = sheet_name if sheet_name is not None else host.sheet
        sheet = self.w.sheet(name)
        if sheet is None:
            return NAME_ERROR
        return self.vals.get(CellId.of(sheet.name, col, row))

    def read_span(self, sheet_name: str | None, col: str, first: int, last: int, host: CellId):
        name = sheet_name if sheet_name is not None else host.sheet
        sheet = self.w.sheet(name)
        if sheet is None:
            return NAME_ERROR
        return [self.vals.get(CellId.of(sheet.name, col, r)) for r in range(first, last + 1)]

    # -- evaluation ------------------------------------------------------

    def eval_scalar(self, node: FormulaAst, host: CellId):
        if isinstance(node, NumberLit):
            return node.value
        if isinstance(node, BoolLit):
            return node.value
        if isinstance(node, TextLit):
            return node.value
        if isinstance(node, CellRef):
            return self.read(node.sheet, node.col, node.row, host)
        if isinstance(node, RangeRef):
            return TYPE_ERROR  # a bare range is not a scalar
        if isinstance(node, NameRef):
            try:
                _, target = resolve_text_name(self.w, node.name, node.sheet)
            except (UnresolvedNameError, AmbiguousNameError):
                return NAME_ERROR
            if isinstance(target, ColumnTarget):
                return TYPE_ERROR
            return self.read(target.sheet, target.col, target.row, host)
        if isinstance(node, BinaryOp):
            a = self.eval_scalar(node.left, host)
            b = self.eval_scalar(node.right, host)
            if a is _EXCLUDED or b is _EXCLUDED:
                return TYPE_ERROR
            if node.op in ("+", "-", "*", "/"):
                return _arith(node.op, a, b)
            return _compare(node.op, a, b)
        if isinstance(node, FunctionCall):
            return self.eval_call(node, host)
        if isinstance(node, ArrayConditional):
            return self.eval_conditional(node, host)
        raise TypeError(f"cannot evaluate {node!r}")

    def eval_call(self, node: FunctionCall, host: CellId):
        if node.name == "IF":
            cond = self.eval_scalar(node.args[0], host)
            if _is_error(cond):
                return cond
            if not isinstance(cond, bool):
                return TYPE_ERROR
            if cond:
                return self.eval_scalar(node.args[1], host)
            if len(node.args) == 3:
                return self.eval_scalar(node.args[2], host)
            return _EXCLUDED
        items: list[CellValue] = []
        for arg in node.args:
            if isinstance(arg, RangeRef):
                span = self.read_span(arg.sheet, arg.col, arg.first_row, arg.last_row, host)
                if _is_error(span):
                    return span
                items.extend(span)
            elif isinstance(arg, NameRef):
                try:
                    _, target = resolve_text_name(self.w, arg.name, arg.sheet)
                except (UnresolvedNameError, AmbiguousNameError):
                    return NAME_ERROR
                if isinstance(target, ColumnTarget):
                    span = self.read_span(
                        target.sheet, target.col, target.first_row, target.last_row, host
                    )
                    if _is_error(span):
                        return span
                    items.extend(span)
                else:
                    items.append(self.read(target.sheet, target.col, target.row, host))
            else:
                items.append(self.eval_scalar(arg, host))
        return _aggregate(node.name, items)

    def eval_conditional(self, node: ArrayConditional, host: CellId):
        value_span = self.read_span(
            node.value.sheet, node.value.col, node.value.first_row, node.value.last_row, host
        )
        if _is_error(value_span):
            return value_span
        cond_spans = []
        rhs_values = []
        for cond in node.conditions:
            span = self.read_span(
                cond.lhs.sheet, cond.lhs.col, cond.lhs.first_row, cond.lhs.last_row, host
            )
            if _is_error(span):
                return span
            if len(span) != len(value_span):
                return TYPE_ERROR
            cond_spans.append(span)
            rhs = self.eval_scalar(cond.rhs, host)
            if rhs is _EXCLUDED:
                return TYPE_ERROR
            rhs_values.append(rhs)
        selected: list[CellValue] = []
        for i in range(len(value_span)):
            keep = True
            for cond, span, rhs in zip(node.conditions, cond_spans, rhs_values):
                verdict = _compare(cond.op, span[i], rhs)
                if _is_error(verdict):
                    return verdict
                if not verdict:
                    keep = False
                    break
            if keep:
                v = value_span[i]
                if _is_error(v):
                    return v
                selected.append(v)
        return _aggregate(node.aggregator, selected)


def recalculate(w: Workbook, graph: DependencyGraph | None = None) -> EvalResult:
    """Evaluate every cell in topological order. Raises CycleError when
    the dependency graph has cycles."""
    if graph is None:
        graph = build_graph(w)
    return _Evaluator(w, graph).run()


@dataclass(frozen=True)
class DeltaEntry:
    cell: CellId
    label: str
    before: CellValue
    after: CellValue


def _delta_label(w: Workbook, cell: CellId) -> str:
    q = name_of_cell(w, cell)
    return q.name if q is not None else str(cell)


def _alias_target(w: Workbook, ast: FormulaAst, host: CellId) -> CellId | None:
    """The single cell a pure pass-through formula (`=Ref` or `=Name`)
    mirrors, if any."""
    if isinstance(ast, CellRef):
        sheet = w.sheet(ast.sheet) if ast.sheet is not None else w.sheet(host.sheet)
        if sheet is None:
            return None
        return CellId.of(sheet.name, ast.col, ast.row)
    if isinstance(ast, NameRef):
        try:
            _, target = resolve_text_name(w, ast.name, ast.sheet)
        except (UnresolvedNameError, AmbiguousNameError):
            return None
        if isinstance(target, CellTarget):
            return target.cell_id()
    return None


def what_if(
    w: Workbook, overrides: dict[str | QualifiedName | CellId, CellValue]
) -> list[DeltaEntry]:
    """Recompute under temporary input overrides and report the derived
    changes. Overrides must target Input-sheet cells (or their names);
    the overridden cells themselves, and pure pass-through references to
    them, are the cause rather than an effect and are not reported."""
    targets: dict[CellId, CellValue] = {}
    for key, value in overrides.items():
        if isinstance(key, CellId):
            cell = key
        elif isinstance(key, QualifiedName):
            _, t = resolve_text_name(w, key.name, key.sheet)
            if not isinstance(t, CellTarget):
                raise InputOverrideError(f"override {key.render()} names a column, not a cell")
            cell = t.cell_id()
        else:
            text = key
            if "!" in text:
                cell = CellId.parse(text)
            else:
                _, t = resolve_text_name(w, text)
                if not isinstance(t, CellTarget):
                    raise InputOverrideError(f"override {text!r} names a column, not a cell")
                cell = t.cell_id()
        sheet = w.sheet(cell.sheet)
        if sheet is None:
            raise InputOverrideError(f"override target {cell} is not on any sheet")
        if sheet.role is not SheetRole.INPUT:
            raise InputOverrideError(
                f"override target {cell} is on a {sheet.role.value} sheet; "
                "only Input-sheet cells may be overridden (inputs hold no formulas)"
            )
        targets[cell] = value

    base = recalculate(w)
    modified = w
    for cell, value in targets.items():
        modified = with_cell(modified, cell.sheet, cell.a1, LiteralCell(value))
    after_graph = build_graph(modified)
    after = recalculate(modified, after_graph)

    excluded = set(targets)
    # pass-through aliases of excluded cells, transitively
    grew = True
    while grew:
        grew = False
        for cell, analysis in after_graph.analyses.items():
            if cell in excluded or analysis.ast is None:
                continue
            target = _alias_target(modified, analysis.ast, cell)
            if target is not None and target in excluded:
                excluded.add(cell)
                grew = True

    changed: list[DeltaEntry] = []
    cells = set(base.values) | set(base.errors) | set(after.values) | set(after.errors)
    for cell in sorted(cells):
        if cell in excluded:
            continue
        b, a = base.combined(cell), after.combined(cell)
        if isinstance(b, CellError) and isinstance(a, CellError):
            if b.code == a.code:
                continue
        elif values_equal(b, a):
            continue
        changed.append(DeltaEntry(cell, _delta_label(w, cell), b, a))
    return changed
