"""Conditional aggregates: the readable notation and its array-formula twin.

`MAX(SecDI.ExposureResidualMaturity [SecDI.SecurityID = SEC_GteeADJ.SecurityID
AND SecDI1.LinkFlag = 1])` compiles to the equivalent nested-IF array
formula and back. Conditions are a conjunction; row alignment across the
named columns is positional, so all column spans must be identical.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..model import (
    CellId,
    CellTarget,
    ColumnTarget,
    QualifiedName,
    UnresolvedNameError,
    Workbook,
    resolve_name,
    resolve_text_name,
)
from .ast import (
    ArrayCondition,
    ArrayConditional,
    BoolLit,
    CellRef,
    FormulaAst,
    NameRef,
    NumberLit,
    RangeRef,
    TextLit,
    as_array_conditional,
)

LiteralNode = NumberLit | BoolLit | TextLit


class ConditionalError(ValueError):
    pass


class MisalignedSpansError(ConditionalError):
    pass


class ShapeMismatchError(ConditionalError):
    pass


class HostRowError(ConditionalError):
    pass


@dataclass(frozen=True)
class CurrentRowCell:
    """The single cell of a named column at the host formula's row."""

    column: QualifiedName


@dataclass(frozen=True)
class Condition:
    lhs: QualifiedName
    op: str
    rhs: CurrentRowCell | LiteralNode


@dataclass(frozen=True)
class ConditionalAggregate:
    aggregator: str
    value_column: QualifiedName
    conditions: tuple[Condition, ...]


def _column_target(q: QualifiedName, context: Workbook, what: str) -> ColumnTarget:
    target = resolve_name(context, q)
    if not isinstance(target, ColumnTarget):
        raise ConditionalError(f"{what} {q.render()} must be a named column, not a cell")
    return target


def _spans(c: ConditionalAggregate, context: Workbook) -> tuple[ColumnTarget, list[ColumnTarget]]:
    value = _column_target(c.value_column, context, "value")
    lhs_targets = [_column_target(cond.lhs, context, "condition column") for cond in c.conditions]
    span = (value.first_row, value.last_row)
    for t in lhs_targets:
        if (t.first_row, t.last_row) != span:
            raise MisalignedSpansError(
                f"column {t.sheet}.{t.col} spans rows {t.first_row}..{t.last_row}, "
                f"value column spans {span[0]}..{span[1]}"
            )
    return value, lhs_targets


def build_conditional(
    aggregator: str,
    value: NameRef,
    raw_conditions: list[tuple[NameRef, str, FormulaAst]],
    context: Workbook,
) -> ConditionalAggregate:
    """Resolve the parsed bracket notation. Condition right-hand names must
    be columns (read as the current-row cell of their own column)."""
    value_q, value_target = resolve_text_name(context, value.name, value.sheet)
    if not isinstance(value_target, ColumnTarget):
        raise ConditionalError(f"value {value_q.render()} must be a named column")
    conditions = []
    for lhs, op, rhs in raw_conditions:
        lhs_q, lhs_target = resolve_text_name(context, lhs.name, lhs.sheet)
        if not isinstance(lhs_target, ColumnTarget):
            raise ConditionalError(f"condition column {lhs_q.render()} must be a named column")
        if isinstance(rhs, NameRef):
            rhs_q, rhs_target = resolve_text_name(context, rhs.name, rhs.sheet)
            if not isinstance(rhs_target, ColumnTarget):
                raise ConditionalError(
                    f"condition value {rhs_q.render()} must be a named column or a literal"
                )
            conditions.append(Condition(lhs_q, op, CurrentRowCell(rhs_q)))
        else:
            conditions.append(Condition(lhs_q, op, rhs))
    built = ConditionalAggregate(aggregator, value_q, tuple(conditions))
    _spans(built, context)  # misaligned spans are rejected at construction
    return built


def _range_of(t: ColumnTarget) -> RangeRef:
    return RangeRef(t.sheet, t.col, t.first_row, t.last_row, True, True, True)


def compile_conditional(
    c: ConditionalAggregate, context: Workbook, host: CellId | str
) -> ArrayConditional:
    """Emit the nested-IF array formula: conditions in source order, each
    current-row value as a column-absolute row-relative reference at the
    host row."""
    if isinstance(host, str):
        host = CellId.parse(host)
    host_sheet = context.sheet(host.sheet)
    if host_sheet is None:
        raise UnresolvedNameError(f"no sheet named {host.sheet!r}")
    if not host_sheet.first_data_row <= host.row <= host_sheet.last_data_row:
        raise HostRowError(
            f"host row {host.row} outside data region "
            f"{host_sheet.first_data_row}..{host_sheet.last_data_row} of {host_sheet.name}"
        )
    value_target, lhs_targets = _spans(c, context)
    conditions = []
    for cond, lhs_target in zip(c.conditions, lhs_targets):
        rhs: FormulaAst
        if isinstance(cond.rhs, CurrentRowCell):
            t = resolve_name(context, cond.rhs.column, anchor_row=host.row)
            assert isinstance(t, CellTarget)
            rhs = CellRef(t.sheet, t.col, t.row, col_abs=True, row_abs=False)
        else:
            rhs = cond.rhs
        conditions.append(ArrayCondition(_range_of(lhs_target), cond.op, rhs))
    return ArrayConditional(c.aggregator, tuple(conditions), _range_of(value_target))


def _column_name_of_range(r: RangeRef, context: Workbook) -> QualifiedName:
    if r.sheet is None:
        raise ShapeMismatchError(f"range {r.col}{r.first_row}:{r.col}{r.last_row} lacks a sheet qualifier")
    sheet = context.sheet(r.sheet)
    if sheet is None:
        raise UnresolvedNameError(f"no sheet named {r.sheet!r}")
    col = sheet.column_by_letter(r.col)
    if (
        col is None
        or col.name is None
        or (r.first_row, r.last_row) != (sheet.first_data_row, sheet.last_data_row)
    ):
        raise ConditionalError(
            f"range {sheet.name.upper()}!{r.col}{r.first_row}:{r.col}{r.last_row} "
            "is not coextensive with a named column"
        )
    return QualifiedName(sheet.name, col.name)


def decompile_array(ast: FormulaAst, context: Workbook) -> ConditionalAggregate:
    """Inverse of compile_conditional up to canonical text. The input must
    match the nested-IF aggregate shape and every range must be a full
    named column."""
    cond_ast = as_array_conditional(ast)
    if cond_ast is None:
        raise ShapeMismatchError(
            "not a nested-IF aggregate (conditions must compare a column against a scalar)"
        )
    value_q = _column_name_of_range(cond_ast.value, context)
    conditions = []
    for c in cond_ast.conditions:
        lhs_q = _column_name_of_range(c.lhs, context)
        rhs: CurrentRowCell | LiteralNode
        if isinstance(c.rhs, CellRef):
            if c.rhs.row_abs:
                raise ShapeMismatchError(
                    f"condition value {c.rhs.col}${c.rhs.row} is a fixed cell, "
                    "not a current-row reference or literal"
                )
            if c.rhs.sheet is None:
                raise ShapeMismatchError("current-row reference lacks a sheet qualifier")
            sheet = context.sheet(c.rhs.sheet)
            if sheet is None:
                raise UnresolvedNameError(f"no sheet named {c.rhs.sheet!r}")
            col = sheet.column_by_letter(c.rhs.col)
            if col is None or col.name is None:
                raise ConditionalError(
                    f"current-row reference {sheet.name.upper()}!{c.rhs.col}{c.rhs.row} "
                    "is not inside a named column"
                )
            rhs = CurrentRowCell(QualifiedName(sheet.name, col.name))
        else:
            rhs = c.rhs  # literal node
        conditions.append(Condition(lhs_q, c.op, rhs))
    return ConditionalAggregate(cond_ast.aggregator, value_q, tuple(conditions))
