"""Canonical printers for both surfaces.

A1 text has a leading `=`, no interior spaces, and uppercased sheet names.
Named text puts single spaces around operators and ` AND ` between
conditions; conditional aggregates print without a leading `=` (matching
how they are displayed), plain expressions with one.
"""

from __future__ import annotations

import re

from ..model import (
    QualifiedName,
    Workbook,
    name_of_cell,
    resolve_name,
    resolve_text_name,
    sheet_prefix_needs_quotes,
)
from ..values import format_decimal_exact
from .ast import (
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
from .conditional import Condition, ConditionalAggregate, CurrentRowCell

_PREC = {"=": 1, "<": 1, ">": 1, "<=": 1, ">=": 1, "<>": 1, "+": 2, "-": 2, "*": 3, "/": 3}

_PLAIN_A1_SHEET = re.compile(r"^[A-Za-z0-9_]+$")


class UnnamedReferenceError(ValueError):
    """Raised by the named printer when a reference has no defined name;
    carries the bare A1 address."""

    def __init__(self, address: str):
        self.address = address
        super().__init__(f"reference has no defined name: {address}")


def _a1_sheet(sheet: str) -> str:
    up = sheet.upper()
    return up if _PLAIN_A1_SHEET.match(up) else f"'{up}'"


def _cell_text(r: CellRef) -> str:
    prefix = f"{_a1_sheet(r.sheet)}!" if r.sheet else ""
    ca = "$" if r.col_abs else ""
    ra = "$" if r.row_abs else ""
    return f"{prefix}{ca}{r.col}{ra}{r.row}"


def _range_text(r: RangeRef) -> str:
    prefix = f"{_a1_sheet(r.sheet)}!" if r.sheet else ""
    ca = "$" if r.col_abs else ""
    fa = "$" if r.first_abs else ""
    la = "$" if r.last_abs else ""
    return f"{prefix}{ca}{r.col}{fa}{r.first_row}:{ca}{r.col}{la}{r.last_row}"


def _name_text(n: NameRef) -> str:
    if n.sheet is None:
        return n.name
    return QualifiedName(n.sheet, n.name).render()


def _literal_text(node: NumberLit | BoolLit | TextLit) -> str:
    if isinstance(node, NumberLit):
        return format_decimal_exact(node.value)
    if isinstance(node, BoolLit):
        return "TRUE" if node.value else "FALSE"
    return f'"{node.value}"'


def _needs_parens(child: FormulaAst, parent_prec: int, right_side: bool) -> bool:
    if not isinstance(child, BinaryOp):
        return False
    child_prec = _PREC[child.op]
    return child_prec < parent_prec or (right_side and child_prec == parent_prec)


class _A1Printer:
    op_space = ""
    arg_sep = ","

    def render(self, node: FormulaAst) -> str:
        if isinstance(node, (NumberLit, BoolLit, TextLit)):
            return _literal_text(node)
        if isinstance(node, CellRef):
            return self.cell(node)
        if isinstance(node, RangeRef):
            return self.range(node)
        if isinstance(node, NameRef):
            return self.name(node)
        if isinstance(node, BinaryOp):
            return self.binary(node)
        if isinstance(node, FunctionCall):
            args = self.arg_sep.join(self.render(a) for a in node.args)
            return f"{node.name}({args})"
        if isinstance(node, ArrayConditional):
            return self.conditional(node)
        raise TypeError(f"cannot print {node!r}")

    def binary(self, node: BinaryOp) -> str:
        left = self.render(node.left)
        if _needs_parens(node.left, _PREC[node.op], right_side=False):
            left = f"({left})"
        right = self.render(node.right)
        if _needs_parens(node.right, _PREC[node.op], right_side=True):
            right = f"({right})"
        return f"{left}{self.op_space}{node.op}{self.op_space}{right}"

    def cell(self, node: CellRef) -> str:
        return _cell_text(node)

    def range(self, node: RangeRef) -> str:
        return _range_text(node)

    def name(self, node: NameRef) -> str:
        return _name_text(node)

    def conditional(self, node: ArrayConditional) -> str:
        body = self.render(node.value)
        for cond in reversed(node.conditions):
            test = f"{self.render(cond.lhs)}{self.op_space}{cond.op}{self.op_space}{self.render(cond.rhs)}"
            body = f"IF({test}{self.arg_sep}{body})"
        return f"{node.aggregator}({body})"


def print_a1(ast: FormulaAst) -> str:
    """Canonical A1 text with leading `=` and no interior spaces."""
    return "=" + _A1Printer().render(ast)


class _NamedPrinter(_A1Printer):
    op_space = " "
    arg_sep = ", "

    def __init__(self, context: Workbook):
        self.context = context

    def _minimal(self, q: QualifiedName) -> str:
        """Expression rendering favors the bare name over an apostrophe-
        quoted prefix, provided the bare form still resolves to the same
        target (dotted names resolve workbook-wide)."""
        if not sheet_prefix_needs_quotes(q.sheet, q.name):
            return f"{q.sheet}.{q.name}"
        full = resolve_name(self.context, q)
        try:
            bare_q, bare_target = resolve_text_name(self.context, q.name)
        except ValueError:
            return q.render()
        if bare_q.key() == q.key() and bare_target == full:
            return q.name
        return q.render()

    def cell(self, node: CellRef) -> str:
        if node.sheet is not None:
            q = name_of_cell(self.context, _cell_id(node))
            if q is not None:
                return self._minimal(q)
        raise UnnamedReferenceError(_cell_text(node))

    def range(self, node: RangeRef) -> str:
        from .conditional import _column_name_of_range

        try:
            return self._minimal(_column_name_of_range(node, self.context))
        except UnnamedReferenceError:
            raise
        except ValueError:
            raise UnnamedReferenceError(_range_text(node))

    def name(self, node: NameRef) -> str:
        q, _ = resolve_text_name(self.context, node.name, node.sheet)
        return self._minimal(q)

    def conditional(self, node: ArrayConditional) -> str:
        raise ValueError("a conditional aggregate cannot be embedded in named form")


def _cell_id(node: CellRef):
    from ..model import CellId

    assert node.sheet is not None
    return CellId.of(node.sheet, node.col, node.row)


def _condition_text(cond: Condition, printer: _NamedPrinter) -> str:
    if isinstance(cond.rhs, CurrentRowCell):
        rhs = cond.rhs.column.render()
    else:
        rhs = _literal_text(cond.rhs)
    return f"{cond.lhs.render()} {cond.op} {rhs}"


def print_named(item: FormulaAst | ConditionalAggregate, context: Workbook) -> str:
    """Canonical named form. Every reference must map to a defined name;
    bare references raise UnnamedReferenceError with the A1 address."""
    if isinstance(item, ConditionalAggregate):
        printer = _NamedPrinter(context)
        resolve_name(context, item.value_column)
        for c in item.conditions:
            resolve_name(context, c.lhs)
            if isinstance(c.rhs, CurrentRowCell):
                resolve_name(context, c.rhs.column)
        conds = " AND ".join(_condition_text(c, printer) for c in item.conditions)
        return f"{item.aggregator}({item.value_column.render()} [{conds}])"
    return "=" + _NamedPrinter(context).render(item)
