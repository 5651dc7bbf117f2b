"""Formula expression tree.

Nodes cover the supported subset: literals, cell/range/name references,
comparison and arithmetic operators, the IF/SUM/MAX/MIN/COUNT calls, and
the ArrayConditional shape (an aggregator over nested single-branch IFs,
which is how a conditional aggregate looks as a plain array formula).
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

AGGREGATORS = ("SUM", "MAX", "MIN", "COUNT")
FUNCTIONS = ("IF",) + AGGREGATORS
COMPARISON_OPS = ("=", "<", ">", "<=", ">=", "<>")
ADDITIVE_OPS = ("+", "-")
MULTIPLICATIVE_OPS = ("*", "/")


@dataclass(frozen=True)
class NumberLit:
    value: Decimal


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class TextLit:
    value: str


@dataclass(frozen=True)
class CellRef:
    sheet: str | None
    col: str
    row: int
    col_abs: bool = False
    row_abs: bool = False


@dataclass(frozen=True)
class RangeRef:
    """A vertical single-column span, e.g. $B$5:$B$754."""

    sheet: str | None
    col: str
    first_row: int
    last_row: int
    col_abs: bool = False
    first_abs: bool = False
    last_abs: bool = False


@dataclass(frozen=True)
class NameRef:
    """A defined-name reference. `sheet` is set when the text carried an
    explicit (quoted) sheet qualifier or once resolution has split an
    unquoted prefix; otherwise `name` holds the raw dotted text."""

    name: str
    sheet: str | None = None


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "FormulaAst"
    right: "FormulaAst"


@dataclass(frozen=True)
class FunctionCall:
    name: str
    args: tuple["FormulaAst", ...]


@dataclass(frozen=True)
class ArrayCondition:
    """One element-wise comparison inside an array conditional: a column
    span against a scalar (literal or single cell)."""

    lhs: RangeRef
    op: str
    rhs: "FormulaAst"


@dataclass(frozen=True)
class ArrayConditional:
    aggregator: str
    conditions: tuple[ArrayCondition, ...]
    value: RangeRef


FormulaAst = (
    NumberLit
    | BoolLit
    | TextLit
    | CellRef
    | RangeRef
    | NameRef
    | BinaryOp
    | FunctionCall
    | ArrayConditional
)

_SCALAR_RHS = (NumberLit, BoolLit, TextLit, CellRef)


def _as_condition(node: FormulaAst) -> ArrayCondition | None:
    if (
        isinstance(node, BinaryOp)
        and node.op in COMPARISON_OPS
        and isinstance(node.left, RangeRef)
        and isinstance(node.right, _SCALAR_RHS)
    ):
        return ArrayCondition(node.left, node.op, node.right)
    return None


def as_array_conditional(node: FormulaAst) -> ArrayConditional | None:
    """Recognize Aggregator(IF(c1, IF(c2, ... IF(cK, value-range)))) with
    K >= 1; every condition must be column-vs-scalar. Returns None when the
    shape does not match."""
    if isinstance(node, ArrayConditional):
        return node
    if not (
        isinstance(node, FunctionCall)
        and node.name in AGGREGATORS
        and len(node.args) == 1
    ):
        return None
    conditions: list[ArrayCondition] = []
    inner = node.args[0]
    while isinstance(inner, FunctionCall) and inner.name == "IF" and len(inner.args) == 2:
        cond = _as_condition(inner.args[0])
        if cond is None:
            return None
        conditions.append(cond)
        inner = inner.args[1]
    if not conditions or not isinstance(inner, RangeRef):
        return None
    return ArrayConditional(node.name, tuple(conditions), inner)


def normalize(node: FormulaAst) -> FormulaAst:
    """Rewrite every matching nested-IF aggregate into ArrayConditional,
    bottom-up."""
    if isinstance(node, BinaryOp):
        return BinaryOp(node.op, normalize(node.left), normalize(node.right))
    if isinstance(node, FunctionCall):
        rewritten = FunctionCall(node.name, tuple(normalize(a) for a in node.args))
        return as_array_conditional(rewritten) or rewritten
    return node


def walk(node: FormulaAst):
    """Yield every node in the tree, preorder."""
    yield node
    if isinstance(node, BinaryOp):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, FunctionCall):
        for a in node.args:
            yield from walk(a)
    elif isinstance(node, ArrayConditional):
        for c in node.conditions:
            yield from walk(c.lhs)
            yield from walk(c.rhs)
        yield from walk(node.value)
