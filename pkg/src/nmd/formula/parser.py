"""Recursive-descent parser for both formula surfaces.

parse_a1 is context-free and covers the plain surface (A1 references plus
defined names, since stored cell text may mix both). parse_named needs a
workbook: it accepts the square-bracket conditional-aggregate notation and
resolves every name, canonicalizing unquoted sheet prefixes.
"""

from __future__ import annotations

from decimal import Decimal

from ..model import Workbook, resolve_text_name
from . import lexer
from .ast import (
    AGGREGATORS,
    COMPARISON_OPS,
    FUNCTIONS,
    BinaryOp,
    BoolLit,
    CellRef,
    FormulaAst,
    FunctionCall,
    NameRef,
    NumberLit,
    RangeRef,
    TextLit,
    normalize,
)
from .conditional import ConditionalAggregate, build_conditional
from .lexer import (
    EOF,
    IDENT,
    NUMBER,
    OP,
    PUNCT,
    QUOTED,
    REF,
    STRING,
    FormulaSyntaxError,
    Token,
    UnknownFunctionError,
    UnsupportedConnectiveError,
)

_LITERAL_RHS_KINDS = (NUMBER, STRING)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = lexer.tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != EOF:
            self.pos += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind: str, text: str, what: str) -> Token:
        if not self.at(kind, text):
            t = self.peek()
            raise FormulaSyntaxError(f"expected {what}, found {t.text or 'end of input'!r}", t.offset)
        return self.next()

    def fail(self, message: str) -> FormulaSyntaxError:
        t = self.peek()
        return FormulaSyntaxError(message, t.offset)

    # -- expression grammar ------------------------------------------------

    def parse_expression(self) -> FormulaAst:
        return self._binary(1)

    def _binary(self, prec: int) -> FormulaAst:
        ops = {1: COMPARISON_OPS, 2: ("+", "-"), 3: ("*", "/")}
        if prec > 3:
            return self._atom()
        node = self._binary(prec + 1)
        while self.at(OP) and self.peek().text in ops[prec]:
            op = self.next().text
            node = BinaryOp(op, node, self._binary(prec + 1))
        return node

    def _atom(self) -> FormulaAst:
        t = self.peek()
        if t.kind == NUMBER:
            self.next()
            return NumberLit(Decimal(t.text))
        if t.kind == OP and t.text == "-" and self.peek(1).kind == NUMBER:
            self.next()
            num = self.next()
            return NumberLit(-Decimal(num.text))
        if t.kind == STRING:
            self.next()
            return TextLit(t.text)
        if t.kind == PUNCT and t.text == "(":
            self.next()
            node = self.parse_expression()
            self.expect(PUNCT, ")", "')'")
            return node
        if t.kind == REF:
            return self._ref_or_range(None)
        if t.kind == QUOTED:
            return self._quoted_prefixed()
        if t.kind == IDENT:
            return self._ident_led()
        raise self.fail(f"expected an expression, found {t.text or 'end of input'!r}")

    def _ref_or_range(self, sheet: str | None) -> FormulaAst:
        t = self.next()
        assert t.ref is not None
        col_abs, col, row_abs, row = t.ref
        if self.at(PUNCT, ":"):
            self.next()
            t2 = self.peek()
            if t2.kind != REF:
                raise self.fail("expected the end of the range")
            self.next()
            col_abs2, col2, row_abs2, row2 = t2.ref  # type: ignore[misc]
            if col2 != col:
                raise FormulaSyntaxError(
                    f"range must stay in one column ({col} vs {col2})", t2.offset
                )
            if row2 < row:
                raise FormulaSyntaxError("range rows reversed", t2.offset)
            return RangeRef(sheet, col, row, row2, col_abs, row_abs, row_abs2)
        return CellRef(sheet, col, row, col_abs, row_abs)

    def _quoted_prefixed(self) -> FormulaAst:
        t = self.next()
        if self.at(PUNCT, "!"):
            self.next()
            if self.peek().kind != REF:
                raise self.fail("expected a cell reference after '!'")
            return self._ref_or_range(t.text)
        if self.at(PUNCT, "."):
            self.next()
            return NameRef(self._dotted_name(), sheet=t.text)
        raise self.fail("expected '!' or '.' after quoted sheet name")

    def _dotted_name(self) -> str:
        parts = []
        while True:
            t = self.peek()
            if t.kind not in (IDENT, REF):  # REF-shaped segments are invalid names
                raise self.fail("expected a name")
            if t.kind == REF:
                raise FormulaSyntaxError(f"{t.text!r} cannot be a name segment", t.offset)
            parts.append(self.next().text)
            if self.at(PUNCT, "."):
                self.next()
                continue
            return ".".join(parts)

    def _ident_led(self) -> FormulaAst:
        t = self.next()
        upper = t.text.upper()
        if upper in ("TRUE", "FALSE"):
            return BoolLit(upper == "TRUE")
        if self.at(PUNCT, "("):
            if upper not in FUNCTIONS:
                raise UnknownFunctionError(t.text, t.offset)
            return self._call(upper, t.offset)
        if self.at(PUNCT, "!"):
            self.next()
            if self.peek().kind != REF:
                raise self.fail("expected a cell reference after '!'")
            return self._ref_or_range(t.text)
        if self.at(PUNCT, "."):
            self.next()
            rest = self._dotted_name()
            return NameRef(f"{t.text}.{rest}")
        return NameRef(t.text)

    def _call(self, name: str, offset: int) -> FormulaAst:
        self.expect(PUNCT, "(", "'('")
        args = [self.parse_expression()]
        while self.at(PUNCT, ","):
            self.next()
            args.append(self.parse_expression())
        self.expect(PUNCT, ")", "')'")
        if name == "IF" and len(args) not in (2, 3):
            raise FormulaSyntaxError("IF takes 2 or 3 arguments", offset)
        if name in AGGREGATORS and not args:
            raise FormulaSyntaxError(f"{name} takes at least one argument", offset)
        return FunctionCall(name, tuple(args))

    # -- conditional-aggregate surface --------------------------------------

    def try_conditional_header(self) -> tuple[str, NameRef] | None:
        """Commit to the bracket notation only on AGG '(' qname '['."""
        start = self.pos
        t = self.peek()
        if not (t.kind == IDENT and t.text.upper() in AGGREGATORS and self.peek(1).text == "("):
            return None
        agg = self.next().text.upper()
        self.next()  # (
        try:
            value = self._qname()
        except FormulaSyntaxError:
            self.pos = start
            return None
        if not self.at(PUNCT, "["):
            self.pos = start
            return None
        self.next()
        return agg, value

    def _qname(self) -> NameRef:
        t = self.peek()
        if t.kind == QUOTED:
            self.next()
            self.expect(PUNCT, ".", "'.' after quoted sheet name")
            return NameRef(self._dotted_name(), sheet=t.text)
        if t.kind == IDENT:
            return NameRef(self._dotted_name())
        raise self.fail("expected a name")

    def _condition_rhs(self) -> FormulaAst:
        t = self.peek()
        if t.kind == NUMBER:
            self.next()
            return NumberLit(Decimal(t.text))
        if t.kind == OP and t.text == "-" and self.peek(1).kind == NUMBER:
            self.next()
            return NumberLit(-Decimal(self.next().text))
        if t.kind == STRING:
            self.next()
            return TextLit(t.text)
        if t.kind == IDENT and t.text.upper() in ("TRUE", "FALSE"):
            self.next()
            return BoolLit(t.text.upper() == "TRUE")
        return self._qname()

    def parse_conditions(self) -> list[tuple[NameRef, str, FormulaAst]]:
        conds: list[tuple[NameRef, str, FormulaAst]] = []
        while True:
            lhs = self._qname()
            t = self.peek()
            if t.kind != OP or t.text not in COMPARISON_OPS:
                raise self.fail("expected a comparison operator")
            op = self.next().text
            rhs = self._condition_rhs()
            conds.append((lhs, op, rhs))
            t = self.peek()
            if t.kind == IDENT:
                if t.text.upper() == "AND":
                    self.next()
                    continue
                raise UnsupportedConnectiveError(t.text, t.offset)
            if t.kind == PUNCT and t.text == "]":
                self.next()
                return conds
            raise self.fail("expected 'AND' or ']'")

    def expect_end(self) -> None:
        t = self.peek()
        if t.kind != EOF:
            raise FormulaSyntaxError(f"unexpected trailing {t.text!r}", t.offset)


def _strip_equals(p: _Parser) -> None:
    if p.at(OP, "="):
        p.next()


def parse_a1(text: str) -> FormulaAst:
    """Parse the plain surface into an AST; matching nested-IF aggregates
    are normalized into ArrayConditional nodes."""
    p = _Parser(text)
    _strip_equals(p)
    node = p.parse_expression()
    p.expect_end()
    return normalize(node)


def _resolve_names(node: FormulaAst, context: Workbook) -> FormulaAst:
    if isinstance(node, NameRef):
        q, _ = resolve_text_name(context, node.name, node.sheet)
        return NameRef(q.name, sheet=q.sheet)
    if isinstance(node, BinaryOp):
        return BinaryOp(node.op, _resolve_names(node.left, context), _resolve_names(node.right, context))
    if isinstance(node, FunctionCall):
        return FunctionCall(node.name, tuple(_resolve_names(a, context) for a in node.args))
    return node


def parse_named(text: str, context: Workbook) -> FormulaAst | ConditionalAggregate:
    """Parse the named surface. The square-bracket form yields a
    ConditionalAggregate; anything else is an expression whose names are
    resolved (and their sheet prefixes canonicalized) against context."""
    p = _Parser(text)
    _strip_equals(p)
    header = p.try_conditional_header()
    if header is not None:
        agg, value = header
        conds = p.parse_conditions()
        p.expect(PUNCT, ")", "')'")
        p.expect_end()
        return build_conditional(agg, value, conds, context)
    node = p.parse_expression()
    p.expect_end()
    return normalize(_resolve_names(node, context))
