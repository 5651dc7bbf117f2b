"""Tokenizer shared by the A1 and named formula surfaces.

Whitespace is insignificant outside string literals. Cell references are
matched as single tokens up front so that `B5` the address never collides
with `B5x` the identifier.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class FormulaError(ValueError):
    """Base for formula surface errors; carries the character offset."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at offset {offset})")


class FormulaSyntaxError(FormulaError):
    pass


class UnknownFunctionError(FormulaError):
    def __init__(self, name: str, offset: int):
        self.function = name
        super().__init__(f"unknown function {name!r}", offset)


class UnsupportedConnectiveError(FormulaError):
    def __init__(self, word: str, offset: int):
        self.connective = word
        super().__init__(f"unsupported connective {word!r} (only AND)", offset)


REF = "ref"
NUMBER = "number"
STRING = "string"
IDENT = "ident"
QUOTED = "quoted"
OP = "op"
PUNCT = "punct"
EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int
    # for REF tokens: (col_abs, col, row_abs, row)
    ref: tuple[bool, str, bool, int] | None = None


_WS = re.compile(r"\s+")
_REF = re.compile(r"(\$?)([A-Za-z]{1,2})(\$?)([1-9][0-9]*)(?![A-Za-z0-9_.])")
_NUMBER = re.compile(r"[0-9]+(?:\.[0-9]+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_STRING = re.compile(r'"[^"]*"')
_OPS = ("<=", ">=", "<>", "=", "<", ">", "+", "-", "*", "/")
_PUNCT = "()[],!:.$"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        ws = _WS.match(text, i)
        if ws:
            i = ws.end()
            continue
        ch = text[i]
        if ch == "'":
            end = text.find("'", i + 1)
            if end < 0:
                raise FormulaSyntaxError("unterminated quoted sheet name", i)
            tokens.append(Token(QUOTED, text[i + 1 : end], i))
            i = end + 1
            continue
        if ch == '"':
            m = _STRING.match(text, i)
            if not m:
                raise FormulaSyntaxError("unterminated string literal", i)
            tokens.append(Token(STRING, m.group(0)[1:-1], i))
            i = m.end()
            continue
        m = _REF.match(text, i)
        if m:
            ref = (bool(m.group(1)), m.group(2).upper(), bool(m.group(3)), int(m.group(4)))
            tokens.append(Token(REF, m.group(0), i, ref))
            i = m.end()
            continue
        m = _NUMBER.match(text, i)
        if m:
            tokens.append(Token(NUMBER, m.group(0), i))
            i = m.end()
            continue
        m = _IDENT.match(text, i)
        if m:
            tokens.append(Token(IDENT, m.group(0), i))
            i = m.end()
            continue
        for op in _OPS:
            if text.startswith(op, i):
                tokens.append(Token(OP, op, i))
                i += len(op)
                break
        else:
            if ch in _PUNCT:
                tokens.append(Token(PUNCT, ch, i))
                i += 1
            else:
                raise FormulaSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(Token(EOF, "", n))
    return tokens
