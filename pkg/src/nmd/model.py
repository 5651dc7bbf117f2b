"""Workbook data model, named-range registry, and the interchange format.

A workbook is a list of sheets with roles (input/output/calculation). Each
sheet has a data region (first_data_row..last_data_row), columns that may
carry defined names, a sparse cell map, and named cells. Sheet names
compare case-insensitively and render uppercase inside A1 references;
defined names preserve case and compare case-sensitively.

Workbooks are immutable after load: every mutation helper returns a new
Workbook, so values are safe to share across threads for reading.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from decimal import Decimal
from enum import Enum
from typing import Iterator

from .values import CellValue, json_to_value, value_to_json, values_equal

DEFAULT_FIRST_DATA_ROW = 5
DEFAULT_LAST_DATA_ROW = 754
MAX_COLUMN_INDEX = 702  # "ZZ"

FILE_EXTENSION = ".nmd.json"


class DocumentError(ValueError):
    """Malformed interchange document. Carries the offending field path."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class UnresolvedNameError(ValueError):
    pass


class AmbiguousNameError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Addresses

_ADDRESS_RE = re.compile(r"^([A-Za-z]{1,2})([1-9][0-9]*)$")


def column_index(letter: str) -> int:
    """A -> 1 ... Z -> 26, AA -> 27 ... ZZ -> 702."""
    n = 0
    for ch in letter.upper():
        n = n * 26 + (ord(ch) - ord("A") + 1)
    return n


def column_letter(index: int) -> str:
    if not 1 <= index <= MAX_COLUMN_INDEX:
        raise ValueError(f"column index out of range: {index}")
    letters = ""
    while index:
        index, rem = divmod(index - 1, 26)
        letters = chr(ord("A") + rem) + letters
    return letters


def parse_address(text: str) -> tuple[str, int]:
    """'M5' -> ('M', 5). Accepts lowercase column letters."""
    m = _ADDRESS_RE.match(text)
    if not m:
        raise ValueError(f"not an A1 address: {text!r}")
    return m.group(1).upper(), int(m.group(2))


def format_address(col: str, row: int) -> str:
    return f"{col}{row}"


@dataclass(frozen=True, order=True)
class CellId:
    """Identity of a cell across the workbook. The sheet component is
    stored uppercase so identities compare case-insensitively; ordering
    is (sheet, column, row), the tie-break used everywhere."""

    sheet: str
    col_idx: int
    row: int

    @classmethod
    def of(cls, sheet: str, col: str, row: int) -> CellId:
        return cls(sheet.upper(), column_index(col), row)

    @classmethod
    def parse(cls, text: str) -> CellId:
        sheet, sep, addr = text.partition("!")
        if not sep or not sheet:
            raise ValueError(f"expected SHEET!A1, got {text!r}")
        if sheet.startswith("'") and sheet.endswith("'") and len(sheet) >= 2:
            sheet = sheet[1:-1]
        col, row = parse_address(addr)
        return cls.of(sheet, col, row)

    @property
    def col(self) -> str:
        return column_letter(self.col_idx)

    @property
    def a1(self) -> str:
        return format_address(self.col, self.row)

    def __str__(self) -> str:
        return f"{self.sheet}!{self.a1}"


# ---------------------------------------------------------------------------
# Names

_PLAIN_SHEET_RE = re.compile(r"^[A-Za-z0-9_]+$")


def sheet_prefix_needs_quotes(sheet: str, name: str = "") -> bool:
    """A sheet prefix is quoted when the sheet name contains characters
    outside letters/digits/underscore, or when the name itself contains a
    dot (otherwise the prefix boundary would be ambiguous)."""
    return not _PLAIN_SHEET_RE.match(sheet) or "." in name


@dataclass(frozen=True)
class QualifiedName:
    """A defined name with its sheet qualifier, rendered `Sheet.Name`
    (sheet wrapped in apostrophes when quoting is needed)."""

    sheet: str
    name: str

    def render(self) -> str:
        if sheet_prefix_needs_quotes(self.sheet, self.name):
            return f"'{self.sheet}'.{self.name}"
        return f"{self.sheet}.{self.name}"

    def key(self) -> tuple[str, str]:
        return self.sheet.upper(), self.name

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class CellTarget:
    """A name resolved to a single cell. row_abs is False for the
    current-row form produced by anchor-row resolution."""

    sheet: str
    col: str
    row: int
    row_abs: bool = True

    def render(self) -> str:
        row_mark = "$" if self.row_abs else ""
        return f"{self.sheet.upper()}!${self.col}{row_mark}{self.row}"

    def cell_id(self) -> CellId:
        return CellId.of(self.sheet, self.col, self.row)


@dataclass(frozen=True)
class ColumnTarget:
    """A name resolved to a vertical column range over the data region."""

    sheet: str
    col: str
    first_row: int
    last_row: int

    def render(self) -> str:
        c = self.col
        return f"{self.sheet.upper()}!${c}${self.first_row}:${c}${self.last_row}"

    def cell_ids(self) -> list[CellId]:
        return [
            CellId.of(self.sheet, self.col, r)
            for r in range(self.first_row, self.last_row + 1)
        ]


ResolvedTarget = CellTarget | ColumnTarget


# ---------------------------------------------------------------------------
# Cells and sheets


@dataclass(frozen=True, eq=False)
class LiteralCell:
    value: CellValue

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LiteralCell) and values_equal(self.value, other.value)

    def __hash__(self) -> int:
        return hash(type(self))


@dataclass(frozen=True)
class FormulaCell:
    text: str
    array: bool = False


CellContent = LiteralCell | FormulaCell


class SheetRole(Enum):
    INPUT = "input"
    OUTPUT = "output"
    CALCULATION = "calculation"


@dataclass(frozen=True)
class ColumnDef:
    letter: str
    name: str | None = None


@dataclass(frozen=True)
class Sheet:
    name: str
    role: SheetRole
    first_data_row: int = DEFAULT_FIRST_DATA_ROW
    last_data_row: int = DEFAULT_LAST_DATA_ROW
    columns: tuple[ColumnDef, ...] = ()
    cells: dict[str, CellContent] = field(default_factory=dict)
    named_cells: dict[str, str] = field(default_factory=dict)

    def column_by_letter(self, letter: str) -> ColumnDef | None:
        letter = letter.upper()
        for c in self.columns:
            if c.letter == letter:
                return c
        return None

    def column_by_name(self, name: str) -> ColumnDef | None:
        for c in self.columns:
            if c.name == name:
                return c
        return None

    def cell(self, addr: str) -> CellContent | None:
        col, row = parse_address(addr)
        return self.cells.get(format_address(col, row))

    def populated_rows(self, letter: str) -> int:
        """Count of populated cells in a column's data region."""
        letter = letter.upper()
        return sum(
            1
            for r in range(self.first_data_row, self.last_data_row + 1)
            if format_address(letter, r) in self.cells
        )

    def defined_names(self) -> Iterator[tuple[str, ResolvedTarget]]:
        for c in self.columns:
            if c.name is not None:
                yield c.name, ColumnTarget(
                    self.name, c.letter, self.first_data_row, self.last_data_row
                )
        for name, addr in self.named_cells.items():
            col, row = parse_address(addr)
            yield name, CellTarget(self.name, col, row)


@dataclass(frozen=True)
class Workbook:
    name: str
    sheets: tuple[Sheet, ...] = ()
    version: int = 1
    revision: int = 1

    def sheet(self, name: str) -> Sheet | None:
        key = name.upper()
        for s in self.sheets:
            if s.name.upper() == key:
                return s
        return None

    def require_sheet(self, name: str) -> Sheet:
        s = self.sheet(name)
        if s is None:
            raise UnresolvedNameError(f"no sheet named {name!r}")
        return s

    def defined_names(self) -> Iterator[tuple[QualifiedName, ResolvedTarget]]:
        for s in self.sheets:
            for name, target in s.defined_names():
                yield QualifiedName(s.name, name), target

    def content_at(self, cell: CellId) -> CellContent | None:
        s = self.sheet(cell.sheet)
        if s is None:
            return None
        return s.cells.get(cell.a1)


# ---------------------------------------------------------------------------
# Name resolution


def _resolve_on_sheet(sheet: Sheet, name: str) -> ResolvedTarget | None:
    col = sheet.column_by_name(name)
    addr = sheet.named_cells.get(name)
    if col is not None and addr is not None:
        raise AmbiguousNameError(
            f"{sheet.name}.{name} is defined as both column {col.letter} and cell {addr}"
        )
    if col is not None:
        return ColumnTarget(sheet.name, col.letter, sheet.first_data_row, sheet.last_data_row)
    if addr is not None:
        c, r = parse_address(addr)
        return CellTarget(sheet.name, c, r)
    return None


def resolve_name(
    w: Workbook, q: QualifiedName, anchor_row: int | None = None
) -> ResolvedTarget:
    """Resolve a qualified name to its unique target. Column names resolve
    to their full data-region range, or to the single current-row cell
    when anchor_row is given."""
    sheet = w.sheet(q.sheet)
    if sheet is None:
        raise UnresolvedNameError(f"no sheet named {q.sheet!r} for name {q.render()}")
    target = _resolve_on_sheet(sheet, q.name)
    if target is None:
        raise UnresolvedNameError(f"name not defined: {q.render()}")
    if anchor_row is not None and isinstance(target, ColumnTarget):
        return CellTarget(target.sheet, target.col, anchor_row, row_abs=False)
    return target


def resolve_text_name(
    w: Workbook, raw: str, quoted_sheet: str | None = None
) -> tuple[QualifiedName, ResolvedTarget]:
    """Resolve name text as written in a formula.

    With an apostrophe-quoted sheet the split is explicit. Otherwise, if
    the first dotted segment matches a sheet it is the qualifier; failing
    that the whole dotted text is a name searched workbook-wide (names may
    themselves contain dots, e.g. `In.Key`).
    """
    if quoted_sheet is not None:
        q = QualifiedName(quoted_sheet, raw)
        target = resolve_name(w, q)
        return QualifiedName(w.require_sheet(quoted_sheet).name, raw), target
    head, dot, rest = raw.partition(".")
    if dot and w.sheet(head) is not None:
        sheet = w.require_sheet(head)
        q = QualifiedName(sheet.name, rest)
        return q, resolve_name(w, q)
    hits = []
    for s in w.sheets:
        t = _resolve_on_sheet(s, raw)
        if t is not None:
            hits.append((QualifiedName(s.name, raw), t))
    if not hits:
        raise UnresolvedNameError(f"name not defined anywhere: {raw!r}")
    if len(hits) > 1:
        sheets = ", ".join(q.sheet for q, _ in hits)
        raise AmbiguousNameError(f"name {raw!r} defined on multiple sheets: {sheets}")
    return hits[0]


def name_of_cell(w: Workbook, cell: CellId) -> QualifiedName | None:
    """The defined name of a cell, if it has one."""
    s = w.sheet(cell.sheet)
    if s is None:
        return None
    for name, addr in s.named_cells.items():
        if parse_address(addr) == (cell.col, cell.row):
            return QualifiedName(s.name, name)
    return None


def column_of_cell(w: Workbook, cell: CellId) -> QualifiedName | None:
    """The named column containing a cell within the data region, if any."""
    s = w.sheet(cell.sheet)
    if s is None:
        return None
    if not s.first_data_row <= cell.row <= s.last_data_row:
        return None
    col = s.column_by_letter(cell.col)
    if col is None or col.name is None:
        return None
    return QualifiedName(s.name, col.name)


# ---------------------------------------------------------------------------
# Interchange format

_ROLES = {r.value: r for r in SheetRole}

# dotted identifiers; no segment may look like a cell address, or the name
# could never be referenced from a formula
_NAME_SEGMENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def _check(cond: bool, message: str, path: str) -> None:
    if not cond:
        raise DocumentError(message, path)


def _check_name(name: str, path: str) -> None:
    segments = name.split(".")
    ok = all(_NAME_SEGMENT_RE.match(s) for s in segments) and not any(
        _ADDRESS_RE.match(s) for s in segments
    )
    _check(ok, f"invalid defined name {name!r} (dotted identifiers, not address-like)", path)


def _load_cell(obj: object, path: str) -> CellContent:
    _check(isinstance(obj, dict), "cell must be an object", path)
    assert isinstance(obj, dict)
    has_v = "v" in obj
    has_f = "f" in obj
    _check(has_v != has_f, "cell needs exactly one of 'v'/'f'", path)
    if has_v:
        _check(set(obj) <= {"v"}, "literal cell allows only 'v'", path)
        try:
            return LiteralCell(json_to_value(obj["v"]))
        except TypeError:
            raise DocumentError("'v' must be number, string, bool or null", path)
        except ValueError as e:
            raise DocumentError(str(e), path)
    _check(set(obj) <= {"f", "array"}, "formula cell allows only 'f'/'array'", path)
    _check(isinstance(obj["f"], str), "'f' must be a string", path)
    array = obj.get("array", False)
    _check(isinstance(array, bool), "'array' must be a bool", path)
    return FormulaCell(obj["f"], array)


def _positive_int(obj: dict, key: str, default: int | None, path: str) -> int:
    if key not in obj:
        _check(default is not None, f"missing field {key!r}", path)
        assert default is not None
        return default
    v = obj[key]
    _check(isinstance(v, int) and not isinstance(v, bool) and v >= 1,
           f"{key!r} must be a positive integer", path)
    return v


def _load_sheet(obj: object, path: str) -> Sheet:
    _check(isinstance(obj, dict), "sheet must be an object", path)
    assert isinstance(obj, dict)
    _check(isinstance(obj.get("name"), str) and obj["name"], "sheet 'name' required", path)
    name = obj["name"]
    role_text = obj.get("role")
    _check(role_text in _ROLES, f"invalid role {role_text!r} (want input/output/calculation)",
           f"{path}.role")
    first = _positive_int(obj, "first_data_row", DEFAULT_FIRST_DATA_ROW, path)
    last = _positive_int(obj, "last_data_row", DEFAULT_LAST_DATA_ROW, path)
    _check(first <= last, "first_data_row must be <= last_data_row", path)

    columns: list[ColumnDef] = []
    seen_letters: dict[str, int] = {}
    seen_names: dict[str, str] = {}
    for i, c in enumerate(obj.get("columns", [])):
        cpath = f"{path}.columns[{i}]"
        _check(isinstance(c, dict), "column must be an object", cpath)
        letter = c.get("letter")
        _check(isinstance(letter, str) and re.fullmatch(r"[A-Za-z]{1,2}", letter or ""),
               "column 'letter' must be A..ZZ", cpath)
        letter = letter.upper()
        _check(letter not in seen_letters,
               f"duplicate column letter {letter} (also columns[{seen_letters.get(letter)}])",
               cpath)
        seen_letters[letter] = i
        cname = c.get("name")
        _check(cname is None or (isinstance(cname, str) and cname), "column 'name' must be text", cpath)
        if cname is not None:
            _check_name(cname, cpath)
            _check(cname not in seen_names,
                   f"duplicate name {cname!r} (also defined at {seen_names.get(cname)})", cpath)
            seen_names[cname] = f"column {letter}"
        columns.append(ColumnDef(letter, cname))

    cells: dict[str, CellContent] = {}
    cells_obj = obj.get("cells", {})
    _check(isinstance(cells_obj, dict), "'cells' must be a map", f"{path}.cells")
    for addr, cobj in cells_obj.items():
        cpath = f"{path}.cells.{addr}"
        try:
            col, row = parse_address(addr)
        except ValueError:
            raise DocumentError(f"bad cell address {addr!r}", cpath)
        _check(row <= last, f"cell row {row} beyond last_data_row {last}", cpath)
        canon = format_address(col, row)
        _check(canon not in cells, f"duplicate cell address {canon}", cpath)
        cells[canon] = _load_cell(cobj, cpath)

    named_cells: dict[str, str] = {}
    named_obj = obj.get("named_cells", {})
    _check(isinstance(named_obj, dict), "'named_cells' must be a map", f"{path}.named_cells")
    for nname, addr in named_obj.items():
        npath = f"{path}.named_cells.{nname}"
        _check(isinstance(nname, str) and bool(nname), "name must be text", npath)
        _check_name(nname, npath)
        _check(nname not in seen_names,
               f"duplicate name {nname!r} (also defined at {seen_names.get(nname)})", npath)
        try:
            col, row = parse_address(addr)
        except (ValueError, TypeError):
            raise DocumentError(f"bad cell address {addr!r}", npath)
        _check(row <= last, f"named cell row {row} beyond last_data_row {last}", npath)
        seen_names[nname] = f"cell {format_address(col, row)}"
        named_cells[nname] = format_address(col, row)

    return Sheet(name, _ROLES[role_text], first, last, tuple(columns), cells, named_cells)


def load_workbook(document: bytes | str) -> Workbook:
    """Parse an interchange document. Rejects malformed documents with the
    offending field path and duplicate definitions citing both sites."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        obj = json.loads(document, parse_float=Decimal)
    except json.JSONDecodeError as e:
        raise DocumentError(f"invalid JSON: {e.msg}", f"line {e.lineno}")
    _check(isinstance(obj, dict), "document must be an object", "$")
    _check(isinstance(obj.get("name"), str), "'name' must be text", "$.name")
    version = _positive_int(obj, "version", 1, "$")
    revision = _positive_int(obj, "revision", 1, "$")
    sheets_obj = obj.get("sheets", [])
    _check(isinstance(sheets_obj, list), "'sheets' must be a list", "$.sheets")
    sheets: list[Sheet] = []
    seen: dict[str, int] = {}
    for i, s in enumerate(sheets_obj):
        sheet = _load_sheet(s, f"sheets[{i}]")
        key = sheet.name.upper()
        _check(key not in seen,
               f"duplicate sheet name {sheet.name!r} (also sheets[{seen.get(key)}])",
               f"sheets[{i}].name")
        seen[key] = i
        sheets.append(sheet)
    return Workbook(obj["name"], tuple(sheets), version, revision)


def _cell_to_json(content: CellContent) -> dict:
    if isinstance(content, LiteralCell):
        return {"v": value_to_json(content.value)}
    return {"f": content.text, "array": content.array}


def workbook_to_obj(w: Workbook) -> dict:
    """The canonical JSON object: fixed field order, map keys sorted."""
    return {
        "name": w.name,
        "version": w.version,
        "revision": w.revision,
        "sheets": [
            {
                "name": s.name,
                "role": s.role.value,
                "first_data_row": s.first_data_row,
                "last_data_row": s.last_data_row,
                "columns": [
                    {"letter": c.letter, **({"name": c.name} if c.name is not None else {})}
                    for c in s.columns
                ],
                "cells": {a: _cell_to_json(s.cells[a]) for a in sorted(s.cells)},
                "named_cells": {n: s.named_cells[n] for n in sorted(s.named_cells)},
            }
            for s in w.sheets
        ],
    }


def save_workbook(w: Workbook) -> bytes:
    """Deterministic canonical serialization: equal workbooks produce
    byte-identical documents and load(save(w)) == w."""
    text = json.dumps(workbook_to_obj(w), ensure_ascii=False, indent=2)
    return (text + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# Functional update helpers (mutation always builds a new Workbook)


def with_sheet(w: Workbook, sheet: Sheet) -> Workbook:
    """Replace the sheet of the same (case-insensitive) name, or append."""
    out = []
    replaced = False
    for s in w.sheets:
        if s.name.upper() == sheet.name.upper():
            out.append(sheet)
            replaced = True
        else:
            out.append(s)
    if not replaced:
        out.append(sheet)
    return replace(w, sheets=tuple(out))


def without_sheet(w: Workbook, name: str) -> Workbook:
    return replace(
        w, sheets=tuple(s for s in w.sheets if s.name.upper() != name.upper())
    )


def with_cell(w: Workbook, sheet_name: str, addr: str, content: CellContent | None) -> Workbook:
    """Set or clear (content=None) one cell."""
    s = w.require_sheet(sheet_name)
    col, row = parse_address(addr)
    canon = format_address(col, row)
    cells = dict(s.cells)
    if content is None:
        cells.pop(canon, None)
    else:
        cells[canon] = content
    return with_sheet(w, replace(s, cells=cells))


def with_named_cell(w: Workbook, sheet_name: str, name: str, addr: str | None) -> Workbook:
    """Define, retarget, or (addr=None) remove a named cell."""
    s = w.require_sheet(sheet_name)
    named = dict(s.named_cells)
    if addr is None:
        named.pop(name, None)
    else:
        col, row = parse_address(addr)
        named[name] = format_address(col, row)
    return with_sheet(w, replace(s, named_cells=named))


def with_role(w: Workbook, sheet_name: str, role: SheetRole) -> Workbook:
    s = w.require_sheet(sheet_name)
    return with_sheet(w, replace(s, role=role))
