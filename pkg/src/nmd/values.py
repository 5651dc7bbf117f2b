"""Cell values and canonical number handling.

A cell value is one of: Decimal (number), str (text), bool, None (blank),
or CellError. Numbers are exact decimals; arithmetic runs at 34 digits of
precision and anything rendered for humans or serialized is first rounded
to 15 significant digits.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Context, Decimal, localcontext

ARITH_PRECISION = 34
OUTPUT_SIGFIGS = 15

_OUTPUT_CTX = Context(prec=OUTPUT_SIGFIGS)


@dataclass(frozen=True)
class CellError:
    """An error produced during evaluation, e.g. #DIV/0! or #VALUE!."""

    code: str

    def __str__(self) -> str:
        return self.code


CellValue = Decimal | str | bool | None | CellError

DIV_ZERO = CellError("#DIV/0!")
TYPE_ERROR = CellError("#VALUE!")
NAME_ERROR = CellError("#NAME?")
NUM_ERROR = CellError("#NUM!")


def is_number(v: CellValue) -> bool:
    # bool is not a number here even though bool subclasses int
    return isinstance(v, Decimal)


def values_equal(a: CellValue, b: CellValue) -> bool:
    """Equality with strict type classes; numeric equality is on the
    decimal value, never on its textual representation."""
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, Decimal) and isinstance(b, Decimal):
        return a == b
    if type(a) is not type(b):
        return False
    return a == b


def round_for_output(d: Decimal) -> Decimal:
    """Round to the 15-significant-digit output precision."""
    return _OUTPUT_CTX.plus(d)


def format_decimal_exact(d: Decimal) -> str:
    """Canonical positional rendering with no rounding: no trailing zeros,
    no exponent notation, '-0' collapsed to '0'."""
    if d == 0:
        return "0"
    if d == d.to_integral_value():
        with localcontext() as ctx:
            ctx.prec = max(ARITH_PRECISION, d.adjusted() + 2)
            return str(d.quantize(Decimal(1)))
    return format(d.normalize(), "f")


def format_number(d: Decimal) -> str:
    """Display rendering: 15 significant digits, positional."""
    return format_decimal_exact(round_for_output(d))


def render_value(v: CellValue) -> str:
    """Display form used in reports and the CLI. Blank renders empty."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, Decimal):
        return format_number(v)
    if isinstance(v, CellError):
        return v.code
    return v


def value_to_json(v: CellValue) -> int | float | str | bool | None:
    """Convert to a JSON-safe scalar. Numbers are rounded to the output
    precision first; at 15 significant digits the decimal->float->repr
    round trip is exact, so serialization stays canonical."""
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, CellError):
        return v.code
    d = round_for_output(v)
    if d == d.to_integral_value():
        return int(d)
    return float(d)


def json_to_value(x: object) -> CellValue:
    """Convert a parsed JSON scalar (floats pre-parsed as Decimal) into a
    cell value. Rejects NaN/Infinity and magnitudes that cannot survive
    the canonical number encoding."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, int):
        x = Decimal(x)
    elif isinstance(x, float):
        # lossless: repr is the shortest exact form
        x = Decimal(repr(x))
    if not isinstance(x, Decimal):
        raise TypeError(f"not a cell value: {x!r}")
    if not x.is_finite():
        raise ValueError(f"number must be finite, got {x}")
    if x != 0:
        as_float = float(round_for_output(x))
        if as_float == 0 or as_float in (float("inf"), float("-inf")):
            raise ValueError(f"number out of representable range: {x}")
    return x
