import random
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genwb import canonical_ast
from nmd.formula import (
    ArrayConditional,
    BinaryOp,
    CellRef,
    FormulaSyntaxError,
    NameRef,
    NumberLit,
    RangeRef,
    UnknownFunctionError,
    parse_a1,
    print_a1,
)

EXPOSURE_A1 = (
    "=MAX(IF(SECDI!$B$5:$B$754=SEC_GTEEADJ!$B5,"
    "IF(SECDI1!$C$5:$C$754=1,SECDI!$L$5:$L$754)))"
)


def test_parse_array_formula_shape():
    ast = parse_a1(EXPOSURE_A1)
    assert isinstance(ast, ArrayConditional)
    assert ast.aggregator == "MAX"
    assert len(ast.conditions) == 2
    assert ast.value == RangeRef("SECDI", "L", 5, 754, True, True, True)
    first, second = ast.conditions
    assert first.lhs == RangeRef("SECDI", "B", 5, 754, True, True, True)
    assert first.rhs == CellRef("SEC_GTEEADJ", "B", 5, col_abs=True, row_abs=False)
    assert second.rhs == NumberLit(Decimal(1))


def test_parse_simple_arithmetic():
    assert parse_a1("=1+1") == BinaryOp("+", NumberLit(Decimal(1)), NumberLit(Decimal(1)))


def test_parse_error_carries_offset():
    with pytest.raises(FormulaSyntaxError) as err:
        parse_a1("=MAX(")
    assert err.value.offset == 5


def test_unknown_function():
    with pytest.raises(UnknownFunctionError) as err:
        parse_a1("=VLOOKUP(A1,B1:B9)")
    assert err.value.function == "VLOOKUP"


def test_if_arity_checked():
    with pytest.raises(FormulaSyntaxError, match="IF takes 2 or 3"):
        parse_a1("=IF(1>0)")
    with pytest.raises(FormulaSyntaxError, match="IF takes 2 or 3"):
        parse_a1("=IF(1>0,1,2,3)")


def test_bracket_is_not_part_of_the_a1_surface():
    with pytest.raises(FormulaSyntaxError):
        parse_a1("=MAX(SECDI!$L$5:$L$7 [SECDI!$B$5:$B$7=1])")


def test_print_golden_array_formula():
    assert print_a1(parse_a1(EXPOSURE_A1)) == EXPOSURE_A1


def test_print_number():
    assert print_a1(NumberLit(Decimal(0))) == "=0"


def test_whitespace_insensitive_outside_strings():
    spaced = "= MAX( IF( SECDI!$B$5 : $B$754 = SEC_GTEEADJ!$B5 ,\n IF( SECDI1!$C$5:$C$754 = 1, SECDI!$L$5:$L$754 ) ) )"
    assert parse_a1(spaced) == parse_a1(EXPOSURE_A1)
    assert parse_a1('="a b"') != parse_a1('="ab"')


@pytest.mark.parametrize(
    "text",
    [
        "=1+2*3",
        "=(1+2)*3",
        "=1-2-3",
        "=1-(2-3)",
        "=2*(3+4)/5",
        "=A1=B1",
        "=1<2",
        '="x"<>"y"',
        "=SUM(B5:B9,1,C1)",
        "=IF(A1>0,A1,0-A1)",
        "=-5*3",
        "=1--3",
        "=SecDI.Key+1",
        "='MY SHEET'!B5+'S 1'.Rate",
        "=SECDI!$B$5:$B$9",
    ],
)
def test_print_parse_fixed_points(text):
    ast = parse_a1(text)
    assert print_a1(ast) == text
    assert parse_a1(print_a1(ast)) == ast


def test_parens_preserved_only_where_needed():
    assert print_a1(parse_a1("=((1+2))*3")) == "=(1+2)*3"
    assert print_a1(parse_a1("=1+(2*3)")) == "=1+2*3"


def test_ranges_must_be_single_column():
    with pytest.raises(FormulaSyntaxError, match="one column"):
        parse_a1("=SUM(B5:C9)")
    with pytest.raises(FormulaSyntaxError, match="reversed"):
        parse_a1("=SUM(B9:B5)")


def test_name_vs_ref_tokenization():
    assert parse_a1("=B5") == CellRef(None, "B", 5)
    assert parse_a1("=B5x") == NameRef("B5x")
    assert parse_a1("=TRUE").value is True


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9))
def test_round_trip_property(seed):
    ast = canonical_ast(random.Random(seed))
    assert parse_a1(print_a1(ast)) == ast
