import random
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EXPOSURE_A1, EXPOSURE_NAMED
from genwb import random_conditional, random_named_expression
from nmd.fixtures import secdi_model
from nmd.formula import (
    BinaryOp,
    ConditionalAggregate,
    CurrentRowCell,
    NameRef,
    NumberLit,
    UnnamedReferenceError,
    UnsupportedConnectiveError,
    parse_a1,
    parse_named,
    print_named,
)
from nmd.model import (
    ColumnDef,
    LiteralCell,
    QualifiedName,
    Sheet,
    SheetRole,
    UnresolvedNameError,
    Workbook,
)

# the display splits this across lines; parsing is whitespace-insensitive
EXPOSURE_NAMED_WRAPPED = (
    "=MAX (SecDI.ExposureResidualMaturity  \n"
    "[SecDI.SecurityID = SEC_GteeADJ.SecurityID AND  \n"
    "SecDI1.LinkFlag = 1 ] )"
)


def offer_workbook() -> Workbook:
    """A sheet shaped like the walker figure: dotted names on SecDI_2."""
    sheet = Sheet(
        "SecDI_2", SheetRole.CALCULATION, 5, 7,
        columns=(
            ColumnDef("B", "SecDI2.OfferAmt1"),
            ColumnDef("C", "SecDI2.OfferPerc1"),
            ColumnDef("F", "SecDI2.DebtInstrumentOID"),
        ),
        cells={"D5": LiteralCell(Decimal(2)), "E5": LiteralCell(Decimal(3))},
        named_cells={"SecDI2.LinkedDiscountValue1": "D5", "SecDI2.Ratio1": "E5"},
    )
    return Workbook("offers", (sheet,))


def test_parse_bracket_notation(fix_b):
    got = parse_named(EXPOSURE_NAMED_WRAPPED, fix_b)
    assert isinstance(got, ConditionalAggregate)
    assert got.aggregator == "MAX"
    assert got.value_column == QualifiedName("SecDI", "ExposureResidualMaturity")
    first, second = got.conditions
    assert first.lhs == QualifiedName("SecDI", "SecurityID")
    assert first.op == "="
    assert first.rhs == CurrentRowCell(QualifiedName("SEC_GteeADJ", "SecurityID"))
    assert second.lhs == QualifiedName("SecDI1", "LinkFlag")
    assert second.rhs == NumberLit(Decimal(1))


def test_parse_plain_named_expression():
    w = offer_workbook()
    got = parse_named("=SecDI2.LinkedDiscountValue1 * SecDI2.Ratio1", w)
    assert got == BinaryOp(
        "*",
        NameRef("SecDI2.LinkedDiscountValue1", sheet="SecDI_2"),
        NameRef("SecDI2.Ratio1", sheet="SecDI_2"),
    )


def test_or_is_an_unsupported_connective(fix_a):
    with pytest.raises(UnsupportedConnectiveError):
        parse_named("MAX(SecDI.Val [SecDI.Key = 1 OR SecDI.Flag = 1])", fix_a)


def test_and_is_case_insensitive(fix_a):
    lower = parse_named("MAX(SecDI.Val [SecDI.Key = 1 and SecDI.Flag = 1])", fix_a)
    mixed = parse_named("MAX(SecDI.Val [SecDI.Key = 1 And SecDI.Flag = 1])", fix_a)
    assert lower == mixed
    assert len(lower.conditions) == 2


def test_unresolved_name_rejected(fix_a):
    with pytest.raises(UnresolvedNameError):
        parse_named("MAX(SecDI.NoSuch [SecDI.Key = 1])", fix_a)


def test_print_golden_pair(fix_b):
    ast = parse_a1(EXPOSURE_A1)
    from nmd.formula import decompile_array

    assert print_named(decompile_array(ast, fix_b), fix_b) == EXPOSURE_NAMED


def test_quoted_prefix_rendering():
    w = offer_workbook()
    agg = parse_named(
        "SUM('SecDI_2'.SecDI2.OfferAmt1 ['SecDI_2'.SecDI2.OfferPerc1 < 'SecDI_2'.SecDI2.OfferPerc1])",
        w,
    )
    out = print_named(agg, w)
    assert out == (
        "SUM('SecDI_2'.SecDI2.OfferAmt1 "
        "['SecDI_2'.SecDI2.OfferPerc1 < 'SecDI_2'.SecDI2.OfferPerc1])"
    )


def test_quoted_prefix_sum_parses_as_displayed():
    # as displayed: space after SUM, quoted prefixes, lowercase-ish And,
    # both sides of each condition naming a column
    text = (
        "SUM ('SecDI_2'.SecDI2.OfferAmt1 "
        "['SecDI_2'.SecDI2.DebtInstrumentOID = 'SecDI_2'.SecDI2.DebtInstrumentOID "
        "And 'SecDI_2'.SecDI2.OfferPerc1 < 'SecDI_2'.SecDI2.OfferPerc1])"
    )
    w = offer_workbook()
    agg = parse_named(text, w)
    assert agg.aggregator == "SUM"
    assert all(isinstance(c.rhs, CurrentRowCell) for c in agg.conditions)
    assert print_named(agg, w) == (
        "SUM('SecDI_2'.SecDI2.OfferAmt1 "
        "['SecDI_2'.SecDI2.DebtInstrumentOID = 'SecDI_2'.SecDI2.DebtInstrumentOID "
        "AND 'SecDI_2'.SecDI2.OfferPerc1 < 'SecDI_2'.SecDI2.OfferPerc1])"
    )


def test_if_division_expression_round_trips():
    sheet = Sheet(
        "SecDI_2", SheetRole.CALCULATION, 5, 7,
        cells={},
        named_cells={
            "SecDI2.RemainingDiscountValue": "B5",
            "SecDI2.OfferAmt1": "C5",
        },
    )
    w = Workbook("offers", (sheet,))
    text = (
        "=IF(SecDI2.RemainingDiscountValue < 0, "
        "SecDI2.OfferAmt1 / SecDI2.RemainingDiscountValue, 0)"
    )
    ast = parse_named(text, w)
    assert print_named(ast, w) == text


def test_rhs_must_be_column_or_literal():
    w = secdi_model()
    with pytest.raises(Exception, match="column or a literal"):
        parse_named("MAX(SecDI.Val [SecDI.Key = SEC_GteeADJ.MaxVal])", w)


def test_print_named_reports_bare_address(fix_a):
    ast = parse_a1("=SECDI!$A$1+1")
    with pytest.raises(UnnamedReferenceError) as err:
        print_named(ast, fix_a)
    assert err.value.address == "SECDI!$A$1"


def test_print_named_expression_spacing():
    w = offer_workbook()
    got = parse_named("=IF(SecDI2.Ratio1<0,SecDI2.LinkedDiscountValue1/SecDI2.Ratio1,0)", w)
    assert print_named(got, w) == (
        "=IF(SecDI2.Ratio1 < 0, SecDI2.LinkedDiscountValue1 / SecDI2.Ratio1, 0)"
    )


def test_leading_equals_is_optional(fix_a):
    assert parse_named("MAX(SecDI.Val [SecDI.Key = 1])", fix_a) == parse_named(
        "=MAX(SecDI.Val [SecDI.Key = 1])", fix_a
    )


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_expression_round_trip(seed):
    w = secdi_model()
    ast = random_named_expression(random.Random(seed))
    assert parse_named(print_named(ast, w), w) == ast


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_conditional_round_trip(seed):
    w = secdi_model()
    agg = random_conditional(random.Random(seed))
    assert parse_named(print_named(agg, w), w) == agg
