import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EXPOSURE_A1, EXPOSURE_NAMED
from genwb import random_conditional
from nmd.fixtures import secdi_model
from nmd.formula import (
    ConditionalAggregate,
    HostRowError,
    MisalignedSpansError,
    ShapeMismatchError,
    compile_conditional,
    decompile_array,
    parse_a1,
    parse_named,
    print_a1,
    print_named,
)
from nmd.formula.conditional import ConditionalError
from nmd.model import ColumnDef, Sheet, SheetRole, UnresolvedNameError, with_sheet


def test_compile_golden_pair(fix_b):
    agg = parse_named(EXPOSURE_NAMED, fix_b)
    ast = compile_conditional(agg, fix_b, "SEC_GTEEADJ!M5")
    assert print_a1(ast) == EXPOSURE_A1


def test_compile_single_condition(fix_a):
    agg = parse_named("SUM(SecDI.Val [SecDI.Flag = 1])", fix_a)
    ast = compile_conditional(agg, fix_a, "SEC_GTEEADJ!M5")
    assert print_a1(ast) == "=SUM(IF(SECDI!$C$5:$C$7=1,SECDI!$L$5:$L$7))"


def test_compile_misaligned_spans(fix_a):
    # a second sheet whose data region disagrees with SecDI's
    wide = Sheet("WIDE", SheetRole.CALCULATION, 5, 10, (ColumnDef("B", "Other"),))
    w = with_sheet(fix_a, wide)
    with pytest.raises(MisalignedSpansError):
        parse_named("SUM(SecDI.Val [WIDE.Other = 1])", w)


def test_compile_host_row_outside_data_region(fix_a):
    agg = parse_named("SUM(SecDI.Val [SecDI.Flag = 1])", fix_a)
    with pytest.raises(HostRowError):
        compile_conditional(agg, fix_a, "SEC_GTEEADJ!M9")


def test_compile_unresolved_value(fix_a):
    with pytest.raises(UnresolvedNameError):
        parse_named("SUM(SecDI.Nothing [SecDI.Flag = 1])", fix_a)


def test_value_must_be_a_column(fix_a):
    with pytest.raises(ConditionalError, match="named column"):
        parse_named("SUM(SEC_GteeADJ.MaxVal [SecDI.Flag = 1])", fix_a)


def test_decompile_golden(fix_b):
    agg = decompile_array(parse_a1(EXPOSURE_A1), fix_b)
    assert isinstance(agg, ConditionalAggregate)
    assert print_named(agg, fix_b) == EXPOSURE_NAMED


def test_decompile_shape_mismatch(fix_a):
    with pytest.raises(ShapeMismatchError):
        decompile_array(parse_a1("=MAX(IF(TRUE,SECDI!$L$5:$L$7))"), fix_a)


def test_decompile_fixed_rhs_cell_is_a_shape_mismatch(fix_a):
    with pytest.raises(ShapeMismatchError, match="fixed cell"):
        decompile_array(
            parse_a1("=MAX(IF(SECDI!$B$5:$B$7=SEC_GTEEADJ!$B$5,SECDI!$L$5:$L$7))"), fix_a
        )


def test_decompile_partial_range_is_not_a_column(fix_a):
    with pytest.raises(ConditionalError, match="coextensive"):
        decompile_array(
            parse_a1("=MAX(IF(SECDI!$B$5:$B$6=1,SECDI!$L$5:$L$7))"), fix_a
        )


def test_decompile_unnamed_column(fix_a):
    # column D carries no name
    with pytest.raises(ConditionalError):
        decompile_array(
            parse_a1("=MAX(IF(SECDI!$D$5:$D$7=1,SECDI!$L$5:$L$7))"), fix_a
        )


def test_three_arg_if_does_not_match_the_shape(fix_a):
    ast = parse_a1("=MAX(IF(SECDI!$B$5:$B$7=1,SECDI!$L$5:$L$7,0))")
    with pytest.raises(ShapeMismatchError):
        decompile_array(ast, fix_a)


def test_compilation_preserves_condition_order(fix_a):
    agg = parse_named(
        "SUM(SecDI.Val [SecDI.Key = 1 AND SecDI.Flag = 2 AND SecDI.Val > 3])", fix_a
    )
    compiled = compile_conditional(agg, fix_a, "SEC_GTEEADJ!M5")
    # condition i in the notation is the i-th nested IF
    assert [c.lhs.col for c in compiled.conditions] == ["B", "C", "L"]
    assert print_a1(compiled) == (
        "=SUM(IF(SECDI!$B$5:$B$7=1,"
        "IF(SECDI!$C$5:$C$7=2,"
        "IF(SECDI!$L$5:$L$7>3,SECDI!$L$5:$L$7))))"
    )


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_compile_decompile_round_trip(seed):
    w = secdi_model()
    agg = random_conditional(random.Random(seed))
    compiled = compile_conditional(agg, w, "SEC_GTEEADJ!M5")
    assert decompile_array(compiled, w) == agg
    # and the other direction, up to canonical text
    recompiled = compile_conditional(decompile_array(compiled, w), w, "SEC_GTEEADJ!M5")
    assert print_a1(recompiled) == print_a1(compiled)
