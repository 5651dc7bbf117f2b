"""Formula language: parsing, printing, and conditional-aggregate
compilation in both the A1 and named surfaces."""

from .ast import (
    AGGREGATORS,
    COMPARISON_OPS,
    FUNCTIONS,
    ArrayCondition,
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
    as_array_conditional,
    normalize,
    walk,
)
from .conditional import (
    Condition,
    ConditionalAggregate,
    ConditionalError,
    CurrentRowCell,
    HostRowError,
    MisalignedSpansError,
    ShapeMismatchError,
    compile_conditional,
    decompile_array,
)
from .lexer import (
    FormulaError,
    FormulaSyntaxError,
    UnknownFunctionError,
    UnsupportedConnectiveError,
)
from .parser import parse_a1, parse_named
from .printer import UnnamedReferenceError, print_a1, print_named

__all__ = [
    "AGGREGATORS",
    "COMPARISON_OPS",
    "FUNCTIONS",
    "ArrayCondition",
    "ArrayConditional",
    "BinaryOp",
    "BoolLit",
    "CellRef",
    "Condition",
    "ConditionalAggregate",
    "ConditionalError",
    "CurrentRowCell",
    "FormulaAst",
    "FormulaError",
    "FormulaSyntaxError",
    "FunctionCall",
    "HostRowError",
    "MisalignedSpansError",
    "NameRef",
    "NumberLit",
    "RangeRef",
    "ShapeMismatchError",
    "TextLit",
    "UnknownFunctionError",
    "UnnamedReferenceError",
    "UnsupportedConnectiveError",
    "as_array_conditional",
    "compile_conditional",
    "decompile_array",
    "normalize",
    "parse_a1",
    "parse_named",
    "print_a1",
    "print_named",
    "walk",
]
