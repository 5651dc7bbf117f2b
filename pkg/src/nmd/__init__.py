"""nmd: an audit workbench for structured spreadsheet models.

Named model documents (`.nmd.json`) hold input/output/calculation sheets
with defined names. The package parses and prints formulas in both the A1
and named surfaces, compiles the readable conditional-aggregate notation
to nested-IF array formulas and back, evaluates models with what-if input
overrides, walks precedents/dependents with exportable trails, and keeps
a version/revision audit log with archival and stamped export.
"""

from .audit import (
    AuditLog,
    ChangeEntry,
    ChangeKind,
    ChangeSet,
    Classification,
    commit,
    diff,
    export_model,
    history,
    recall,
    render_history,
)
from .engine import CycleError, DeltaEntry, EvalResult, InputOverrideError, recalculate, what_if
from .formula import (
    ConditionalAggregate,
    compile_conditional,
    decompile_array,
    parse_a1,
    parse_named,
    print_a1,
    print_named,
)
from .graph import DependencyGraph, build_graph
from .model import (
    CellId,
    QualifiedName,
    Workbook,
    load_workbook,
    resolve_name,
    save_workbook,
)
from .validate import ValidationFinding, validate_structure
from .walker import WalkSession, back, export_trail, inspect, new_session, step

__all__ = [
    "AuditLog",
    "CellId",
    "ChangeEntry",
    "ChangeKind",
    "ChangeSet",
    "Classification",
    "ConditionalAggregate",
    "CycleError",
    "DeltaEntry",
    "DependencyGraph",
    "EvalResult",
    "InputOverrideError",
    "QualifiedName",
    "ValidationFinding",
    "WalkSession",
    "Workbook",
    "back",
    "build_graph",
    "commit",
    "compile_conditional",
    "decompile_array",
    "diff",
    "export_model",
    "export_trail",
    "history",
    "inspect",
    "load_workbook",
    "new_session",
    "parse_a1",
    "parse_named",
    "print_a1",
    "print_named",
    "recalculate",
    "recall",
    "render_history",
    "resolve_name",
    "save_workbook",
    "step",
    "validate_structure",
    "what_if",
]
