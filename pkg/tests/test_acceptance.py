"""Acceptance suite: golden-text reproductions plus the property gates,
one pass/fail line per criterion. Every count and tolerance is pinned here
(string equality for the goldens, exact decimal equality for values).
"""

import random
import time
from datetime import datetime
from decimal import Decimal

from genwb import (
    canonical_ast,
    random_conditional,
    random_named_expression,
    random_single_edit,
    random_table_case,
    random_workbook,
)
from oracle import brute_force_aggregate
from test_audit import replay_history_log
from nmd.audit import diff, export_model, history, render_history
from nmd.engine import recalculate, what_if
from nmd.fixtures import secdi_full_span, secdi_model, secdi_model_extended
from nmd.formula import (
    compile_conditional,
    decompile_array,
    parse_a1,
    parse_named,
    print_a1,
    print_named,
)
from nmd.graph import build_graph
from nmd.model import CellTarget, FormulaCell, with_cell
from nmd.values import CellError
from nmd.walker import inspect

EXPOSURE_NAMED = (
    "MAX(SecDI.ExposureResidualMaturity [SecDI.SecurityID = SEC_GteeADJ.SecurityID "
    "AND SecDI1.LinkFlag = 1])"
)
EXPOSURE_A1 = (
    "=MAX(IF(SECDI!$B$5:$B$754=SEC_GTEEADJ!$B5,"
    "IF(SECDI1!$C$5:$C$754=1,SECDI!$L$5:$L$754)))"
)


def _report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"{status}: {name}{suffix}")
    assert ok, f"{name}{suffix}"


def test_notation_array_golden_round_trip():
    """Compiling the bracket notation emits the exact array-formula text,
    and decompiling it emits the exact notation back; zero tolerance."""
    started = time.time()
    w = secdi_full_span()
    compiled = compile_conditional(parse_named(EXPOSURE_NAMED, w), w, "SEC_GTEEADJ!M5")
    a1 = print_a1(compiled)
    named = print_named(decompile_array(parse_a1(EXPOSURE_A1), w), w)
    elapsed = time.time() - started
    _report(
        "conditional-notation golden round-trip",
        a1 == EXPOSURE_A1 and named == EXPOSURE_NAMED and elapsed < 1.0,
        f"{elapsed:.3f}s",
    )


def test_semantic_oracle_equivalence():
    """>=500 random conditional aggregates over tables of up to 200 rows:
    the compiled formula's value equals brute-force filter-then-aggregate,
    exact decimal equality, under 30 s."""
    started = time.time()
    rng = random.Random(20_090_526)
    cases, agreed = 0, 0
    for _ in range(500):
        w, agg, host = random_table_case(rng)
        compiled = compile_conditional(agg, w, host)
        w = with_cell(w, host.sheet, host.a1, FormulaCell(print_a1(compiled), array=True))
        ev = recalculate(w)
        expected = brute_force_aggregate(w, agg, host)
        got = CellError(ev.errors[host]) if host in ev.errors else ev.values[host]
        cases += 1
        agreed += got == expected
    elapsed = time.time() - started
    _report(
        "semantic oracle equivalence",
        cases >= 500 and agreed == cases and elapsed < 30.0,
        f"{agreed}/{cases} in {elapsed:.1f}s",
    )


def test_parser_round_trips():
    """>=1000 generated ASTs per surface satisfy parse(print(x)) == x."""
    rng = random.Random(41)
    w = secdi_model()
    a1_total, a1_ok = 0, 0
    for _ in range(1000):
        ast = canonical_ast(rng)
        a1_total += 1
        a1_ok += parse_a1(print_a1(ast)) == ast
    named_total, named_ok = 0, 0
    for i in range(1000):
        if i % 2:
            item = random_named_expression(rng)
        else:
            item = random_conditional(rng)
        named_total += 1
        named_ok += parse_named(print_named(item, w), w) == item
    _report(
        "parser round-trips (A1 and named)",
        a1_ok == a1_total == 1000 and named_ok == named_total == 1000,
        f"a1 {a1_ok}/{a1_total}, named {named_ok}/{named_total}",
    )


def test_graph_duality_and_walker_neighborhoods():
    """>=100 random workbooks: precedents/dependents are exact inverses and
    walker neighborhoods equal the graph's (set equality)."""
    rng = random.Random(1009)
    books, ok = 0, 0
    for _ in range(100):
        w = random_workbook(rng)
        g = build_graph(w)
        ev = recalculate(w, g)
        good = True
        for d, ps in g.precedents.items():
            good &= all(d in g.dependents_of(p) for p in ps)
        for p, ds in g.dependents.items():
            good &= all(p in g.precedents_of(d) for d in ds)
        for cell in g.analyses:
            view = inspect(w, ev, cell, g)
            covered = set()
            for t in view.precedent_targets:
                if isinstance(t, CellTarget):
                    covered.add(t.cell_id())
                else:
                    covered.update(t.cell_ids())
            good &= covered == set(g.precedents_of(cell))
            good &= set(view.dependent_cells) == set(g.dependents_of(cell))
        books += 1
        ok += good
    _report("graph duality and walker neighborhoods", books >= 100 and ok == books,
            f"{ok}/{books}")


def test_version_history_replay():
    """The scripted commit sequence reproduces the version/revision pattern
    and the history report's rows are string-exact."""
    log, w = replay_history_log()
    pattern = [(r.version, r.revision) for r in log.records]
    expected_pattern = (
        [(87, 1), (88, 1), (89, 1)]
        + [(90, r) for r in range(1, 5)]
        + [(91, r) for r in range(1, 7)]
        + [(92, 1)]
    )
    text = render_history(history(log))
    expected_rows = [
        "1\tAnomalies & overrides further changes - had to save as new version due to ...\t429660\t09/04/2009 14:34",
        "1\tAnomalies & Overrides further changes.\t429660\t09/04/2009 15:53",
        "1\tAnomalies & Overrides further changes.\t429660\t09/04/2009 16:55",
        "1\tAnomalies & Overrides further changes.\t429660\t17/04/2009 12:41",
        "2\tAnomalies & Overrides further change.\t429660\t20/04/2009 12:48",
        "3\tFurther Anomalies & Overrides.\t429660\t21/04/2009 16:53",
        "4\tFurther Anomalies and Overrides.\t429660\t22/04/2009 12:00",
        "1\tFix for Input bindings on DI input sheet.\t429660\t28/04/2009 13:02",
        "2\tFurther change for Anomalies and Overrides.\t429660\t28/04/2009 16:05",
        "3\tUpdate to Security Type OID lookup to include Other.\t429660\t18/05/2009 09:59",
        "4\tA&D UAT Unit Test Folder added\t921024\t20/05/2009 15:41",
        "5\tRemoval of spurious validation on input_security sheet\t427240\t21/05/2009 16:07",
        "6\tR17 Version passed to CIT 26 05 2009\t427240\t26/05/2009 10:50",
        "1\tR17 Version passed to CIT 26 05 2009\t427240\t26/05/2009 10:55",
    ]
    lines = text.splitlines()
    data_rows = [l for l in lines if l and not l.startswith(("Version ", "Revision\t"))]
    groups = [l for l in lines if l.startswith("Version ")]
    _report(
        "version/revision history replay",
        pattern == expected_pattern
        and data_rows == expected_rows
        and groups == [f"Version {v}" for v in (87, 88, 89, 90, 91, 92)],
        f"{len(data_rows)} rows",
    )


def test_classification_property():
    """1000 randomized single-edit mutations classify correctly: edits
    confined to Calculation sheets are revisions, anything touching an
    Input/Output sheet is a version."""
    rng = random.Random(65_537)
    base = secdi_model()
    total, correct = 0, 0
    for _ in range(1000):
        mutated, expected = random_single_edit(rng, base)
        total += 1
        correct += diff(base, mutated).classification is expected
    _report("change classification property", total == 1000 and correct == total,
            f"{correct}/{total}")


def test_export_stamp():
    """Exporting stamps the newest record with the exact comment text."""
    log, w = replay_history_log()
    _, comment = export_model(log, w, "427240", datetime(2009, 5, 26, 11, 1, 1))
    _report(
        "export stamp",
        comment == "Exported by: 427240 on 26/05/2009 11:01:01"
        and log.head.comments[-1].text == comment,
        comment,
    )


def test_end_to_end_what_if():
    """Overriding the bound input changes the aggregate and the output
    cell, and nothing else is reported."""
    w = secdi_model_extended()
    delta = what_if(w, {"In.Key": Decimal(2)})
    got = {(d.label, d.before, d.after) for d in delta}
    _report(
        "end-to-end what-if delta",
        got == {
            ("MaxVal", Decimal(10), Decimal(30)),
            ("OUTPUTS!B5", Decimal(10), Decimal(30)),
        },
        ", ".join(sorted(f"{d.label}: {d.before}->{d.after}" for d in delta)),
    )
