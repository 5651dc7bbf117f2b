"""Dependency graph over workbook cells.

An edge runs precedent -> dependent whenever the dependent's formula
references the precedent directly, via a name, or via a range containing
it. Precedents and dependents are exact inverses by construction.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .formula.ast import CellRef, FormulaAst, NameRef, RangeRef, walk
from .formula.lexer import FormulaError
from .formula.parser import parse_a1
from .model import (
    CellId,
    CellTarget,
    ColumnTarget,
    FormulaCell,
    ResolvedTarget,
    UnresolvedNameError,
    AmbiguousNameError,
    Workbook,
    resolve_text_name,
)


class GraphError(ValueError):
    pass


@dataclass
class CellAnalysis:
    """Parse + reference extraction for one formula cell."""

    cell: CellId
    ast: FormulaAst | None
    parse_error: str | None
    targets: list[ResolvedTarget] = field(default_factory=list)
    unresolved: list[str] = field(default_factory=list)


def extract_references(
    w: Workbook, host: CellId, ast: FormulaAst
) -> tuple[list[ResolvedTarget], list[str]]:
    """Every reference in the formula, resolved. Unqualified cell refs bind
    to the host sheet; names resolve workbook-wide. Targets are deduped,
    source order kept."""
    targets: list[ResolvedTarget] = []
    unresolved: list[str] = []
    seen: set[tuple] = set()

    def add(t: ResolvedTarget) -> None:
        key = (type(t).__name__, t.render())
        if key not in seen:
            seen.add(key)
            targets.append(t)

    for node in walk(ast):
        if isinstance(node, CellRef):
            sheet_name = node.sheet if node.sheet is not None else host.sheet
            sheet = w.sheet(sheet_name)
            if sheet is None:
                unresolved.append(f"{sheet_name}!{node.col}{node.row}")
                continue
            add(CellTarget(sheet.name, node.col, node.row))
        elif isinstance(node, RangeRef):
            sheet_name = node.sheet if node.sheet is not None else host.sheet
            sheet = w.sheet(sheet_name)
            if sheet is None:
                unresolved.append(f"{sheet_name}!{node.col}{node.first_row}:{node.col}{node.last_row}")
                continue
            add(ColumnTarget(sheet.name, node.col, node.first_row, node.last_row))
        elif isinstance(node, NameRef):
            try:
                _, target = resolve_text_name(w, node.name, node.sheet)
            except (UnresolvedNameError, AmbiguousNameError) as e:
                unresolved.append(str(e))
                continue
            add(target)
    return targets, unresolved


def analyze(w: Workbook) -> dict[CellId, CellAnalysis]:
    """Parse every formula cell and extract its references. Parse and
    resolution failures are recorded, not raised."""
    out: dict[CellId, CellAnalysis] = {}
    for sheet in w.sheets:
        for addr, content in sheet.cells.items():
            if not isinstance(content, FormulaCell):
                continue
            cell = CellId.parse(f"{sheet.name}!{addr}")
            try:
                ast = parse_a1(content.text)
            except FormulaError as e:
                out[cell] = CellAnalysis(cell, None, str(e))
                continue
            targets, unresolved = extract_references(w, cell, ast)
            out[cell] = CellAnalysis(cell, ast, None, targets, unresolved)
    return out


def _target_cells(t: ResolvedTarget) -> list[CellId]:
    if isinstance(t, CellTarget):
        return [t.cell_id()]
    return t.cell_ids()


@dataclass
class DependencyGraph:
    precedents: dict[CellId, frozenset[CellId]]
    dependents: dict[CellId, frozenset[CellId]]
    cycles: tuple[tuple[CellId, ...], ...]
    topo_order: tuple[CellId, ...]
    analyses: dict[CellId, CellAnalysis]

    @property
    def nodes(self) -> set[CellId]:
        return set(self.precedents)

    def precedents_of(self, cell: CellId) -> frozenset[CellId]:
        return self.precedents.get(cell, frozenset())

    def dependents_of(self, cell: CellId) -> frozenset[CellId]:
        return self.dependents.get(cell, frozenset())


def build_graph(w: Workbook, analyses: dict[CellId, CellAnalysis] | None = None) -> DependencyGraph:
    """Build the full edge set. Raises GraphError on an unparseable
    formula, reporting its address. Cycle detection is included; the
    topological order (lexicographic tie-break on sheet then address)
    covers the acyclic part."""
    if analyses is None:
        analyses = analyze(w)
    pre: dict[CellId, set[CellId]] = {}
    dep: dict[CellId, set[CellId]] = {}

    def node(c: CellId) -> None:
        pre.setdefault(c, set())
        dep.setdefault(c, set())

    for sheet in w.sheets:
        for addr in sheet.cells:
            node(CellId.parse(f"{sheet.name}!{addr}"))
    for a in analyses.values():
        if a.parse_error is not None:
            raise GraphError(f"{a.cell}: formula does not parse: {a.parse_error}")
        node(a.cell)
        for t in a.targets:
            for p in _target_cells(t):
                node(p)
                pre[a.cell].add(p)
                dep[p].add(a.cell)

    # Kahn's algorithm; nodes left over sit on or behind a cycle
    indegree = {c: len(ps) for c, ps in pre.items()}
    ready = [c for c, d in indegree.items() if d == 0]
    heapq.heapify(ready)
    order: list[CellId] = []
    while ready:
        c = heapq.heappop(ready)
        order.append(c)
        for d in sorted(dep[c]):
            indegree[d] -= 1
            if indegree[d] == 0:
                heapq.heappush(ready, d)
    leftover = {c for c, d in indegree.items() if d > 0}
    cycles = _find_cycles(leftover, pre)

    return DependencyGraph(
        precedents={c: frozenset(ps) for c, ps in pre.items()},
        dependents={c: frozenset(ds) for c, ds in dep.items()},
        cycles=cycles,
        topo_order=tuple(order),
        analyses=analyses,
    )


def _find_cycles(
    leftover: set[CellId], pre: dict[CellId, set[CellId]]
) -> tuple[tuple[CellId, ...], ...]:
    """Strongly connected components of the leftover subgraph, each
    reported as a sorted member tuple."""
    # iterative Tarjan, restricted to leftover nodes
    index: dict[CellId, int] = {}
    low: dict[CellId, int] = {}
    on_stack: set[CellId] = set()
    stack: list[CellId] = []
    counter = [0]
    sccs: list[tuple[CellId, ...]] = []

    def neighbors(c: CellId) -> list[CellId]:
        return [p for p in pre.get(c, ()) if p in leftover]

    for root in sorted(leftover):
        if root in index:
            continue
        work = [(root, iter(neighbors(root)))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node_, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter[0]
                    counter[0] += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(neighbors(nxt))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node_] = min(low[node_], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node_])
            if low[node_] == index[node_]:
                members = []
                while True:
                    m = stack.pop()
                    on_stack.discard(m)
                    members.append(m)
                    if m == node_:
                        break
                if len(members) > 1 or node_ in pre.get(node_, set()):
                    sccs.append(tuple(sorted(members)))
    return tuple(sorted(sccs))
