"""Change classification, the append-only audit log, archival and export.

Two kinds of model change exist: edits confined to Calculation-sheet
formulas and literals (lookups) log a new revision; anything touching an
Input or Output sheet's cells, names, columns, or role creates a new
version (revision resets to 1). A mixed change takes the version bump.

The log persists as JSON-lines, one record per line; archived snapshots
are interchange documents stored next to it. Records are never mutated or
deleted; comments are additions to the newest record.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from pathlib import Path

from .model import (
    ColumnTarget,
    FormulaCell,
    LiteralCell,
    Sheet,
    SheetRole,
    Workbook,
    load_workbook,
    parse_address,
    save_workbook,
)
from .values import render_value

HISTORY_TS = "%d/%m/%Y %H:%M"
EXPORT_TS = "%d/%m/%Y %H:%M:%S"


class Classification(Enum):
    NO_CHANGE = "NoChange"
    REVISION = "RevisionChange"
    VERSION = "VersionChange"


class ChangeKind(Enum):
    CELL_ADDED = "CellAdded"
    CELL_REMOVED = "CellRemoved"
    FORMULA_CHANGED = "FormulaChanged"
    LITERAL_CHANGED = "LiteralChanged"
    NAME_ADDED = "NameAdded"
    NAME_REMOVED = "NameRemoved"
    NAME_RETARGETED = "NameRetargeted"
    ROLE_CHANGED = "RoleChanged"
    SHEET_ADDED = "SheetAdded"
    SHEET_REMOVED = "SheetRemoved"


@dataclass(frozen=True)
class ChangeEntry:
    location: str
    kind: ChangeKind
    before: str
    after: str


@dataclass(frozen=True)
class ChangeSet:
    entries: tuple[ChangeEntry, ...]
    classification: Classification


class AuditError(ValueError):
    pass


class NoChangeError(AuditError):
    pass


class TimestampOrderError(AuditError):
    pass


class NotArchivedError(AuditError):
    pass


class UnknownVersionError(AuditError):
    pass


# ---------------------------------------------------------------------------
# Diff


def _content_text(content) -> str:
    if isinstance(content, LiteralCell):
        return render_value(content.value)
    text = content.text
    return f"{text} (array)" if content.array else text


def _qual(sheet: Sheet, name: str) -> str:
    return f"{sheet.name}.{name}"


def _named_columns(sheet: Sheet) -> dict[str, str]:
    return {c.name: c.letter for c in sheet.columns if c.name is not None}


def _column_range(sheet: Sheet, letter: str) -> str:
    return ColumnTarget(sheet.name, letter, sheet.first_data_row, sheet.last_data_row).render()


def _diff_sheet(old: Sheet, new: Sheet, entries: list, touched: list) -> None:
    def touch(roles=(old.role, new.role)) -> None:
        touched.extend(roles)

    if old.role is not new.role:
        entries.append(ChangeEntry(new.name, ChangeKind.ROLE_CHANGED, old.role.value, new.role.value))
        touch()

    if (old.first_data_row, old.last_data_row) != (new.first_data_row, new.last_data_row):
        # the data region bounds every named column's range
        old_cols, new_cols = _named_columns(old), _named_columns(new)
        shared = sorted(set(old_cols) & set(new_cols))
        if shared:
            for name in shared:
                entries.append(ChangeEntry(
                    _qual(new, name), ChangeKind.NAME_RETARGETED,
                    _column_range(old, old_cols[name]), _column_range(new, new_cols[name]),
                ))
        else:
            entries.append(ChangeEntry(
                new.name, ChangeKind.NAME_RETARGETED,
                f"rows {old.first_data_row}..{old.last_data_row}",
                f"rows {new.first_data_row}..{new.last_data_row}",
            ))
        touch()

    old_cols, new_cols = _named_columns(old), _named_columns(new)
    for name in sorted(set(old_cols) | set(new_cols)):
        if name not in old_cols:
            entries.append(ChangeEntry(
                _qual(new, name), ChangeKind.NAME_ADDED, "", _column_range(new, new_cols[name])
            ))
            touch()
        elif name not in new_cols:
            entries.append(ChangeEntry(
                _qual(old, name), ChangeKind.NAME_REMOVED, _column_range(old, old_cols[name]), ""
            ))
            touch()
        elif old_cols[name] != new_cols[name]:
            entries.append(ChangeEntry(
                _qual(new, name), ChangeKind.NAME_RETARGETED,
                _column_range(old, old_cols[name]), _column_range(new, new_cols[name]),
            ))
            touch()

    for name in sorted(set(old.named_cells) | set(new.named_cells)):
        old_addr = old.named_cells.get(name)
        new_addr = new.named_cells.get(name)
        if old_addr == new_addr:
            continue
        if old_addr is None:
            entries.append(ChangeEntry(_qual(new, name), ChangeKind.NAME_ADDED, "", new_addr))
        elif new_addr is None:
            entries.append(ChangeEntry(_qual(old, name), ChangeKind.NAME_REMOVED, old_addr, ""))
        else:
            entries.append(ChangeEntry(
                _qual(new, name), ChangeKind.NAME_RETARGETED, old_addr, new_addr
            ))
        touch()

    for addr in sorted(set(old.cells) | set(new.cells), key=lambda a: (parse_address(a)[0], parse_address(a)[1])):
        before = old.cells.get(addr)
        after = new.cells.get(addr)
        if before == after:
            continue
        location = f"{new.name.upper()}!{addr}"
        if before is None:
            entries.append(ChangeEntry(location, ChangeKind.CELL_ADDED, "", _content_text(after)))
        elif after is None:
            entries.append(ChangeEntry(location, ChangeKind.CELL_REMOVED, _content_text(before), ""))
        elif isinstance(before, FormulaCell) or isinstance(after, FormulaCell):
            entries.append(ChangeEntry(
                location, ChangeKind.FORMULA_CHANGED, _content_text(before), _content_text(after)
            ))
        else:
            entries.append(ChangeEntry(
                location, ChangeKind.LITERAL_CHANGED, _content_text(before), _content_text(after)
            ))
        touch()


def diff(old: Workbook, new: Workbook) -> ChangeSet:
    """Complete, minimal change list between two workbooks, classified.
    Version/revision identifiers and the workbook name are audit metadata,
    not model content, and are not diffed."""
    entries: list[ChangeEntry] = []
    touched: list[SheetRole] = []

    old_by_key = {s.name.upper(): s for s in old.sheets}
    new_by_key = {s.name.upper(): s for s in new.sheets}

    for key, sheet in new_by_key.items():
        if key not in old_by_key:
            entries.append(ChangeEntry(sheet.name, ChangeKind.SHEET_ADDED, "", sheet.role.value))
            touched.append(sheet.role)
    for key, sheet in old_by_key.items():
        if key not in new_by_key:
            entries.append(ChangeEntry(sheet.name, ChangeKind.SHEET_REMOVED, sheet.role.value, ""))
            touched.append(sheet.role)
    for key in new_by_key:
        if key in old_by_key:
            _diff_sheet(old_by_key[key], new_by_key[key], entries, touched)

    if not entries:
        classification = Classification.NO_CHANGE
    elif any(r in (SheetRole.INPUT, SheetRole.OUTPUT) for r in touched):
        classification = Classification.VERSION
    else:
        classification = Classification.REVISION
    return ChangeSet(tuple(entries), classification)


# ---------------------------------------------------------------------------
# Log


@dataclass(frozen=True)
class Comment:
    text: str
    user: str
    at: datetime


@dataclass
class LogRecord:
    seq: int
    version: int
    revision: int
    modified_by: str
    modified_on: datetime
    description: str
    comments: list[Comment] = field(default_factory=list)
    snapshot_path: str | None = None

    def to_json(self) -> dict:
        obj = {
            "seq": self.seq,
            "version": self.version,
            "revision": self.revision,
            "modified_by": self.modified_by,
            "modified_on": self.modified_on.isoformat(),
            "description": self.description,
            "comments": [
                {"text": c.text, "user": c.user, "at": c.at.isoformat()}
                for c in self.comments
            ],
        }
        if self.snapshot_path is not None:
            obj["snapshot_path"] = self.snapshot_path
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "LogRecord":
        return cls(
            seq=obj["seq"],
            version=obj["version"],
            revision=obj["revision"],
            modified_by=obj["modified_by"],
            modified_on=datetime.fromisoformat(obj["modified_on"]),
            description=obj["description"],
            comments=[
                Comment(c["text"], c["user"], datetime.fromisoformat(c["at"]))
                for c in obj.get("comments", [])
            ],
            snapshot_path=obj.get("snapshot_path"),
        )


class AuditLog:
    """Append-only history with optional JSON-lines persistence. Snapshots
    live as interchange documents in a sibling directory (or in memory for
    an unpersisted log)."""

    def __init__(self, path: str | Path | None = None, snapshot_dir: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        if snapshot_dir is not None:
            self.snapshot_dir = Path(snapshot_dir)
        elif self.path is not None:
            self.snapshot_dir = self.path.parent / (self.path.stem + "_snapshots")
        else:
            self.snapshot_dir = None
        self.records: list[LogRecord] = []
        self._memory_snapshots: dict[str, bytes] = {}

    @classmethod
    def load(cls, path: str | Path, snapshot_dir: str | Path | None = None) -> "AuditLog":
        log = cls(path, snapshot_dir)
        p = Path(path)
        if p.exists():
            last = (0, 0)
            for i, line in enumerate(p.read_text(encoding="utf-8").splitlines()):
                if not line.strip():
                    continue
                try:
                    record = LogRecord.from_json(json.loads(line))
                except (json.JSONDecodeError, KeyError, ValueError) as e:
                    raise AuditError(f"{p}:{i + 1}: bad log record: {e}")
                ids = (record.version, record.revision)
                if ids <= last:
                    raise AuditError(
                        f"{p}:{i + 1}: version/revision {ids} does not increase past {last}"
                    )
                last = ids
                log.records.append(record)
        return log

    @property
    def head(self) -> LogRecord | None:
        return self.records[-1] if self.records else None

    def save(self) -> None:
        if self.path is None:
            return
        text = "".join(json.dumps(r.to_json(), ensure_ascii=False) + "\n" for r in self.records)
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(self.path)

    # -- snapshots -------------------------------------------------------

    def _snapshot_name(self, version: int, revision: int) -> str:
        return f"v{version}r{revision}.nmd.json"

    def write_snapshot(self, w: Workbook) -> str:
        name = self._snapshot_name(w.version, w.revision)
        data = save_workbook(w)
        if self.snapshot_dir is not None:
            self.snapshot_dir.mkdir(parents=True, exist_ok=True)
            (self.snapshot_dir / name).write_bytes(data)
        else:
            self._memory_snapshots[name] = data
        return name

    def read_snapshot(self, name: str) -> bytes:
        if self.snapshot_dir is not None:
            p = self.snapshot_dir / name
            if not p.exists():
                raise NotArchivedError(f"snapshot file missing: {p}")
            return p.read_bytes()
        if name not in self._memory_snapshots:
            raise NotArchivedError(f"snapshot missing: {name}")
        return self._memory_snapshots[name]


def commit(
    log: AuditLog,
    old: Workbook,
    new: Workbook,
    user: str,
    timestamp: datetime,
    description: str,
    archive: bool = False,
) -> tuple[Workbook, LogRecord]:
    """Classify the change, bump the identifiers, append a record. A
    revision increments the revision; a version increments the version and
    resets the revision to 1. No-change commits are rejected, as are
    timestamps running backwards."""
    changes = diff(old, new)
    if changes.classification is Classification.NO_CHANGE:
        raise NoChangeError("nothing changed; commit rejected")
    head = log.head
    if head is not None and timestamp < head.modified_on:
        raise TimestampOrderError(
            f"timestamp {timestamp} earlier than last record ({head.modified_on})"
        )
    if changes.classification is Classification.VERSION:
        version, revision = old.version + 1, 1
    else:
        version, revision = old.version, old.revision + 1
    updated = replace(new, version=version, revision=revision)
    record = LogRecord(
        seq=(head.seq + 1 if head else 1),
        version=version,
        revision=revision,
        modified_by=user,
        modified_on=timestamp,
        description=description,
    )
    if archive:
        record.snapshot_path = log.write_snapshot(updated)
    log.records.append(record)
    log.save()
    return updated, record


def history(log: AuditLog, version: int | None = None) -> list[LogRecord]:
    """Records grouped by version ascending (the log is already ordered)."""
    records = log.records
    if version is not None:
        records = [r for r in records if r.version == version]
    return list(records)


def render_history(records: list[LogRecord]) -> str:
    """The history report: revision rows grouped under version headings,
    timestamps rendered DD/MM/YYYY HH:MM."""
    lines = ["Revision\tName\tModified By\tModified On"]
    current_version: int | None = None
    for r in records:
        if r.version != current_version:
            current_version = r.version
            lines.append(f"Version {r.version}")
        lines.append(
            f"{r.revision}\t{r.description}\t{r.modified_by}\t{r.modified_on.strftime(HISTORY_TS)}"
        )
    return "\n".join(lines) + "\n"


def recall(log: AuditLog, version: int, revision: int) -> Workbook:
    """Load the archived snapshot for (version, revision), byte-exact."""
    for r in log.records:
        if (r.version, r.revision) == (version, revision):
            if r.snapshot_path is None:
                raise NotArchivedError(f"version {version} revision {revision} was not archived")
            return load_workbook(log.read_snapshot(r.snapshot_path))
    raise UnknownVersionError(f"no record for version {version} revision {revision}")


def export_model(
    log: AuditLog, workbook: Workbook, user: str, timestamp: datetime
) -> tuple[bytes, str]:
    """Emit the plain interchange document and stamp the newest log record
    with the export comment."""
    comment_text = f"Exported by: {user} on {timestamp.strftime(EXPORT_TS)}"
    head = log.head
    if head is not None:
        head.comments.append(Comment(comment_text, user, timestamp))
        log.save()
    return save_workbook(workbook), comment_text
