"""Command-line entry point.

Exit codes: 0 success, 1 findings/differences reported, 2 errors.
The default user id comes from the NMD_USER environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime
from pathlib import Path

from . import audit, engine, validate, walker
from .formula import (
    ConditionalAggregate,
    compile_conditional,
    decompile_array,
    parse_a1,
    parse_named,
    print_a1,
    print_named,
)
from .model import Workbook, load_workbook, save_workbook
from .values import json_to_value, render_value

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2


class CliError(Exception):
    pass


def _load(path: str | None) -> Workbook:
    if not path:
        raise CliError("no workbook given (use --workbook PATH)")
    p = Path(path)
    if not p.exists():
        raise CliError(f"workbook not found: {path}")
    return load_workbook(p.read_bytes())


def _open_log(path: str | None) -> audit.AuditLog:
    if not path:
        raise CliError("no log given (use --log PATH)")
    return audit.AuditLog.load(path)


def _timestamp(arg: str | None) -> datetime:
    if arg is None:
        return datetime.now()
    try:
        return datetime.fromisoformat(arg)
    except ValueError:
        raise CliError(f"bad timestamp {arg!r} (want ISO-8601)")


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, ensure_ascii=False))
    elif text:
        print(text)


def _value_arg(raw: str):
    try:
        from decimal import Decimal

        return json_to_value(json.loads(raw, parse_float=Decimal))
    except (json.JSONDecodeError, TypeError, ValueError):
        return raw


# ---------------------------------------------------------------------------
# Subcommands


def cmd_validate(args) -> int:
    w = _load(args.workbook)
    findings = validate.validate_structure(w)
    payload = {"findings": [vars(f) for f in findings]}
    text = "\n".join(f"{f.rule_id}\t{f.location}\t{f.message}" for f in findings)
    _emit(args, payload, text if findings else "no findings")
    return EXIT_FINDINGS if findings else EXIT_OK


def cmd_eval(args) -> int:
    w = _load(args.workbook)
    result = engine.recalculate(w)
    rows = []
    for cell in sorted(set(result.values) | set(result.errors)):
        rows.append({"cell": str(cell), "value": render_value(result.combined(cell))})
    payload = {"cells": rows}
    text = "\n".join(f"{r['cell']}\t{r['value']}" for r in rows)
    _emit(args, payload, text)
    return EXIT_OK


def cmd_whatif(args) -> int:
    w = _load(args.workbook)
    overrides = {}
    for setting in args.set or []:
        key, sep, raw = setting.partition("=")
        if not sep:
            raise CliError(f"--set wants name=value, got {setting!r}")
        overrides[key.strip()] = _value_arg(raw.strip())
    delta = engine.what_if(w, overrides)
    rows = [
        {
            "cell": str(d.cell),
            "label": d.label,
            "before": render_value(d.before),
            "after": render_value(d.after),
        }
        for d in delta
    ]
    payload = {"changes": rows}
    text = "\n".join(f"{r['label']}\t{r['before']} -> {r['after']}" for r in rows)
    _emit(args, payload, text if rows else "no changes")
    return EXIT_OK


def cmd_compile(args) -> int:
    w = _load(args.workbook)
    item = parse_named(args.text, w)
    if not isinstance(item, ConditionalAggregate):
        raise CliError("not a conditional aggregate (use the [condition] notation)")
    ast = compile_conditional(item, w, args.host)
    out = print_a1(ast)
    _emit(args, {"a1": out, "array": True}, out)
    return EXIT_OK


def cmd_decompile(args) -> int:
    w = _load(args.workbook)
    item = decompile_array(parse_a1(args.text), w)
    out = print_named(item, w)
    _emit(args, {"named": out}, out)
    return EXIT_OK


def cmd_diff(args) -> int:
    old = load_workbook(Path(args.old).read_bytes())
    new = load_workbook(Path(args.new).read_bytes())
    changes = audit.diff(old, new)
    rows = [
        {"kind": e.kind.value, "location": e.location, "before": e.before, "after": e.after}
        for e in changes.entries
    ]
    payload = {"classification": changes.classification.value, "entries": rows}
    lines = [changes.classification.value]
    lines += [f"{r['kind']}\t{r['location']}\t{r['before']!r} -> {r['after']!r}" for r in rows]
    _emit(args, payload, "\n".join(lines) if rows else "no change")
    return EXIT_OK if not rows else EXIT_FINDINGS


def cmd_commit(args) -> int:
    old = _load(args.workbook)
    new = load_workbook(Path(args.new_document).read_bytes())
    log = _open_log(args.log)
    user = args.user or ""
    if not user:
        raise CliError("no user id (use --user or set NMD_USER)")
    updated, record = audit.commit(
        log, old, new, user, _timestamp(args.timestamp), args.message, archive=args.archive
    )
    Path(args.workbook).write_bytes(save_workbook(updated))
    payload = {"version": record.version, "revision": record.revision, "seq": record.seq}
    _emit(args, payload, f"committed version {record.version} revision {record.revision}")
    return EXIT_OK


def cmd_history(args) -> int:
    log = _open_log(args.log)
    records = audit.history(log, version=args.version)
    payload = {
        "records": [
            {
                "version": r.version,
                "revision": r.revision,
                "description": r.description,
                "modified_by": r.modified_by,
                "modified_on": r.modified_on.strftime(audit.HISTORY_TS),
            }
            for r in records
        ]
    }
    _emit(args, payload, audit.render_history(records).rstrip("\n"))
    return EXIT_OK


def cmd_recall(args) -> int:
    log = _open_log(args.log)
    w = audit.recall(log, args.version, args.revision)
    data = save_workbook(w)
    if args.out:
        Path(args.out).write_bytes(data)
        _emit(args, {"written": args.out}, f"wrote {args.out}")
    else:
        sys.stdout.write(data.decode("utf-8"))
    return EXIT_OK


def cmd_export(args) -> int:
    w = _load(args.workbook)
    log = _open_log(args.log)
    user = args.user or ""
    if not user:
        raise CliError("no user id (use --user or set NMD_USER)")
    data, comment = audit.export_model(log, w, user, _timestamp(args.timestamp))
    if args.out:
        Path(args.out).write_bytes(data)
        _emit(args, {"written": args.out, "comment": comment}, comment)
    else:
        sys.stdout.write(data.decode("utf-8"))
        print(comment, file=sys.stderr)
    return EXIT_OK


def cmd_walk(args) -> int:
    w = _load(args.workbook)
    result = engine.recalculate(w)
    session = walker.new_session(w, args.cell, created_by=args.user or "")

    def show() -> None:
        view = walker.inspect(w, result, session.current, session.graph)
        print(f"== {session.current} ==")
        print("Precedents")
        for i, row in enumerate(view.precedents):
            print(f"  p{i}\t{row.line()}")
        print("Current Formula")
        print(f"  \t{view.current.line()}")
        print("Dependents")
        for i, row in enumerate(view.dependents):
            print(f"  d{i}\t{row.line()}")

    show()
    for line in sys.stdin:
        parts = line.split()
        if not parts:
            continue
        cmd = parts[0].lower()
        try:
            if cmd == "q":
                break
            if cmd == "b":
                session = walker.back(session)
            elif cmd in ("p", "d") and len(parts) == 2 and parts[1].isdigit():
                direction = walker.INTO_PRECEDENT if cmd == "p" else walker.INTO_DEPENDENT
                session = walker.step(session, direction, int(parts[1]))
            else:
                print(f"unknown command: {line.strip()} (use p N / d N / b / q)", file=sys.stderr)
                continue
        except walker.WalkError as e:
            print(f"error: {e}", file=sys.stderr)
            continue
        show()
    trail = walker.export_trail(session, result)
    if args.trail:
        Path(args.trail).write_text(trail, encoding="utf-8")
        print(f"trail written to {args.trail}")
    else:
        print(trail, end="")
    return EXIT_OK


def cmd_serve(args) -> int:
    from . import service

    config = service.ServiceConfig(
        workbook_path=args.workbook,
        log_path=args.log,
        allow_commit=args.allow_commit,
        static_dir=args.static,
    )
    service.serve(config, host=args.host, port=args.port)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nmd", description="Audit workbench for structured spreadsheet models."
    )
    parser.add_argument("-w", "--workbook", help="model document (.nmd.json)")
    parser.add_argument("-l", "--log", help="audit log file (JSON lines)")
    parser.add_argument("-u", "--user", default=os.environ.get("NMD_USER", ""),
                        help="user id (default: $NMD_USER)")
    parser.add_argument("-f", "--format", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", help="check the structured-spreadsheet rules")
    sub.add_parser("eval", help="recalculate and print every cell")

    p = sub.add_parser("whatif", help="recalculate under input overrides")
    p.add_argument("--set", action="append", metavar="NAME=VALUE")

    p = sub.add_parser("walk", help="interactive formula walker")
    p.add_argument("cell", help="start cell, e.g. SEC_GTEEADJ!M5")
    p.add_argument("--trail", help="write the trail report here on quit")

    p = sub.add_parser("compile", help="compile conditional-aggregate notation")
    p.add_argument("text")
    p.add_argument("--host", required=True, help="host cell, e.g. SEC_GTEEADJ!M5")

    p = sub.add_parser("decompile", help="recover the notation from an array formula")
    p.add_argument("text")

    p = sub.add_parser("diff", help="compare two model documents")
    p.add_argument("old")
    p.add_argument("new")

    p = sub.add_parser("commit", help="log a change to the model")
    p.add_argument("new_document", help="edited model document")
    p.add_argument("--user", default=argparse.SUPPRESS)
    p.add_argument("--message", required=True)
    p.add_argument("--archive", action="store_true")
    p.add_argument("--timestamp", help="ISO-8601 (default: now)")

    p = sub.add_parser("history", help="show the version/revision history")
    p.add_argument("--version", type=int)

    p = sub.add_parser("recall", help="retrieve an archived snapshot")
    p.add_argument("version", type=int)
    p.add_argument("revision", type=int)
    p.add_argument("--out")

    p = sub.add_parser("export", help="export the plain model document")
    p.add_argument("--user", default=argparse.SUPPRESS)
    p.add_argument("--out")
    p.add_argument("--timestamp", help="ISO-8601 (default: now)")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", help="directory of built web assets")
    p.add_argument("--allow-commit", action="store_true")

    return parser


_HANDLERS = {
    "validate": cmd_validate,
    "eval": cmd_eval,
    "whatif": cmd_whatif,
    "walk": cmd_walk,
    "compile": cmd_compile,
    "decompile": cmd_decompile,
    "diff": cmd_diff,
    "commit": cmd_commit,
    "history": cmd_history,
    "recall": cmd_recall,
    "export": cmd_export,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (CliError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
