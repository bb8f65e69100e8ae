"""Command-line interface: ``speechframe --corpus DIR <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import corpus as cp
from . import query as q
from .alphabet import validate_class, SoundUnitClass
from .errors import SpeechFrameError
from .store import (
    dump_record,
    init_corpus,
    integrity_check,
    open_corpus,
    save_corpus,
    transaction,
)

log = logging.getLogger("speechframe")


def _out(text: str = "") -> None:
    sys.stdout.write(text + "\n")


def _err(text: str) -> None:
    sys.stderr.write(text + "\n")


def cmd_init(args) -> int:
    h = init_corpus(args.corpus, with_alphabet=args.seed)
    n_class = len(h.tables["CLASS"])
    if args.output == "records":
        _out(json.dumps({"corpus": str(h.root), "tables": len(h.schema), "sound_units": n_class}))
    else:
        _out(f"initialized {h.root}: {len(h.schema)} tables, {n_class} sound units")
    return 0


def cmd_import(args) -> int:
    h = open_corpus(args.corpus)
    path = Path(args.file)
    records = []
    with open(path, encoding="utf-8") as f:
        for n, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                _err(f"{path}:{n}: parse error: {exc.msg}")
                return 1
    try:
        with transaction(h):
            for i, rec in enumerate(records, start=1):
                try:
                    cp.insert_record(h, args.table, rec)
                except SpeechFrameError as exc:
                    raise SpeechFrameError(f"record {i}: {exc}") from exc
    except SpeechFrameError as exc:
        _err(f"import failed, nothing inserted: {exc}")
        return 1
    save_corpus(h)
    _out(f"imported {len(records)} record(s) into {args.table}")
    return 0


def run_validation(h, strict: bool = False) -> tuple[list[str], list[str]]:
    """Collect (violations, warnings) for a corpus as printable lines."""
    errors = [str(v) for v in integrity_check(h)]
    registry = h.registry()
    for rec in h.tables["CLASS"].values():
        errors += [str(v) for v in validate_class(SoundUnitClass.from_record(rec), registry)]
    signals = sorted(f for (f,) in h.tables["SPEECH_SIGNAL"])
    for name in signals:
        for source in cp.SOURCES:
            errors += [str(v) for v in cp.validate_segmentation(h, name, source)]
    for name, count in cp.expert_check_report(h):
        shown = "no recorded" if count is None else str(count)
        errors.append(
            f"[expert-check] SEGMENTATION {name}: {shown} expert check(s), "
            f"needs at least {cp.MIN_EXPERTS}"
        )
    warnings = []
    if h.tables["CLASS"]:
        cov = cp.symbol_coverage(h)
        for sym in cov.under_covered:
            warnings.append(
                f"under-covered symbol {sym!r}: {cov.counts[sym]} manual occurrence(s), "
                f"needs at least {cov.threshold}"
            )
    if strict:
        errors += warnings
    return errors, warnings


def cmd_validate(args) -> int:
    h = open_corpus(args.corpus, repair=True)
    errors, warnings = run_validation(h, strict=args.strict)
    if args.output == "records":
        for e in errors:
            _out(json.dumps({"level": "violation", "message": e}, ensure_ascii=False))
        if not args.strict:
            for w in warnings:
                _out(json.dumps({"level": "warning", "message": w}, ensure_ascii=False))
    else:
        for e in errors:
            _out(f"violation: {e}")
        if not args.strict:
            for w in warnings:
                _out(f"warning: {w}")
        _out(f"{len(errors)} violation(s), {len(warnings)} warning(s)")
    return 1 if errors else 0


def _title(reg, book, code):
    if code is None:
        return "-"
    try:
        return reg.lookup(book, code).title
    except SpeechFrameError:
        return str(code)


def cmd_search(args) -> int:
    h = open_corpus(args.corpus)
    reg = h.registry()
    try:
        criteria = [q.parse_criterion(w, reg) for w in args.where]
    except SpeechFrameError as exc:
        _err(str(exc))
        if not str(exc).count("searchable attributes"):
            _err("searchable attributes: " + ", ".join(q.SEARCHABLE))
        return 1
    found = sorted(q.staged_search(h, criteria), key=lambda s: s.file_name)
    schema = h.schema["SPEECH_SIGNAL"]
    if args.output == "records":
        for s in found:
            _out(dump_record(schema, s.to_record()))
        return 0
    idx = q.signal_index(h)
    sex_of = dict(zip((s.file_name for s in idx.signals), idx.columns["sex"]))
    rows = [("FILE_NAME", "SPEAKER", "SEX", "LENGTH", "DIALECT", "EMOTION", "VOICE")]
    for s in found:
        rows.append((
            s.file_name, str(s.speaker), _title(reg, "BOOK_SEX", sex_of[s.file_name]),
            f"{s.length:.3f}", _title(reg, "BOOK_DIALECTS", s.dialect),
            _title(reg, "BOOK_EMOTIONS", s.emotional_state),
            _title(reg, "BOOK_VOICE_TYPES", s.voice_type),
        ))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    for r in rows:
        _out("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    _out(f"{len(found)} signal(s) matched")
    return 0


def cmd_stats(args) -> int:
    h = open_corpus(args.corpus)
    stats = q.corpus_stats(h)
    if args.output == "records":
        _out(json.dumps(stats.as_dict(), ensure_ascii=False))
        return 0
    by_sex = ", ".join(f"{k} {v}" for k, v in sorted(stats.speaker_count_by_sex.items())) or "-"
    lines = [
        ("sound units", str(stats.sound_unit_count)),
        ("speech units", str(stats.speech_unit_count)),
        ("speakers", f"{stats.speaker_count} ({by_sex})"),
        ("speech signals", str(stats.signal_count)),
        ("total duration", f"{stats.total_duration_s:.3f} s"),
        ("manually segmented", str(stats.manually_segmented_signal_count)),
    ]
    width = max(len(k) for k, _ in lines)
    for k, v in lines:
        _out(f"{k.ljust(width)}  {v}")
    return 0


def cmd_export_segmentation(args) -> int:
    h = open_corpus(args.corpus)
    if args.out in (None, "-"):
        cp.export_segmentation(h, args.file_name, sys.stdout, args.source)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as f:
            cp.export_segmentation(h, args.file_name, f, args.source)
    return 0


def cmd_queries(args) -> int:
    for cq in q.list_canned_queries():
        if args.output == "records":
            _out(json.dumps({"name": cq.name, "kind": cq.kind, "description": cq.description}))
        else:
            _out(f"{cq.name:28}  {cq.kind:9}  {cq.description}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="speechframe", description="Speech corpus management.")
    p.add_argument("--corpus", required=False, help="corpus directory")
    p.add_argument("--output", choices=("text", "records"), default="text")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("init", help="create an empty corpus")
    s.add_argument("--seed", action="store_true", help="include the 77-unit Russian alphabet")
    s.set_defaults(func=cmd_init)

    s = sub.add_parser("import", help="insert line-delimited records into a table")
    s.add_argument("table")
    s.add_argument("file")
    s.set_defaults(func=cmd_import)

    s = sub.add_parser("validate", help="check keys, segmentation and coverage rules")
    s.add_argument("--strict", action="store_true", help="treat warnings as violations")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("search", help="staged search over speech signals")
    s.add_argument("--where", action="append", default=[], metavar="ATTR=VALUE",
                   help="filter stage; repeat for more stages; ranges as lo..hi")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("stats", help="corpus statistics")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("export-segmentation", help="write a signal's segmentation as TSV")
    s.add_argument("file_name")
    s.add_argument("--source", choices=cp.SOURCES, default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_export_segmentation)

    s = sub.add_parser("queries", help="list the predefined queries")
    s.set_defaults(func=cmd_queries)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.corpus is None and args.command != "queries":
        parser.error("--corpus is required")
    try:
        return args.func(args)
    except SpeechFrameError as exc:
        _err(f"error: {exc}")
        return 1
    except OSError as exc:
        _err(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
