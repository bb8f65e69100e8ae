"""In-memory relational store with key enforcement and a JSONL on-disk format.

A corpus directory holds ``corpus.manifest`` plus one ``<TABLE>.jsonl``
file per table. Tables are loaded whole; every mutation goes through
:func:`insert`, :func:`delete_cascade` or :func:`update_key_cascade`,
which keep primary and foreign keys consistent.

Concurrency: one writer, any number of readers, within one process.
"""

from __future__ import annotations

import contextlib
import datetime as dt
import json
import logging
import os
from collections import defaultdict
from pathlib import Path
from typing import Any, Iterator

from . import refbooks as rb
from .errors import (
    CorpusParseError,
    DanglingForeignKeyError,
    DuplicateKeyError,
    IntegrityViolationsError,
    KeyCollisionError,
    MissingManifestError,
    NotFoundError,
    PathNotEmptyError,
    RestrictedError,
    SchemaVersionMismatchError,
    TypeMismatchError,
    UnknownTableError,
    Violation,
)
from .schema import (
    CASCADE,
    FIELD_ALIASES,
    FORMAT_NAME,
    SCHEMA_VERSION,
    FieldSpec,
    ForeignKey,
    TableSchema,
    default_schema,
)

log = logging.getLogger(__name__)

MANIFEST = "corpus.manifest"


class CorpusHandle:
    """An open corpus: schema plus every table as ``key tuple -> record``."""

    def __init__(self, schema: dict[str, TableSchema], root: Path | None = None):
        self.root = Path(root) if root is not None else None
        self.schema = schema
        self.tables: dict[str, dict[tuple, dict]] = {name: {} for name in schema}
        self.dirty = False
        self.version = 0
        self.cache: dict[str, Any] = {}
        self.load_violations: list[Violation] = []
        self._referrers: dict[str, list[tuple[str, ForeignKey]]] = defaultdict(list)
        for t in schema.values():
            for fk in t.foreign_keys:
                self._referrers[fk.target_table].append((t.table_name, fk))

    def __repr__(self) -> str:
        n = sum(len(rows) for rows in self.tables.values())
        return f"CorpusHandle({str(self.root)!r}, {n} rows)"

    def touch(self) -> None:
        self.dirty = True
        self.version += 1
        self.cache.clear()

    def table_schema(self, table: str) -> TableSchema:
        try:
            return self.schema[table]
        except KeyError:
            raise UnknownTableError(f"unknown table {table!r}") from None

    def rows(self, table: str) -> list[dict]:
        self.table_schema(table)
        return list(self.tables[table].values())

    def get(self, table: str, key) -> dict:
        key = normalize_key(key)
        try:
            return self.tables[table][key]
        except KeyError:
            self.table_schema(table)
            raise NotFoundError(table, key) from None

    def has(self, table: str, key) -> bool:
        return normalize_key(key) in self.tables[table]

    def referrers(self, table: str) -> list[tuple[str, ForeignKey]]:
        return self._referrers.get(table, [])

    def registry(self) -> rb.ReferenceRegistry:
        reg = self.cache.get("registry")
        if reg is None:
            reg = rb.ReferenceRegistry.from_tables(
                {name: self.rows(name) for name in rb.BOOK_LAYOUT}
            )
            self.cache["registry"] = reg
        return reg

    def alphabet(self):
        from .alphabet import Alphabet, SoundUnitClass

        alpha = self.cache.get("alphabet")
        if alpha is None:
            alpha = Alphabet(tuple(SoundUnitClass.from_record(r) for r in self.rows("CLASS")))
            self.cache["alphabet"] = alpha
        return alpha


def normalize_key(key) -> tuple:
    return key if isinstance(key, tuple) else (key,)


# ---------------------------------------------------------------------------
# value coercion


def _coerce_value(spec: FieldSpec, value: Any) -> Any:
    if value is None:
        if spec.nullable:
            return None
        raise TypeMismatchError(f"{spec.name} may not be null")
    t = spec.type
    if t == "integer":
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeMismatchError(f"{spec.name} expects an integer, got {value!r}")
        return value
    if t in ("real", "duration"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TypeMismatchError(f"{spec.name} expects a number, got {value!r}")
        value = float(value)
        if value != value or value in (float("inf"), float("-inf")):
            raise TypeMismatchError(f"{spec.name} must be finite")
        if t == "duration" and value < 0:
            raise TypeMismatchError(f"{spec.name} must be a non-negative duration")
        return value
    if t == "text":
        if not isinstance(value, str):
            raise TypeMismatchError(f"{spec.name} expects text, got {value!r}")
        return value
    if t == "date":
        if isinstance(value, dt.datetime):
            raise TypeMismatchError(f"{spec.name} expects a calendar date, got a timestamp")
        if isinstance(value, dt.date):
            return value
        if isinstance(value, str):
            try:
                return dt.date.fromisoformat(value)
            except ValueError:
                pass
        raise TypeMismatchError(f"{spec.name} expects an ISO date, got {value!r}")
    if t == "boolean":
        if not isinstance(value, bool):
            raise TypeMismatchError(f"{spec.name} expects true/false, got {value!r}")
        return value
    if t == "flag":
        if isinstance(value, bool):
            return value
        if isinstance(value, int) and value in (0, 1):
            return bool(value)
        raise TypeMismatchError(f"{spec.name} expects a 0/1 flag, got {value!r}")
    raise TypeMismatchError(f"{spec.name}: unknown field type {t}")


def coerce_record(schema: TableSchema, record: dict) -> dict:
    """Return a normalized copy of ``record`` in schema field order."""
    unknown = set(record) - set(schema.field_index)
    if unknown:
        aliased = {
            FIELD_ALIASES.get(f"{schema.table_name}.{f}"): f for f in schema.field_index
        }
        record = dict(record)
        for name in list(unknown):
            if name in aliased:
                record[aliased[name]] = record.pop(name)
                unknown.discard(name)
    if unknown:
        raise TypeMismatchError(f"{schema.table_name}: unknown fields {sorted(unknown)}")
    out = {}
    for spec in schema.fields:
        if spec.name not in record and not spec.nullable:
            raise TypeMismatchError(f"{schema.table_name}: missing field {spec.name}")
        out[spec.name] = _coerce_value(spec, record.get(spec.name))
    return out


def _to_json_value(spec: FieldSpec, value: Any) -> Any:
    if value is None:
        return None
    if spec.type == "date":
        return value.isoformat()
    if spec.type == "flag":
        return int(value)
    return value


def record_to_json(schema: TableSchema, record: dict) -> dict:
    return {spec.name: _to_json_value(spec, record.get(spec.name)) for spec in schema.fields}


def dump_record(schema: TableSchema, record: dict) -> str:
    return json.dumps(record_to_json(schema, record), ensure_ascii=False)


# ---------------------------------------------------------------------------
# mutations


def _check_fks(h: CorpusHandle, schema: TableSchema, record: dict) -> None:
    for fk in schema.foreign_keys:
        value = record[fk.field]
        if value is None:
            continue
        if (value,) not in h.tables[fk.target_table]:
            raise DanglingForeignKeyError(schema.table_name, fk.edge(schema.table_name), value)


def insert(h: CorpusHandle, table: str, record: dict) -> tuple:
    """Insert one row and return its primary key tuple."""
    schema = h.table_schema(table)
    rec = coerce_record(schema, record)
    key = schema.key_of(rec)
    if key in h.tables[table]:
        raise DuplicateKeyError(table, key)
    _check_fks(h, schema, rec)
    h.tables[table][key] = rec
    h.touch()
    return key


def _reference_index(h: CorpusHandle, table: str, fk: ForeignKey) -> dict:
    index = defaultdict(list)
    for k, row in h.tables[table].items():
        v = row[fk.field]
        if v is not None:
            index[v].append(k)
    return index


def delete_cascade(h: CorpusHandle, table: str, key) -> dict[str, int]:
    """Delete a row and, along cascade edges, everything depending on it.

    The whole operation is refused if any surviving row would still point
    at a deleted one through a restrict edge.
    """
    key = normalize_key(key)
    h.table_schema(table)
    if key not in h.tables[table]:
        raise NotFoundError(table, key)

    doomed: dict[str, set[tuple]] = defaultdict(set)
    doomed[table].add(key)
    blockers: list[tuple[str, tuple, str]] = []
    indexes: dict[tuple[str, str], dict] = {}
    queue = [(table, key)]
    while queue:
        t, k = queue.pop()
        for ref_table, fk in h.referrers(t):
            idx = indexes.get((ref_table, fk.field))
            if idx is None:
                idx = indexes[(ref_table, fk.field)] = _reference_index(h, ref_table, fk)
            for ref_key in idx.get(k[0], ()):
                if fk.on_delete == CASCADE:
                    if ref_key not in doomed[ref_table]:
                        doomed[ref_table].add(ref_key)
                        queue.append((ref_table, ref_key))
                else:
                    blockers.append((ref_table, ref_key, fk.edge(ref_table)))

    blockers = [b for b in blockers if b[1] not in doomed[b[0]]]
    if blockers:
        raise RestrictedError(table, key, blockers)

    counts = {}
    for t, keys in doomed.items():
        for k in keys:
            del h.tables[t][k]
        counts[t] = len(keys)
    h.touch()
    return counts


def update_key_cascade(h: CorpusHandle, table: str, old_key, new_key) -> int:
    """Change a primary key and rewrite every reference to it.

    Returns the number of foreign-key fields rewritten. Updates cascade
    along every edge regardless of its delete policy.
    """
    schema = h.table_schema(table)
    old_key, new_key = normalize_key(old_key), normalize_key(new_key)
    rows = h.tables[table]
    if old_key not in rows:
        raise NotFoundError(table, old_key)
    if len(new_key) != len(schema.key_fields):
        raise TypeMismatchError(f"{table}: key needs {len(schema.key_fields)} part(s)")
    new_key = tuple(
        _coerce_value(schema.field_index[f], v) for f, v in zip(schema.key_fields, new_key)
    )
    if new_key == old_key:
        return 0
    if new_key in rows:
        raise KeyCollisionError(f"{table}: key {new_key!r} already in use")
    count = _rekey(h, table, old_key, new_key)
    h.touch()
    return count


def _rekey(h: CorpusHandle, table: str, old_key: tuple, new_key: tuple) -> int:
    schema = h.schema[table]
    rows = h.tables[table]
    row = dict(rows.pop(old_key))
    row.update(zip(schema.key_fields, new_key))
    rows[new_key] = row
    if len(old_key) != 1:
        return 0

    count = 0
    old_value, new_value = old_key[0], new_key[0]
    for ref_table, fk in h.referrers(table):
        ref_schema = h.schema[ref_table]
        ref_rows = h.tables[ref_table]
        hits = [k for k, r in ref_rows.items() if r[fk.field] == old_value]
        for k in hits:
            count += 1
            if fk.field in ref_schema.key_fields:
                new_ref_key = tuple(
                    new_value if f == fk.field else v
                    for f, v in zip(ref_schema.key_fields, k)
                )
                # the rewritten row may itself be a referenced key
                ref_rows[k] = {**ref_rows[k], fk.field: new_value}
                ref_rows[new_ref_key] = ref_rows.pop(k)
                if len(k) == 1:
                    count += _rewrite_refs(h, ref_table, k[0], new_ref_key[0])
            else:
                ref_rows[k] = {**ref_rows[k], fk.field: new_value}
    return count


def _rewrite_refs(h: CorpusHandle, table: str, old_value, new_value) -> int:
    # references into ``table`` after its single-field key changed in place
    count = 0
    for ref_table, fk in h.referrers(table):
        for k, r in list(h.tables[ref_table].items()):
            if r[fk.field] == old_value:
                h.tables[ref_table][k] = {**r, fk.field: new_value}
                count += 1
    return count


@contextlib.contextmanager
def transaction(h: CorpusHandle) -> Iterator[CorpusHandle]:
    """All-or-nothing block: on any exception, restore every table."""
    snapshot = {name: dict(rows) for name, rows in h.tables.items()}
    version, dirty = h.version, h.dirty
    try:
        yield h
    except BaseException:
        h.tables = snapshot
        h.version, h.dirty = version + 1, dirty
        h.cache.clear()
        raise


# ---------------------------------------------------------------------------
# integrity


def integrity_check(h: CorpusHandle) -> list[Violation]:
    """Every problem with keys or references; empty means the corpus is sound."""
    out = list(h.load_violations)
    for name, schema in h.schema.items():
        for key, row in h.tables[name].items():
            missing = [f for f in schema.key_fields if row.get(f) is None]
            if missing:
                out.append(Violation("incomplete-key", f"key field(s) {missing} unset", name, key))
                continue
            if schema.key_of(row) != key:
                out.append(Violation("key-mismatch", "stored key differs from row fields", name, key))
            for spec in schema.fields:
                try:
                    _coerce_value(spec, row.get(spec.name))
                except TypeMismatchError as exc:
                    out.append(Violation("type-mismatch", str(exc), name, key))
            for fk in schema.foreign_keys:
                v = row.get(fk.field)
                if v is not None and (v,) not in h.tables[fk.target_table]:
                    out.append(Violation(
                        "dangling-fk",
                        f"{fk.field}={v!r} has no match in {fk.target_table}",
                        name, key, fk.edge(name),
                    ))
    return out


# ---------------------------------------------------------------------------
# disk format


def new_corpus(root=None, registry: rb.ReferenceRegistry | None = None, alphabet_records=()) -> CorpusHandle:
    """Create an in-memory corpus with seeded reference books."""
    h = CorpusHandle(default_schema(), root)
    if registry is None:
        registry = rb.seed_default_registry()
    for name, rows in registry.to_tables().items():
        for rec in rows:
            insert(h, name, rec)
    for rec in alphabet_records:
        insert(h, "CLASS", rec)
    h.dirty = True
    return h


def init_corpus(path, with_alphabet: bool = False) -> CorpusHandle:
    """Materialize a fresh corpus directory; the directory must be empty or absent."""
    from .alphabet import parse_alphabet_lines, russian_alphabet_text

    path = Path(path)
    if path.exists() and (not path.is_dir() or any(path.iterdir())):
        raise PathNotEmptyError(f"{path} exists and is not an empty directory")
    records = parse_alphabet_lines(russian_alphabet_text().splitlines()) if with_alphabet else ()
    h = new_corpus(path, alphabet_records=records)
    save_corpus(h)
    return h


def manifest_for(h: CorpusHandle) -> dict:
    return {
        "format": FORMAT_NAME,
        "schema_version": SCHEMA_VERSION,
        "tables": sorted(h.schema),
        "field_aliases": dict(FIELD_ALIASES),
        "alphabet": "CLASS.jsonl",
    }


def _sort_key(key: tuple):
    return tuple((type(v).__name__, v) for v in key)


def save_corpus(h: CorpusHandle, path=None) -> None:
    """Write every table; files are written to temporaries first, then renamed."""
    root = Path(path) if path is not None else h.root
    if root is None:
        raise ValueError("corpus has no root path")
    root.mkdir(parents=True, exist_ok=True)
    staged: list[tuple[Path, Path]] = []
    try:
        for name in sorted(h.schema):
            schema = h.schema[name]
            final = root / f"{name}.jsonl"
            tmp = root / f".{name}.jsonl.tmp"
            with open(tmp, "w", encoding="utf-8", newline="\n") as f:
                for key in sorted(h.tables[name], key=_sort_key):
                    f.write(dump_record(schema, h.tables[name][key]) + "\n")
            staged.append((tmp, final))
        tmp = root / f".{MANIFEST}.tmp"
        with open(tmp, "w", encoding="utf-8", newline="\n") as f:
            f.write(json.dumps(manifest_for(h), indent=2) + "\n")
        staged.append((tmp, root / MANIFEST))
    except BaseException:
        for tmp, _ in staged:
            with contextlib.suppress(OSError):
                tmp.unlink()
        for name in h.schema:
            with contextlib.suppress(OSError):
                (root / f".{name}.jsonl.tmp").unlink()
        raise
    for tmp, final in staged:
        os.replace(tmp, final)
    if h.root is None:
        h.root = root
    if root == h.root:
        h.dirty = False
        h.load_violations = []


def _read_table(path: Path, schema: TableSchema) -> tuple[dict[tuple, dict], list[Violation]]:
    rows: dict[tuple, dict] = {}
    dups: list[Violation] = []
    if not path.exists():
        raise CorpusParseError("table file missing", str(path))
    with open(path, encoding="utf-8") as f:
        for n, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(f"bad JSON: {exc.msg}", str(path), n) from None
            if not isinstance(raw, dict):
                raise CorpusParseError("record must be an object", str(path), n)
            try:
                rec = coerce_record(schema, raw)
            except TypeMismatchError as exc:
                raise CorpusParseError(str(exc), str(path), n) from None
            key = schema.key_of(rec)
            if key in rows:
                dups.append(Violation(
                    "duplicate-key", f"line {n} repeats an existing key",
                    schema.table_name, key,
                ))
                continue
            rows[key] = rec
    return rows, dups


def open_corpus(path, repair: bool = False, create: bool = False) -> CorpusHandle:
    """Load a corpus directory.

    With ``create=True`` an empty or absent directory is initialized first.
    With ``repair=True`` integrity violations are kept on the handle
    instead of raising; duplicate keys keep their first occurrence.
    """
    root = Path(path)
    manifest_path = root / MANIFEST
    if not manifest_path.exists():
        if create and (not root.exists() or (root.is_dir() and not any(root.iterdir()))):
            return init_corpus(root)
        raise MissingManifestError(f"{manifest_path} not found")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusParseError(f"bad manifest: {exc.msg}", str(manifest_path), exc.lineno) from None
    if manifest.get("format") != FORMAT_NAME:
        raise SchemaVersionMismatchError(f"not a {FORMAT_NAME} directory")
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise SchemaVersionMismatchError(
            f"schema version {manifest.get('schema_version')!r}, expected {SCHEMA_VERSION}"
        )
    schema = default_schema()
    if sorted(manifest.get("tables", [])) != sorted(schema):
        raise SchemaVersionMismatchError("manifest table list differs from the schema")

    h = CorpusHandle(schema, root)
    for name, table_schema in schema.items():
        rows, dups = _read_table(root / f"{name}.jsonl", table_schema)
        h.tables[name] = rows
        h.load_violations.extend(dups)
    violations = integrity_check(h)
    if violations:
        if not repair:
            raise IntegrityViolationsError(violations)
        log.warning("opened %s with %d integrity violation(s)", root, len(violations))
    return h
