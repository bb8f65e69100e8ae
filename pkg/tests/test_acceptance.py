"""End-to-end acceptance checks, one test per criterion.

Each test enforces its own wall-clock budget; the conftest hook prints a
pass/fail line per criterion.
"""

import datetime as dt
import json
import random
import time
from collections import Counter

import pytest

from speechframe import refbooks as rb
from speechframe.alphabet import (
    StressContext,
    StressKind,
    SyllablePosition,
    classify_tempo,
    load_russian_alphabet,
    potebnya_strength,
    stress_variant,
    validate_class,
)
from speechframe.cli import main
from speechframe.corpus import (
    MANUAL,
    SpeechSignal,
    add_segmentation,
    add_signal,
    segment_intervals,
    symbol_coverage,
    validate_segmentation,
)
from speechframe.errors import (
    DanglingForeignKeyError,
    DuplicateKeyError,
    KeyCollisionError,
    RestrictedError,
)
from speechframe.query import (
    FilterCriterion,
    corpus_stats,
    count_by,
    list_canned_queries,
    staged_search,
)
from speechframe.schema import CASCADE, default_schema
from speechframe.store import (
    coerce_record,
    delete_cascade,
    insert,
    integrity_check,
    open_corpus,
    record_to_json,
    save_corpus,
    update_key_cascade,
)
from speechframe.synthetic import reference_corpus, random_corpus

from conftest import make_corpus
from oracles import conjunctive_filter, flatten, random_criteria, recount_stats


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.2f} s, budget {self.seconds} s"


def table_sets(h):
    return {
        name: {json.dumps(record_to_json(h.schema[name], r), sort_keys=True) for r in rows.values()}
        for name, rows in h.tables.items()
    }


TABLES = {
    "ACOUSTIC_ENVIRONMENT", "BOOK_DEFECTS", "BOOK_DIALECTS", "BOOK_EMOTIONS",
    "BOOK_LABIALIZATION", "BOOK_LOCATION", "BOOK_RISE", "BOOK_ROW", "BOOK_SEX",
    "BOOK_SOFT", "BOOK_SPEECH_TEMPS", "BOOK_SPEECH_TYPES", "BOOK_STRESSED",
    "BOOK_UNIT_TYPES", "BOOK_VOICED", "BOOK_VOICE_TYPES", "BOOK_WAY_OF_ORIGIN",
    "CLASS", "COMMUNICATION_CHANNEL", "FILE_FORMAT", "NOISE", "RECORDING_DEVICE",
    "SEGMENTATION", "SICKNESS", "SPEAKER", "SPEECH_SIGNAL", "SPEECH_UNIT",
}


@pytest.mark.criterion(1, "schema fidelity")
def test_schema_fidelity(tmp_path, capsys):
    with Budget(1):
        schema = default_schema()
        assert set(schema) == TABLES and len(schema) == 27
        assert main(["--corpus", str(tmp_path / "c"), "init"]) == 0
        capsys.readouterr()
        assert {p.stem for p in (tmp_path / "c").glob("*.jsonl")} == TABLES
        assert set(open_corpus(tmp_path / "c").tables) == TABLES


@pytest.mark.criterion(2, "seed vocabularies")
def test_seed_vocabularies():
    with Budget(1):
        reg = rb.seed_default_registry()
        sizes = {
            "BOOK_SEX": 2, "BOOK_SOFT": 3, "BOOK_VOICED": 3, "BOOK_VOICE_TYPES": 4,
            "BOOK_UNIT_TYPES": 4, "BOOK_WAY_OF_ORIGIN": 4, "BOOK_RISE": 3,
            "BOOK_LABIALIZATION": 2, "BOOK_STRESSED": 11, "BOOK_SPEECH_TEMPS": 3,
        }
        for book, n in sizes.items():
            assert len(reg.book(book).codes()) == n, book
        assert len(reg.dialects("Russian")) == 5
        assert 0 in reg.book("NOISE").codes()


@pytest.mark.criterion(3, "alphabet seed")
def test_alphabet_seed():
    with Budget(1):
        reg = rb.seed_default_registry()
        alpha = load_russian_alphabet(reg)
        assert len(alpha.units) == 77
        for unit in alpha.units:
            assert validate_class(unit, reg) == [], unit.symbol
        labialized = {u.symbol for u in alpha.units if u.labialization == rb.LABIALIZED}
        vowels = {u.symbol for u in alpha.units if u.vocalized}
        assert labialized == {s for s in vowels if s[0] in "ou"}
        assert {s[0] for s in labialized} == {"o", "u"}


def _expected_code(titles, kind, left_soft, right_soft, strength):
    """Find the stress code whose title describes this context."""
    hs = lambda soft: "soft" if soft else "hard"  # noqa: E731
    if kind is StressKind.VOWEL_STRESSED:
        want = (f"stressed, between {hs(left_soft)}" if left_soft == right_soft
                else f"stressed, between {hs(left_soft)} and {hs(right_soft)}")
    else:
        want = f"unstressed, strength {strength} after {hs(left_soft)}"
    [code] = [c for c, t in titles.items() if t == want]
    return code


@pytest.mark.criterion(4, "classifier tables")
def test_classifier_tables():
    with Budget(1):
        reg = rb.seed_default_registry()
        assert classify_tempo(8.0, reg).name == "normal"
        assert classify_tempo(12.0, reg).name == "accelerated"
        assert classify_tempo(12.0 + 1e-9, reg).name == "fast"
        positions = list(SyllablePosition)
        assert [potebnya_strength(p) for p in positions] == [3, 2, 1, 1]

        titles = {e.code: e.title for e in reg.book("BOOK_STRESSED")}
        stressed = set()
        for ls in (False, True):
            for rs in (False, True):
                code = stress_variant(StressContext(StressKind.VOWEL_STRESSED, ls, rs))
                assert code == _expected_code(titles, StressKind.VOWEL_STRESSED, ls, rs, 3)
                stressed.add(code)
        unstressed = set()
        for ls in (False, True):
            for pos in positions[1:]:
                code = stress_variant(StressContext(StressKind.VOWEL_UNSTRESSED, ls, None, pos))
                assert code == _expected_code(titles, StressKind.VOWEL_UNSTRESSED, ls, None,
                                              potebnya_strength(pos))
                unstressed.add(code)
        assert len(stressed) == 4 and len(unstressed) == 4
        assert titles[stress_variant(StressContext(StressKind.CONSONANT))].startswith("no stress")
        assert titles[stress_variant(StressContext(StressKind.PAUSE))] == "pause"


@pytest.mark.criterion(5, "staged filter equals one-pass conjunctive filter")
def test_staged_filter_oracle():
    lists_checked = 0
    with Budget(30):
        for seed in range(100):
            rng = random.Random(seed)
            h = random_corpus(rng, n_speakers=60, n_units=30, n_signals=500, segment_fraction=0)
            rows = flatten(h)
            for _ in range(100):
                crit = random_criteria(rng, h, max_len=6)
                got = {s.file_name for s in staged_search(h, crit)}
                assert got == conjunctive_filter(h, crit, rows), crit
                perm = crit[:]
                rng.shuffle(perm)
                assert {s.file_name for s in staged_search(h, perm)} == got
                lists_checked += 1
    assert lists_checked == 10_000


# -- criterion 6 ---------------------------------------------------------------


def _fresh(rng, spec):
    t = spec.type
    if t == "integer":
        return rng.randint(1000, 10**6)
    if t in ("real", "duration"):
        return round(rng.uniform(0.1, 50.0), 3)
    if t == "text":
        return f"t{rng.randrange(10**9)}"
    if t == "date":
        return dt.date(1950, 1, 1) + dt.timedelta(days=rng.randrange(25000))
    if t == "boolean":
        return rng.random() < 0.5
    if t == "flag":
        return rng.randint(0, 1)
    raise AssertionError(t)


def _random_record(rng, h, schema):
    fks = {fk.field: fk for fk in schema.foreign_keys}
    rec = {}
    for spec in schema.fields:
        fk = fks.get(spec.name)
        if fk is not None:
            targets = [k[0] for k in h.tables[fk.target_table]]
            if spec.nullable and rng.random() < 0.2:
                rec[spec.name] = None
            elif not targets or rng.random() < 0.05:
                rec[spec.name] = _fresh(rng, h.schema[fk.target_table].fields[0])  # dangling
            else:
                rec[spec.name] = rng.choice(targets)
        elif spec.nullable and rng.random() < 0.3:
            rec[spec.name] = None
        else:
            rec[spec.name] = _fresh(rng, spec)
    return rec


def _doomed_closure(h, table, key):
    """Rows a cascading delete must remove, by rescanning every table to a fixed point."""
    schema = h.schema
    doomed = {(table, key)}
    changed = True
    while changed:
        changed = False
        for name, rows in h.tables.items():
            for fk in schema[name].foreign_keys:
                if fk.on_delete != CASCADE:
                    continue
                for k, row in rows.items():
                    if (name, k) not in doomed and (fk.target_table, (row[fk.field],)) in doomed:
                        doomed.add((name, k))
                        changed = True
    blocked = any(
        (fk.target_table, (row[fk.field],)) in doomed and (name, k) not in doomed
        for name, rows in h.tables.items()
        for fk in schema[name].foreign_keys if fk.on_delete != CASCADE
        for k, row in rows.items()
    )
    return doomed, blocked


def _snapshot(h):
    return {t: dict(rows) for t, rows in h.tables.items()}


def _bytes(root):
    return {p.name: p.read_bytes() for p in sorted(root.iterdir())}


@pytest.mark.criterion(6, "cascade integrity under random operations")
def test_cascade_integrity(tmp_path):
    ops = Counter()
    with Budget(60):
        for seed in range(4):
            rng = random.Random(seed)
            root = tmp_path / f"c{seed}"
            h = random_corpus(rng, n_speakers=8, n_units=6, n_signals=15, segment_fraction=0.6)
            save_corpus(h, root)
            saved = True
            names = sorted(h.tables)
            for _ in range(300):
                table = rng.choice(names)
                schema = h.schema[table]
                rows = h.tables[table]
                op = rng.choice(("insert", "insert", "delete", "update"))
                before = _snapshot(h)
                if op == "insert":
                    rec = _random_record(rng, h, schema)
                    if rows and rng.random() < 0.05:
                        rec.update(zip(schema.key_fields, rng.choice(list(rows))))
                    try:
                        insert(h, table, rec)
                        ops["insert"] += 1
                        saved = False
                    except (DanglingForeignKeyError, DuplicateKeyError):
                        assert _snapshot(h) == before
                        ops["insert-refused"] += 1
                elif op == "delete" and rows:
                    key = rng.choice(list(rows))
                    doomed, blocked = _doomed_closure(h, table, key)
                    if blocked:
                        if not saved:
                            save_corpus(h, root)
                        disk = _bytes(root)
                        with pytest.raises(RestrictedError):
                            delete_cascade(h, table, key)
                        assert _snapshot(h) == before
                        save_corpus(h, root)
                        assert _bytes(root) == disk
                        saved = True
                        ops["delete-restricted"] += 1
                    else:
                        counts = delete_cascade(h, table, key)
                        assert counts == dict(Counter(t for t, _ in doomed))
                        assert all(k not in h.tables[t] for t, k in doomed)
                        ops["delete"] += 1
                        saved = False
                elif op == "update" and rows and len(schema.key_fields) == 1:
                    old = rng.choice(list(rows))
                    spec = schema.field_index[schema.key_fields[0]]
                    collide = rng.random() < 0.1 and len(rows) > 1
                    new = rng.choice([k for k in rows if k != old]) if collide else (_fresh(rng, spec),)
                    refs = sum(
                        1 for name, trows in h.tables.items()
                        for fk in h.schema[name].foreign_keys if fk.target_table == table
                        for row in trows.values() if row[fk.field] == old[0]
                    )
                    if collide:
                        with pytest.raises(KeyCollisionError):
                            update_key_cascade(h, table, old, new)
                        assert _snapshot(h) == before
                        ops["update-collision"] += 1
                    else:
                        assert update_key_cascade(h, table, old, new) == refs
                        assert new in h.tables[table] and old not in h.tables[table]
                        ops["update"] += 1
                        saved = False
                else:
                    continue
                assert integrity_check(h) == [], (op, table)
    assert sum(ops.values()) >= 1000, ops
    assert ops["delete-restricted"] > 0 and ops["delete"] > 0 and ops["update"] > 0


@pytest.mark.criterion(7, "statistics fixture")
def test_statistics_fixture():
    with Budget(5):
        s = corpus_stats(reference_corpus())
        assert s.speech_unit_count == 77
        assert s.speaker_count == 193
        assert s.speaker_count_by_sex == {"male": 49, "female": 144}
        assert s.signal_count == 124
        assert abs(s.total_duration_s - 842.0) <= 1e-6
        assert s.manually_segmented_signal_count == 103


def _crafted(kind):
    h = make_corpus(n_signals=1, length=1.0)
    segs = {
        "position-gap": [(1, "d", 0.0), (3, "a1", 0.5)],
        "non-monotonic": [(1, "d", 0.5), (2, "a1", 0.25)],
        "start-out-of-range": [(1, "d", 0.0), (2, "a1", 1.5)],
        "unknown-symbol": [(1, "d", 0.0), (2, "zz", 0.5)],
    }[kind]
    for pos, sym, start in segs:
        rec = {"POSITION": pos, "FILENAME": "s0.wav", "SOURCE": MANUAL, "START_AUDIO": start,
               "TYPE_ID": sym, "EXPERT_COUNT": 2}
        if sym == "zz":
            # bypass the foreign key so the validator sees a symbol missing from the alphabet
            h.tables["SEGMENTATION"][(pos, "s0.wav", MANUAL)] = coerce_record(h.schema["SEGMENTATION"], rec)
        else:
            insert(h, "SEGMENTATION", rec)
    h.touch()
    return h


@pytest.mark.criterion(8, "segmentation validation")
def test_segmentation_validation():
    with Budget(5):
        for kind in ("position-gap", "non-monotonic", "start-out-of-range", "unknown-symbol"):
            report = validate_segmentation(_crafted(kind), "s0.wav")
            assert [v.kind for v in report] == [kind], report
        rng = random.Random(8)
        symbols = load_russian_alphabet().symbols
        for trial in range(300):
            h = make_corpus(n_signals=0)
            length = round(rng.uniform(0.05, 20.0), 3)
            add_signal(h, SpeechSignal("x.wav", 1, length, 1))
            n = rng.randint(1, 12)
            starts = sorted(rng.sample(range(int(length * 1000)), min(n, int(length * 1000))))
            add_segmentation(h, "x.wav", [(rng.choice(symbols), s / 1000) for s in starts], MANUAL, 2)
            assert validate_segmentation(h, "x.wav") == []
            iv = segment_intervals(h, "x.wav")
            assert iv[0][1] == starts[0] / 1000 and iv[-1][2] == length
            assert all(a[2] == b[1] for a, b in zip(iv, iv[1:]))
            assert all(start < end for _, start, end in iv)


@pytest.mark.criterion(9, "coverage rule")
def test_coverage_rule():
    with Budget(5):
        for seed in range(30):
            rng = random.Random(seed)
            h = random_corpus(rng, n_signals=rng.randint(0, 60), segment_fraction=rng.random())
            rows = list(h.tables["SEGMENTATION"].values())
            symbols = sorted(h.tables["CLASS"])
            expected = set()
            for (sym,) in symbols:
                n = 0
                for r in rows:
                    if r["SOURCE"] == MANUAL and r["TYPE_ID"] == sym:
                        n += 1
                if n < 3:
                    expected.add(sym)
            assert set(symbol_coverage(h).under_covered) == expected


@pytest.mark.criterion(10, "persistence round trip")
def test_persistence_round_trip(tmp_path):
    with Budget(10):
        saw_null = False
        for seed in range(25):
            h = random_corpus(seed, n_signals=40)
            save_corpus(h, tmp_path / f"c{seed}")
            back = open_corpus(tmp_path / f"c{seed}")
            assert table_sets(back) == table_sets(h)
            assert {t: set(r) for t, r in back.tables.items()} == {t: set(r) for t, r in h.tables.items()}
            saw_null |= any(v is None for r in h.tables["SPEECH_SIGNAL"].values() for v in r.values())
        assert saw_null


@pytest.mark.criterion(11, "query catalog")
def test_query_catalog():
    with Budget(5):
        catalog = list_canned_queries()
        assert len(catalog) == 37
        for h in (random_corpus(0, n_signals=0, n_speakers=0, n_units=0), reference_corpus()):
            rows = flatten(h)
            for q in catalog:
                result = q.run(h)
                if q.kind == "partition":
                    assert set(result) == set(count_by(h, q.attribute))
                    for value, found in result.items():
                        crit = [FilterCriterion(q.attribute, value)]
                        assert found == staged_search(h, crit)
                        assert {s.file_name for s in found} == conjunctive_filter(h, crit, rows)
                    # unset values form no partition
                    assert sum(len(v) for v in result.values()) == sum(
                        1 for _, row in rows if row[q.attribute] is not None)
                elif q.kind == "search":
                    crit = q.resolve(h)
                    assert result == staged_search(h, crit)
                    assert {s.file_name for s in result} == conjunctive_filter(h, crit, rows)
                elif q.kind == "count":
                    assert result == count_by(h, q.attribute, over=q.over)
                    if q.over == "speakers":
                        values = [r["SEX"] for r in h.tables["SPEAKER"].values()]
                    else:
                        values = [row[q.attribute] for _, row in rows]
                    assert result == dict(Counter(v for v in values if v is not None))
                else:
                    assert q.kind == "stats"
                    got, want = result.as_dict(), recount_stats(h)
                    assert abs(got.pop("total_duration_s") - want.pop("total_duration_s")) < 1e-9
                    assert got == want
