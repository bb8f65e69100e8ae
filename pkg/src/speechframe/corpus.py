"""Speakers, speech units, speech signals and their segmentation.

Domain rules that the store cannot express on its own live here: birth
dates in the past, transcriptions that tokenize against the alphabet,
positive signal lengths, well-formed segmentation runs, and the quality
rules for manual segmentation (symbol coverage and expert review).
"""

from __future__ import annotations

import csv
import datetime as dt
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from . import refbooks as rb
from .alphabet import (
    Alphabet,
    SoundUnitClass,
    classify_tempo,
    render_transcription,
    tokenize_transcription,
    validate_class,
)
from .errors import (
    ClassInvalidError,
    DomainError,
    InvalidSegmentationError,
    MissingVariantError,
    NegativeIntervalError,
    NoSegmentsError,
    UnknownSignalError,
    Violation,
)
from .refbooks import SpeechTempo
from .store import CorpusHandle, insert

MANUAL = "manual"
AUTOMATIC = "automatic"
SOURCES = (MANUAL, AUTOMATIC)

MIN_SYMBOL_OCCURRENCES = 3
MIN_EXPERTS = 2


@dataclass(frozen=True)
class Speaker:
    id: int
    sex: int
    name: str | None = None
    surname: str | None = None
    patronymic: str | None = None
    birth_date: dt.date | None = None

    def to_record(self) -> dict:
        return {
            "ID": self.id,
            "SEX": self.sex,
            "NAME": self.name,
            "SURNAME": self.surname,
            "FAMILY_NAME": self.patronymic,
            "BIRTH_DATE": self.birth_date,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Speaker":
        return cls(rec["ID"], rec["SEX"], rec.get("NAME"), rec.get("SURNAME"),
                   rec.get("FAMILY_NAME"), rec.get("BIRTH_DATE"))


@dataclass(frozen=True)
class SpeechUnit:
    id: int
    spelling: str
    transcription: tuple[str, ...]
    unit_type: int

    def to_record(self) -> dict:
        return {
            "ID": self.id,
            "SPELLING_RECORD": self.spelling,
            "TRANSCRIPTION": render_transcription(self.transcription),
            "UNIT_TYPE": self.unit_type,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "SpeechUnit":
        return cls(rec["ID"], rec["SPELLING_RECORD"],
                   tuple(rec["TRANSCRIPTION"].split()), rec["UNIT_TYPE"])


# SpeechSignal attribute -> SPEECH_SIGNAL column
SIGNAL_COLUMNS = {
    "file_name": "FILE_NAME",
    "speech_unit": "SPEECH_UNIT_ID",
    "length": "LENGTH",
    "record_date": "RECORD_DATE",
    "file_format": "FILE_FORMAT",
    "noise": "SYNTHETIC_NOISE_TYPE",
    "recording_device": "RECORDING_DEVICE",
    "dialect": "DIALECT_ID",
    "acoustic_environment": "ACOUSTIC_ENVIRONMENT",
    "speech_type": "SPEECH_TYPE_ID",
    "voice_type": "VOICE_TYPE_ID",
    "speech_tempo": "SPEECH_TEMP_ID",
    "channel": "CHANNEL",
    "sickness": "SPEECH_SICKNESS",
    "accent": "ACIENT",
    "speech_defect": "SPEECH_DEFECT",
    "emotional_state": "EMOTIONAL_STATE",
    "speaker": "SPEAKER_ID",
}


@dataclass(frozen=True)
class SpeechSignal:
    file_name: str
    speech_unit: int
    length: float
    speaker: int
    record_date: dt.date | None = None
    file_format: int | None = None
    noise: int = rb.NO_NOISE
    recording_device: int | None = None
    dialect: int | None = None
    acoustic_environment: int | None = None
    speech_type: int | None = None
    voice_type: int | None = None
    speech_tempo: int | None = None
    channel: int | None = None
    sickness: int | None = None
    speech_defect: int | None = None
    emotional_state: int | None = None
    accent: bool = False

    def to_record(self) -> dict:
        return {col: getattr(self, attr) for attr, col in SIGNAL_COLUMNS.items()}

    @classmethod
    def from_record(cls, rec: dict) -> "SpeechSignal":
        return cls(**{attr: rec.get(col) for attr, col in SIGNAL_COLUMNS.items()})


@dataclass(frozen=True)
class SegmentationRecord:
    position: int
    file_name: str
    start_time: float
    symbol: str
    source: str = MANUAL
    expert_count: int | None = None

    def to_record(self) -> dict:
        return {
            "POSITION": self.position,
            "FILENAME": self.file_name,
            "SOURCE": self.source,
            "START_AUDIO": self.start_time,
            "TYPE_ID": self.symbol,
            "EXPERT_COUNT": self.expert_count,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "SegmentationRecord":
        return cls(rec["POSITION"], rec["FILENAME"], rec["START_AUDIO"], rec["TYPE_ID"],
                   rec["SOURCE"], rec.get("EXPERT_COUNT"))


# ---------------------------------------------------------------------------
# domain-checked inserts


def _check_speaker(h: CorpusHandle, rec: dict, today: dt.date | None = None) -> None:
    birth = rec.get("BIRTH_DATE")
    if isinstance(birth, str):
        birth = dt.date.fromisoformat(birth)
    if birth is not None and birth > (today or dt.date.today()):
        raise DomainError(f"speaker {rec.get('ID')}: birth date {birth} is in the future")


def _check_unit(h: CorpusHandle, rec: dict) -> None:
    tokenize_transcription(rec.get("TRANSCRIPTION") or "", h.alphabet())


def _check_signal(h: CorpusHandle, rec: dict) -> None:
    length = rec.get("LENGTH")
    if isinstance(length, (int, float)) and not isinstance(length, bool) and length <= 0:
        raise DomainError(f"signal {rec.get('FILE_NAME')!r}: length must be positive")


def _check_segment(h: CorpusHandle, rec: dict) -> None:
    if rec.get("SOURCE") not in SOURCES:
        raise DomainError(f"segmentation source must be one of {SOURCES}, got {rec.get('SOURCE')!r}")
    pos = rec.get("POSITION")
    if isinstance(pos, int) and pos < 1:
        raise DomainError("segmentation positions are 1-based")
    experts = rec.get("EXPERT_COUNT")
    if experts is not None and rec.get("SOURCE") != MANUAL:
        raise DomainError("expert_count applies to manual segmentation only")
    if isinstance(experts, int) and experts < 0:
        raise DomainError("expert_count must be non-negative")


def _check_class(h: CorpusHandle, rec: dict) -> None:
    unit = SoundUnitClass.from_record(rec)
    report = validate_class(unit, h.registry())
    if report:
        raise ClassInvalidError(unit.symbol, report)


# fields a raw record may omit, filled as the dataclass constructors would
_DEFAULTS = {
    "SPEECH_SIGNAL": {"SYNTHETIC_NOISE_TYPE": rb.NO_NOISE, "ACIENT": 0},
}

_CHECKS = {
    "SPEAKER": _check_speaker,
    "SPEECH_UNIT": _check_unit,
    "SPEECH_SIGNAL": _check_signal,
    "SEGMENTATION": _check_segment,
    "CLASS": _check_class,
}


def insert_record(h: CorpusHandle, table: str, record: dict) -> tuple:
    """Insert through the domain rules for ``table``, then the store's key checks."""
    defaults = _DEFAULTS.get(table)
    if defaults:
        record = {**defaults, **record}
    check = _CHECKS.get(table)
    if check is not None:
        check(h, record)
    return insert(h, table, record)


def add_speaker(h: CorpusHandle, speaker: Speaker, today: dt.date | None = None) -> int:
    rec = speaker.to_record()
    _check_speaker(h, rec, today)
    return insert(h, "SPEAKER", rec)[0]


def add_speech_unit(h: CorpusHandle, unit: SpeechUnit) -> int:
    return insert_record(h, "SPEECH_UNIT", unit.to_record())[0]


def add_signal(h: CorpusHandle, signal: SpeechSignal) -> str:
    return insert_record(h, "SPEECH_SIGNAL", signal.to_record())[0]


def add_segment(h: CorpusHandle, seg: SegmentationRecord) -> tuple:
    return insert_record(h, "SEGMENTATION", seg.to_record())


def add_sound_unit(h: CorpusHandle, unit: SoundUnitClass) -> str:
    return insert_record(h, "CLASS", unit.to_record())[0]


def add_segmentation(
    h: CorpusHandle,
    file_name: str,
    segments: Iterable[tuple[str, float]],
    source: str = MANUAL,
    expert_count: int | None = None,
) -> int:
    """Store a whole (symbol, start) run for one signal, positions from 1."""
    n = 0
    for n, (symbol, start) in enumerate(segments, start=1):
        add_segment(h, SegmentationRecord(n, file_name, start, symbol, source, expert_count))
    return n


# ---------------------------------------------------------------------------
# reads


def get_signal(h: CorpusHandle, file_name: str) -> SpeechSignal:
    rec = h.tables["SPEECH_SIGNAL"].get((file_name,))
    if rec is None:
        raise UnknownSignalError(file_name)
    return SpeechSignal.from_record(rec)


def signals(h: CorpusHandle) -> list[SpeechSignal]:
    return [SpeechSignal.from_record(r) for r in h.tables["SPEECH_SIGNAL"].values()]


def speakers(h: CorpusHandle) -> list[Speaker]:
    return [Speaker.from_record(r) for r in h.tables["SPEAKER"].values()]


def _segments_by_signal(h: CorpusHandle) -> dict[tuple[str, str], list[SegmentationRecord]]:
    grouped = h.cache.get("segments_by_signal")
    if grouped is None:
        grouped = defaultdict(list)
        for rec in h.tables["SEGMENTATION"].values():
            grouped[(rec["FILENAME"], rec["SOURCE"])].append(SegmentationRecord.from_record(rec))
        for rows in grouped.values():
            rows.sort(key=lambda s: s.position)
        grouped = dict(grouped)
        h.cache["segments_by_signal"] = grouped
    return grouped


def segments(h: CorpusHandle, file_name: str, source: str = MANUAL) -> list[SegmentationRecord]:
    """Segmentation rows of one signal and source, ordered by position."""
    return list(_segments_by_signal(h).get((file_name, source), []))


def segmented_signals(h: CorpusHandle, source: str = MANUAL) -> set[str]:
    return {f for (f, s) in _segments_by_signal(h) if s == source}


# ---------------------------------------------------------------------------
# operations


def speaker_age(birth_date: dt.date, as_of: dt.date) -> int:
    """Completed years between two dates."""
    if as_of < birth_date:
        raise NegativeIntervalError(f"{as_of} is before birth date {birth_date}")
    years = as_of.year - birth_date.year
    if (as_of.month, as_of.day) < (birth_date.month, birth_date.day):
        years -= 1
    return years


def validate_segmentation(
    h: CorpusHandle, file_name: str, source: str = MANUAL, alphabet: Alphabet | None = None,
) -> list[Violation]:
    signal = get_signal(h, file_name)
    rows = segments(h, file_name, source)
    if alphabet is None:
        alphabet = h.alphabet()
    out: list[Violation] = []

    def bad(kind, msg, pos=None):
        key = (pos, file_name, source) if pos is not None else (file_name, source)
        out.append(Violation(kind, msg, "SEGMENTATION", key))

    if not rows:
        return out
    if rows[0].position != 1:
        bad("position-gap", f"positions start at {rows[0].position}, not 1", rows[0].position)
    for prev, cur in zip(rows, rows[1:]):
        if cur.position != prev.position + 1:
            bad("position-gap", f"position gap after {prev.position}", cur.position)
        if not cur.start_time > prev.start_time:
            bad("non-monotonic", f"non-monotonic start at position {cur.position}", cur.position)
    if rows[0].start_time < 0:
        bad("negative-start", f"start {rows[0].start_time} is negative", rows[0].position)
    for s in rows:
        if s.start_time >= signal.length:
            bad("start-out-of-range",
                f"start {s.start_time} at position {s.position} is not before "
                f"signal length {signal.length}", s.position)
        if s.symbol not in alphabet:
            bad("unknown-symbol", f"unknown symbol {s.symbol!r} at position {s.position}", s.position)
    return out


def _require_valid(h, file_name, source) -> list[SegmentationRecord]:
    report = validate_segmentation(h, file_name, source)
    if report:
        raise InvalidSegmentationError(file_name, report)
    return segments(h, file_name, source)


def segment_intervals(h: CorpusHandle, file_name: str, source: str = MANUAL) -> list[tuple[str, float, float]]:
    """(symbol, start, end) per segment; each end is the next start, the last is the signal length."""
    rows = _require_valid(h, file_name, source)
    length = get_signal(h, file_name).length
    ends = [s.start_time for s in rows[1:]] + [length]
    return [(s.symbol, s.start_time, end) for s, end in zip(rows, ends)]


@dataclass
class Coverage:
    counts: dict[str, int]
    under_covered: list[str]
    threshold: int = MIN_SYMBOL_OCCURRENCES


def symbol_coverage(
    h: CorpusHandle, alphabet: Alphabet | None = None, source: str = MANUAL,
    threshold: int = MIN_SYMBOL_OCCURRENCES,
) -> Coverage:
    if alphabet is None:
        alphabet = h.alphabet()
    seen = Counter(
        rec["TYPE_ID"] for rec in h.tables["SEGMENTATION"].values() if rec["SOURCE"] == source
    )
    counts = {sym: seen.get(sym, 0) for sym in alphabet.symbols}
    under = [sym for sym, n in counts.items() if n < threshold]
    return Coverage(counts, under, threshold)


def expert_check_report(h: CorpusHandle, minimum: int = MIN_EXPERTS) -> list[tuple[str, int | None]]:
    """Manually segmented signals whose recorded expert count is below ``minimum``.

    A signal's count is the lowest recorded on any of its rows; an unrecorded
    count is treated as zero reviewers.
    """
    out = []
    for (file_name, source), rows in sorted(_segments_by_signal(h).items()):
        if source != MANUAL:
            continue
        recorded = [s.expert_count for s in rows]
        lowest = min((c or 0) for c in recorded)
        if lowest < minimum:
            out.append((file_name, None if all(c is None for c in recorded) else lowest))
    return out


def estimate_tempo(h: CorpusHandle, file_name: str, source: str = MANUAL) -> tuple[float, SpeechTempo]:
    """Sounds per second over the whole signal, pauses excluded."""
    rows = _require_valid(h, file_name, source)
    pauses = h.alphabet().pause_symbols()
    sounds = sum(1 for s in rows if s.symbol not in pauses)
    if sounds == 0:
        raise NoSegmentsError(f"{file_name!r} has no non-pause {source} segments")
    rate = sounds / get_signal(h, file_name).length
    return rate, classify_tempo(rate, h.registry())


@dataclass
class SegmentationAgreement:
    file_name: str
    tolerance_s: float
    manual_count: int
    automatic_count: int
    symbol_match: list[bool] = field(default_factory=list)
    boundary_deltas: list[float] = field(default_factory=list)

    @property
    def count_mismatch(self) -> bool:
        return self.manual_count != self.automatic_count

    @property
    def symbol_agreement(self) -> float:
        if not self.symbol_match:
            return 0.0
        return sum(self.symbol_match) / len(self.symbol_match)

    @property
    def max_abs_delta(self) -> float:
        return max((abs(d) for d in self.boundary_deltas), default=0.0)

    @property
    def mean_abs_delta(self) -> float:
        if not self.boundary_deltas:
            return 0.0
        return sum(abs(d) for d in self.boundary_deltas) / len(self.boundary_deltas)

    @property
    def within_tolerance(self) -> float:
        if not self.boundary_deltas:
            return 0.0
        ok = sum(1 for d in self.boundary_deltas if abs(d) <= self.tolerance_s + 1e-12)
        return ok / len(self.boundary_deltas)


def compare_segmentations(h: CorpusHandle, file_name: str, tolerance_s: float) -> SegmentationAgreement:
    """Score the automatic segmentation of a signal against its manual one.

    Segments are paired in position order up to the shorter run; deltas are
    automatic start minus manual start.
    """
    get_signal(h, file_name)
    present = {s for (f, s) in _segments_by_signal(h) if f == file_name}
    for src in SOURCES:
        if src not in present:
            raise MissingVariantError(f"{file_name!r} has no {src} segmentation")
    manual = _require_valid(h, file_name, MANUAL)
    auto = _require_valid(h, file_name, AUTOMATIC)
    report = SegmentationAgreement(file_name, tolerance_s, len(manual), len(auto))
    for m, a in zip(manual, auto):
        report.symbol_match.append(m.symbol == a.symbol)
        report.boundary_deltas.append(a.start_time - m.start_time)
    return report


SEGMENTATION_TSV_COLUMNS = ("POSITION", "START_AUDIO", "SYMBOL", "SOURCE")


def export_segmentation(h: CorpusHandle, file_name: str, out: TextIO, source: str | None = None) -> int:
    """Write a tab-separated listing of one signal's segmentation; returns rows written."""
    get_signal(h, file_name)
    w = csv.writer(out, delimiter="\t", lineterminator="\n")
    w.writerow(SEGMENTATION_TSV_COLUMNS)
    n = 0
    for src in SOURCES if source is None else (source,):
        for s in segments(h, file_name, src):
            w.writerow((s.position, repr(s.start_time), s.symbol, s.source))
            n += 1
    return n
