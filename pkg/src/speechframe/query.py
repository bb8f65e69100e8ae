"""Staged multi-parameter search and statistics over speech signals.

Search is a pipeline: the first criterion filters the whole signal table,
every later criterion filters the sample left by the one before it.
"""

from __future__ import annotations

import datetime as dt
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from . import refbooks as rb
from .corpus import MANUAL, SpeechSignal, segmented_signals, speaker_age
from .errors import CriterionTypeError, UnknownAttributeError, UnknownCodeError
from .store import CorpusHandle


@dataclass(frozen=True)
class Range:
    """Inclusive range; either end may be None for an open bound."""

    lo: Any = None
    hi: Any = None

    def __contains__(self, value) -> bool:
        if value is None:
            return False
        if self.lo is not None and value < self.lo:
            return False
        if self.hi is not None and value > self.hi:
            return False
        return True


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: str  # "code", "id", "flag" or "range"
    book: str | None = None
    column: str | None = None
    range_type: type | tuple | None = None


ATTRIBUTES: dict[str, Attribute] = {a.name: a for a in [
    Attribute("sex", "code", book="BOOK_SEX"),
    Attribute("age", "range", range_type=int),
    Attribute("speaker", "id", column="speaker"),
    Attribute("speech_unit", "id", column="speech_unit"),
    Attribute("dialect", "code", "BOOK_DIALECTS", "dialect"),
    Attribute("emotion", "code", "BOOK_EMOTIONS", "emotional_state"),
    Attribute("voice_type", "code", "BOOK_VOICE_TYPES", "voice_type"),
    Attribute("speech_type", "code", "BOOK_SPEECH_TYPES", "speech_type"),
    Attribute("tempo", "code", "BOOK_SPEECH_TEMPS", "speech_tempo"),
    Attribute("sickness", "code", "SICKNESS", "sickness"),
    Attribute("defect", "code", "BOOK_DEFECTS", "speech_defect"),
    Attribute("accent", "flag", column="accent"),
    Attribute("environment", "code", "ACOUSTIC_ENVIRONMENT", "acoustic_environment"),
    Attribute("channel", "code", "COMMUNICATION_CHANNEL", "channel"),
    Attribute("device", "code", "RECORDING_DEVICE", "recording_device"),
    Attribute("noise", "code", "NOISE", "noise"),
    Attribute("format", "code", "FILE_FORMAT", "file_format"),
    Attribute("record_date", "range", column="record_date", range_type=dt.date),
    Attribute("length", "range", column="length", range_type=(int, float)),
]}

SEARCHABLE = tuple(ATTRIBUTES)


def _attribute(name: str) -> Attribute:
    try:
        return ATTRIBUTES[name]
    except KeyError:
        raise UnknownAttributeError(name, list(SEARCHABLE)) from None


@dataclass(frozen=True)
class FilterCriterion:
    attribute: str
    value: Any

    def __post_init__(self):
        attr = _attribute(self.attribute)
        v = self.value
        if attr.kind in ("code", "id"):
            if v is not None and (isinstance(v, bool) or not isinstance(v, int)):
                raise CriterionTypeError(f"{self.attribute} expects an integer code, got {v!r}")
        elif attr.kind == "flag":
            if not isinstance(v, bool):
                raise CriterionTypeError(f"{self.attribute} expects true/false, got {v!r}")
        else:
            if not isinstance(v, Range):
                raise CriterionTypeError(f"{self.attribute} expects a range, got {v!r}")
            for end in (v.lo, v.hi):
                if end is None:
                    continue
                bad = isinstance(end, bool) or not isinstance(end, attr.range_type)
                if attr.range_type is dt.date and isinstance(end, dt.datetime):
                    bad = True
                if bad:
                    raise CriterionTypeError(f"{self.attribute} range bound {end!r} has the wrong type")

    def __str__(self) -> str:
        v = self.value
        if isinstance(v, Range):
            lo = "" if v.lo is None else v.lo
            hi = "" if v.hi is None else v.hi
            return f"{self.attribute}={lo}..{hi}"
        return f"{self.attribute}={v}"


# ---------------------------------------------------------------------------
# criterion parsing


def _parse_scalar(attr: Attribute, text: str, registry: rb.ReferenceRegistry | None):
    text = text.strip()
    if attr.kind == "flag":
        low = text.lower()
        if low in ("1", "true", "yes", "y"):
            return True
        if low in ("0", "false", "no", "n"):
            return False
        raise CriterionTypeError(f"{attr.name} expects true/false, got {text!r}")
    if text.lower() in ("none", "null"):
        if attr.kind == "code":
            return None
        raise CriterionTypeError(f"{attr.name} cannot be null")
    try:
        return int(text)
    except ValueError:
        pass
    if attr.kind == "code" and registry is not None:
        entry = registry.book(attr.book).find(text)
        if entry is not None:
            return entry.code
        raise UnknownCodeError(attr.book, text)
    raise CriterionTypeError(f"{attr.name} expects a code, got {text!r}")


def _parse_bound(attr: Attribute, text: str):
    text = text.strip()
    if not text:
        return None
    if attr.range_type is dt.date:
        try:
            return dt.date.fromisoformat(text)
        except ValueError:
            raise CriterionTypeError(f"{attr.name} expects ISO dates, got {text!r}") from None
    try:
        return int(text) if attr.range_type is int else float(text)
    except ValueError:
        raise CriterionTypeError(f"{attr.name} expects a number, got {text!r}") from None


def parse_criterion(text: str, registry: rb.ReferenceRegistry | None = None) -> FilterCriterion:
    """Parse ``attribute=value`` or ``attribute=lo..hi``; titles resolve through ``registry``."""
    name, sep, value = text.partition("=")
    if not sep:
        raise CriterionTypeError(f"expected attribute=value, got {text!r}")
    attr = _attribute(name.strip())
    if attr.kind == "range":
        if ".." in value:
            lo, _, hi = value.partition("..")
            return FilterCriterion(attr.name, Range(_parse_bound(attr, lo), _parse_bound(attr, hi)))
        v = _parse_bound(attr, value)
        return FilterCriterion(attr.name, Range(v, v))
    return FilterCriterion(attr.name, _parse_scalar(attr, value, registry))


def criterion(attribute: str, value, registry: rb.ReferenceRegistry | None = None) -> FilterCriterion:
    """Build a criterion, resolving a title string to its code when needed."""
    attr = _attribute(attribute)
    if isinstance(value, str) and attr.kind == "code":
        if registry is None:
            raise CriterionTypeError("a registry is needed to resolve titles")
        value = registry.code_for(attr.book, value)
    return FilterCriterion(attribute, value)


# ---------------------------------------------------------------------------
# search


class SignalIndex:
    """Column view of the signal table with speaker-derived attributes joined in."""

    def __init__(self, h: CorpusHandle):
        speakers = h.tables["SPEAKER"]
        self.signals: list[SpeechSignal] = [
            SpeechSignal.from_record(r) for r in h.tables["SPEECH_SIGNAL"].values()
        ]
        self.columns: dict[str, list] = {}
        for attr in ATTRIBUTES.values():
            if attr.column is not None:
                self.columns[attr.name] = [getattr(s, attr.column) for s in self.signals]
        sex, age = [], []
        for s in self.signals:
            sp = speakers.get((s.speaker,))
            sex.append(sp["SEX"] if sp else None)
            birth = sp["BIRTH_DATE"] if sp else None
            if birth is not None and s.record_date is not None and s.record_date >= birth:
                age.append(speaker_age(birth, s.record_date))
            else:
                age.append(None)
        self.columns["sex"] = sex
        self.columns["age"] = age

    def predicate(self, c: FilterCriterion) -> Callable[[int], bool]:
        col = self.columns[c.attribute]
        v = c.value
        if isinstance(v, Range):
            return lambda i: col[i] in v
        return lambda i: col[i] == v

    def stages(self, criteria: Iterable[FilterCriterion]) -> list[list[int]]:
        sample = list(range(len(self.signals)))
        out = [sample]
        for c in criteria:
            pred = self.predicate(c)
            sample = [i for i in sample if pred(i)]
            out.append(sample)
        return out

    def search(self, criteria: Iterable[FilterCriterion]) -> set[SpeechSignal]:
        final = self.stages(criteria)[-1]
        return {self.signals[i] for i in final}


def signal_index(h: CorpusHandle) -> SignalIndex:
    idx = h.cache.get("signal_index")
    if idx is None:
        idx = h.cache["signal_index"] = SignalIndex(h)
    return idx


def search_stages(h: CorpusHandle, criteria: Iterable[FilterCriterion]) -> list[set[SpeechSignal]]:
    """Every intermediate sample; element 0 is the full table."""
    idx = signal_index(h)
    return [{idx.signals[i] for i in stage} for stage in idx.stages(criteria)]


def staged_search(h: CorpusHandle, criteria: Iterable[FilterCriterion]) -> set[SpeechSignal]:
    return signal_index(h).search(criteria)


# ---------------------------------------------------------------------------
# statistics


@dataclass
class CorpusStatistics:
    speech_unit_count: int = 0
    sound_unit_count: int = 0
    speaker_count: int = 0
    speaker_count_by_sex: dict[str, int] = field(default_factory=dict)
    signal_count: int = 0
    total_duration_s: float = 0.0
    manually_segmented_signal_count: int = 0

    def as_dict(self) -> dict:
        return {
            "speech_unit_count": self.speech_unit_count,
            "sound_unit_count": self.sound_unit_count,
            "speaker_count": self.speaker_count,
            "speaker_count_by_sex": dict(self.speaker_count_by_sex),
            "signal_count": self.signal_count,
            "total_duration_s": self.total_duration_s,
            "manually_segmented_signal_count": self.manually_segmented_signal_count,
        }


def corpus_stats(h: CorpusHandle) -> CorpusStatistics:
    registry = h.registry()
    by_sex: Counter = Counter()
    for rec in h.tables["SPEAKER"].values():
        try:
            title = registry.lookup("BOOK_SEX", rec["SEX"]).title
        except UnknownCodeError:
            title = str(rec["SEX"])
        by_sex[title] += 1
    return CorpusStatistics(
        speech_unit_count=len(h.tables["SPEECH_UNIT"]),
        sound_unit_count=len(h.tables["CLASS"]),
        speaker_count=len(h.tables["SPEAKER"]),
        speaker_count_by_sex=dict(by_sex),
        signal_count=len(h.tables["SPEECH_SIGNAL"]),
        total_duration_s=math.fsum(r["LENGTH"] for r in h.tables["SPEECH_SIGNAL"].values()),
        manually_segmented_signal_count=len(segmented_signals(h, MANUAL)),
    )


SPEAKER_ATTRIBUTES = {"sex": "SEX"}


def count_by(h: CorpusHandle, attribute: str, over: str = "signals") -> dict:
    """Histogram of ``attribute`` values; unset values are not counted.

    ``over="speakers"`` counts speakers instead of signals, for attributes
    that belong to the speaker.
    """
    _attribute(attribute)
    if over == "speakers":
        if attribute not in SPEAKER_ATTRIBUTES:
            raise CriterionTypeError(f"{attribute} is not a speaker attribute")
        col = SPEAKER_ATTRIBUTES[attribute]
        return dict(Counter(
            r[col] for r in h.tables["SPEAKER"].values() if r[col] is not None
        ))
    if over != "signals":
        raise ValueError("over must be 'signals' or 'speakers'")
    col = signal_index(h).columns[attribute]
    return dict(Counter(v for v in col if v is not None))


# ---------------------------------------------------------------------------
# canned queries


@dataclass(frozen=True)
class CannedQuery:
    """A named query that reduces to staged_search, count_by or corpus_stats.

    ``partition`` runs one staged search per value present in the corpus;
    ``search`` runs a fixed criteria list whose title values are resolved
    against the corpus registry at run time.
    """

    name: str
    kind: str  # partition | search | count | stats
    description: str
    attribute: str | None = None
    criteria: tuple[tuple[str, Any], ...] = ()
    over: str = "signals"

    def resolve(self, h: CorpusHandle) -> list[FilterCriterion]:
        reg = h.registry()
        return [criterion(a, v, reg) for a, v in self.criteria]

    def run(self, h: CorpusHandle):
        if self.kind == "partition":
            values = sorted(count_by(h, self.attribute), key=lambda v: (str(type(v)), v))
            return {v: staged_search(h, [FilterCriterion(self.attribute, v)]) for v in values}
        if self.kind == "search":
            return staged_search(h, self.resolve(h))
        if self.kind == "count":
            return count_by(h, self.attribute, over=self.over)
        if self.kind == "stats":
            return corpus_stats(h)
        raise ValueError(f"unknown query kind {self.kind}")


def _label(attr: str) -> str:
    return attr.replace("_", "-")


_PARTITIONED = (
    "sex", "dialect", "emotion", "voice_type", "speech_type", "tempo", "sickness",
    "defect", "accent", "environment", "channel", "device", "noise", "format",
    "speaker", "speech_unit",
)
_COUNTED = (
    "sex", "dialect", "emotion", "voice_type", "tempo", "sickness", "defect",
    "environment", "noise", "speaker",
)
_PRESETS = (
    ("clean-recordings", "signals without synthetic noise", (("noise", rb.NO_NOISE),)),
    ("female-neutral-speech", "female speakers in a neutral state",
     (("sex", "female"), ("emotion", "neutral"))),
    ("singing-voice", "singing voice", (("voice_type", "singing"),)),
    ("whispered-speech", "whispered voice", (("voice_type", "whispering"),)),
    ("esophageal-voice", "esophageal voice", (("voice_type", "esophageal"),)),
    ("normal-tempo-speech", "normal speech rate", (("tempo", "normal"),)),
    ("fast-tempo-speech", "fast speech rate", (("tempo", "fast"),)),
    ("accented-speech", "signals marked as accented", (("accent", True),)),
    ("healthy-speakers", "no recorded vocal tract disease or speech defect",
     (("sickness", None), ("defect", None))),
)


def _build_catalog() -> tuple[CannedQuery, ...]:
    out = [
        CannedQuery(f"signals-by-{_label(a)}", "partition", f"signals grouped by {a}", attribute=a)
        for a in _PARTITIONED
    ]
    out += [
        CannedQuery(f"count-signals-by-{_label(a)}", "count", f"signal counts per {a}", attribute=a)
        for a in _COUNTED
    ]
    out.append(CannedQuery("count-speakers-by-sex", "count", "speaker counts per sex",
                           attribute="sex", over="speakers"))
    out.append(CannedQuery("corpus-statistics", "stats", "corpus totals"))
    out += [CannedQuery(name, "search", desc, criteria=crit) for name, desc, crit in _PRESETS]
    return tuple(out)


CATALOG = _build_catalog()


def list_canned_queries() -> list[CannedQuery]:
    return list(CATALOG)


def canned_query(name: str) -> CannedQuery:
    for q in CATALOG:
        if q.name == name:
            return q
    raise KeyError(name)
