"""Sound-unit alphabet (the CLASS table) and the phonetic classifiers.

A sound unit is a vowel, a consonant, or the pause marker. Vowels carry
labialization, rise and row; consonants carry place and manner of
articulation. The two feature sets never mix.
"""

from __future__ import annotations

import enum
import io
import json
import os
from dataclasses import dataclass
from importlib import resources
from typing import Iterable

from . import refbooks as rb
from .errors import (
    AlphabetParseError,
    ClassInvalidError,
    DuplicateSymbolError,
    InconsistentContextError,
    NonPositiveRateError,
    UnknownCodeError,
    UnknownSymbolError,
    Violation,
)
from .refbooks import ReferenceRegistry, SpeechTempo

CLASS_FIELDS = (
    "SYMBOL", "STRESSED", "VOCALIZED", "SOFT", "VOICED",
    "LOCATION", "WAY_OF_ORIGIN", "LABIALIZATION", "RISE", "ROW",
)

# CLASS field -> reference book it points into
FEATURE_BOOKS = {
    "STRESSED": "BOOK_STRESSED",
    "SOFT": "BOOK_SOFT",
    "VOICED": "BOOK_VOICED",
    "LOCATION": "BOOK_LOCATION",
    "WAY_OF_ORIGIN": "BOOK_WAY_OF_ORIGIN",
    "LABIALIZATION": "BOOK_LABIALIZATION",
    "RISE": "BOOK_RISE",
    "ROW": "BOOK_ROW",
}

CONSONANT_FEATURES = ("location", "way_of_origin")
VOWEL_FEATURES = ("labialization", "rise", "row")


class UnitKind(str, enum.Enum):
    VOWEL = "vowel"
    CONSONANT = "consonant"
    PAUSE = "pause"


@dataclass(frozen=True)
class SoundUnitClass:
    symbol: str
    stressed: int
    vocalized: bool = False
    soft: int | None = None
    voiced: int | None = None
    location: int | None = None
    way_of_origin: int | None = None
    labialization: int | None = None
    rise: int | None = None
    row: int | None = None

    @property
    def kind(self) -> UnitKind:
        if self.voiced == rb.VOICED_VOWEL:
            return UnitKind.VOWEL
        if self.voiced is None and self.stressed == rb.STRESS_PAUSE:
            return UnitKind.PAUSE
        return UnitKind.CONSONANT

    @property
    def is_pause(self) -> bool:
        return self.kind is UnitKind.PAUSE

    def to_record(self) -> dict:
        return {
            "SYMBOL": self.symbol,
            "STRESSED": self.stressed,
            "VOCALIZED": self.vocalized,
            "SOFT": self.soft,
            "VOICED": self.voiced,
            "LOCATION": self.location,
            "WAY_OF_ORIGIN": self.way_of_origin,
            "LABIALIZATION": self.labialization,
            "RISE": self.rise,
            "ROW": self.row,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "SoundUnitClass":
        return cls(
            symbol=rec["SYMBOL"],
            stressed=rec["STRESSED"],
            vocalized=bool(rec.get("VOCALIZED")),
            soft=rec.get("SOFT"),
            voiced=rec.get("VOICED"),
            location=rec.get("LOCATION"),
            way_of_origin=rec.get("WAY_OF_ORIGIN"),
            labialization=rec.get("LABIALIZATION"),
            rise=rec.get("RISE"),
            row=rec.get("ROW"),
        )


def validate_class(c: SoundUnitClass, registry: ReferenceRegistry) -> list[Violation]:
    """Check one sound unit; an empty list means it is valid."""
    out: list[Violation] = []

    def bad(kind, msg):
        out.append(Violation(kind, msg, table="CLASS", key=(c.symbol,)))

    if not isinstance(c.symbol, str) or not c.symbol or any(ch.isspace() for ch in c.symbol):
        bad("bad-symbol", "symbol must be a non-empty token without whitespace")

    rec = c.to_record()
    for field_name, book in FEATURE_BOOKS.items():
        code = rec[field_name]
        if code is None:
            continue
        try:
            registry.lookup(book, code)
        except UnknownCodeError:
            bad("dangling-code", f"{field_name}={code!r} not found in {book}")

    if c.stressed is None:
        bad("missing-feature", "stress variant is required")

    kind = c.kind
    set_ = lambda names: [n for n in names if getattr(c, n) is not None]  # noqa: E731
    unset = lambda names: [n for n in names if getattr(c, n) is None]  # noqa: E731

    if kind is UnitKind.PAUSE:
        extra = set_(("soft",) + CONSONANT_FEATURES + VOWEL_FEATURES)
        if extra:
            bad("pause-with-features", "pause carries phonetic features: " + ", ".join(extra))
        if c.vocalized:
            bad("vocalized-mismatch", "pause must not be vocalized")
        return out

    if c.voiced is None:
        bad("missing-feature", "voicing is required for non-pause units")
    if c.stressed == rb.STRESS_PAUSE:
        bad("stress-mismatch", "pause stress variant on a non-pause unit")

    if kind is UnitKind.VOWEL:
        wrong = set_(CONSONANT_FEATURES)
        if wrong:
            bad("consonant-feature-on-vowel", "consonant-only feature on vowel: " + ", ".join(wrong))
        missing = unset(VOWEL_FEATURES)
        if missing:
            bad("missing-feature", "vowel lacks " + ", ".join(missing))
        if not c.vocalized:
            bad("vocalized-mismatch", "vowel must be vocalized")
        if c.soft == rb.SOFT_SONORANT:
            bad("sonorant-vowel", "sonorant softness is consonant-only")
        if c.stressed not in rb.STRESSED_VOWEL_CODES | rb.UNSTRESSED_VOWEL_CODES:
            bad("stress-mismatch", f"vowel carries non-vowel stress variant {c.stressed!r}")
    else:
        wrong = set_(VOWEL_FEATURES)
        if wrong:
            bad("vowel-feature-on-consonant", "vowel-only feature on consonant: " + ", ".join(wrong))
        missing = unset(CONSONANT_FEATURES + ("soft",))
        if missing:
            bad("missing-feature", "consonant lacks " + ", ".join(missing))
        if c.vocalized:
            bad("vocalized-mismatch", "consonant must not be vocalized")
        if c.stressed != rb.STRESS_CONSONANT:
            bad("stress-mismatch", f"consonant carries stress variant {c.stressed!r}")
    return out


# ---------------------------------------------------------------------------
# stress variants


class SyllablePosition(str, enum.Enum):
    STRESSED = "stressed"
    FIRST_PRE_STRESSED = "first-pre-stressed"
    SECOND_PRE_STRESSED_OR_EARLIER = "second-pre-stressed-or-earlier"
    POST_STRESSED = "post-stressed"


class StressKind(str, enum.Enum):
    VOWEL_STRESSED = "vowel-stressed"
    VOWEL_UNSTRESSED = "vowel-unstressed"
    CONSONANT = "consonant"
    PAUSE = "pause"


_STRENGTH = {
    SyllablePosition.STRESSED: 3,
    SyllablePosition.FIRST_PRE_STRESSED: 2,
    SyllablePosition.SECOND_PRE_STRESSED_OR_EARLIER: 1,
    SyllablePosition.POST_STRESSED: 1,
}


def potebnya_strength(position: SyllablePosition | str) -> int:
    """Vowel strength by syllable position: 3 stressed, 2 first pre-stressed, else 1."""
    return _STRENGTH[SyllablePosition(position)]


@dataclass(frozen=True)
class StressContext:
    kind: StressKind
    left_soft: bool | None = None
    right_soft: bool | None = None
    syllable_position: SyllablePosition | None = None

    def check(self) -> None:
        kind = StressKind(self.kind)
        if kind in (StressKind.CONSONANT, StressKind.PAUSE):
            if (self.left_soft, self.right_soft, self.syllable_position) != (None, None, None):
                raise InconsistentContextError(f"{kind.value} context takes no neighbours or position")
        elif kind is StressKind.VOWEL_STRESSED:
            if self.left_soft is None or self.right_soft is None:
                raise InconsistentContextError("stressed vowel needs left_soft and right_soft")
            if self.syllable_position not in (None, SyllablePosition.STRESSED):
                raise InconsistentContextError("stressed vowel must sit in the stressed syllable")
        else:
            if self.right_soft is not None:
                raise InconsistentContextError("right_soft applies to stressed vowels only")
            if self.left_soft is None:
                raise InconsistentContextError("unstressed vowel needs left_soft")
            if self.syllable_position is None:
                raise InconsistentContextError("unstressed vowel needs a syllable position")
            if SyllablePosition(self.syllable_position) is SyllablePosition.STRESSED:
                raise InconsistentContextError("unstressed vowel cannot sit in the stressed syllable")


def stress_variant(ctx: StressContext) -> int:
    """Map a phonetic context to its BOOK_STRESSED code."""
    ctx.check()
    kind = StressKind(ctx.kind)
    if kind is StressKind.CONSONANT:
        return rb.STRESS_CONSONANT
    if kind is StressKind.PAUSE:
        return rb.STRESS_PAUSE
    if kind is StressKind.VOWEL_STRESSED:
        return {
            (False, False): rb.STRESSED_HARD_HARD,
            (False, True): rb.STRESSED_HARD_SOFT,
            (True, False): rb.STRESSED_SOFT_HARD,
            (True, True): rb.STRESSED_SOFT_SOFT,
        }[(bool(ctx.left_soft), bool(ctx.right_soft))]
    strength = potebnya_strength(ctx.syllable_position)
    return {
        (2, False): rb.UNSTRESSED_2_AFTER_HARD,
        (1, False): rb.UNSTRESSED_1_AFTER_HARD,
        (2, True): rb.UNSTRESSED_2_AFTER_SOFT,
        (1, True): rb.UNSTRESSED_1_AFTER_SOFT,
    }[(strength, bool(ctx.left_soft))]


# ---------------------------------------------------------------------------
# tempo


def tempo_bands(registry: ReferenceRegistry) -> list[SpeechTempo]:
    """Tempo bands ordered by ceiling, the unbounded band last."""
    return sorted(
        registry.book("BOOK_SPEECH_TEMPS"),
        key=lambda t: (t.sounds_per_second_ceiling is None, t.sounds_per_second_ceiling or 0),
    )


def classify_tempo(sounds_per_second: float, registry: ReferenceRegistry) -> SpeechTempo:
    if not sounds_per_second > 0:
        raise NonPositiveRateError(f"rate must be positive, got {sounds_per_second!r}")
    bands = tempo_bands(registry)
    for band in bands:
        ceiling = band.sounds_per_second_ceiling
        if ceiling is None or sounds_per_second <= ceiling:
            return band
    raise ValueError(f"no tempo band covers {sounds_per_second} sounds/s")


# ---------------------------------------------------------------------------
# alphabet


@dataclass(frozen=True)
class Alphabet:
    units: tuple[SoundUnitClass, ...] = ()
    name: str = ""
    language: str = ""

    def __post_init__(self):
        index = {}
        for u in self.units:
            if u.symbol in index:
                raise DuplicateSymbolError(u.symbol)
            index[u.symbol] = u
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.units)

    def __iter__(self):
        return iter(self.units)

    def __contains__(self, symbol) -> bool:
        return symbol in self._index

    def get(self, symbol: str) -> SoundUnitClass:
        return self._index[symbol]

    @property
    def symbols(self) -> list[str]:
        return [u.symbol for u in self.units]

    def pause_symbols(self) -> set[str]:
        return {u.symbol for u in self.units if u.is_pause}


def alphabet_from_records(
    records: Iterable[dict], registry: ReferenceRegistry, name: str = "", language: str = "",
) -> Alphabet:
    units = []
    seen = set()
    for rec in records:
        unit = SoundUnitClass.from_record(rec)
        if unit.symbol in seen:
            raise DuplicateSymbolError(unit.symbol)
        seen.add(unit.symbol)
        report = validate_class(unit, registry)
        if report:
            raise ClassInvalidError(unit.symbol, report)
        units.append(unit)
    return Alphabet(tuple(units), name=name, language=language)


def parse_alphabet_lines(lines: Iterable[str]) -> list[dict]:
    records = []
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise AlphabetParseError(str(exc), line=n) from None
        if not isinstance(rec, dict):
            raise AlphabetParseError("record must be an object", line=n)
        unknown = set(rec) - set(CLASS_FIELDS)
        if unknown:
            raise AlphabetParseError(f"unknown fields {sorted(unknown)}", line=n)
        for required in ("SYMBOL", "STRESSED"):
            if required not in rec:
                raise AlphabetParseError(f"missing {required}", line=n)
        records.append({f: rec.get(f) for f in CLASS_FIELDS})
    return records


def load_alphabet(source, registry: ReferenceRegistry, name: str = "", language: str = "") -> Alphabet:
    """Load an alphabet from a path or an open text file."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as f:
            records = parse_alphabet_lines(f)
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        records = parse_alphabet_lines(source)
    else:
        raise TypeError("source must be a path or a text file")
    return alphabet_from_records(records, registry, name=name, language=language)


def russian_alphabet_text() -> str:
    return resources.files("speechframe.data").joinpath("russian_alphabet.jsonl").read_text("utf-8")


def load_russian_alphabet(registry: ReferenceRegistry | None = None) -> Alphabet:
    if registry is None:
        registry = rb.seed_default_registry()
    return load_alphabet(io.StringIO(russian_alphabet_text()), registry, name="russian", language="Russian")


# ---------------------------------------------------------------------------
# transcriptions


def tokenize_transcription(text: str, alphabet: Alphabet) -> list[str]:
    tokens = text.split()
    for i, tok in enumerate(tokens):
        if tok not in alphabet:
            raise UnknownSymbolError(tok, i)
    return tokens


def render_transcription(symbols: Iterable[str]) -> str:
    return " ".join(symbols)
