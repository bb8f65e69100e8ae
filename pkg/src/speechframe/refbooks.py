"""Controlled vocabularies ("reference books") behind every foreign key.

Each book is a small code -> entry table. Most books hold plain
:class:`RefEntry` rows (code + title); a few carry extra measured
attributes (noise levels, sampling rates, tempo ceilings) and get their
own entry type.

Book names are the table names used on disk, e.g. ``BOOK_WAY_OF_ORIGIN``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, ClassVar, Iterator

from .errors import (
    DuplicateCodeError,
    DuplicateTitleError,
    ReservedCodeError,
    UnknownBookError,
    UnknownCodeError,
)


@dataclass(frozen=True)
class RefEntry:
    code: int | None
    title: str

    CODE_ATTR: ClassVar[str] = "code"
    FIELDS: ClassVar[tuple[tuple[str, str], ...]] = (("title", "TITLE"),)

    def identity(self) -> Any:
        return self.title


@dataclass(frozen=True)
class AcousticEnvironment:
    environment_id: int | None
    noise_level_db: float
    title: str

    CODE_ATTR: ClassVar[str] = "environment_id"
    FIELDS: ClassVar[tuple[tuple[str, str], ...]] = (
        ("noise_level_db", "NOISE_LEVEL_DB"),
        ("title", "TITLE"),
    )

    def __post_init__(self):
        if self.noise_level_db < 0:
            raise ValueError("noise level must be non-negative")

    @property
    def code(self):
        return self.environment_id

    def identity(self) -> Any:
        return self.title


@dataclass(frozen=True)
class Dialect:
    dialect_id: int | None
    title: str
    language: str

    CODE_ATTR: ClassVar[str] = "dialect_id"
    FIELDS: ClassVar[tuple[tuple[str, str], ...]] = (
        ("title", "TITLE"),
        ("language", "LANGUAGE"),
    )

    @property
    def code(self):
        return self.dialect_id

    def identity(self) -> Any:
        return (self.title, self.language)


@dataclass(frozen=True)
class SpeechTempo:
    """A tempo band; ``sounds_per_second_ceiling`` of None means unbounded."""

    tempo_id: int | None
    name: str
    sounds_per_second_ceiling: int | None

    CODE_ATTR: ClassVar[str] = "tempo_id"
    FIELDS: ClassVar[tuple[tuple[str, str], ...]] = (
        ("name", "SPEED"),
        ("sounds_per_second_ceiling", "SOUNDS_PER_SECOND"),
    )

    def __post_init__(self):
        c = self.sounds_per_second_ceiling
        if c is not None and c <= 0:
            raise ValueError("tempo ceiling must be positive")

    @property
    def code(self):
        return self.tempo_id

    @property
    def title(self):
        return self.name

    def identity(self) -> Any:
        return self.name


@dataclass(frozen=True)
class FileFormat:
    format_id: int | None
    sampling_frequency_hz: float
    bit_depth: int
    file_type: str
    channel_count: int

    CODE_ATTR: ClassVar[str] = "format_id"
    FIELDS: ClassVar[tuple[tuple[str, str], ...]] = (
        ("sampling_frequency_hz", "DISCRETIZATION_FREQUENCY"),
        ("bit_depth", "BITRATE"),
        ("file_type", "FILE_TYPE"),
        ("channel_count", "NUMBER_OF_CHANNELS"),
    )

    def __post_init__(self):
        if self.sampling_frequency_hz <= 0:
            raise ValueError("sampling frequency must be positive")
        if self.bit_depth <= 0:
            raise ValueError("bit depth must be positive")
        if self.channel_count < 1:
            raise ValueError("channel count must be at least 1")

    @property
    def code(self):
        return self.format_id

    @property
    def title(self):
        return (
            f"{self.file_type} {self.sampling_frequency_hz:g} Hz "
            f"{self.bit_depth}-bit {self.channel_count}ch"
        )

    def identity(self) -> Any:
        return (self.file_type, self.sampling_frequency_hz, self.bit_depth, self.channel_count)


@dataclass(frozen=True)
class NoiseProfile:
    noise_id: int | None
    description: str
    snr_db: float | None = None

    CODE_ATTR: ClassVar[str] = "noise_id"
    FIELDS: ClassVar[tuple[tuple[str, str], ...]] = (
        ("description", "NOISE_TYPE"),
        ("snr_db", "SNR_DB"),
    )

    @property
    def code(self):
        return self.noise_id

    @property
    def title(self):
        return self.description

    def identity(self) -> Any:
        return (self.description, self.snr_db)


@dataclass(frozen=True)
class RecordingDevice:
    device_id: int | None
    device_type: str
    bandwidth_hz: float

    CODE_ATTR: ClassVar[str] = "device_id"
    FIELDS: ClassVar[tuple[tuple[str, str], ...]] = (
        ("device_type", "TYPE"),
        ("bandwidth_hz", "BANDWIDTH"),
    )

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth must be positive")

    @property
    def code(self):
        return self.device_id

    @property
    def title(self):
        return self.device_type

    def identity(self) -> Any:
        return (self.device_type, self.bandwidth_hz)


# book name -> (entry type, key field on disk)
BOOK_LAYOUT: dict[str, tuple[type, str]] = {
    "ACOUSTIC_ENVIRONMENT": (AcousticEnvironment, "ENVIRONMENT_ID"),
    "BOOK_DEFECTS": (RefEntry, "ID_DEFECT"),
    "BOOK_DIALECTS": (Dialect, "ID_DIALECT"),
    "BOOK_EMOTIONS": (RefEntry, "ID_EMOTION"),
    "BOOK_LABIALIZATION": (RefEntry, "ID"),
    "BOOK_LOCATION": (RefEntry, "ID"),
    "BOOK_RISE": (RefEntry, "ID"),
    "BOOK_ROW": (RefEntry, "ID"),
    "BOOK_SEX": (RefEntry, "ID"),
    "BOOK_SOFT": (RefEntry, "SOFT_ID"),
    "BOOK_SPEECH_TEMPS": (SpeechTempo, "ID"),
    "BOOK_SPEECH_TYPES": (RefEntry, "ID"),
    "BOOK_STRESSED": (RefEntry, "ID_STRESSED"),
    "BOOK_UNIT_TYPES": (RefEntry, "TYPE_ID"),
    "BOOK_VOICED": (RefEntry, "VOICED_ID"),
    "BOOK_VOICE_TYPES": (RefEntry, "ID"),
    "BOOK_WAY_OF_ORIGIN": (RefEntry, "ID"),
    "COMMUNICATION_CHANNEL": (RefEntry, "ID"),
    "FILE_FORMAT": (FileFormat, "ID"),
    "NOISE": (NoiseProfile, "ID_NOISE"),
    "RECORDING_DEVICE": (RecordingDevice, "DEVICE_ID"),
    "SICKNESS": (RefEntry, "ID_SICKNESS"),
}

BOOK_NAMES = tuple(sorted(BOOK_LAYOUT))

# codes that may never be redefined, per book
RESERVED_CODES = {"NOISE": {0}}

NO_NOISE = 0

# Fixed seed codes. The alphabet seed file refers to these numbers.
SEX_MALE, SEX_FEMALE = 1, 2
SOFT_HARD, SOFT_SOFT, SOFT_SONORANT = 1, 2, 3
VOICED_VOICELESS, VOICED_VOICED, VOICED_VOWEL = 1, 2, 3
LABIALIZED, NON_LABIALIZED = 1, 2
RISE_UPPER, RISE_MIDDLE, RISE_LOWER = 1, 2, 3
ROW_FRONT, ROW_CENTRAL, ROW_BACK = 1, 2, 3
LOC_LABIAL, LOC_DENTAL, LOC_PALATAL, LOC_VELAR = 1, 2, 3, 4
WAY_PLOSIVE, WAY_AFFRICATE, WAY_NASAL, WAY_SLOTTED = 1, 2, 3, 4
UNIT_SYLLABLE, UNIT_PHRASE, UNIT_TEXT, UNIT_SOUND = 1, 2, 3, 4
TEMPO_NORMAL, TEMPO_ACCELERATED, TEMPO_FAST = 1, 2, 3

# stress variants: 1-4 stressed, 5-9 unstressed (9 reserved), 10 consonant, 11 pause
STRESSED_HARD_HARD = 1
STRESSED_HARD_SOFT = 2
STRESSED_SOFT_HARD = 3
STRESSED_SOFT_SOFT = 4
UNSTRESSED_2_AFTER_HARD = 5
UNSTRESSED_1_AFTER_HARD = 6
UNSTRESSED_2_AFTER_SOFT = 7
UNSTRESSED_1_AFTER_SOFT = 8
UNSTRESSED_RESERVED = 9
STRESS_CONSONANT = 10
STRESS_PAUSE = 11

STRESSED_VOWEL_CODES = frozenset({1, 2, 3, 4})
UNSTRESSED_VOWEL_CODES = frozenset({5, 6, 7, 8, 9})


class Book:
    """One reference book: an ordered code -> entry mapping."""

    def __init__(self, name: str, entry_type: type, key_field: str):
        self.name = name
        self.entry_type = entry_type
        self.key_field = key_field
        self._entries: dict[int, Any] = {}

    def __iter__(self) -> Iterator[Any]:
        return iter(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, code) -> bool:
        return code in self._entries

    def __repr__(self) -> str:
        return f"Book({self.name!r}, {len(self)} entries)"

    def get(self, code: int):
        try:
            return self._entries[code]
        except (KeyError, TypeError):
            raise UnknownCodeError(self.name, code) from None

    def codes(self) -> list[int]:
        return list(self._entries)

    def titles(self) -> list[str]:
        return [e.title for e in self._entries.values()]

    def find(self, title: str):
        """Return the entry with this exact title, or None."""
        for e in self._entries.values():
            if e.title == title:
                return e
        return None

    def next_code(self) -> int:
        reserved = RESERVED_CODES.get(self.name, set())
        used = set(self._entries) | reserved
        return max(used, default=0) + 1

    def add(self, entry) -> int:
        if not isinstance(entry, self.entry_type):
            raise TypeError(
                f"{self.name} holds {self.entry_type.__name__}, got {type(entry).__name__}"
            )
        if not str(entry.title).strip():
            raise ValueError(f"{self.name}: title must be non-empty")
        code = entry.code
        if code is not None and code in RESERVED_CODES.get(self.name, ()):
            raise ReservedCodeError(f"{self.name}: code {code} is reserved")
        ident = entry.identity()
        for other in self._entries.values():
            if other.identity() == ident:
                raise DuplicateTitleError(f"{self.name}: {entry.title!r} already present")
        if code is None:
            code = self.next_code()
            entry = dataclasses.replace(entry, **{entry.CODE_ATTR: code})
        elif not isinstance(code, int) or isinstance(code, bool) or code < 0:
            raise ValueError(f"{self.name}: code must be a non-negative integer")
        elif code in self._entries:
            raise DuplicateCodeError(f"{self.name}: code {code} already used")
        self._entries[code] = entry
        return code

    def _put(self, entry) -> None:
        # seeding path, bypasses the reserved-code guard
        self._entries[entry.code] = entry

    def to_records(self) -> list[dict]:
        return [entry_to_record(self.name, e) for e in self._entries.values()]


def entry_to_record(book: str, entry) -> dict:
    _, key_field = BOOK_LAYOUT[book]
    rec = {key_field: entry.code}
    for attr, field_name in entry.FIELDS:
        rec[field_name] = getattr(entry, attr)
    return rec


def entry_from_record(book: str, rec: dict):
    entry_type, key_field = BOOK_LAYOUT[book]
    kwargs = {entry_type.CODE_ATTR: rec[key_field]}
    for attr, field_name in entry_type.FIELDS:
        kwargs[attr] = rec.get(field_name)
    return entry_type(**kwargs)


class ReferenceRegistry:
    """All reference books, keyed by table name."""

    def __init__(self):
        self._books = {
            name: Book(name, entry_type, key_field)
            for name, (entry_type, key_field) in BOOK_LAYOUT.items()
        }

    def __contains__(self, name: str) -> bool:
        return name in self._books

    def __iter__(self) -> Iterator[Book]:
        return iter(self._books.values())

    def book(self, name: str) -> Book:
        try:
            return self._books[name]
        except KeyError:
            raise UnknownBookError(name) from None

    def lookup(self, book: str, code: int):
        return self.book(book).get(code)

    def add_entry(self, book: str, entry) -> int:
        """Store ``entry`` in ``book`` and return its code.

        A bare string is accepted for books of plain :class:`RefEntry`
        rows. Entries without a code get the next free one.
        """
        b = self.book(book)
        if isinstance(entry, str):
            if b.entry_type is not RefEntry:
                raise TypeError(f"{book} entries need a {b.entry_type.__name__}")
            entry = RefEntry(None, entry)
        return b.add(entry)

    def code_for(self, book: str, title: str) -> int:
        e = self.book(book).find(title)
        if e is None:
            raise UnknownCodeError(book, title)
        return e.code

    # convenience views

    @property
    def sexes(self) -> list[RefEntry]:
        return list(self.book("BOOK_SEX"))

    @property
    def voice_types(self) -> list[RefEntry]:
        return list(self.book("BOOK_VOICE_TYPES"))

    @property
    def unit_types(self) -> list[RefEntry]:
        return list(self.book("BOOK_UNIT_TYPES"))

    @property
    def stress_variants(self) -> list[RefEntry]:
        return list(self.book("BOOK_STRESSED"))

    @property
    def tempos(self) -> list[SpeechTempo]:
        return list(self.book("BOOK_SPEECH_TEMPS"))

    def dialects(self, language: str | None = None) -> list[Dialect]:
        return [
            d for d in self.book("BOOK_DIALECTS")
            if language is None or d.language == language
        ]

    def to_tables(self) -> dict[str, list[dict]]:
        return {name: b.to_records() for name, b in self._books.items()}

    @classmethod
    def from_tables(cls, tables: dict[str, list[dict]]) -> "ReferenceRegistry":
        reg = cls()
        for name, rows in tables.items():
            if name not in BOOK_LAYOUT:
                continue
            b = reg._books[name]
            for rec in rows:
                b._put(entry_from_record(name, rec))
        return reg


def _simple(reg: ReferenceRegistry, book: str, titles: list[tuple[int, str]]) -> None:
    for code, title in titles:
        reg.book(book)._put(RefEntry(code, title))


def seed_default_registry() -> ReferenceRegistry:
    """Build a registry holding every vocabulary with known contents.

    Books whose values are never enumerated (defects, sickness, channels,
    speech types, formats, devices) start empty and are filled by the user.
    """
    reg = ReferenceRegistry()
    _simple(reg, "BOOK_SEX", [(SEX_MALE, "male"), (SEX_FEMALE, "female")])
    _simple(reg, "BOOK_SOFT", [
        (SOFT_HARD, "hard consonant"),
        (SOFT_SOFT, "soft consonant"),
        (SOFT_SONORANT, "sonorant"),
    ])
    _simple(reg, "BOOK_VOICED", [
        (VOICED_VOICELESS, "voiceless consonant"),
        (VOICED_VOICED, "voiced consonant"),
        (VOICED_VOWEL, "vowel"),
    ])
    _simple(reg, "BOOK_VOICE_TYPES", [
        (1, "talking"), (2, "singing"), (3, "whispering"), (4, "esophageal"),
    ])
    _simple(reg, "BOOK_UNIT_TYPES", [
        (UNIT_SYLLABLE, "syllable"),
        (UNIT_PHRASE, "phrase"),
        (UNIT_TEXT, "text"),
        (UNIT_SOUND, "sound"),
    ])
    _simple(reg, "BOOK_WAY_OF_ORIGIN", [
        (WAY_PLOSIVE, "occlusive plosive"),
        (WAY_AFFRICATE, "occlusive affricate"),
        (WAY_NASAL, "occlusive nasal"),
        (WAY_SLOTTED, "slotted"),
    ])
    _simple(reg, "BOOK_RISE", [
        (RISE_UPPER, "upper"), (RISE_MIDDLE, "middle"), (RISE_LOWER, "lower"),
    ])
    _simple(reg, "BOOK_LABIALIZATION", [
        (LABIALIZED, "labialized"), (NON_LABIALIZED, "non-labialized"),
    ])
    # not enumerated in the source material; conventional Russian values
    _simple(reg, "BOOK_ROW", [
        (ROW_FRONT, "front"), (ROW_CENTRAL, "central"), (ROW_BACK, "back"),
    ])
    _simple(reg, "BOOK_LOCATION", [
        (LOC_LABIAL, "labial"),
        (LOC_DENTAL, "dental"),
        (LOC_PALATAL, "palatal"),
        (LOC_VELAR, "velar"),
    ])
    _simple(reg, "BOOK_STRESSED", [
        (STRESSED_HARD_HARD, "stressed, between hard"),
        (STRESSED_HARD_SOFT, "stressed, between hard and soft"),
        (STRESSED_SOFT_HARD, "stressed, between soft and hard"),
        (STRESSED_SOFT_SOFT, "stressed, between soft"),
        (UNSTRESSED_2_AFTER_HARD, "unstressed, strength 2 after hard"),
        (UNSTRESSED_1_AFTER_HARD, "unstressed, strength 1 after hard"),
        (UNSTRESSED_2_AFTER_SOFT, "unstressed, strength 2 after soft"),
        (UNSTRESSED_1_AFTER_SOFT, "unstressed, strength 1 after soft"),
        (UNSTRESSED_RESERVED, "unstressed, reserved"),
        (STRESS_CONSONANT, "no stress (consonant)"),
        (STRESS_PAUSE, "pause"),
    ])
    _simple(reg, "BOOK_EMOTIONS", [(1, "neutral")])

    dialects = reg.book("BOOK_DIALECTS")
    for code, title in enumerate([
        "Moscow and St. Petersburg",
        "South of Russia",
        "North of Russia",
        "the Urals, Siberia and the Far East",
        "the central part of Russia",
    ], start=1):
        dialects._put(Dialect(code, title, "Russian"))

    tempos = reg.book("BOOK_SPEECH_TEMPS")
    tempos._put(SpeechTempo(TEMPO_NORMAL, "normal", 8))
    tempos._put(SpeechTempo(TEMPO_ACCELERATED, "accelerated", 12))
    tempos._put(SpeechTempo(TEMPO_FAST, "fast", None))

    reg.book("NOISE")._put(NoiseProfile(NO_NOISE, "no noise", None))

    env = reg.book("ACOUSTIC_ENVIRONMENT")
    env._put(AcousticEnvironment(1, 20.0, "office space"))
    env._put(AcousticEnvironment(2, 40.0, "car interior"))
    return reg


def lookup(registry: ReferenceRegistry, book: str, code: int):
    return registry.lookup(book, code)


def add_entry(registry: ReferenceRegistry, book: str, entry) -> int:
    return registry.add_entry(book, entry)
