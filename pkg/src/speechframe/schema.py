"""Default table layout: 27 tables, their keys, foreign keys and delete policies."""

from __future__ import annotations

from dataclasses import dataclass, field

SCHEMA_VERSION = 1
FORMAT_NAME = "speechframe-corpus"

CASCADE = "cascade"
RESTRICT = "restrict"

FIELD_TYPES = {"integer", "real", "text", "date", "duration", "boolean", "flag"}


@dataclass(frozen=True)
class FieldSpec:
    name: str
    type: str
    nullable: bool = False


@dataclass(frozen=True)
class ForeignKey:
    field: str
    target_table: str
    target_field: str
    on_delete: str = RESTRICT

    def edge(self, table: str) -> str:
        return f"{table}.{self.field}->{self.target_table}.{self.target_field}"


@dataclass(frozen=True)
class TableSchema:
    table_name: str
    fields: tuple[FieldSpec, ...]
    key_fields: tuple[str, ...]
    foreign_keys: tuple[ForeignKey, ...] = ()
    field_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.key_fields:
            raise ValueError(f"{self.table_name}: key_fields must be non-empty")
        index = {f.name: f for f in self.fields}
        for k in self.key_fields:
            if k not in index:
                raise ValueError(f"{self.table_name}: unknown key field {k}")
        for fk in self.foreign_keys:
            if fk.field not in index:
                raise ValueError(f"{self.table_name}: unknown FK field {fk.field}")
        object.__setattr__(self, "field_index", index)

    @property
    def field_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fields)

    def key_of(self, record: dict) -> tuple:
        return tuple(record[k] for k in self.key_fields)


def _book(name, key, *extra, key_type="integer"):
    fields = (FieldSpec(key, key_type),) + (extra or (FieldSpec("TITLE", "text"),))
    return TableSchema(name, fields, (key,))


def _fk(field_name, target, target_field, policy=RESTRICT):
    return ForeignKey(field_name, target, target_field, policy)


def default_schema() -> dict[str, TableSchema]:
    """All 27 tables, keyed by name."""
    F = FieldSpec
    tables = [
        _book("ACOUSTIC_ENVIRONMENT", "ENVIRONMENT_ID",
              F("NOISE_LEVEL_DB", "real"), F("TITLE", "text")),
        _book("BOOK_DEFECTS", "ID_DEFECT"),
        _book("BOOK_DIALECTS", "ID_DIALECT", F("TITLE", "text"), F("LANGUAGE", "text")),
        _book("BOOK_EMOTIONS", "ID_EMOTION"),
        _book("BOOK_LABIALIZATION", "ID"),
        _book("BOOK_LOCATION", "ID"),
        _book("BOOK_RISE", "ID"),
        _book("BOOK_ROW", "ID"),
        _book("BOOK_SEX", "ID"),
        _book("BOOK_SOFT", "SOFT_ID"),
        _book("BOOK_SPEECH_TEMPS", "ID",
              F("SPEED", "text"), F("SOUNDS_PER_SECOND", "integer", nullable=True)),
        _book("BOOK_SPEECH_TYPES", "ID"),
        _book("BOOK_STRESSED", "ID_STRESSED"),
        _book("BOOK_UNIT_TYPES", "TYPE_ID"),
        _book("BOOK_VOICED", "VOICED_ID"),
        _book("BOOK_VOICE_TYPES", "ID"),
        _book("BOOK_WAY_OF_ORIGIN", "ID"),
        TableSchema(
            "CLASS",
            (
                F("SYMBOL", "text"),
                F("STRESSED", "integer"),
                F("VOCALIZED", "boolean"),
                F("SOFT", "integer", nullable=True),
                F("VOICED", "integer", nullable=True),
                F("LOCATION", "integer", nullable=True),
                F("WAY_OF_ORIGIN", "integer", nullable=True),
                F("LABIALIZATION", "integer", nullable=True),
                F("RISE", "integer", nullable=True),
                F("ROW", "integer", nullable=True),
            ),
            ("SYMBOL",),
            (
                _fk("STRESSED", "BOOK_STRESSED", "ID_STRESSED"),
                _fk("SOFT", "BOOK_SOFT", "SOFT_ID"),
                _fk("VOICED", "BOOK_VOICED", "VOICED_ID"),
                _fk("LOCATION", "BOOK_LOCATION", "ID"),
                _fk("WAY_OF_ORIGIN", "BOOK_WAY_OF_ORIGIN", "ID"),
                _fk("LABIALIZATION", "BOOK_LABIALIZATION", "ID"),
                _fk("RISE", "BOOK_RISE", "ID"),
                _fk("ROW", "BOOK_ROW", "ID"),
            ),
        ),
        _book("COMMUNICATION_CHANNEL", "ID"),
        _book("FILE_FORMAT", "ID",
              F("DISCRETIZATION_FREQUENCY", "real"), F("BITRATE", "integer"),
              F("FILE_TYPE", "text"), F("NUMBER_OF_CHANNELS", "integer")),
        _book("NOISE", "ID_NOISE",
              F("NOISE_TYPE", "text"), F("SNR_DB", "real", nullable=True)),
        _book("RECORDING_DEVICE", "DEVICE_ID", F("TYPE", "text"), F("BANDWIDTH", "real")),
        TableSchema(
            "SEGMENTATION",
            (
                F("POSITION", "integer"),
                F("FILENAME", "text"),
                F("SOURCE", "text"),
                F("START_AUDIO", "duration"),
                F("TYPE_ID", "text"),
                F("EXPERT_COUNT", "integer", nullable=True),
            ),
            ("POSITION", "FILENAME", "SOURCE"),
            (
                _fk("FILENAME", "SPEECH_SIGNAL", "FILE_NAME", CASCADE),
                _fk("TYPE_ID", "CLASS", "SYMBOL"),
            ),
        ),
        _book("SICKNESS", "ID_SICKNESS"),
        TableSchema(
            "SPEAKER",
            (
                F("ID", "integer"),
                F("SEX", "integer"),
                F("NAME", "text", nullable=True),
                F("SURNAME", "text", nullable=True),
                F("FAMILY_NAME", "text", nullable=True),
                F("BIRTH_DATE", "date", nullable=True),
            ),
            ("ID",),
            (_fk("SEX", "BOOK_SEX", "ID"),),
        ),
        TableSchema(
            "SPEECH_SIGNAL",
            (
                F("FILE_NAME", "text"),
                F("SPEECH_UNIT_ID", "integer"),
                F("LENGTH", "duration"),
                F("RECORD_DATE", "date", nullable=True),
                F("FILE_FORMAT", "integer", nullable=True),
                F("SYNTHETIC_NOISE_TYPE", "integer"),
                F("RECORDING_DEVICE", "integer", nullable=True),
                F("DIALECT_ID", "integer", nullable=True),
                F("ACOUSTIC_ENVIRONMENT", "integer", nullable=True),
                F("SPEECH_TYPE_ID", "integer", nullable=True),
                F("VOICE_TYPE_ID", "integer", nullable=True),
                F("SPEECH_TEMP_ID", "integer", nullable=True),
                F("CHANNEL", "integer", nullable=True),
                F("SPEECH_SICKNESS", "integer", nullable=True),
                F("ACIENT", "flag"),
                F("SPEECH_DEFECT", "integer", nullable=True),
                F("EMOTIONAL_STATE", "integer", nullable=True),
                F("SPEAKER_ID", "integer"),
            ),
            ("FILE_NAME",),
            (
                _fk("SPEECH_UNIT_ID", "SPEECH_UNIT", "ID", CASCADE),
                _fk("FILE_FORMAT", "FILE_FORMAT", "ID"),
                _fk("SYNTHETIC_NOISE_TYPE", "NOISE", "ID_NOISE"),
                _fk("RECORDING_DEVICE", "RECORDING_DEVICE", "DEVICE_ID"),
                _fk("DIALECT_ID", "BOOK_DIALECTS", "ID_DIALECT"),
                _fk("ACOUSTIC_ENVIRONMENT", "ACOUSTIC_ENVIRONMENT", "ENVIRONMENT_ID"),
                _fk("SPEECH_TYPE_ID", "BOOK_SPEECH_TYPES", "ID"),
                _fk("VOICE_TYPE_ID", "BOOK_VOICE_TYPES", "ID"),
                _fk("SPEECH_TEMP_ID", "BOOK_SPEECH_TEMPS", "ID"),
                _fk("CHANNEL", "COMMUNICATION_CHANNEL", "ID"),
                _fk("SPEECH_SICKNESS", "SICKNESS", "ID_SICKNESS"),
                _fk("SPEECH_DEFECT", "BOOK_DEFECTS", "ID_DEFECT"),
                _fk("EMOTIONAL_STATE", "BOOK_EMOTIONS", "ID_EMOTION"),
                _fk("SPEAKER_ID", "SPEAKER", "ID", CASCADE),
            ),
        ),
        TableSchema(
            "SPEECH_UNIT",
            (
                F("ID", "integer"),
                F("SPELLING_RECORD", "text"),
                F("TRANSCRIPTION", "text"),
                F("UNIT_TYPE", "integer"),
            ),
            ("ID",),
            (_fk("UNIT_TYPE", "BOOK_UNIT_TYPES", "TYPE_ID"),),
        ),
    ]
    schema = {t.table_name: t for t in tables}
    for t in tables:
        for fk in t.foreign_keys:
            target = schema[fk.target_table]
            if target.key_fields != (fk.target_field,):
                raise ValueError(f"{fk.edge(t.table_name)} must target a single-field key")
    return schema


# stored field name -> original column title, recorded in the manifest
FIELD_ALIASES = {
    "ACOUSTIC_ENVIRONMENT.NOISE_LEVEL_DB": "NOISE_LEVEL(DB)",
    "NOISE.SNR_DB": "SIGNAL/NOISE_RATIO(DB)",
}

TABLE_NAMES = tuple(sorted(default_schema()))
