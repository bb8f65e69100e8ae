"""Exception types and the violation record shared by all validators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class Violation:
    """One broken rule found by a validator.

    Validators return lists of these instead of raising, so that a caller
    can report every problem in one pass.
    """

    kind: str
    message: str
    table: str | None = None
    key: tuple | None = None
    edge: str | None = None

    def __str__(self) -> str:
        where = []
        if self.table is not None:
            where.append(self.table)
        if self.key is not None:
            where.append("key=" + ",".join(str(k) for k in self.key))
        if self.edge is not None:
            where.append("edge=" + self.edge)
        prefix = f"[{self.kind}]"
        if where:
            prefix += " " + " ".join(where)
        return f"{prefix}: {self.message}"


class SpeechFrameError(Exception):
    """Base class for every error raised by this package."""


# reference books

class UnknownBookError(SpeechFrameError, LookupError):
    def __init__(self, book: str):
        super().__init__(f"unknown reference book {book!r}")
        self.book = book


class UnknownCodeError(SpeechFrameError, LookupError):
    def __init__(self, book: str, code: Any):
        super().__init__(f"{book} has no entry with code {code!r}")
        self.book = book
        self.code = code


class DuplicateTitleError(SpeechFrameError, ValueError):
    pass


class DuplicateCodeError(SpeechFrameError, ValueError):
    pass


class ReservedCodeError(SpeechFrameError, ValueError):
    pass


# alphabet and classifiers

class NonPositiveRateError(SpeechFrameError, ValueError):
    pass


class InconsistentContextError(SpeechFrameError, ValueError):
    pass


class AlphabetParseError(SpeechFrameError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateSymbolError(SpeechFrameError, ValueError):
    def __init__(self, symbol: str):
        super().__init__(f"duplicate symbol {symbol!r}")
        self.symbol = symbol


class ClassInvalidError(SpeechFrameError, ValueError):
    def __init__(self, symbol: str, report: list[Violation]):
        lines = "; ".join(v.message for v in report)
        super().__init__(f"sound unit {symbol!r} is invalid: {lines}")
        self.symbol = symbol
        self.report = report


class UnknownSymbolError(SpeechFrameError, ValueError):
    def __init__(self, token: str, index: int):
        super().__init__(f"unknown symbol {token!r} at index {index}")
        self.token = token
        self.index = index


# store

class MissingManifestError(SpeechFrameError, FileNotFoundError):
    pass


class SchemaVersionMismatchError(SpeechFrameError):
    pass


class CorpusParseError(SpeechFrameError, ValueError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc = str(path)
            if line is not None:
                loc += f":{line}"
            loc += ": "
        super().__init__(loc + message)
        self.path = path
        self.line = line


class IntegrityViolationsError(SpeechFrameError):
    def __init__(self, violations: list[Violation]):
        shown = "\n  ".join(str(v) for v in violations[:20])
        more = f"\n  ... {len(violations) - 20} more" if len(violations) > 20 else ""
        super().__init__(f"{len(violations)} integrity violation(s):\n  {shown}{more}")
        self.violations = violations


class UnknownTableError(SpeechFrameError, LookupError):
    pass


class DuplicateKeyError(SpeechFrameError, ValueError):
    def __init__(self, table: str, key: tuple):
        super().__init__(f"{table}: duplicate key {key!r}")
        self.table = table
        self.key = key


class DanglingForeignKeyError(SpeechFrameError, ValueError):
    def __init__(self, table: str, edge: str, value: Any):
        super().__init__(f"{table}: {edge} does not resolve (value {value!r})")
        self.table = table
        self.edge = edge
        self.value = value


class TypeMismatchError(SpeechFrameError, TypeError):
    pass


class NotFoundError(SpeechFrameError, LookupError):
    def __init__(self, table: str, key: tuple):
        super().__init__(f"{table}: no row with key {key!r}")
        self.table = table
        self.key = key


class RestrictedError(SpeechFrameError):
    def __init__(self, table: str, key: tuple, referrers: list[tuple[str, tuple, str]]):
        first = ", ".join(f"{t}{k} via {e}" for t, k, e in referrers[:5])
        super().__init__(
            f"{table}{key!r} is still referenced ({len(referrers)} row(s), e.g. {first})"
        )
        self.table = table
        self.key = key
        self.referrers = referrers


class KeyCollisionError(SpeechFrameError, ValueError):
    pass


# corpus

class NegativeIntervalError(SpeechFrameError, ValueError):
    pass


class UnknownSignalError(SpeechFrameError, LookupError):
    def __init__(self, file_name: str):
        super().__init__(f"unknown speech signal {file_name!r}")
        self.file_name = file_name


class InvalidSegmentationError(SpeechFrameError, ValueError):
    def __init__(self, file_name: str, report: list[Violation]):
        super().__init__(
            f"segmentation of {file_name!r} is invalid: "
            + "; ".join(v.message for v in report)
        )
        self.file_name = file_name
        self.report = report


class NoSegmentsError(SpeechFrameError, ValueError):
    pass


class MissingVariantError(SpeechFrameError, LookupError):
    pass


class DomainError(SpeechFrameError, ValueError):
    """A record is well-typed but breaks a domain rule."""


# query

class UnknownAttributeError(SpeechFrameError, LookupError):
    def __init__(self, attribute: str, known: list[str] | None = None):
        msg = f"unknown search attribute {attribute!r}"
        if known:
            msg += "; searchable attributes: " + ", ".join(known)
        super().__init__(msg)
        self.attribute = attribute
        self.known = known or []


class CriterionTypeError(SpeechFrameError, TypeError):
    pass


class PathNotEmptyError(SpeechFrameError):
    pass
