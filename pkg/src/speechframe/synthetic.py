"""Generated corpora for demos and tests.

The real recordings are not distributable, so these builders produce
corpora with the same shape: a fixture sized like the original corpus,
with fixed totals, and randomized corpora for property tests.
"""

from __future__ import annotations

import datetime as dt
import random

from . import refbooks as rb
from .alphabet import parse_alphabet_lines, russian_alphabet_text
from .corpus import (
    MANUAL,
    Speaker,
    SpeechSignal,
    SpeechUnit,
    add_segmentation,
    add_signal,
    add_speaker,
    add_speech_unit,
)
from .refbooks import FileFormat, NoiseProfile, RecordingDevice
from .store import CorpusHandle, new_corpus

REFERENCE_SPEAKERS_MALE = 49
REFERENCE_SPEAKERS_FEMALE = 144
REFERENCE_SIGNALS = 124
REFERENCE_TOTAL_SECONDS = 842
REFERENCE_SEGMENTED = 103


def _extended_registry() -> rb.ReferenceRegistry:
    reg = rb.seed_default_registry()
    for title in ("joy", "anger", "sadness"):
        reg.add_entry("BOOK_EMOTIONS", title)
    for title in ("dysarthria", "laryngeal cancer"):
        reg.add_entry("SICKNESS", title)
    for title in ("lisp", "rhotacism"):
        reg.add_entry("BOOK_DEFECTS", title)
    for title in ("telephone", "VoIP"):
        reg.add_entry("COMMUNICATION_CHANNEL", title)
    for title in ("read", "spontaneous"):
        reg.add_entry("BOOK_SPEECH_TYPES", title)
    reg.add_entry("FILE_FORMAT", FileFormat(None, 16000.0, 16, "wav", 1))
    reg.add_entry("FILE_FORMAT", FileFormat(None, 44100.0, 16, "wav", 2))
    reg.add_entry("RECORDING_DEVICE", RecordingDevice(None, "microphone", 20000.0))
    reg.add_entry("RECORDING_DEVICE", RecordingDevice(None, "mobile phone", 3400.0))
    reg.add_entry("NOISE", NoiseProfile(None, "white noise", 10.0))
    reg.add_entry("NOISE", NoiseProfile(None, "babble", 5.0))
    return reg


def _alphabet_records() -> list[dict]:
    return parse_alphabet_lines(russian_alphabet_text().splitlines())


def _pick(rng: random.Random, codes: list, nullable: bool = True):
    if nullable and rng.random() < 0.2:
        return None
    return rng.choice(codes)


def _random_signal(rng: random.Random, reg: rb.ReferenceRegistry, name: str,
                   unit: int, speaker: int, length: float) -> SpeechSignal:
    codes = lambda book: reg.book(book).codes()  # noqa: E731
    return SpeechSignal(
        file_name=name,
        speech_unit=unit,
        length=length,
        speaker=speaker,
        record_date=dt.date(2019, 1, 1) + dt.timedelta(days=rng.randrange(1095)),
        file_format=_pick(rng, codes("FILE_FORMAT")),
        noise=rng.choice(codes("NOISE")),
        recording_device=_pick(rng, codes("RECORDING_DEVICE")),
        dialect=_pick(rng, codes("BOOK_DIALECTS")),
        acoustic_environment=_pick(rng, codes("ACOUSTIC_ENVIRONMENT")),
        speech_type=_pick(rng, codes("BOOK_SPEECH_TYPES")),
        voice_type=_pick(rng, codes("BOOK_VOICE_TYPES")),
        speech_tempo=_pick(rng, codes("BOOK_SPEECH_TEMPS")),
        channel=_pick(rng, codes("COMMUNICATION_CHANNEL")),
        sickness=_pick(rng, codes("SICKNESS"), nullable=False) if rng.random() < 0.3 else None,
        speech_defect=_pick(rng, codes("BOOK_DEFECTS"), nullable=False) if rng.random() < 0.3 else None,
        emotional_state=_pick(rng, codes("BOOK_EMOTIONS")),
        accent=rng.random() < 0.3,
    )


def _random_birth(rng: random.Random) -> dt.date:
    return dt.date(1940, 1, 1) + dt.timedelta(days=rng.randrange(365 * 65))


def random_corpus(
    seed: int | random.Random = 0,
    n_speakers: int = 20,
    n_units: int = 10,
    n_signals: int = 40,
    segment_fraction: float = 0.5,
    root=None,
) -> CorpusHandle:
    """A corpus with random descriptors; every row satisfies the domain rules."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    reg = _extended_registry()
    h = new_corpus(root, registry=reg, alphabet_records=_alphabet_records())
    symbols = h.alphabet().symbols
    for i in range(1, n_speakers + 1):
        add_speaker(h, Speaker(i, rng.choice([rb.SEX_MALE, rb.SEX_FEMALE]),
                               f"name{i}", f"surname{i}", None,
                               _random_birth(rng) if rng.random() < 0.9 else None))
    for i in range(1, n_units + 1):
        tr = tuple(rng.choice(symbols) for _ in range(rng.randint(1, 6)))
        add_speech_unit(h, SpeechUnit(i, f"unit{i}", tr, rng.choice(reg.book("BOOK_UNIT_TYPES").codes())))
    for i in range(n_signals):
        length = round(rng.uniform(0.5, 10.0), 3)
        sig = _random_signal(rng, reg, f"sig{i:04d}.wav", rng.randint(1, n_units),
                             rng.randint(1, n_speakers), length)
        add_signal(h, sig)
        if rng.random() < segment_fraction:
            n = rng.randint(1, 8)
            starts = sorted(rng.sample(range(0, int(length * 1000)), n))
            segs = [(rng.choice(symbols), s / 1000) for s in starts]
            add_segmentation(h, sig.file_name, segs, MANUAL, expert_count=rng.choice([1, 2, 3]))
    return h


def _split_total(rng: random.Random, total_ms: int, parts: int, minimum_ms: int) -> list[int]:
    spare = total_ms - parts * minimum_ms
    cuts = sorted(rng.randrange(spare + 1) for _ in range(parts - 1))
    bounds = [0] + cuts + [spare]
    return [minimum_ms + b - a for a, b in zip(bounds, bounds[1:])]


def reference_corpus(seed: int = 0, root=None) -> CorpusHandle:
    """193 speakers (49 male), 77 sound units, 124 signals totalling 842 s, 103 segmented.

    Every alphabet symbol occurs at least three times in the manual
    segmentation and every segmented signal records two expert checks.
    """
    rng = random.Random(seed)
    reg = _extended_registry()
    h = new_corpus(root, registry=reg, alphabet_records=_alphabet_records())
    symbols = h.alphabet().symbols

    sexes = [rb.SEX_MALE] * REFERENCE_SPEAKERS_MALE + [rb.SEX_FEMALE] * REFERENCE_SPEAKERS_FEMALE
    rng.shuffle(sexes)
    for i, sex in enumerate(sexes, start=1):
        add_speaker(h, Speaker(i, sex, f"name{i}", f"surname{i}", f"patronymic{i}", _random_birth(rng)))

    # one single-sound unit per alphabet symbol
    for i, sym in enumerate(symbols, start=1):
        add_speech_unit(h, SpeechUnit(i, sym, (sym,), rb.UNIT_SOUND))

    lengths_ms = _split_total(rng, REFERENCE_TOTAL_SECONDS * 1000, REFERENCE_SIGNALS, 3000)
    names = []
    for i, ms in enumerate(lengths_ms):
        name = f"signal{i:03d}.wav"
        names.append(name)
        add_signal(h, _random_signal(rng, reg, name, rng.randint(1, len(symbols)),
                                     rng.randint(1, len(sexes)), ms / 1000))

    segmented = names[:REFERENCE_SEGMENTED]
    per_signal = [rng.randint(3, 6) for _ in segmented]
    pool = symbols * 3
    pool += [rng.choice(symbols) for _ in range(sum(per_signal) - len(pool))]
    rng.shuffle(pool)
    at = 0
    for name, n, ms in zip(segmented, per_signal, lengths_ms):
        starts = [(k * ms // n) / 1000 for k in range(n)]
        add_segmentation(h, name, list(zip(pool[at:at + n], starts)), MANUAL, expert_count=2)
        at += n
    return h
