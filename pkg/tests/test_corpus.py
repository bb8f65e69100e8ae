import datetime as dt
import io

import pytest
from hypothesis import given, settings, strategies as st

from speechframe import refbooks as rb
from speechframe.alphabet import load_russian_alphabet
from speechframe.corpus import (
    AUTOMATIC,
    MANUAL,
    SegmentationRecord,
    Speaker,
    SpeechSignal,
    SpeechUnit,
    add_segment,
    add_segmentation,
    add_signal,
    add_speaker,
    add_speech_unit,
    compare_segmentations,
    estimate_tempo,
    expert_check_report,
    export_segmentation,
    segment_intervals,
    speaker_age,
    symbol_coverage,
    validate_segmentation,
)
from speechframe.errors import (
    DomainError,
    InvalidSegmentationError,
    MissingVariantError,
    NegativeIntervalError,
    NoSegmentsError,
    UnknownSignalError,
    UnknownSymbolError,
)
from speechframe.store import new_corpus
from speechframe.synthetic import random_corpus

from conftest import alphabet_records, make_corpus


def raw_segments(h, name, rows, source=MANUAL):
    # bypass add_segmentation so malformed runs can be planted
    for pos, start, sym in rows:
        add_segment(h, SegmentationRecord(pos, name, start, sym, source))


class TestSpeakerAge:
    def test_before_birthday(self):
        assert speaker_age(dt.date(2000, 3, 1), dt.date(2020, 2, 29)) == 19

    def test_on_birthday(self):
        assert speaker_age(dt.date(2000, 3, 1), dt.date(2020, 3, 1)) == 20

    def test_negative(self):
        with pytest.raises(NegativeIntervalError):
            speaker_age(dt.date(2000, 3, 1), dt.date(1999, 1, 1))

    @given(st.dates(dt.date(1900, 1, 1), dt.date(2050, 1, 1)), st.integers(0, 20000), st.integers(0, 800))
    def test_monotone(self, birth, d1, d2):
        a = birth + dt.timedelta(days=d1)
        b = a + dt.timedelta(days=d2)
        assert speaker_age(birth, a) <= speaker_age(birth, b)

    @given(st.dates(dt.date(1900, 1, 1), dt.date(2000, 1, 1)), st.integers(1, 90))
    def test_steps_by_one_across_birthdays(self, birth, years):
        if (birth.month, birth.day) == (2, 29):
            birth = birth.replace(day=28)
        bday = birth.replace(year=birth.year + years)
        assert speaker_age(birth, bday) == years
        assert speaker_age(birth, bday - dt.timedelta(days=1)) == years - 1


class TestDomainInserts:
    def test_future_birth_date(self, tiny):
        with pytest.raises(DomainError):
            add_speaker(tiny, Speaker(9, rb.SEX_MALE, birth_date=dt.date(2999, 1, 1)))

    def test_transcription_must_tokenize(self, tiny):
        with pytest.raises(UnknownSymbolError):
            add_speech_unit(tiny, SpeechUnit(2, "x", ("d", "zz"), rb.UNIT_SOUND))

    def test_non_positive_length(self, tiny):
        with pytest.raises(DomainError):
            add_signal(tiny, SpeechSignal("z.wav", 1, 0.0, 1))

    def test_bad_source(self, tiny):
        with pytest.raises(DomainError):
            add_segment(tiny, SegmentationRecord(1, "s0.wav", 0.0, "d", source="guess"))

    def test_noise_defaults_to_zero(self):
        assert SpeechSignal("a", 1, 1.0, 1).noise == rb.NO_NOISE


class TestValidateSegmentation:
    def test_unsegmented_is_valid(self, tiny):
        assert validate_segmentation(tiny, "s0.wav", MANUAL) == []

    def test_valid_run(self, tiny):
        add_segmentation(tiny, "s0.wav", [("d", 0.0), ("a1", 0.2), ("#", 0.7)])
        assert validate_segmentation(tiny, "s0.wav") == []

    def test_position_gap(self, tiny):
        raw_segments(tiny, "s0.wav", [(1, 0.0, "d"), (2, 0.2, "a1"), (4, 0.5, "t")])
        [v] = validate_segmentation(tiny, "s0.wav")
        assert v.kind == "position-gap" and v.message == "position gap after 2"

    def test_non_monotonic(self, tiny):
        raw_segments(tiny, "s0.wav", [(1, 0.0, "d"), (2, 0.5, "a1"), (3, 0.4, "t")])
        [v] = validate_segmentation(tiny, "s0.wav")
        assert v.kind == "non-monotonic" and v.message == "non-monotonic start at position 3"

    def test_start_beyond_length(self, tiny):
        raw_segments(tiny, "s0.wav", [(1, 0.0, "d"), (2, 1.0, "a1")])
        [v] = validate_segmentation(tiny, "s0.wav")
        assert v.kind == "start-out-of-range"

    def test_unknown_symbol(self, tiny):
        # symbol present in CLASS but absent from the alphabet passed in
        raw_segments(tiny, "s0.wav", [(1, 0.0, "d"), (2, 0.5, "a1")])
        alpha = load_russian_alphabet()
        from speechframe.alphabet import Alphabet

        reduced = Alphabet(tuple(u for u in alpha if u.symbol != "a1"))
        [v] = validate_segmentation(tiny, "s0.wav", alphabet=reduced)
        assert v.kind == "unknown-symbol"

    def test_positions_must_start_at_one(self, tiny):
        raw_segments(tiny, "s0.wav", [(2, 0.0, "d")])
        assert [v.kind for v in validate_segmentation(tiny, "s0.wav")] == ["position-gap"]

    def test_unknown_signal(self, tiny):
        with pytest.raises(UnknownSignalError):
            validate_segmentation(tiny, "nope.wav")


class TestIntervals:
    def test_two_segments(self, tiny):
        add_segmentation(tiny, "s0.wav", [("d", 0.0), ("a1", 0.4)])
        assert segment_intervals(tiny, "s0.wav") == [("d", 0.0, 0.4), ("a1", 0.4, 1.0)]

    def test_single_segment(self):
        h = make_corpus(length=2.0)
        add_segmentation(h, "s0.wav", [("d", 0.0)])
        assert segment_intervals(h, "s0.wav") == [("d", 0.0, 2.0)]

    def test_empty(self, tiny):
        assert segment_intervals(tiny, "s0.wav") == []

    def test_invalid(self, tiny):
        raw_segments(tiny, "s0.wav", [(1, 0.3, "d"), (2, 0.2, "a1")])
        with pytest.raises(InvalidSegmentationError):
            segment_intervals(tiny, "s0.wav")

    @settings(max_examples=60)
    @given(st.data())
    def test_tiling(self, data):
        length = data.draw(st.floats(0.1, 30.0))
        starts = data.draw(st.lists(st.floats(0.0, length, exclude_max=True), min_size=1,
                                    max_size=20, unique=True))
        starts.sort()
        h = make_corpus(length=length)
        add_segmentation(h, "s0.wav", [("d", s) for s in starts])
        iv = segment_intervals(h, "s0.wav")
        assert iv[0][1] == starts[0] and iv[-1][2] == length
        for (_, s0, e0), (_, s1, _) in zip(iv, iv[1:]):
            assert e0 == s1
        assert all(s < e for _, s, e in iv)


def brute_coverage(h, alphabet, source=MANUAL):
    counts = {}
    for sym in alphabet.symbols:
        n = 0
        for rec in h.tables["SEGMENTATION"].values():
            if rec["SOURCE"] == source and rec["TYPE_ID"] == sym:
                n += 1
        counts[sym] = n
    return counts


class TestCoverage:
    def test_symbol_seen_twice(self, tiny, russian):
        add_segmentation(tiny, "s0.wav", [("t", 0.0), ("a1", 0.1), ("t", 0.2)])
        cov = symbol_coverage(tiny, russian)
        assert cov.counts["t"] == 2 and "t" in cov.under_covered

    def test_empty_corpus(self, russian):
        h = new_corpus(alphabet_records=alphabet_records())
        cov = symbol_coverage(h, russian)
        assert len(cov.under_covered) == 77 and set(cov.counts.values()) == {0}

    def test_every_symbol_three_times(self, russian):
        h = make_corpus(n_signals=3, length=100.0)
        syms = russian.symbols
        for i in range(3):
            add_segmentation(h, f"s{i}.wav", [(s, k * 1.0) for k, s in enumerate(syms)])
        cov = symbol_coverage(h, russian)
        assert cov.counts == brute_coverage(h, russian)
        assert cov.under_covered == []

    def test_automatic_rows_ignored(self, tiny, russian):
        add_segmentation(tiny, "s0.wav", [("t", 0.0)], source=AUTOMATIC)
        assert symbol_coverage(tiny, russian).counts["t"] == 0

    @pytest.mark.parametrize("seed", range(5))
    def test_random_matches_brute_force(self, seed, russian):
        h = random_corpus(seed, n_signals=60, segment_fraction=0.8)
        cov = symbol_coverage(h, russian)
        brute = brute_coverage(h, russian)
        assert cov.counts == brute
        assert set(cov.under_covered) == {s for s, n in brute.items() if n < 3}


class TestExperts:
    def test_threshold(self):
        h = make_corpus(n_signals=2)
        add_segmentation(h, "s0.wav", [("d", 0.0)], expert_count=2)
        add_segmentation(h, "s1.wav", [("d", 0.0)], expert_count=1)
        assert expert_check_report(h) == [("s1.wav", 1)]

    def test_unrecorded_count(self, tiny):
        add_segmentation(tiny, "s0.wav", [("d", 0.0)])
        assert expert_check_report(tiny) == [("s0.wav", None)]

    def test_no_manual(self, tiny):
        add_segmentation(tiny, "s0.wav", [("d", 0.0)], source=AUTOMATIC)
        assert expert_check_report(tiny) == []


class TestTempo:
    def _with_segments(self, n, length, pauses=0):
        h = make_corpus(length=length)
        syms = ["d"] * n + ["#"] * pauses
        step = length / len(syms)
        add_segmentation(h, "s0.wav", [(s, i * step) for i, s in enumerate(syms)])
        return h

    def test_normal_boundary(self):
        rate, tempo = estimate_tempo(self._with_segments(20, 2.5), "s0.wav")
        assert rate == 8.0 and tempo.name == "normal"

    def test_fast(self):
        rate, tempo = estimate_tempo(self._with_segments(26, 2.0), "s0.wav")
        assert rate == 13.0 and tempo.name == "fast"

    def test_pauses_excluded(self):
        rate, _ = estimate_tempo(self._with_segments(20, 2.5, pauses=5), "s0.wav")
        assert rate == 8.0

    def test_no_segments(self, tiny):
        with pytest.raises(NoSegmentsError):
            estimate_tempo(tiny, "s0.wav")

    def test_adding_segments_never_slows_band(self):
        order = {"normal": 0, "accelerated": 1, "fast": 2}
        bands = [order[estimate_tempo(self._with_segments(n, 2.0), "s0.wav")[1].name] for n in range(1, 40)]
        assert bands == sorted(bands)


class TestCompare:
    def test_identical(self, tiny):
        segs = [("d", 0.0), ("a1", 0.3), ("#", 0.6)]
        add_segmentation(tiny, "s0.wav", segs, MANUAL)
        add_segmentation(tiny, "s0.wav", segs, AUTOMATIC)
        r = compare_segmentations(tiny, "s0.wav", 0.0)
        assert r.symbol_agreement == 1.0 and r.max_abs_delta == 0.0 and not r.count_mismatch

    def test_shifted_within_tolerance(self, tiny):
        add_segmentation(tiny, "s0.wav", [("d", 0.0), ("a1", 0.3), ("#", 0.6)], MANUAL)
        add_segmentation(tiny, "s0.wav", [("d", 0.01), ("a1", 0.31), ("#", 0.61)], AUTOMATIC)
        r = compare_segmentations(tiny, "s0.wav", 0.02)
        assert r.within_tolerance == 1.0
        assert r.max_abs_delta == pytest.approx(0.01)

    def test_count_mismatch(self, tiny):
        add_segmentation(tiny, "s0.wav", [("d", 0.0), ("a1", 0.3)], MANUAL)
        add_segmentation(tiny, "s0.wav", [("d", 0.0), ("o1", 0.2), ("#", 0.5)], AUTOMATIC)
        r = compare_segmentations(tiny, "s0.wav", 0.05)
        assert r.count_mismatch and r.symbol_match == [True, False]

    def test_missing_automatic(self, tiny):
        add_segmentation(tiny, "s0.wav", [("d", 0.0)], MANUAL)
        with pytest.raises(MissingVariantError):
            compare_segmentations(tiny, "s0.wav", 0.02)


class TestExport:
    def test_columns_and_rows(self, tiny):
        add_segmentation(tiny, "s0.wav", [("d", 0.0), ("a1", 0.25)])
        buf = io.StringIO()
        assert export_segmentation(tiny, "s0.wav", buf) == 2
        assert buf.getvalue().splitlines() == [
            "POSITION\tSTART_AUDIO\tSYMBOL\tSOURCE",
            "1\t0.0\td\tmanual",
            "2\t0.25\ta1\tmanual",
        ]

    def test_unsegmented(self, tiny):
        buf = io.StringIO()
        export_segmentation(tiny, "s0.wav", buf)
        assert buf.getvalue() == "POSITION\tSTART_AUDIO\tSYMBOL\tSOURCE\n"
