import datetime as dt

import pytest

from speechframe import refbooks as rb
from speechframe.alphabet import load_russian_alphabet, parse_alphabet_lines, russian_alphabet_text
from speechframe.corpus import Speaker, SpeechSignal, SpeechUnit, add_signal, add_speaker, add_speech_unit
from speechframe.store import new_corpus


@pytest.fixture
def registry():
    return rb.seed_default_registry()


@pytest.fixture(scope="session")
def russian():
    return load_russian_alphabet()


def alphabet_records():
    return parse_alphabet_lines(russian_alphabet_text().splitlines())


def make_corpus(n_signals=1, length=1.0):
    """Seeded corpus with the Russian alphabet, one speaker, one unit and a few signals."""
    h = new_corpus(alphabet_records=alphabet_records())
    add_speaker(h, Speaker(1, rb.SEX_FEMALE, "Anna", "Ivanova", None, dt.date(1990, 5, 17)))
    add_speech_unit(h, SpeechUnit(1, "да", ("d", "a1"), rb.UNIT_SYLLABLE))
    for i in range(n_signals):
        add_signal(h, SpeechSignal(f"s{i}.wav", 1, length, 1, record_date=dt.date(2020, 6, 1)))
    return h


@pytest.fixture
def tiny():
    return make_corpus()


# acceptance reporting: one line per criterion at the end of the run
ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    number, title = mark.args
    ACCEPTANCE[number] = (title, report.passed, report.duration)
    print(f"\ncriterion {number:2d} {'PASS' if report.passed else 'FAIL'}  {title} ({report.duration:.2f} s)")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, duration = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {title} ({duration:.2f} s)"
        )
