"""Speech corpus management: reference books, sound-unit alphabet, keyed storage,
segmentation checks and staged search."""

from .alphabet import (
    Alphabet,
    SoundUnitClass,
    StressContext,
    StressKind,
    SyllablePosition,
    classify_tempo,
    load_alphabet,
    load_russian_alphabet,
    potebnya_strength,
    render_transcription,
    stress_variant,
    tokenize_transcription,
    validate_class,
)
from .query import (
    CorpusStatistics,
    FilterCriterion,
    Range,
    corpus_stats,
    count_by,
    list_canned_queries,
    parse_criterion,
    staged_search,
)
from .refbooks import RefEntry, ReferenceRegistry, seed_default_registry
from .store import (
    CorpusHandle,
    delete_cascade,
    init_corpus,
    insert,
    integrity_check,
    new_corpus,
    open_corpus,
    save_corpus,
    update_key_cascade,
)

__version__ = "0.1.0"
