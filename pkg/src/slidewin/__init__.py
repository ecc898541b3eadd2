"""Sliding-window retranslation toolkit for unsegmented speech-translation input."""

from slidewin.textnorm import NormalizationConfig, detokenize, normalize_source, tokenize
from slidewin.align_windows import (
    AlignmentLink,
    CollapsedCorpus,
    WindowPair,
    WindowSpan,
    collapse_corpus,
    emit_training_pairs,
    extract_windows,
    parse_alignment_line,
)
from slidewin.merge import (
    MatchResult,
    MergeParams,
    MergeStats,
    longest_common_substring,
    merge_with_backoff,
    splice,
)
from slidewin.translators import TranslationRequest, TranslatorSpec, build_translator, translate
from slidewin.simulate import (
    Document,
    LogEntry,
    RevisionLog,
    SimulationConfig,
    apply_mask,
    run_offline,
    run_online,
)
from slidewin.metrics import (
    FlickerReport,
    SweepCell,
    average_match_ratio,
    count_extra_retranslations,
    normalized_erasure,
    sweep,
)

__version__ = "0.1.0"
