"""Synthetic training data for word- and sentence-level MT quality estimation."""

from qesynth.align import (
    BAD,
    OK,
    EditOp,
    EditScript,
    TagSequence,
    bad_fraction,
    edit_distance_align,
    hter,
    tags_from_script,
)
from qesynth.corpus import (
    BitextPair,
    QEDataset,
    StatsReport,
    corpus_stats,
    filter_by_margin,
    parse_bitext,
    read_dataset,
    subsample,
    tokenize,
    write_dataset,
)
from qesynth.synth import (
    CorruptionConfig,
    MaskedDraft,
    QEExample,
    corrupt,
    sample_span_length,
    synth_by_rewriting,
    synth_from_hypotheses,
)

__version__ = "0.1.0"

__all__ = [
    "BAD",
    "OK",
    "BitextPair",
    "CorruptionConfig",
    "EditOp",
    "EditScript",
    "MaskedDraft",
    "QEDataset",
    "QEExample",
    "StatsReport",
    "TagSequence",
    "bad_fraction",
    "corpus_stats",
    "corrupt",
    "edit_distance_align",
    "filter_by_margin",
    "hter",
    "parse_bitext",
    "read_dataset",
    "sample_span_length",
    "subsample",
    "synth_by_rewriting",
    "synth_from_hypotheses",
    "tags_from_script",
    "tokenize",
    "write_dataset",
]
