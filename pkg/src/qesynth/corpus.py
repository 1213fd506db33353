"""Bitext ingestion, tokenization, QE dataset files and summary statistics."""

from __future__ import annotations

import json
import logging
import math
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, TextIO

import numpy as np

from qesynth.align import BAD, TAG_VALUES, TagSequence
from qesynth.records import QEDataset, QEExample

logger = logging.getLogger(__name__)

DEFAULT_MARGIN_THRESHOLD = 1.06
PROFILES = ("space-delimited", "cjk", "pretokenized")
BITEXT_FORMATS = ("tsv", "jsonl")
DATASET_SUFFIXES = ("src", "mt", "pe", "tags", "hter")


class FormatError(ValueError):
    """Malformed input; carries the file (if known) and 1-based line number."""

    def __init__(self, message: str, line: Optional[int] = None, path=None):
        self.line = line
        self.path = None if path is None else str(path)
        where = []
        if self.path:
            where.append(self.path)
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


@dataclass(frozen=True)
class BitextPair:
    source: tuple[str, ...]
    target: tuple[str, ...]
    margin_score: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        if not self.source or not self.target:
            raise ValueError("source and target must be non-empty")
        if self.margin_score is not None and not math.isfinite(self.margin_score):
            raise ValueError(f"margin score must be finite, got {self.margin_score}")


@dataclass(frozen=True)
class FilterSummary:
    total: int
    retained: int
    unscored: int

    def __str__(self):
        return (
            f"{self.retained} of {self.total} retained "
            f"({self.unscored} unscored excluded)"
        )


@dataclass(frozen=True)
class StatsReport:
    size: int
    mt_bad_pct: float
    gap_bad_pct: float
    # raw counts make reports from different datasets mergeable
    word_tags: int = 0
    word_bad: int = 0
    gap_tags: int = 0
    gap_bad: int = 0

    def as_row(self, label: str = "") -> str:
        return f"{label:<12}{self.size:>10d}{self.mt_bad_pct:>12.1f}{self.gap_bad_pct:>12.1f}"

    def to_text(self, label: str = "data") -> str:
        header = f"{'':<12}{'size':>10}{'MT bad (%)':>12}{'Gap bad (%)':>12}"
        return header + "\n" + self.as_row(label)

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "mt_bad_pct": round(self.mt_bad_pct, 1),
            "gap_bad_pct": round(self.gap_bad_pct, 1),
        }


# -- tokenization -----------------------------------------------------------

_CJK_RANGES = (
    "ᄀ-ᇿ"  # Hangul Jamo
    "⺀-⿟"  # CJK radicals
    "぀-ヿ"  # Hiragana, Katakana
    "㄰-㆏"  # Hangul compatibility Jamo
    "ㇰ-ㇿ"
    "㐀-䶿"
    "一-鿿"
    "가-힯"  # Hangul syllables
    "豈-﫿"
    "ｦ-ﾟ"  # halfwidth Katakana
    "\U00020000-\U0002fa1f"
)
_CJK_TOKEN = re.compile(
    rf"[{_CJK_RANGES}]|[^\W_{_CJK_RANGES}]+|\S", re.UNICODE
)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _split_punct(chunk: str) -> list[str]:
    if all(_is_punct(c) for c in chunk):
        return [chunk]
    start, end = 0, len(chunk)
    while _is_punct(chunk[start]):
        start += 1
    while _is_punct(chunk[end - 1]):
        end -= 1
    return list(chunk[:start]) + [chunk[start:end]] + list(chunk[end:])


def tokenize(text: str, profile: str = "pretokenized") -> list[str]:
    """Split ``text`` into tokens using one of the built-in profiles.

    ``space-delimited`` splits on whitespace and detaches leading/trailing
    punctuation; ``cjk`` emits one token per Han/Kana/Hangul character and
    keeps Latin/digit runs together; ``pretokenized`` only splits on
    whitespace.

    >>> tokenize("Hello world.", "space-delimited")
    ['Hello', 'world', '.']
    >>> tokenize("你好ABC", "cjk")
    ['你', '好', 'ABC']
    """
    if not text or not text.strip():
        raise ValueError("cannot tokenize empty text")
    if profile == "pretokenized":
        return text.split()
    if profile == "space-delimited":
        return [t for chunk in text.split() for t in _split_punct(chunk)]
    if profile == "cjk":
        return _CJK_TOKEN.findall(text)
    raise ValueError(f"unknown tokenizer profile {profile!r}; choose from {PROFILES}")


# -- bitext -------------------------------------------------------------------

def _parse_score(raw: str, lineno: int) -> Optional[float]:
    raw = raw.strip()
    if not raw:
        return None
    try:
        score = float(raw)
    except ValueError:
        raise FormatError(f"non-numeric score {raw!r}", lineno) from None
    if not math.isfinite(score):
        raise FormatError(f"non-finite score {raw!r}", lineno)
    return score


def _lines(stream: TextIO) -> Iterable[tuple[int, str]]:
    lineno = 0
    try:
        for lineno, line in enumerate(stream, 1):
            yield lineno, line.rstrip("\n").rstrip("\r")
    except UnicodeDecodeError as exc:
        raise FormatError(f"invalid UTF-8 ({exc.reason})", lineno + 1) from None


def parse_bitext(
    stream: TextIO,
    format: str = "tsv",
    profile: str = "pretokenized",
    source_profile: Optional[str] = None,
    rejects: Optional[list] = None,
) -> list[BitextPair]:
    """Read ``source<TAB>target[<TAB>score]`` records (or JSON lines).

    Malformed records raise :class:`FormatError` naming the line. If a
    ``rejects`` list is passed, the errors are appended to it instead and the
    records skipped.
    """
    if format not in BITEXT_FORMATS:
        raise ValueError(f"unknown bitext format {format!r}")
    source_profile = source_profile or profile
    pairs = []
    for lineno, line in _lines(stream):
        try:
            pairs.append(_parse_record(line, lineno, format, profile, source_profile))
        except FormatError as exc:
            if rejects is None:
                raise
            rejects.append(exc)
    return pairs


def _parse_record(line, lineno, format, profile, source_profile) -> BitextPair:
    if format == "tsv":
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise FormatError(f"expected 2 or 3 tab-separated fields, got {len(fields)}", lineno)
        src, tgt = fields[0], fields[1]
        score = _parse_score(fields[2], lineno) if len(fields) == 3 else None
    else:
        try:
            obj = json.loads(line)
            src, tgt = obj["source"], obj["target"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise FormatError(f"bad JSON record ({exc})", lineno) from None
        raw = obj.get("score")
        score = None if raw is None else _parse_score(str(raw), lineno)
    if not src.strip():
        raise FormatError("empty source", lineno)
    if not tgt.strip():
        raise FormatError("empty target", lineno)
    return BitextPair(tokenize(src, source_profile), tokenize(tgt, profile), score)


def write_bitext(pairs: Iterable[BitextPair], stream: TextIO) -> None:
    for p in pairs:
        fields = [" ".join(p.source), " ".join(p.target)]
        if p.margin_score is not None:
            fields.append(repr(p.margin_score))
        stream.write("\t".join(fields) + "\n")


def filter_with_summary(
    pairs: Iterable[BitextPair], threshold: float = DEFAULT_MARGIN_THRESHOLD
) -> tuple[list[BitextPair], FilterSummary]:
    if not math.isfinite(threshold):
        raise ValueError(f"threshold must be finite, got {threshold}")
    kept, total, unscored = [], 0, 0
    for p in pairs:
        total += 1
        if p.margin_score is None:
            unscored += 1
        elif p.margin_score >= threshold:
            kept.append(p)
    return kept, FilterSummary(total, len(kept), unscored)


def filter_by_margin(
    pairs: Iterable[BitextPair], threshold: float = DEFAULT_MARGIN_THRESHOLD
) -> list[BitextPair]:
    """Keep scored pairs with ``margin_score >= threshold``; unscored pairs are dropped."""
    kept, summary = filter_with_summary(pairs, threshold)
    if summary.unscored:
        logger.info("filter: %s", summary)
    return kept


def read_tokenized_lines(path, what: str = "hypothesis") -> list[list[str]]:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in _lines(f):
            toks = line.split()
            if not toks:
                raise FormatError(f"empty {what}", lineno, path)
            out.append(toks)
    return out


# -- QE dataset files ------------------------------------------------------------

def format_score(x: float) -> str:
    return f"{x:.6f}"


def dataset_paths(directory, split: str = "train") -> dict[str, Path]:
    d = Path(directory)
    paths = {suffix: d / f"{split}.{suffix}" for suffix in DATASET_SUFFIXES}
    paths["meta"] = d / f"{split}.meta.jsonl"
    return paths


def write_dataset(dataset: QEDataset, directory, split: str = "train") -> dict[str, Path]:
    """Write the parallel ``.src/.mt/.pe/.tags/.hter`` files plus a JSON-lines sidecar."""
    paths = dataset_paths(directory, split)
    Path(directory).mkdir(parents=True, exist_ok=True)
    columns = {suffix: [] for suffix in DATASET_SUFFIXES}
    meta = []
    for i, rec in enumerate(dataset.records):
        columns["src"].append(" ".join(rec.source))
        columns["mt"].append(" ".join(rec.hypothesis))
        columns["pe"].append(" ".join(rec.pseudo_post_edit))
        columns["tags"].append(" ".join(rec.tags.interleaved()))
        columns["hter"].append(format_score(rec.sentence_score))
        meta.append(
            json.dumps(
                {
                    "index": i,
                    "route": rec.route,
                    "provenance": dataset.provenance,
                    "scoring": dataset.scoring,
                    "seed": dataset.seed,
                    "config": dataset.config,
                },
                sort_keys=True,
                ensure_ascii=False,
            )
        )
    columns["meta"] = meta
    for key, lines in columns.items():
        with open(paths[key], "w", encoding="utf-8", newline="\n") as f:
            f.writelines(line + "\n" for line in lines)
    return paths


def _guess_split(directory: Path) -> str:
    found = sorted(p.stem for p in directory.glob("*.src"))
    if len(found) != 1:
        raise FileNotFoundError(
            f"{directory}: expected exactly one *.src file, found {found or 'none'}; pass split="
        )
    return found[0]


def _read_column(path: Path) -> list[str]:
    with open(path, encoding="utf-8") as f:
        return [line for _, line in _lines(f)]


def read_dataset(directory, split: Optional[str] = None) -> QEDataset:
    """Load a dataset written by :func:`write_dataset` (``.pe`` and sidecar optional)."""
    directory = Path(directory)
    split = split or _guess_split(directory)
    paths = dataset_paths(directory, split)
    required = ("src", "mt", "tags", "hter")
    for key in required:
        if not paths[key].exists():
            raise FileNotFoundError(f"missing dataset file {paths[key]}")
    cols = {key: _read_column(paths[key]) for key in required}
    n = len(cols["src"])
    for key, lines in cols.items():
        if len(lines) != n:
            raise FormatError(f"{len(lines)} lines but {paths['src'].name} has {n}", path=paths[key])
    pe = _read_column(paths["pe"]) if paths["pe"].exists() else None
    if pe is not None and len(pe) != n:
        raise FormatError(f"{len(pe)} lines but {paths['src'].name} has {n}", path=paths["pe"])
    meta = []
    if paths["meta"].exists():
        meta = [json.loads(line) for line in _read_column(paths["meta"]) if line.strip()]
        if len(meta) != n:
            raise FormatError(f"{len(meta)} records but {n} expected", path=paths["meta"])

    records = []
    for i in range(n):
        lineno = i + 1
        tags = parse_tags_line(cols["tags"][i], lineno, paths["tags"])
        hyp = cols["mt"][i].split()
        if len(tags) != len(hyp):
            raise FormatError(
                f"{len(tags.interleaved())} tags for {len(hyp)} tokens (need 2T+1)",
                lineno,
                paths["tags"],
            )
        try:
            score = float(cols["hter"][i])
        except ValueError:
            raise FormatError(f"bad score {cols['hter'][i]!r}", lineno, paths["hter"]) from None
        records.append(
            QEExample(
                source=cols["src"][i].split(),
                hypothesis=hyp,
                pseudo_post_edit=pe[i].split() if pe is not None else (),
                tags=tags,
                sentence_score=score,
                route=meta[i]["route"] if meta else "nmt",
            )
        )
    head = meta[0] if meta else {}
    return QEDataset(
        records=records,
        provenance=head.get("provenance", str(directory)),
        scoring=head.get("scoring", "hter"),
        seed=head.get("seed"),
        config=head.get("config"),
    )


def parse_tags_line(line: str, lineno: Optional[int] = None, path=None) -> TagSequence:
    tags = line.split()
    for t in tags:
        if t not in TAG_VALUES:
            raise FormatError(f"invalid tag {t!r}", lineno, path)
    try:
        return TagSequence.from_interleaved(tags)
    except ValueError as exc:
        raise FormatError(str(exc), lineno, path) from None


def read_tags_file(path) -> list[TagSequence]:
    with open(path, encoding="utf-8") as f:
        return [parse_tags_line(line, n, path) for n, line in _lines(f)]


# -- statistics and subsampling ---------------------------------------------------

def stats_from_counts(size, word_tags, word_bad, gap_tags, gap_bad) -> StatsReport:
    return StatsReport(
        size=size,
        mt_bad_pct=100.0 * word_bad / word_tags if word_tags else 0.0,
        gap_bad_pct=100.0 * gap_bad / gap_tags if gap_tags else 0.0,
        word_tags=word_tags,
        word_bad=word_bad,
        gap_tags=gap_tags,
        gap_bad=gap_bad,
    )


def corpus_stats(dataset: QEDataset | Iterable[QEExample]) -> StatsReport:
    """Record count and percentages of BAD word and gap tags (all T+1 gaps counted)."""
    records = dataset.records if isinstance(dataset, QEDataset) else list(dataset)
    if not records:
        raise ValueError("corpus_stats needs a non-empty dataset")
    wt = wb = gt = gb = 0
    for rec in records:
        wt += len(rec.tags.word_tags)
        wb += rec.tags.word_tags.count(BAD)
        gt += len(rec.tags.gap_tags)
        gb += rec.tags.gap_tags.count(BAD)
    return stats_from_counts(len(records), wt, wb, gt, gb)


def merge_stats(*reports: StatsReport) -> StatsReport:
    return stats_from_counts(
        sum(r.size for r in reports),
        sum(r.word_tags for r in reports),
        sum(r.word_bad for r in reports),
        sum(r.gap_tags for r in reports),
        sum(r.gap_bad for r in reports),
    )


def subsample(dataset: QEDataset, n: int, seed: int) -> QEDataset:
    """Uniform sample of ``n`` records without replacement, kept in original order."""
    size = len(dataset.records)
    if not 0 < n <= size:
        raise ValueError(f"n must be in [1, {size}], got {n}")
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(size, size=n, replace=False))
    return QEDataset(
        records=[dataset.records[i] for i in keep.tolist()],
        provenance=dataset.provenance,
        scoring=dataset.scoring,
        seed=dataset.seed,
        config=dataset.config,
    )
