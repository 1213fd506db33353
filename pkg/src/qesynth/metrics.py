"""Word-level (MCC, F1-OK, F1-BAD) and sentence-level (Pearson, MAE, RMSE) scoring."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

from qesynth.align import BAD, OK, TagSequence

CATEGORIES = ("combined", "words", "gaps")


@dataclass(frozen=True)
class ConfusionCounts:
    """Binary confusion counts with BAD as the positive class."""

    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError(f"negative count in {self}")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def swapped(self) -> "ConfusionCounts":
        """Same predictions viewed with OK as the positive class."""
        return ConfusionCounts(tp=self.tn, tn=self.tp, fp=self.fn, fn=self.fp)

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn
        )

    @classmethod
    def from_tags(cls, pred: Sequence[str], gold: Sequence[str]) -> "ConfusionCounts":
        if len(pred) != len(gold):
            raise ValueError(f"{len(pred)} predicted tags vs {len(gold)} gold tags")
        tp = tn = fp = fn = 0
        for p, g in zip(pred, gold):
            if p == BAD:
                if g == BAD:
                    tp += 1
                else:
                    fp += 1
            elif g == BAD:
                fn += 1
            else:
                tn += 1
        return cls(tp, tn, fp, fn)


def _require(c: ConfusionCounts):
    if c.total <= 0:
        raise ValueError("empty confusion counts")


def mcc(c: ConfusionCounts) -> float:
    """Matthews correlation; 0 when any marginal is empty."""
    _require(c)
    denom = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    if denom == 0:
        return 0.0
    # integer numerator and product are exact; one rounding in sqrt, one in the division
    return (c.tp * c.tn - c.fp * c.fn) / math.sqrt(denom)


def f1(c: ConfusionCounts, positive: str = BAD) -> float:
    _require(c)
    if positive == OK:
        c = c.swapped()
    elif positive != BAD:
        raise ValueError(f"positive class must be OK or BAD, got {positive!r}")
    denom = 2 * c.tp + c.fp + c.fn
    # 2PR/(P+R) reduces to 2tp/(2tp+fp+fn)
    return 2 * c.tp / denom if denom else 0.0


@dataclass(frozen=True)
class CategoryScores:
    mcc: float
    f1_ok: float
    f1_bad: float

    @classmethod
    def from_counts(cls, c: ConfusionCounts) -> "CategoryScores":
        return cls(mcc(c), f1(c, OK), f1(c, BAD))


@dataclass(frozen=True)
class WordLevelReport:
    combined: CategoryScores
    words: CategoryScores
    gaps: CategoryScores

    @property
    def mcc(self) -> float:
        return self.combined.mcc

    @property
    def f1_ok(self) -> float:
        return self.combined.f1_ok

    @property
    def f1_bad(self) -> float:
        return self.combined.f1_bad

    def headline(self) -> str:
        return f"MCC {self.mcc:.3f} F1-OK {self.f1_ok:.3f} F1-BAD {self.f1_bad:.3f}"

    def to_text(self) -> str:
        rows = [self.headline(), f"{'category':<10}{'MCC':>8}{'F1-OK':>8}{'F1-BAD':>8}"]
        for name in CATEGORIES:
            s = getattr(self, name)
            rows.append(f"{name:<10}{s.mcc:>8.3f}{s.f1_ok:>8.3f}{s.f1_bad:>8.3f}")
        return "\n".join(rows)

    def to_json(self) -> str:
        return json.dumps({k: asdict(getattr(self, k)) for k in CATEGORIES}, sort_keys=True)


@dataclass(frozen=True)
class SentenceLevelReport:
    pearson: float | None
    mae: float
    rmse: float

    def headline(self) -> str:
        r = "nan" if self.pearson is None else f"{self.pearson:.3f}"
        return f"Pearson {r} MAE {self.mae:.3f} RMSE {self.rmse:.3f}"

    def to_text(self) -> str:
        return self.headline()

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def word_level_counts(
    pred: Sequence[TagSequence], gold: Sequence[TagSequence]
) -> dict[str, ConfusionCounts]:
    if len(pred) != len(gold):
        raise ValueError(f"{len(pred)} predicted records vs {len(gold)} gold records")
    words = ConfusionCounts()
    gaps = ConfusionCounts()
    for i, (p, g) in enumerate(zip(pred, gold)):
        if len(p.word_tags) != len(g.word_tags) or len(p.gap_tags) != len(g.gap_tags):
            raise ValueError(
                f"record {i}: tag length mismatch "
                f"({len(p.word_tags)} vs {len(g.word_tags)} words)"
            )
        words = words + ConfusionCounts.from_tags(p.word_tags, g.word_tags)
        gaps = gaps + ConfusionCounts.from_tags(p.gap_tags, g.gap_tags)
    return {"combined": words + gaps, "words": words, "gaps": gaps}


def evaluate_word_level(
    pred: Sequence[TagSequence], gold: Sequence[TagSequence]
) -> WordLevelReport:
    """Corpus-pooled scores; ``combined`` counts every tag of the 2T+1 sequence."""
    counts = word_level_counts(pred, gold)
    return WordLevelReport(**{k: CategoryScores.from_counts(v) for k, v in counts.items()})


class UndefinedCorrelation(ValueError):
    pass


def _mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs)


def pearson(pred: Sequence[float], gold: Sequence[float]) -> float:
    if len(pred) != len(gold):
        raise ValueError(f"{len(pred)} predictions vs {len(gold)} gold scores")
    if len(pred) < 2:
        raise ValueError("pearson needs at least 2 points")
    mp, mg = _mean(pred), _mean(gold)
    dp = [p - mp for p in pred]
    dg = [g - mg for g in gold]
    sxx = math.fsum(d * d for d in dp)
    syy = math.fsum(d * d for d in dg)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelation("zero variance input; Pearson undefined")
    sxy = math.fsum(a * b for a, b in zip(dp, dg))
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def mae(pred: Sequence[float], gold: Sequence[float]) -> float:
    if len(pred) != len(gold) or not pred:
        raise ValueError("mae needs equal-length non-empty inputs")
    return math.fsum(abs(p - g) for p, g in zip(pred, gold)) / len(pred)


def rmse(pred: Sequence[float], gold: Sequence[float]) -> float:
    if len(pred) != len(gold) or not pred:
        raise ValueError("rmse needs equal-length non-empty inputs")
    errs = [abs(p - g) for p, g in zip(pred, gold)]
    scale = max(errs)
    if scale == 0:
        return 0.0
    # scaled like hypot so tiny errors do not underflow when squared
    return scale * math.sqrt(math.fsum((e / scale) ** 2 for e in errs) / len(errs))


def evaluate_sentence_level(
    pred: Sequence[float], gold: Sequence[float], strict: bool = True
) -> SentenceLevelReport:
    """Pearson, MAE and RMSE.

    With constant input Pearson is undefined: ``strict`` raises
    :class:`UndefinedCorrelation` (carrying the partial report as ``.report``),
    otherwise ``pearson`` is ``None``.
    """
    if len(pred) != len(gold):
        raise ValueError(f"{len(pred)} predictions vs {len(gold)} gold scores")
    if len(pred) < 2:
        raise ValueError("need at least 2 scores")
    m, r = mae(pred, gold), rmse(pred, gold)
    try:
        p = pearson(pred, gold)
    except UndefinedCorrelation as exc:
        report = SentenceLevelReport(None, m, r)
        if strict:
            exc.report = report
            raise
        return report
    return SentenceLevelReport(p, m, r)
