"""Linear combination of two QE prediction streams."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from qesynth.align import BAD, OK, TagSequence
from qesynth.metrics import UndefinedCorrelation, evaluate_word_level, pearson

GRID = tuple(k / 20 for k in range(21))


@dataclass(frozen=True)
class EnsembleWeights:
    w: float = 0.5
    decision_threshold: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise ValueError(f"w must be in [0, 1], got {self.w}")
        if not 0.0 < self.decision_threshold < 1.0:
            raise ValueError(f"threshold must be in (0, 1), got {self.decision_threshold}")

    def pair(self) -> tuple[float, float]:
        """``(weight_a, weight_b)`` summing to one.

        The complement is always taken on the side >= 0.5, where ``1 - x`` is
        exact, so ``pair(w)`` and ``pair(1 - w)`` are exact mirror images.
        """
        if self.w >= 0.5:
            return self.w, 1.0 - self.w
        wb = 1.0 - self.w
        return 1.0 - wb, wb


@dataclass(frozen=True)
class WordProbSequence:
    word_probs: np.ndarray
    gap_probs: np.ndarray

    def __post_init__(self):
        wp = np.asarray(self.word_probs, dtype=np.float64)
        gp = np.asarray(self.gap_probs, dtype=np.float64)
        if wp.ndim != 1 or gp.shape != (wp.shape[0] + 1,):
            raise ValueError(f"need T word and T+1 gap probabilities, got {wp.shape}, {gp.shape}")
        for arr in (wp, gp):
            if arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 1):
                raise ValueError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "word_probs", wp)
        object.__setattr__(self, "gap_probs", gp)

    def interleaved(self) -> np.ndarray:
        out = np.empty(2 * self.word_probs.size + 1)
        out[0::2] = self.gap_probs
        out[1::2] = self.word_probs
        return out

    @classmethod
    def from_interleaved(cls, values: Sequence[float]) -> "WordProbSequence":
        values = np.asarray(values, dtype=np.float64)
        if values.size % 2 != 1:
            raise ValueError(f"expected 2T+1 probabilities, got {values.size}")
        return cls(values[1::2], values[0::2])

    def tags(self, threshold: float = 0.5) -> TagSequence:
        def lab(a):
            return tuple(BAD if p >= threshold else OK for p in a.tolist())

        return TagSequence(lab(self.word_probs), lab(self.gap_probs))


def combine_word(
    a: WordProbSequence, b: WordProbSequence, weights: EnsembleWeights = EnsembleWeights()
) -> tuple[WordProbSequence, TagSequence]:
    if a.word_probs.shape != b.word_probs.shape:
        raise ValueError(f"shape mismatch: {a.word_probs.size} vs {b.word_probs.size} words")
    wa, wb = weights.pair()
    combined = WordProbSequence(
        wa * a.word_probs + wb * b.word_probs, wa * a.gap_probs + wb * b.gap_probs
    )
    return combined, combined.tags(weights.decision_threshold)


def combine_sentence(
    a: float, b: float, weights: EnsembleWeights = EnsembleWeights(), clamp: bool = True
) -> float:
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"non-finite score ({a}, {b})")
    wa, wb = weights.pair()
    p = wa * a + wb * b
    return min(1.0, max(0.0, p)) if clamp else p


def _word_objective(a_dev, b_dev, gold, w, threshold):
    weights = EnsembleWeights(w, threshold)
    pred = [combine_word(x, y, weights)[1] for x, y in zip(a_dev, b_dev)]
    return evaluate_word_level(pred, gold).mcc


def _sentence_objective(a_dev, b_dev, gold, w, clamp=True):
    weights = EnsembleWeights(w)
    pred = [combine_sentence(x, y, weights, clamp) for x, y in zip(a_dev, b_dev)]
    try:
        return pearson(pred, gold)
    except UndefinedCorrelation:
        return -math.inf


def grid_scores(a_dev, b_dev, gold_dev, objective: str = "mcc", threshold: float = 0.5):
    """Objective value at every grid weight."""
    if not gold_dev:
        raise ValueError("empty dev set")
    if not len(a_dev) == len(b_dev) == len(gold_dev):
        raise ValueError("dev streams and gold must be the same length")
    if objective == "mcc":
        return [_word_objective(a_dev, b_dev, gold_dev, w, threshold) for w in GRID]
    if objective == "pearson":
        return [_sentence_objective(a_dev, b_dev, gold_dev, w) for w in GRID]
    raise ValueError(f"unknown objective {objective!r}")


def fit_weight(
    a_dev, b_dev, gold_dev, objective: str = "mcc", threshold: float = 0.5
) -> EnsembleWeights:
    """Grid search over w in {0, 0.05, ..., 1}; ties go to the w closest to 0.5.

    ``objective="mcc"`` expects :class:`WordProbSequence` streams and
    :class:`TagSequence` gold; ``"pearson"`` expects float scores.
    """
    scores = grid_scores(a_dev, b_dev, gold_dev, objective, threshold)
    best = max(scores)
    ties = [w for w, s in zip(GRID, scores) if s >= best - 1e-12]
    w = min(ties, key=lambda x: (abs(x - 0.5), x))
    return EnsembleWeights(w, threshold)
