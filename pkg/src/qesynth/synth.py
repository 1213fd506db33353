"""The two synthesis routes.

* NMT route: align externally produced MT hypotheses to the mined target.
* Rewriting route: corrupt the mined target (mask, span-delete, mask-insert),
  let an infiller fill the masks, then align the rewrite to the target.

In both routes the mined target plays the role of the post-edit.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from qesynth.align import align_tags, bad_fraction, hter
from qesynth.corpus import BitextPair
from qesynth.infill import MASK_TOKEN, InfillError, check_fill
from qesynth.records import SCORING_MODES, QEDataset, QEExample

logger = logging.getLogger(__name__)

__all__ = [
    "CorruptionConfig",
    "MaskedDraft",
    "QEExample",
    "corrupt",
    "record_rng",
    "sample_span_length",
    "synth_by_rewriting",
    "synth_from_hypotheses",
]


@dataclass(frozen=True)
class CorruptionConfig:
    p_sub: float = 0.15
    p_del: float = 0.05
    p_ins: float = 0.05
    span_mean: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for name in ("p_sub", "p_del", "p_ins"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if not self.span_mean > 0:
            raise ValueError(f"span_mean must be > 0, got {self.span_mean}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MaskedDraft:
    """A corrupted target: ``None`` entries are masks.

    ``origins[k]`` is the index in ``original`` that element ``k`` came from,
    or ``None`` for an inserted mask.
    """

    tokens: tuple[Optional[str], ...]
    origins: tuple[Optional[int], ...]
    original: tuple[str, ...]
    deletion_count: int = 0

    @property
    def origin_map(self) -> tuple[int, ...]:
        return tuple(o for t, o in zip(self.tokens, self.origins) if t is not None)

    @property
    def n_masks(self) -> int:
        return sum(t is None for t in self.tokens)

    def wire_tokens(self) -> list[str]:
        return [MASK_TOKEN if t is None else t for t in self.tokens]


def record_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for record ``index``; unaffected by batching or workers."""
    return np.random.default_rng(np.random.SeedSequence([seed % 2**64, index]))


def sample_span_length(rng: np.random.Generator, span_mean: float = 1.0) -> int:
    """Poisson(span_mean) + 1, so spans are never empty."""
    return int(rng.poisson(span_mean)) + 1


def corrupt(
    target: Sequence[str], config: CorruptionConfig, rng: np.random.Generator
) -> MaskedDraft:
    if not target:
        raise ValueError("cannot corrupt an empty sentence")
    target = tuple(target)
    n = len(target)

    # 1. substitution masks
    masked = rng.random(n) < config.p_sub
    toks = [None if m else t for t, m in zip(target, masked.tolist())]
    origins = list(range(n))

    # 2. deletion marks are drawn up front; a mark inside a removed span is void
    marks = (rng.random(n) < config.p_del).tolist()
    keep = [True] * n
    deleted = 0
    i = 0
    while i < n:
        if marks[i]:
            span = sample_span_length(rng, config.span_mean)
            stop = min(n, i + span)
            for k in range(i, stop):
                keep[k] = False
            deleted += stop - i
            i = stop
        else:
            i += 1
    toks = [t for t, k in zip(toks, keep) if k]
    origins = [o for o, k in zip(origins, keep) if k]

    # 3. insertion runs at gaps 0..len, sentence boundaries included
    gap_marks = (rng.random(len(toks) + 1) < config.p_ins).tolist()
    if not toks and not any(gap_marks):
        gap_marks[0] = True
    out_t: list[Optional[str]] = []
    out_o: list[Optional[int]] = []
    for g, marked in enumerate(gap_marks):
        if marked:
            run = sample_span_length(rng, config.span_mean)
            out_t.extend([None] * run)
            out_o.extend([None] * run)
        if g < len(toks):
            out_t.append(toks[g])
            out_o.append(origins[g])
    return MaskedDraft(tuple(out_t), tuple(out_o), target, deleted)


def _score(script, tags, ref_len: int, scoring: str) -> float:
    if scoring == "hter":
        return hter(script, ref_len, clamp=True)
    if scoring == "bad_fraction":
        return bad_fraction(tags)
    raise ValueError(f"unknown scoring mode {scoring!r}; choose from {SCORING_MODES}")


def make_example(source, hypothesis, target, scoring: str, route: str) -> QEExample:
    script, tags = align_tags(hypothesis, target)
    return QEExample(
        source=source,
        hypothesis=hypothesis,
        pseudo_post_edit=target,
        tags=tags,
        sentence_score=_score(script, tags, len(target), scoring),
        route=route,
    )


def _pmap(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def synth_from_hypotheses(
    pairs: Sequence[BitextPair],
    hyps: Sequence[Sequence[str]],
    scoring: str = "hter",
    jobs: int = 1,
    provenance: str = "nmt",
) -> QEDataset:
    """Label each hypothesis against the mined target of its pair."""
    if len(pairs) != len(hyps):
        raise ValueError(f"{len(pairs)} pairs but {len(hyps)} hypotheses")
    if scoring not in SCORING_MODES:
        raise ValueError(f"unknown scoring mode {scoring!r}")
    for i, h in enumerate(hyps):
        if not h:
            raise ValueError(f"empty hypothesis at line {i + 1}")

    def one(i):
        return make_example(pairs[i].source, tuple(hyps[i]), pairs[i].target, scoring, "nmt")

    records = _pmap(one, range(len(pairs)), jobs)
    return QEDataset(records=records, provenance=provenance, scoring=scoring)


def synth_by_rewriting(
    pairs: Sequence[BitextPair],
    config: CorruptionConfig,
    infiller,
    scoring: str = "hter",
    on_error: str = "abort",
    jobs: int = 1,
    provenance: str = "mlm",
) -> QEDataset:
    """Rewrite each mined target through corruption and infilling, then label it.

    ``on_error`` is ``"abort"`` (raise on the first infiller failure) or
    ``"skip"`` (log, drop the record and list its index in ``rejected``).
    """
    if not pairs:
        raise ValueError("no pairs to rewrite")
    if on_error not in ("abort", "skip"):
        raise ValueError(f"on_error must be 'abort' or 'skip', got {on_error!r}")
    if scoring not in SCORING_MODES:
        raise ValueError(f"unknown scoring mode {scoring!r}")

    rngs = [record_rng(config.seed, i) for i in range(len(pairs))]
    drafts = _pmap(lambda i: corrupt(pairs[i].target, config, rngs[i]), range(len(pairs)), jobs)

    rewrites: list = [None] * len(pairs)
    failures: dict[int, Exception] = {}
    if hasattr(infiller, "fill_batch"):
        chunk = getattr(getattr(infiller, "config", None), "batch_size", 8)
        for start in range(0, len(pairs), chunk):
            idx = list(range(start, min(start + chunk, len(pairs))))
            try:
                out = infiller.fill_batch([(pairs[i].source, drafts[i]) for i in idx], idx)
            except InfillError:
                # retry one by one to pin down which records failed
                out = []
                for i in idx:
                    try:
                        out.append(infiller.fill(pairs[i].source, drafts[i], index=i))
                    except InfillError as exc:
                        failures[i] = exc
                        out.append(None)
            for i, toks in zip(idx, out):
                rewrites[i] = toks
    else:
        def fill_one(i):
            try:
                toks = infiller.fill(pairs[i].source, drafts[i], rng=rngs[i])
                return check_fill(drafts[i], toks, i)
            except InfillError as exc:
                if exc.index is None:
                    exc = type(exc)(str(exc), i)
                failures[i] = exc
            except Exception as exc:  # infiller bugs surface with the record index
                failures[i] = InfillError(f"{type(exc).__name__}: {exc}", i)
            return None

        rewrites = _pmap(fill_one, range(len(pairs)), jobs)

    if failures:
        first = min(failures)
        if on_error == "abort":
            raise failures[first]
        for i in sorted(failures):
            logger.warning("skipping %s", failures[i])

    keep = [i for i in range(len(pairs)) if i not in failures]
    records = _pmap(
        lambda i: make_example(pairs[i].source, tuple(rewrites[i]), pairs[i].target, scoring, "mlm"),
        keep,
        jobs,
    )
    return QEDataset(
        records=records,
        provenance=provenance,
        scoring=scoring,
        seed=config.seed,
        config=config.to_dict(),
        rejected=sorted(failures),
    )
