"""Edit-distance alignment of a hypothesis against its pseudo post-edit.

Produces the word tags (one per hypothesis token) and gap tags (one per
position between, before and after the tokens) used as QE labels, plus the
sentence-level HTER and bad-word fraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from qesynth import kernels

OK = "OK"
BAD = "BAD"
TAG_VALUES = (OK, BAD)

MATCH = "Match"
SUBSTITUTE = "Substitute"
DELETE = "Delete"
INSERT = "Insert"
_KIND_NAMES = {
    kernels.MATCH: MATCH,
    kernels.SUBSTITUTE: SUBSTITUTE,
    kernels.DELETE: DELETE,
    kernels.INSERT: INSERT,
}


@dataclass(frozen=True)
class EditOp:
    kind: str
    hyp_index: Optional[int] = None
    ref_index: Optional[int] = None

    def __post_init__(self):
        has_h = self.hyp_index is not None
        has_r = self.ref_index is not None
        expected = {
            MATCH: (True, True),
            SUBSTITUTE: (True, True),
            DELETE: (True, False),
            INSERT: (False, True),
        }.get(self.kind)
        if expected is None:
            raise ValueError(f"unknown edit kind {self.kind!r}")
        if (has_h, has_r) != expected:
            raise ValueError(f"{self.kind} op has wrong indices: {self}")


@dataclass(frozen=True)
class EditScript:
    ops: tuple[EditOp, ...]

    @property
    def cost(self) -> int:
        return sum(op.kind != MATCH for op in self.ops)

    @property
    def hyp_len(self) -> int:
        return sum(op.hyp_index is not None for op in self.ops)

    @property
    def ref_len(self) -> int:
        return sum(op.ref_index is not None for op in self.ops)

    def count(self, kind: str) -> int:
        return sum(op.kind == kind for op in self.ops)

    def replay(self, hyp: Sequence[str], ref: Sequence[str]) -> list[str]:
        """Apply the script to ``hyp``; ``ref`` supplies inserted/substituted tokens."""
        out = []
        for op in self.ops:
            if op.kind == MATCH:
                out.append(hyp[op.hyp_index])
            elif op.kind in (SUBSTITUTE, INSERT):
                out.append(ref[op.ref_index])
        return out


@dataclass(frozen=True)
class TagSequence:
    word_tags: tuple[str, ...]
    gap_tags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "word_tags", tuple(self.word_tags))
        object.__setattr__(self, "gap_tags", tuple(self.gap_tags))
        if len(self.gap_tags) != len(self.word_tags) + 1:
            raise ValueError(
                f"need {len(self.word_tags) + 1} gap tags for "
                f"{len(self.word_tags)} words, got {len(self.gap_tags)}"
            )
        for tag in self.word_tags + self.gap_tags:
            if tag not in TAG_VALUES:
                raise ValueError(f"invalid tag {tag!r}")

    def __len__(self):
        return len(self.word_tags)

    def interleaved(self) -> list[str]:
        """Gap, word, gap, ..., word, gap (the ``*.tags`` line layout)."""
        out = [self.gap_tags[0]]
        for w, g in zip(self.word_tags, self.gap_tags[1:]):
            out.append(w)
            out.append(g)
        return out

    @classmethod
    def from_interleaved(cls, tags: Sequence[str]) -> "TagSequence":
        if len(tags) % 2 != 1:
            raise ValueError(f"expected 2T+1 tags, got {len(tags)}")
        return cls(word_tags=tuple(tags[1::2]), gap_tags=tuple(tags[0::2]))


def edit_distance_align(hyp: Sequence[str], ref: Sequence[str]) -> EditScript:
    """Minimum unit-cost edit script turning ``hyp`` into ``ref``.

    Ties are resolved deterministically (see :mod:`qesynth.kernels`), so equal
    inputs always give identical scripts. One empty side yields a pure
    Insert or pure Delete script.

    >>> edit_distance_align(["a", "c"], ["a", "b", "c"]).cost
    1
    """
    if not hyp and not ref:
        raise ValueError("cannot align two empty sequences")
    _, kinds, hi, ri = kernels.align_codes(list(hyp), list(ref))
    ops = tuple(
        EditOp(
            _KIND_NAMES[int(k)],
            None if h < 0 else int(h),
            None if r < 0 else int(r),
        )
        for k, h, r in zip(kinds.tolist(), hi.tolist(), ri.tolist())
    )
    return EditScript(ops)


def tags_from_script(script: EditScript, hyp_len: int) -> TagSequence:
    if script.hyp_len != hyp_len:
        raise ValueError(
            f"script covers {script.hyp_len} hypothesis tokens, expected {hyp_len}"
        )
    words = [OK] * hyp_len
    gaps = [OK] * (hyp_len + 1)
    consumed = 0
    for op in script.ops:
        if op.kind == INSERT:
            gaps[consumed] = BAD
            continue
        if op.kind != MATCH:
            words[op.hyp_index] = BAD
        consumed += 1
    return TagSequence(tuple(words), tuple(gaps))


def hter(script: EditScript, ref_len: int, clamp: bool = True) -> float:
    """Edit count divided by the post-edit length, optionally capped at 1."""
    if ref_len < 1:
        raise ValueError("ref_len must be >= 1")
    value = script.cost / ref_len
    return min(value, 1.0) if clamp else value


def bad_fraction(tags: TagSequence) -> float:
    if not tags.word_tags:
        raise ValueError("no word tags")
    return sum(t == BAD for t in tags.word_tags) / len(tags.word_tags)


def align_tags(hyp: Sequence[str], ref: Sequence[str]) -> tuple[EditScript, TagSequence]:
    script = edit_distance_align(hyp, ref)
    return script, tags_from_script(script, len(hyp))
