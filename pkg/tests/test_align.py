import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from qesynth.align import (
    BAD,
    DELETE,
    INSERT,
    MATCH,
    OK,
    SUBSTITUTE,
    EditOp,
    EditScript,
    TagSequence,
    align_tags,
    bad_fraction,
    edit_distance_align,
    hter,
    tags_from_script,
)
from oracles import all_scripts, levenshtein, words


def as_tuples(script):
    return tuple((op.kind, op.hyp_index, op.ref_index) for op in script.ops)


def optimal_scripts(hyp, ref, budget=3):
    found = all_scripts(hyp, ref, budget)
    best = min(c for _, c in found)
    return best, [s for s, c in found if c == best]


def test_identity_is_all_match():
    s = edit_distance_align(["a", "b", "c"], ["a", "b", "c"])
    assert [op.kind for op in s.ops] == [MATCH] * 3
    assert s.cost == 0


def test_single_substitution_is_unique_optimum():
    hyp, ref = ["a", "x", "c"], ["a", "b", "c"]
    best, scripts = optimal_scripts(hyp, ref)
    assert best == 1 and len(scripts) == 1
    s = edit_distance_align(hyp, ref)
    assert as_tuples(s) == scripts[0]
    assert as_tuples(s) == (("Match", 0, 0), ("Substitute", 1, 1), ("Match", 2, 2))


def test_single_insertion_is_unique_optimum():
    hyp, ref = ["a", "c"], ["a", "b", "c"]
    best, scripts = optimal_scripts(hyp, ref)
    assert best == 1 and len(scripts) == 1
    s = edit_distance_align(hyp, ref)
    assert as_tuples(s) == scripts[0] == (("Match", 0, 0), ("Insert", None, 1), ("Match", 1, 2))


def test_duplicate_token_tie_break_deletes_later_copy():
    hyp, ref = ["a", "b", "b", "c"], ["a", "b", "c"]
    best, scripts = optimal_scripts(hyp, ref)
    assert best == 1 and len(scripts) == 2  # either "b" can go
    s = edit_distance_align(hyp, ref)
    assert as_tuples(s) in scripts
    tags = tags_from_script(s, 4)
    assert tags.word_tags == (OK, OK, BAD, OK)
    assert tags.gap_tags == (OK,) * 5


def test_one_side_empty():
    s = edit_distance_align([], ["a", "b"])
    assert [op.kind for op in s.ops] == [INSERT, INSERT]
    s = edit_distance_align(["a", "b"], [])
    assert [op.kind for op in s.ops] == [DELETE, DELETE]
    with pytest.raises(ValueError):
        edit_distance_align([], [])


def test_exhaustive_cost_matches_recursive_oracle():
    pool = list(words(3))
    for hyp, ref in itertools.product(pool, pool):
        if not hyp and not ref:
            continue
        assert edit_distance_align(hyp, ref).cost == levenshtein(hyp, ref)


def test_tags_examples():
    s = edit_distance_align(["a", "b", "c"], ["a", "b", "c"])
    t = tags_from_script(s, 3)
    assert t.word_tags == (OK,) * 3 and t.gap_tags == (OK,) * 4
    s = edit_distance_align(["a", "c"], ["a", "b", "c"])
    t = tags_from_script(s, 2)
    assert t.word_tags == (OK, OK) and t.gap_tags == (OK, BAD, OK)


def test_insertions_at_sentence_boundaries():
    _, t = align_tags(["b"], ["a", "b", "c"])
    assert t.gap_tags == (BAD, BAD)
    assert t.word_tags == (OK,)


def test_tags_length_mismatch():
    s = edit_distance_align(["a"], ["a"])
    with pytest.raises(ValueError):
        tags_from_script(s, 2)


def test_hter_examples():
    assert hter(edit_distance_align(["a", "b"], ["a", "b"]), 2) == 0.0
    s = edit_distance_align(["a", "x", "c"], ["a", "b", "c"])
    assert hter(s, 3) == pytest.approx(1 / 3, abs=1e-15)
    five = EditScript(tuple(EditOp(DELETE, i) for i in range(5)))
    assert hter(five, 3) == 1.0
    assert hter(five, 3, clamp=False) == pytest.approx(5 / 3)
    with pytest.raises(ValueError):
        hter(five, 0)


def test_bad_fraction_examples():
    assert bad_fraction(TagSequence((OK, OK, OK), (OK,) * 4)) == 0.0
    assert bad_fraction(TagSequence((BAD, BAD), (OK,) * 3)) == 1.0
    assert bad_fraction(TagSequence((OK, BAD, OK, BAD), (BAD,) * 5)) == 0.5
    with pytest.raises(ValueError):
        bad_fraction(TagSequence((), (OK,)))


def test_edit_op_index_invariants():
    with pytest.raises(ValueError):
        EditOp(INSERT, 0, 0)
    with pytest.raises(ValueError):
        EditOp(DELETE, None, 1)
    with pytest.raises(ValueError):
        EditOp("Swap", 0, 0)


def test_tag_sequence_interleave_roundtrip():
    t = TagSequence((OK, BAD), (BAD, OK, OK))
    assert t.interleaved() == [BAD, OK, OK, BAD, OK]
    assert TagSequence.from_interleaved(t.interleaved()) == t
    with pytest.raises(ValueError):
        TagSequence((OK,), (OK,))


tokens = st.lists(st.sampled_from("abcd"), max_size=9)


@settings(max_examples=400, deadline=None)
@given(tokens, tokens)
def test_script_properties(hyp, ref):
    if not hyp and not ref:
        return
    s = edit_distance_align(hyp, ref)
    # replay reproduces the reference
    assert s.replay(hyp, ref) == list(ref)
    # indices cover both sides exactly once, strictly increasing
    assert [op.hyp_index for op in s.ops if op.hyp_index is not None] == list(range(len(hyp)))
    assert [op.ref_index for op in s.ops if op.ref_index is not None] == list(range(len(ref)))
    for op in s.ops:
        if op.kind == MATCH:
            assert hyp[op.hyp_index] == ref[op.ref_index]
        if op.kind == SUBSTITUTE:
            assert hyp[op.hyp_index] != ref[op.ref_index]
    # tag accounting
    t = tags_from_script(s, len(hyp))
    assert t.word_tags.count(BAD) == s.count(SUBSTITUTE) + s.count(DELETE)
    assert t.gap_tags.count(BAD) <= s.count(INSERT)
    # determinism: identical script, not just equal cost
    assert edit_distance_align(hyp, ref) == s
    if ref:
        h = hter(s, len(ref), clamp=False)
        assert (h == 0) == (list(hyp) == list(ref))
        assert h <= (len(hyp) + len(ref)) / len(ref)
