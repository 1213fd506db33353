import numpy as np
import pytest
from hypothesis import given, strategies as st

from qesynth.align import BAD, OK, TagSequence
from qesynth.ensemble import (
    GRID,
    EnsembleWeights,
    WordProbSequence,
    combine_sentence,
    combine_word,
    fit_weight,
    grid_scores,
)
from oracles import mcc_exact


def wps(word, gap):
    return WordProbSequence(np.array(word, float), np.array(gap, float))


def random_wps(rng, t):
    return WordProbSequence(rng.random(t), rng.random(t + 1))


def test_combine_word_examples(rng):
    a = random_wps(rng, 4)
    p, _ = combine_word(a, a, EnsembleWeights(0.37))
    np.testing.assert_allclose(p.word_probs, a.word_probs, rtol=0, atol=1e-15)
    b = random_wps(rng, 4)
    p, _ = combine_word(a, b, EnsembleWeights(1.0))
    assert np.array_equal(p.word_probs, a.word_probs) and np.array_equal(p.gap_probs, a.gap_probs)
    p, tags = combine_word(wps([0.8], [0.0, 0.0]), wps([0.2], [0.0, 0.0]), EnsembleWeights(0.5, 0.5))
    assert p.word_probs.tolist() == [0.5]
    assert tags.word_tags == (BAD,)


def test_combine_word_shape_mismatch(rng):
    with pytest.raises(ValueError):
        combine_word(random_wps(rng, 2), random_wps(rng, 3))


def test_combine_sentence_examples():
    assert combine_sentence(0.3, 0.3) == 0.3
    assert combine_sentence(0.0, 1.0, EnsembleWeights(0.25)) == 0.75
    assert combine_sentence(0.9, 0.9, EnsembleWeights(0.8)) == 0.9
    assert combine_sentence(1.5, 1.5, EnsembleWeights(0.5)) == 1.0
    assert combine_sentence(1.5, 1.5, EnsembleWeights(0.5), clamp=False) == 1.5
    with pytest.raises(ValueError):
        combine_sentence(float("inf"), 0.0)


def test_weight_validation():
    for bad in (dict(w=-0.1), dict(w=1.1), dict(decision_threshold=0.0), dict(decision_threshold=1.0)):
        with pytest.raises(ValueError):
            EnsembleWeights(**bad)
    with pytest.raises(ValueError):
        wps([1.2], [0, 0])


ws = st.floats(0, 1)


@given(st.integers(0, 2**32), ws)
def test_symmetry_and_convexity(seed, w):
    rng = np.random.default_rng(seed)
    a, b = random_wps(rng, 5), random_wps(rng, 5)
    p1, t1 = combine_word(a, b, EnsembleWeights(w))
    p2, t2 = combine_word(b, a, EnsembleWeights(1 - w))
    assert np.array_equal(p1.interleaved(), p2.interleaved()) and t1 == t2
    lo = np.minimum(a.interleaved(), b.interleaved())
    hi = np.maximum(a.interleaved(), b.interleaved())
    x = p1.interleaved()
    assert np.all(lo <= x + 1e-15) and np.all(x <= hi + 1e-15)
    assert combine_sentence(0.2, 0.7, EnsembleWeights(w)) == combine_sentence(0.7, 0.2, EnsembleWeights(1 - w))


@given(st.integers(0, 2**32), ws, st.floats(0.01, 0.98), st.floats(0.001, 0.5))
def test_threshold_monotone(seed, w, t, dt):
    rng = np.random.default_rng(seed)
    a, b = random_wps(rng, 6), random_wps(rng, 6)
    t2 = min(t + dt, 0.99)
    _, lo = combine_word(a, b, EnsembleWeights(w, t))
    _, hi = combine_word(a, b, EnsembleWeights(w, t2))
    for x, y in zip(lo.interleaved(), hi.interleaved()):
        assert not (x == OK and y == BAD)


def test_fit_dominant_sentence_stream():
    rng = np.random.default_rng(1)
    gold = rng.random(60).tolist()
    noise = rng.random(60).tolist()
    assert fit_weight(gold, noise, gold, "pearson").w == 1.0
    assert fit_weight(noise, gold, gold, "pearson").w == 0.0


def test_fit_dominant_word_stream():
    rng = np.random.default_rng(2)
    gold = [TagSequence(tuple(rng.choice([OK, BAD], 5)), tuple(rng.choice([OK, BAD], 6))) for _ in range(40)]
    a = [WordProbSequence.from_interleaved([1.0 if t == BAD else 0.0 for t in g.interleaved()]) for g in gold]
    b = [random_wps(rng, 5) for _ in gold]
    fitted = fit_weight(a, b, gold, "mcc")
    scores = grid_scores(a, b, gold, "mcc")
    assert scores[GRID.index(1.0)] == 1.0
    # with 0/1 probabilities on A every w >= 0.5 is already perfect; ties go to 0.5
    assert fitted.w == 0.5 and scores[GRID.index(fitted.w)] == 1.0


def test_fit_identical_streams_ties_to_half():
    rng = np.random.default_rng(3)
    a = rng.random(30).tolist()
    gold = rng.random(30).tolist()
    assert fit_weight(a, a, gold, "pearson").w == 0.5


def test_fit_finds_constructed_optimum():
    rng = np.random.default_rng(4)
    a, b = rng.random(200), rng.random(200)
    gold = 0.3 * a + 0.7 * b
    # brute force over the grid with numpy's own correlation
    brute = [np.corrcoef(k / 20 * a + (1 - k / 20) * b, gold)[0, 1] for k in range(21)]
    assert int(np.argmax(brute)) == 6
    assert fit_weight(a.tolist(), b.tolist(), gold.tolist(), "pearson").w == 0.3


def test_fit_word_matches_brute_force():
    rng = np.random.default_rng(5)
    gold, a, b = [], [], []
    for _ in range(80):
        t = int(rng.integers(1, 8))
        truth = rng.random(2 * t + 1)
        gold.append(TagSequence.from_interleaved([BAD if x > 0.6 else OK for x in truth]))
        a.append(WordProbSequence.from_interleaved(np.clip(truth + rng.normal(0, 0.3, truth.size), 0, 1)))
        b.append(WordProbSequence.from_interleaved(np.clip(truth + rng.normal(0.1, 0.2, truth.size), 0, 1)))
    g = np.concatenate([[x == BAD for x in s.interleaved()] for s in gold])
    A = np.concatenate([s.interleaved() for s in a])
    B = np.concatenate([s.interleaved() for s in b])
    brute = []
    for k in range(21):
        w = k / 20
        p = (w * A + (1 - w) * B) >= 0.5
        tp, tn = int(np.sum(p & g)), int(np.sum(~p & ~g))
        fp, fn = int(np.sum(p & ~g)), int(np.sum(~p & g))
        brute.append(float(mcc_exact(tp, tn, fp, fn)))
    best = max(brute)
    expect = min((k / 20 for k in range(21) if brute[k] >= best - 1e-12), key=lambda w: (abs(w - 0.5), w))
    fitted = fit_weight(a, b, gold, "mcc")
    assert fitted.w == expect
    assert brute[GRID.index(fitted.w)] >= max(brute[0], brute[20])


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_weight([], [], [], "pearson")
    with pytest.raises(ValueError):
        fit_weight([0.1], [0.2], [0.3], "bleu")
