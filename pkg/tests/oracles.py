"""Independent reference implementations used only by the tests."""

from fractions import Fraction
from decimal import Decimal, getcontext
from functools import lru_cache
import itertools


def levenshtein(a, b):
    """Plain recursive edit distance, memoised on suffix positions."""
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def d(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        return min(
            d(i + 1, j) + 1,
            d(i, j + 1) + 1,
            d(i + 1, j + 1) + (a[i] != b[j]),
        )

    return d(0, 0)


def all_scripts(hyp, ref, budget):
    """Every op sequence turning hyp into ref with at most ``budget`` edits.

    Ops are (kind, hyp_index, ref_index) with None for the untouched side.
    """
    out = []

    def rec(i, j, acc, cost):
        if cost > budget:
            return
        if i == len(hyp) and j == len(ref):
            out.append((tuple(acc), cost))
            return
        if i < len(hyp) and j < len(ref):
            if hyp[i] == ref[j]:
                rec(i + 1, j + 1, acc + [("Match", i, j)], cost)
            else:
                rec(i + 1, j + 1, acc + [("Substitute", i, j)], cost + 1)
        if i < len(hyp):
            rec(i + 1, j, acc + [("Delete", i, None)], cost + 1)
        if j < len(ref):
            rec(i, j + 1, acc + [("Insert", None, j)], cost + 1)

    rec(0, 0, [], 0)
    return out


def words(n_max, alphabet="abc"):
    for n in range(n_max + 1):
        yield from itertools.product(alphabet, repeat=n)


def mcc_exact(tp, tn, fp, fn, digits=60):
    getcontext().prec = digits
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return Decimal(0)
    return Decimal(tp * tn - fp * fn) / Decimal(denom).sqrt()


def f1_exact(tp, fp, fn):
    if tp == 0:
        return Fraction(0)
    precision = Fraction(tp, tp + fp)
    recall = Fraction(tp, tp + fn)
    return 2 * precision * recall / (precision + recall)


def pearson_exact(xs, ys, digits=60):
    getcontext().prec = digits
    xs = [Fraction(x) for x in xs]
    ys = [Fraction(y) for y in ys]
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    num = Decimal(sxy.numerator) / Decimal(sxy.denominator)
    den = (Decimal(sxx.numerator) / Decimal(sxx.denominator)) * (
        Decimal(syy.numerator) / Decimal(syy.denominator)
    )
    return num / den.sqrt()


def mae_exact(xs, ys):
    return sum(abs(Fraction(x) - Fraction(y)) for x, y in zip(xs, ys)) / len(xs)


def rmse_exact(xs, ys, digits=60):
    getcontext().prec = digits
    m = sum((Fraction(x) - Fraction(y)) ** 2 for x, y in zip(xs, ys)) / len(xs)
    return (Decimal(m.numerator) / Decimal(m.denominator)).sqrt()
