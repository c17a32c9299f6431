import itertools
import random
from fractions import Fraction

import pytest

from hybridbots.stats import (
    EmptyInput,
    EmptySample,
    _exact_p,
    _normal_p,
    exact_u_distribution,
    fixture_bot_scores,
    midranks,
    rank_sum_test,
    summarize_box,
)


def enumerate_p(a, b):
    """Two-sided exact p by listing every assignment of pooled values to sample a."""
    pooled = list(a) + list(b)
    ranks = midranks(pooled)
    n_a = len(a)

    def u_of(idx):
        return sum(Fraction(ranks[i]) for i in idx) - Fraction(n_a * (n_a + 1), 2)

    observed = u_of(range(n_a))
    us = [u_of(idx) for idx in itertools.combinations(range(len(pooled)), n_a)]
    le = sum(u <= observed for u in us)
    ge = sum(u >= observed for u in us)
    return min(1.0, 2 * min(le, ge) / len(us))


def test_identical_samples():
    assert rank_sum_test([1, 2, 3], [1, 2, 3]).p >= 0.9


def test_full_separation():
    res = rank_sum_test([1, 2, 3], [10, 11, 12])
    assert res.u == 0
    assert res.p == pytest.approx(0.1, abs=1e-15)
    assert res.method == "exact"


def test_empty_sample():
    with pytest.raises(EmptySample):
        rank_sum_test([], [1])
    with pytest.raises(ValueError):
        rank_sum_test([1], [2], method="bogus")


def test_method_switch():
    assert rank_sum_test(range(8), range(8)).method == "exact"
    assert rank_sum_test(range(9), range(8)).method == "normal"


def test_midranks():
    assert midranks([3, 1, 3, 2]) == [3.5, 1.0, 3.5, 2.0]


@pytest.mark.parametrize("seed", range(6))
def test_exact_matches_enumeration(seed):
    rng = random.Random(seed)
    for _ in range(60):
        na, nb = rng.randint(1, 8), rng.randint(1, 8)
        hi = rng.choice([3, 10, 1000])
        a = [rng.randint(0, hi) for _ in range(na)]
        b = [rng.randint(0, hi) for _ in range(nb)]
        assert rank_sum_test(a, b, "exact").p == enumerate_p(a, b)


def test_symmetry():
    rng = random.Random(1)
    for _ in range(200):
        a = [rng.randint(0, 9) for _ in range(rng.randint(1, 12))]
        b = [rng.randint(0, 9) for _ in range(rng.randint(1, 12))]
        ab, ba = rank_sum_test(a, b), rank_sum_test(b, a)
        assert ab.u + ba.u == len(a) * len(b)
        assert ab.p == pytest.approx(ba.p, abs=1e-12)


def test_agrees_with_scipy():
    stats = pytest.importorskip("scipy.stats")
    rng = random.Random(2)
    for _ in range(100):
        na, nb = rng.randint(2, 8), rng.randint(2, 8)
        vals = rng.sample(range(1000), na + nb)
        a, b = vals[:na], vals[na:]
        ref = stats.mannwhitneyu(a, b, alternative="two-sided", method="exact")
        assert rank_sum_test(a, b, "exact").p == pytest.approx(ref.pvalue, abs=1e-12)
        assert rank_sum_test(a, b, "exact").u == ref.statistic
    for _ in range(100):
        a = [rng.randint(0, 20) for _ in range(rng.randint(9, 40))]
        b = [rng.randint(0, 20) for _ in range(rng.randint(9, 40))]
        ref = stats.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True)
        assert rank_sum_test(a, b).p == pytest.approx(ref.pvalue, abs=1e-12)


def _max_normal_gap(samples):
    return max(abs(rank_sum_test(a, b, "exact").p - rank_sum_test(a, b, "normal").p) for a, b in samples)


def _tie_free_worst_gap(lo):
    """Worst |exact - normal| over every attainable U for tie-free samples of sizes lo..8."""
    worst = 0.0
    for na in range(lo, 9):
        for nb in range(lo, 9):
            pooled = list(range(na + nb))
            dist = exact_u_distribution(midranks(pooled), na)
            for u2 in dist:
                gap = abs(_exact_p(u2 / 2, dist) - _normal_p(u2 / 2, na, nb, pooled))
                worst = max(worst, gap)
    return worst


def test_normal_approximation_tie_free_n5_to_8():
    # worst case 0.0173; at n = 4 it grows to 0.0305
    assert _tie_free_worst_gap(5) <= 0.02
    assert _tie_free_worst_gap(4) == pytest.approx(0.0305, abs=5e-4)


@pytest.mark.xfail(strict=True, reason="continuity-corrected normal p is off by up to 0.031 at n=4 "
                                       "without ties and by far more with heavy ties")
def test_normal_approximation_all_small_integer_samples():
    rng = random.Random(0)
    samples = []
    for _ in range(3000):
        na, nb = rng.randint(4, 8), rng.randint(4, 8)
        samples.append(([rng.randint(0, 10) for _ in range(na)], [rng.randint(0, 10) for _ in range(nb)]))
    assert _max_normal_gap(samples) <= 0.02


def test_box_examples():
    assert summarize_box([1, 2, 3, 4, 5]).as_tuple() == (1, 2, 3, 4, 5)
    assert summarize_box([7]).as_tuple() == (7, 7, 7, 7, 7)
    assert summarize_box([1, 2, 3, 4]).as_tuple() == (1, 1.75, 2.5, 3.25, 4)
    with pytest.raises(EmptyInput):
        summarize_box([])


def test_fixture_summary():
    vals = fixture_bot_scores()
    assert len(vals) == 27
    box = summarize_box(vals)
    assert box.min == 0.37 and box.max == 0.60
    assert 0.46 <= box.median <= 0.49
    assert abs(box.mean - 0.48) <= 0.005
