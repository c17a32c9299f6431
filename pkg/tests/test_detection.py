import dataclasses
import math
import random
import warnings
from collections import Counter

import numpy as np
import pytest
from sklearn.base import clone

from hybridbots.clock import DAY, HOUR
from hybridbots.detection import (
    CLASSES,
    AccountHistory,
    BadWeights,
    BotScoreClassifier,
    Calibration,
    ClassScoreTransformer,
    DegenerateCalibrationWarning,
    EmptyHistory,
    EmptyInput,
    FeatureVector,
    HistoryBuilder,
    SingleClassInput,
    aggregate_score,
    calibrate,
    circadian_entropy,
    class_scores,
    default_transformer,
    raw_features,
    simplex_grid,
)
from hybridbots.detection.features import SUBFEATURE_NAMES
from hybridbots.platform import AccountSnapshot, ContentDescriptor, Post, PostKind
from hybridbots.world import Simulation

from conftest import small_config

T0 = 3650 * DAY


def history(times, *, age_days=800.0, completeness=0.8, descriptor=None, followers=20, following=20):
    d = descriptor or ContentDescriptor(length=110, token_entropy=4.2, polarity=0.05, slang_fraction=0.07)
    at = max(times) if times else T0
    posts = [Post(i, 0, t, PostKind.ORIGINAL, d) for i, t in enumerate(times)]
    snap = AccountSnapshot(id=0, at=at, followers=followers, following=following,
                           posts_by_kind={"original": len(posts)}, account_age=int(age_days * DAY),
                           profile_completeness=completeness, locale="de")
    return AccountHistory(snapshot=snap, posts=posts)


def brute_entropy(ts):
    counts = Counter((t % DAY) // HOUR for t in ts)
    n = len(ts)
    return -sum((c / n) * math.log2(c / n) for c in counts.values())


# -- circadian entropy ---------------------------------------------------------------


def test_entropy_examples():
    assert circadian_entropy([14 * HOUR + k for k in range(10)]) == 0.0
    assert circadian_entropy([h * HOUR for h in range(24)]) == pytest.approx(math.log2(24), abs=1e-12)
    assert circadian_entropy([0, 10, HOUR, 2 * HOUR]) == pytest.approx(1.5, abs=1e-12)
    with pytest.raises(EmptyInput):
        circadian_entropy([])


def test_entropy_matches_brute_force():
    rng = random.Random(0)
    for _ in range(2000):
        ts = [rng.randrange(0, 30 * DAY) for _ in range(rng.randint(1, 20))]
        assert abs(circadian_entropy(ts) - brute_entropy(ts)) <= 1e-12


# -- class scores ------------------------------------------------------------------


def test_hourly_round_the_clock_is_temporal_bot():
    h = history([T0 + k * HOUR for k in range(24 * 7)])
    assert class_scores(h).temporal >= 0.9


def test_fresh_incomplete_account_user_score():
    h = history([T0 + 100, T0 + 4000], age_days=0.5, completeness=0.0)
    assert class_scores(h).user >= 0.8


def test_reference_center_scores_low():
    est = default_transformer()
    center = est.center_.copy()
    # typical profile: old account, mostly complete
    center[SUBFEATURE_NAMES.index("youth")] = math.exp(-1000 / 30)
    center[SUBFEATURE_NAMES.index("incompleteness")] = 0.3
    scores = est.transform(center[None, :])[0]
    assert (scores <= 0.5).all()


@pytest.fixture(scope="module")
def human_world():
    cfg = small_config(**{"roster": [], "plan.n_initially_befriended": 0, "plan.push": {"enabled": False},
                          "platform.humans": 1500, "plan.setup_days": 1, "plan.productive_days": 6})
    sim = Simulation.from_config(cfg, 20161201)
    sim.run_days(cfg.plan.total_days)
    b = HistoryBuilder(sim.platform)
    return b.histories(b.active_ids())


def test_median_human_scores_at_most_half(human_world):
    est = ClassScoreTransformer().fit(human_world)
    scores = est.transform(human_world)
    assert (np.median(scores, axis=0) <= 0.5).all()
    # the packaged reference comes from the same kind of run
    assert (np.median(default_transformer().transform(human_world), axis=0) <= 0.5).all()


def test_scores_bounded(human_world):
    s = default_transformer().transform(human_world)
    assert ((s >= 0) & (s <= 1)).all()


def test_permutation_invariance(human_world):
    rng = random.Random(4)
    for h in human_world[:200]:
        shuffled = dataclasses.replace(h, posts=rng.sample(h.posts, len(h.posts)),
                                       retweet_sources=rng.sample(h.retweet_sources, len(h.retweet_sources)))
        np.testing.assert_array_equal(raw_features(h), raw_features(shuffled))


def test_empty_history():
    with pytest.raises(EmptyHistory):
        raw_features(history([]))


def test_history_has_no_archetype():
    names = {f.name for f in dataclasses.fields(AccountHistory)} | {f.name for f in dataclasses.fields(AccountSnapshot)}
    assert not any("archetype" in n for n in names)


def test_feature_vector_bounds():
    with pytest.raises(ValueError):
        FeatureVector(*([0.5] * 6), 1.2)
    assert FeatureVector.from_array([0.1] * 7).as_array().tolist() == [0.1] * 7


# -- aggregation -------------------------------------------------------------------


def test_aggregate_examples():
    w = [1 / 7] * 7
    assert aggregate_score([0.0] * 7, w).value == 0.0
    assert aggregate_score([1.0] * 7, w).value == pytest.approx(1.0)
    assert aggregate_score(FeatureVector(*([0.4] * 7)), w).value == pytest.approx(0.4)


@pytest.mark.parametrize("w", [[0.5] * 7, [-0.1, 0.3, 0.2, 0.2, 0.2, 0.1, 0.1], [1.0] * 6, [float("nan")] + [1 / 6] * 6])
def test_bad_weights(w):
    with pytest.raises(BadWeights):
        aggregate_score([0.5] * 7, w)


def test_simplex_grid():
    g = simplex_grid(7, 0.05)
    assert g.shape == (math.comb(26, 6), 7)
    assert np.allclose(g.sum(axis=1), 1.0) and (g >= 0).all()
    assert len({tuple(np.round(r * 20).astype(int)) for r in g}) == len(g)
    assert simplex_grid(3, 0.5).tolist() == [[0, 0, 1], [0, 0.5, 0.5], [0, 1, 0], [0.5, 0, 0.5], [0.5, 0.5, 0], [1, 0, 0]]


# -- calibration -------------------------------------------------------------------


def test_perfectly_separable():
    rng = np.random.default_rng(0)
    humans = rng.uniform(0.0, 0.4, (40, 7))
    bots = rng.uniform(0.6, 1.0, (10, 7))
    X = np.vstack([humans, bots])
    y = np.r_[np.zeros(40), np.ones(10)]
    clf = BotScoreClassifier().fit(X, y)
    assert clf.balanced_accuracy_ == 1.0
    assert (clf.predict(X) == y).all()
    s = clf.decision_function(X)
    assert clf.threshold_ == pytest.approx((np.median(s[y == 1]) + np.median(s[y == 0])) / 2)
    assert clf.predict_proba(X).shape == (50, 2)


def test_identical_distributions_warn():
    X = np.full((30, 7), 0.5)
    y = np.r_[np.zeros(15), np.ones(15)]
    with pytest.warns(DegenerateCalibrationWarning):
        clf = BotScoreClassifier().fit(X, y)
    assert clf.balanced_accuracy_ == pytest.approx(0.5)


def test_single_class_rejected():
    with pytest.raises(SingleClassInput):
        BotScoreClassifier().fit(np.zeros((5, 7)), np.zeros(5))
    h = history([T0])
    with pytest.raises(SingleClassInput):
        calibrate([(h, "human"), (h, "human")])


def test_estimators_follow_sklearn_conventions():
    for est in (ClassScoreTransformer(squash=3.0), BotScoreClassifier(step=0.1)):
        twin = clone(est)
        assert twin.get_params() == est.get_params()
        assert not hasattr(twin, "weights_") and not hasattr(twin, "center_")


def test_calibration_on_simulated_naive_bots(small_run):
    b = HistoryBuilder(small_run.platform)
    humans = [a for a in small_run.humans if not b.history(a).is_empty()]
    naive = small_run.ids_of("naive_bot_army")
    labeled = [(b.history(a), "human") for a in humans] + [(b.history(a), "naive_bot") for a in naive]
    with warnings.catch_warnings():
        warnings.simplefilter("error", DegenerateCalibrationWarning)
        cal = calibrate(labeled)
    assert cal.balanced_accuracy >= 0.95
    assert (cal.score(b.histories(naive)) > cal.threshold).all()
    again = Calibration.from_dict(cal.to_dict())
    np.testing.assert_array_equal(again.score(b.histories(humans)), cal.score(b.histories(humans)))


def test_from_dict_rejects_other_documents():
    with pytest.raises(ValueError):
        Calibration.from_dict({"schema": "x"})
