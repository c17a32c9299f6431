import pytest

from hybridbots.clock import DAY, HOUR, DailySchedule
from hybridbots.engine import derive_stream
from hybridbots.humans import (
    POST,
    RETWEET,
    HashtagVocabulary,
    HumanProfile,
    follow_back_decision,
    human_tick,
    next_human_action,
)
from hybridbots.platform import AccountSnapshot

DAYTIME = DailySchedule.fixed([(8 * HOUR, 22 * HOUR)])


def profile(**kw):
    base = dict(post_rate=2.0, retweet_rate=1.0, active_hours=DAYTIME)
    base.update(kw)
    return HumanProfile(**base)


def requester(following, followers):
    return AccountSnapshot(id=0, at=0, followers=followers, following=following)


def test_zero_rates_no_actions():
    p = profile(post_rate=0, retweet_rate=0)
    assert human_tick(p, 0, derive_stream(0, "h")) == []


def test_actions_stay_in_active_hours():
    p = profile(post_rate=20, retweet_rate=10)
    rng = derive_stream(1, "h")
    for kind in (POST, RETWEET):
        t = 0
        for _ in range(2000):
            t = next_human_action(p, kind, t, rng)
            assert 8 * HOUR <= t % DAY < 22 * HOUR


def test_post_rate_six_per_day():
    p = profile(post_rate=6, retweet_rate=0, active_hours=DailySchedule.fixed([(0, DAY)]))
    means = []
    for seed in range(10):
        rng = derive_stream(seed, "rate")
        t, n = 0, 0
        while True:
            t = next_human_action(p, POST, t, rng)
            if t >= 30 * DAY:
                break
            n += 1
        means.append(n / 30)
    assert 5.0 <= sum(means) / len(means) <= 7.0
    assert all(4.0 <= m <= 8.0 for m in means)


def test_follow_back_extremes():
    rng = derive_stream(0, "fb")
    never = profile(follow_back_prob=0.0)
    always = profile(follow_back_prob=1.0)
    meta = requester(10, 10)
    assert not any(follow_back_decision(never, meta, rng).accept for _ in range(500))
    decisions = [follow_back_decision(always, meta, rng) for _ in range(500)]
    assert all(d.accept for d in decisions)
    assert all(1 <= d.latency <= 48 * HOUR for d in decisions)


def test_follow_back_frequency():
    p = profile(follow_back_prob=0.3)
    rng = derive_stream(0, "fb/freq")
    meta = requester(10, 10)
    freq = sum(follow_back_decision(p, meta, rng).accept for _ in range(10_000)) / 10_000
    assert 0.285 <= freq <= 0.315


def test_out_of_band_never_favored():
    p = profile(follow_back_prob=0.3)
    inside, outside = requester(10, 10), requester(500, 10)
    n_in = n_out = 0
    for i in range(10_000):
        # paired trials: both requesters see the same random draws
        n_in += follow_back_decision(p, inside, derive_stream(i, "pair")).accept
        n_out += follow_back_decision(p, outside, derive_stream(i, "pair")).accept
    assert n_out <= n_in
    assert n_out < 0.5 * n_in


def test_latency_median_near_six_hours():
    p = profile(follow_back_prob=1.0)
    rng = derive_stream(0, "lat")
    lat = sorted(follow_back_decision(p, requester(1, 1), rng).latency for _ in range(4001))
    assert 5 * HOUR <= lat[2000] <= 7 * HOUR


def test_profile_validation():
    with pytest.raises(ValueError):
        profile(post_rate=-1)
    with pytest.raises(ValueError):
        profile(follow_back_prob=1.2)
    with pytest.raises(ValueError):
        profile(balanced_ratio_band=(0.0, 2.0))


def test_vocabulary_zipf_head():
    vocab = HashtagVocabulary(100, 1.0)
    rng = derive_stream(0, "vocab")
    draws = [t for _ in range(5000) for t in vocab.draw(rng, 1)]
    assert draws.count(vocab.tags[0]) > draws.count(vocab.tags[9]) > draws.count(vocab.tags[99])
