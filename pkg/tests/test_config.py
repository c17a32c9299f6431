import json
from importlib import resources

import pytest

from hybridbots.config import ConfigError, load_config, parse_config


def test_defaults():
    cfg = parse_config({})
    assert cfg.platform.humans == 10_000
    assert cfg.n_bots == 30
    assert cfg.plan.n_initially_befriended == 15
    assert (cfg.plan.setup_days, cfg.plan.productive_days) == (2, 8)
    assert cfg.plan.baseline.times == ["00:00", "06:00", "12:00", "18:00"]
    assert cfg.plan.baseline.coverage == 0.10
    assert cfg.platform.stream_coverage == 0.10


def test_packaged_example_matches_defaults(tmp_path):
    text = resources.files("hybridbots.data").joinpath("example_config.yaml").read_text(encoding="utf-8")
    path = tmp_path / "c.yaml"
    path.write_text(text)
    assert load_config(path) == parse_config({})


@pytest.mark.parametrize(
    "data,needle",
    [
        ({"platfrom": {}}, "platfrom"),
        ({"platform": {"humans": -1}}, "platform.humans"),
        ({"platform": {"stream_coverage": 0.9}}, "platform.stream_coverage"),
        ({"roster": [{"preset": "nope", "count": 1}]}, "roster.0.preset"),
        ({"roster": [{"preset": "hybrid_network", "count": 2, "overrides": {"speed": 1}}]}, "speed"),
        ({"roster": [{"preset": "hybrid_network", "count": 2, "per_bot": {5: {}}}]}, "per_bot"),
        ({"humans": {"follow_back_prob": 2}}, "humans.follow_back_prob"),
        ({"plan": {"n_initially_befriended": 40}}, "n_initially_befriended"),
        ({"version": 2}, "version"),
    ],
)
def test_rejections_name_the_key(data, needle):
    with pytest.raises(ConfigError) as err:
        parse_config(data)
    assert needle in str(err.value)


def test_non_mapping():
    with pytest.raises(ConfigError):
        parse_config([1, 2])


def test_load_json_and_yaml(tmp_path):
    j = tmp_path / "c.json"
    j.write_text(json.dumps({"seed": 4, "platform": {"humans": 10}}))
    y = tmp_path / "c.yaml"
    y.write_text("seed: 4\nplatform:\n  humans: 10\n")
    assert load_config(j) == load_config(y)
    assert load_config(j).seed == 4


def test_unreadable_and_unparsable(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("a: [1, 2\n")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_with_updates():
    cfg = parse_config({}).with_updates(**{"humans.follow_back_prob": 0.35, "seed": 9})
    assert cfg.humans.follow_back_prob == 0.35 and cfg.seed == 9


def test_plan_days():
    plan = parse_config({"plan": {"push": {"observe_days": 3}}}).plan
    assert plan.push_day == 10
    assert plan.total_days == 13
    assert parse_config({"plan": {"push": {"enabled": False}}}).plan.total_days == 10
