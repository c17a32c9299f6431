import pytest

from hybridbots.config import parse_config
from hybridbots.platform import ContentDescriptor, Platform
from hybridbots.world import Simulation


def small_config(**over):
    """A few hundred humans and a handful of bots; runs in about a second."""
    data = {
        "seed": 7,
        "platform": {"humans": 400},
        "roster": [
            {"preset": "hybrid_network", "count": 6},
            {"preset": "naive_bot_army", "count": 3},
            {"preset": "reactive", "count": 1},
        ],
        "plan": {
            "n_initially_befriended": 3,
            "setup_days": 1,
            "productive_days": 3,
            "push": {"enabled": True, "day": 3, "observe_days": 1},
            "baseline": {"day": 2},
        },
    }
    for key, value in over.items():
        node = data
        *path, last = key.split(".")
        for k in path:
            node = node.setdefault(k, {})
        node[last] = value
    return parse_config(data)


@pytest.fixture
def desc():
    def make(**kw):
        base = dict(length=80, token_entropy=4.0, hashtags=(), emoticon_count=0, polarity=0.0, slang_fraction=0.1)
        base.update(kw)
        return ContentDescriptor(**base)

    return make


@pytest.fixture
def platform():
    return Platform()


@pytest.fixture(scope="session")
def small_run():
    cfg = small_config()
    sim = Simulation.from_config(cfg)
    sim.run_days(cfg.plan.total_days)
    return sim
