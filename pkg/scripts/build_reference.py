"""Regenerate the packaged human reference used when no calibration is supplied.

Runs a seeded human-only population through the default setup and productive
days, then fits the class-score transformer on every active account.

    python3 scripts/build_reference.py
"""

import json
from pathlib import Path

from hybridbots.config import parse_config
from hybridbots.detection import ClassScoreTransformer, HistoryBuilder, raw_feature_matrix
from hybridbots.world import Simulation

OUT = Path(__file__).resolve().parents[1] / "src" / "hybridbots" / "data" / "reference.json"
SEED = 20161201


def main() -> None:
    cfg = parse_config(
        {
            "seed": SEED,
            "roster": [],
            "plan": {"n_initially_befriended": 0, "push": {"enabled": False}},
        }
    )
    sim = Simulation.from_config(cfg, keep_log=False)
    sim.run_days(cfg.plan.setup_days + cfg.plan.productive_days)
    builder = HistoryBuilder(sim.platform)
    raw = raw_feature_matrix(builder.histories(builder.active_ids()))
    ref = ClassScoreTransformer().fit(raw).reference_dict()
    ref["source"] = {"seed": SEED, "accounts": int(raw.shape[0])}
    OUT.write_text(json.dumps(ref, indent=2, sort_keys=True) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
