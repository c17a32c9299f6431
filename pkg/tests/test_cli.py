import json
import os

import pytest
import yaml

from hybridbots import cli
from hybridbots.io import read_csv
from hybridbots.platform import Platform

SMALL = {
    "seed": 3,
    "platform": {"humans": 600},
    "roster": [
        {"preset": "hybrid_network", "count": 6},
        {"preset": "naive_bot_army", "count": 5},
    ],
    "plan": {
        "n_initially_befriended": 3,
        "setup_days": 1,
        "productive_days": 2,
        "push": {"day": 3, "observe_days": 1},
        "baseline": {"day": 2},
    },
}


@pytest.fixture
def cfg_path(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(SMALL))
    return path


def files_under(root):
    return sorted(os.path.relpath(os.path.join(d, f), root) for d, _, fs in os.walk(root) for f in fs)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """run -> calibrate -> detect -> report on the small config."""
    root = tmp_path_factory.mktemp("pipe")
    cfg = root / "run.yaml"
    cfg.write_text(yaml.safe_dump(SMALL))
    out = root / "out"
    assert cli.main(["--config", str(cfg), "--out", str(out), "--quiet", "run"]) == 0
    assert cli.main(["calibrate", "--quiet", "--out", str(out), "--state", str(out / "state.jsonl"),
                     "--roster", str(out / "roster.json"), "--baseline", str(out / "baseline.json")]) == 0
    assert cli.main(["detect", "--quiet", "--out", str(out), "--state", str(out / "state.jsonl"),
                     "--weights", str(out / "weights.json")]) == 0
    assert cli.main(["report", "--quiet", "--out", str(out), "--scores", str(out / "scores.csv"),
                     "--roster", str(out / "roster.json"), "--baseline", str(out / "baseline.json"),
                     "--fixture"]) == 0
    return root, out


def test_run_outputs(pipeline):
    _, out = pipeline
    names = set(os.listdir(out))
    assert {"events.jsonl", "state.jsonl", "growth.csv", "trending.csv", "roster.json", "baseline.json"} <= names
    rows = read_csv(out / "growth.csv")
    assert len(rows) == 2 * 24 + 1
    assert list(rows[0])[:2] == ["hour", "time"] and list(rows[0])[-1] == "total"
    first = json.loads((out / "events.jsonl").read_text().splitlines()[0])
    assert list(first) == ["seq", "fire_at", "actor", "action", "payload"]


def test_nothing_written_outside_out(pipeline):
    root, out = pipeline
    outside = [f for f in files_under(root) if not f.startswith("out" + os.sep)]
    assert outside == ["run.yaml"]
    assert not any(f.endswith(".tmp") for f in files_under(out))


def test_detect_rows_match_active_accounts(pipeline):
    _, out = pipeline
    with open(out / "state.jsonl") as fh:
        plat = Platform.from_export(fh)
    active = [a for a in range(len(plat.accounts)) if plat.posts_by(a) or plat.followers[a] or plat.following[a]]
    rows = read_csv(out / "scores.csv")
    assert [int(r["account_id"]) for r in rows] == active
    assert list(rows[0]) == cli.SCORE_COLUMNS
    for r in rows:
        assert all(0.0 <= float(r[c]) <= 1.0 for c in cli.SCORE_COLUMNS[2:])


def test_detect_is_idempotent(pipeline, tmp_path):
    _, out = pipeline
    args = ["detect", "--quiet", "--out", str(tmp_path), "--state", str(out / "state.jsonl"),
            "--weights", str(out / "weights.json")]
    assert cli.main(args) == 0
    assert (tmp_path / "scores.csv").read_bytes() == (out / "scores.csv").read_bytes()


def test_detect_truth_column(pipeline, tmp_path):
    _, out = pipeline
    assert cli.main(["detect", "--quiet", "--out", str(tmp_path), "--state", str(out / "state.jsonl"),
                     "--truth", str(out / "roster.json")]) == 0
    rows = read_csv(tmp_path / "scores.csv")
    assert list(rows[0])[-1] == cli.TRUTH_COLUMN
    assert {r[cli.TRUTH_COLUMN] for r in rows} == {"human", "hybrid_bot", "naive_bot"}


def test_report_schema(pipeline):
    _, out = pipeline
    stats = json.loads((out / "stats.json").read_text())
    for name in ("hybrid_bot", "hybrid_group", "hybrid_single", "naive_bot", "baseline", "fixture"):
        assert name in stats["cohorts"]
    for test in stats["tests"].values():
        assert {"U", "p", "method", "alpha", "significant"} <= set(test)
    assert stats["cohorts"]["fixture"]["n"] == 27
    box = read_csv(out / "box_summary.csv")
    assert sorted(r["cohort"] for r in box) == sorted(stats["cohorts"])


def test_weights_document(pipeline):
    _, out = pipeline
    doc = json.loads((out / "weights.json").read_text())
    assert doc["schema"] == "hybridbots-weights"
    assert sum(doc["weights"].values()) == pytest.approx(1.0)
    assert doc["balanced_accuracy"] >= 0.95


def test_run_is_deterministic(cfg_path, tmp_path):
    small = {**SMALL, "plan": {**SMALL["plan"], "push": {"enabled": False}}}
    cfg_path.write_text(yaml.safe_dump(small))
    outs = []
    for name in ("a", "b"):
        assert cli.main(["run", "--config", str(cfg_path), "--seed", "11", "--out", str(tmp_path / name),
                         "--quiet"]) == 0
        outs.append(tmp_path / name)
    for f in ("growth.csv", "events.jsonl", "state.jsonl"):
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    assert json.loads((outs[0] / "roster.json").read_text())["seed"] == 11


def test_malformed_config_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("platform:\n  humanz: 5\n")
    assert cli.main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "platform.humanz" in capsys.readouterr().err
    assert not (tmp_path / "o" / "growth.csv").exists()


def test_usage_errors_exit_2(tmp_path):
    assert cli.main([]) == 2
    assert cli.main(["frobnicate"]) == 2
    assert cli.main(["detect", "--quiet", "--out", str(tmp_path)]) == 2
    assert cli.main(["detect", "--quiet", "--out", str(tmp_path), "--state", str(tmp_path / "nope")]) == 2
    assert cli.main(["report", "--quiet", "--out", str(tmp_path)]) == 2
    assert cli.main(["calibrate", "--quiet", "--out", str(tmp_path)]) == 2
    junk = tmp_path / "junk.jsonl"
    junk.write_text('{"schema": "other"}\n')
    assert cli.main(["detect", "--quiet", "--out", str(tmp_path), "--state", str(junk)]) == 2


def test_help_exit_0(capsys):
    assert cli.main(["--help"]) == 0
    assert "run" in capsys.readouterr().out


def test_runtime_error_exit_3(cfg_path, tmp_path, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("disk on fire")

    monkeypatch.setattr(cli.Simulation, "from_config", boom)
    assert cli.main(["run", "--quiet", "--config", str(cfg_path), "--out", str(tmp_path)]) == 3


def test_detect_empty_export(tmp_path):
    state = tmp_path / "empty.jsonl"
    state.write_text(Platform().export_text())
    assert cli.main(["detect", "--quiet", "--out", str(tmp_path / "o"), "--state", str(state)]) == 0
    assert (tmp_path / "o" / "scores.csv").read_text() == ",".join(cli.SCORE_COLUMNS) + "\n"


def test_report_single_member_cohort(tmp_path):
    scores = tmp_path / "scores.csv"
    lines = [",".join(cli.SCORE_COLUMNS)]
    lines.append("0,de," + ",".join(["0.5"] * 7) + ",0.42")
    for i in range(1, 12):
        lines.append(f"{i},de," + ",".join(["0.3"] * 7) + f",0.{10 + i}")
    scores.write_text("\n".join(lines) + "\n")
    roster = tmp_path / "roster.json"
    roster.write_text(json.dumps({"seed": 0, "bots": [{"account_id": 0, "archetype": "hybrid_bot", "clique": True}]}))
    assert cli.main(["report", "--quiet", "--out", str(tmp_path / "o"), "--scores", str(scores),
                     "--roster", str(roster), "--fixture"]) == 0
    stats = json.loads((tmp_path / "o" / "stats.json").read_text())
    hb = stats["cohorts"]["hybrid_bot"]
    assert hb["n"] == 1 and hb["min"] == hb["q1"] == hb["median"] == hb["q3"] == hb["max"] == 0.42
    assert stats["tests"]["fixture_vs_baseline"]["p"] < 0.05
    assert stats["tests"]["fixture_vs_baseline"]["method"] == "normal"


def test_calibrate_unreachable_growth_exit_3(cfg_path, tmp_path):
    code = cli.main(["calibrate", "--quiet", "--config", str(cfg_path), "--out", str(tmp_path),
                     "--growth-target", "100000", "--growth-seeds", "1"])
    assert code == 3
    doc = json.loads((tmp_path / "growth_calibration.json").read_text())
    assert doc["unreachable"] is True
