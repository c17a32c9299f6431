"""Command-line pipeline: ``run`` -> ``calibrate`` -> ``detect`` -> ``report``.

Exit codes: 0 success, 2 usage or input error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .clock import DAY
from .config import ConfigError, RunConfig, load_config, parse_config
from .detection import CLASSES, Calibration, HistoryBuilder, SingleClassInput, calibrate, default_transformer
from .engine import write_log
from .experiment import (
    Unreachable,
    baseline_instants,
    calibrate_growth,
    growth_curve,
    sample_run_baseline,
    trending_report,
)
from .io import atomic_write_lines, atomic_writer, read_csv, read_json, write_csv, write_json
from .platform import Platform, StateSchemaError
from .stats import fixture_bot_scores, rank_sum_test, summarize_box
from .world import Simulation

log = logging.getLogger("hybridbots")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3
SCORE_COLUMNS = ["account_id", "locale", *CLASSES, "aggregate"]
TRUTH_COLUMN = "truth_archetype"


class UsageError(Exception):
    """Bad arguments or unusable input files (exit code 2)."""


# -- helpers ------------------------------------------------------------------


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else parse_config({})
    if args.seed is not None:
        cfg = cfg.with_updates(seed=args.seed)
    return cfg


def _out_dir(args, cfg: RunConfig | None = None) -> Path:
    out = Path(args.out) if args.out else Path(cfg.output_dir if cfg else "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require(path: str | None, what: str) -> Path:
    if not path:
        raise UsageError(f"missing required input: {what}")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {p}")
    return p


def _load_state(path: Path) -> Platform:
    with open(path, encoding="utf-8") as fh:
        try:
            return Platform.from_export(fh)
        except (StateSchemaError, json.JSONDecodeError, KeyError, TypeError) as err:
            raise UsageError(f"invalid state export {path}: {err}") from None


def _load_roster(path: Path) -> dict[int, dict]:
    doc = read_json(path)
    try:
        return {int(r["account_id"]): r for r in doc["bots"]}
    except (KeyError, TypeError) as err:
        raise UsageError(f"invalid roster file {path}: {err}") from None


def _load_calibration(path: Path) -> Calibration:
    try:
        return Calibration.from_dict(read_json(path))
    except (ValueError, KeyError, TypeError) as err:
        raise UsageError(f"invalid weights file {path}: {err}") from None


# -- run ----------------------------------------------------------------------


def cmd_run(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    sim = Simulation.from_config(cfg)
    plan = cfg.plan
    log.info("simulating %d days with %d humans and %d bots", plan.total_days, cfg.platform.humans,
             sum(g.count for g in cfg.roster))
    sim.run_days(plan.total_days)

    with atomic_writer(out / "events.jsonl") as fh:
        write_log(sim.engine.log, fh)
    atomic_write_lines(out / "state.jsonl", sim.platform.export_lines())

    hybrids = sim.ids_of("hybrid_network")
    handles = {a.id: a.handle for a in sim.platform.accounts}
    curve = growth_curve(sim.engine.log, hybrids, sim.t0 + plan.setup_days * DAY, plan.productive_days)
    write_csv(out / "growth.csv", *curve.rows(handles))

    if plan.push.enabled:
        header, rows = trending_report(sim).csv_rows()
        write_csv(out / "trending.csv", header, rows)

    roster = [
        {
            "account_id": r.account_id,
            "handle": handles[r.account_id],
            "preset": r.preset,
            "archetype": sim.platform.accounts[r.account_id].archetype.value,
            "group": r.group,
            "clique": r.clique,
        }
        for r in sim.roster
    ]
    write_json(out / "roster.json", {"seed": sim.seed, "bots": roster})
    try:
        baseline = sample_run_baseline(sim)
        write_json(
            out / "baseline.json",
            {
                "instants": baseline_instants(cfg, sim.t0),
                "coverage": plan.baseline.coverage,
                "window_s": plan.baseline.window_s,
                "locale": plan.baseline.locale,
                "accounts": baseline,
            },
        )
    except ValueError as err:
        log.warning("no baseline sample: %s", err)
    log.info("final follower total %d; outputs in %s", curve.final_total, out)
    return EXIT_OK


# -- detect -------------------------------------------------------------------


def score_rows(platform: Platform, cal: Calibration | None) -> list[list]:
    builder = HistoryBuilder(platform)
    ids = builder.active_ids()
    if not ids:
        return []
    histories = builder.histories(ids)
    if cal is None:
        scores = default_transformer().transform(histories)
        agg = scores.mean(axis=1)
    else:
        scores = cal.class_scores(histories)
        agg = cal.classifier.decision_function(scores)
    return [
        [h.account_id, h.locale, *(float(v) for v in row), float(a)]
        for h, row, a in zip(histories, scores, agg)
    ]


def cmd_detect(args) -> int:
    state = _require(args.state, "--state (platform state export)")
    cal = _load_calibration(_require(args.weights, "--weights")) if args.weights else None
    platform = _load_state(state)
    rows = score_rows(platform, cal)
    header = list(SCORE_COLUMNS)
    if args.truth:
        # evaluation-only column, kept last and clearly named
        roster = _load_roster(_require(args.truth, "--truth roster"))
        header.append(TRUTH_COLUMN)
        for row in rows:
            bot = roster.get(row[0])
            row.append(bot["archetype"] if bot else "human")
    out = _out_dir(args)
    write_csv(out / "scores.csv", header, rows)
    log.info("scored %d accounts -> %s", len(rows), out / "scores.csv")
    return EXIT_OK


# -- calibrate ----------------------------------------------------------------


def cmd_calibrate(args) -> int:
    out = _out_dir(args)
    if args.growth_target is not None:
        cfg = _config(args)
        seeds = [cfg.seed + i for i in range(args.growth_seeds)]
        try:
            res = calibrate_growth(
                cfg,
                args.growth_target,
                args.tolerance,
                seeds,
                progress=lambda ev: log.info("p=%.5f mean total %.1f", ev.follow_back_prob, ev.mean_total),
            )
        except Unreachable as err:
            log.error("%s", err)
            write_json(out / "growth_calibration.json", {"target": err.target, "unreachable": True,
                                                         "max_total": err.max_total})
            return EXIT_RUNTIME
        write_json(
            out / "growth_calibration.json",
            {
                "target": res.target,
                "tolerance": args.tolerance,
                "seeds": seeds,
                "follow_back_prob": res.follow_back_prob,
                "evaluations": [
                    {"follow_back_prob": e.follow_back_prob, "totals": e.totals, "mean_total": e.mean_total}
                    for e in res.evaluations
                ],
            },
        )
        log.info("follow_back_prob %.5f", res.follow_back_prob)
        if not args.state:
            return EXIT_OK

    platform = _load_state(_require(args.state, "--state (platform state export)"))
    roster = _load_roster(_require(args.roster, "--roster"))
    exclude: set[int] = set()
    if args.baseline:
        exclude = set(read_json(_require(args.baseline, "--baseline"))["accounts"])
    bots = sorted(a for a, r in roster.items() if r["archetype"] == "naive_bot")
    builder = HistoryBuilder(platform)
    active = set(builder.active_ids())
    humans = sorted(a for a in active if a not in roster and a not in exclude)
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    if len(humans) > args.humans:
        humans = sorted(rng.choice(humans, size=args.humans, replace=False).tolist())
    labeled = [(builder.history(a), "human") for a in humans]
    labeled += [(builder.history(b), "naive_bot") for b in bots if b in active]
    try:
        cal = calibrate(labeled)
    except SingleClassInput as err:
        raise UsageError(str(err)) from None
    write_json(out / "weights.json", cal.to_dict())
    log.info("balanced accuracy %.3f, threshold %.4f", cal.balanced_accuracy, cal.threshold)
    return EXIT_OK


# -- report -------------------------------------------------------------------


def _cohorts(scores: list[dict], roster: dict[int, dict], baseline: set[int] | None) -> dict[str, list[float]]:
    by_id = {int(r["account_id"]): float(r["aggregate"]) for r in scores}
    hybrids = [a for a, r in roster.items() if r["archetype"] == "hybrid_bot"]
    cohorts = {
        "hybrid_bot": [by_id[a] for a in sorted(hybrids) if a in by_id],
        "hybrid_group": [by_id[a] for a in sorted(hybrids) if a in by_id and roster[a].get("clique")],
        "hybrid_single": [by_id[a] for a in sorted(hybrids) if a in by_id and not roster[a].get("clique")],
        "naive_bot": [by_id[a] for a, r in sorted(roster.items()) if r["archetype"] == "naive_bot" and a in by_id],
    }
    base_ids = baseline if baseline is not None else {a for a in by_id if a not in roster}
    cohorts["baseline"] = [by_id[a] for a in sorted(base_ids) if a in by_id]
    return cohorts


def cmd_report(args) -> int:
    scores = read_csv(_require(args.scores, "--scores"))
    missing = [c for c in ("account_id", "aggregate") if scores and c not in scores[0]]
    if missing:
        raise UsageError(f"scores file lacks columns {missing}")
    roster = _load_roster(_require(args.roster, "--roster")) if args.roster else {}
    baseline = set(read_json(_require(args.baseline, "--baseline"))["accounts"]) if args.baseline else None
    cohorts = _cohorts(scores, roster, baseline)
    if args.fixture:
        cohorts["fixture"] = fixture_bot_scores()
    summaries = {k: summarize_box(v).to_dict() for k, v in cohorts.items() if v}
    tests = {}
    if cohorts["baseline"]:
        for name in ("hybrid_bot", "hybrid_group", "hybrid_single", "naive_bot", "fixture"):
            if cohorts.get(name):
                res = rank_sum_test(cohorts[name], cohorts["baseline"])
                tests[f"{name}_vs_baseline"] = {**res.to_dict(), "alpha": 0.05,
                                                "significant": res.p < 0.05}
    out = _out_dir(args)
    write_json(out / "stats.json", {"cohorts": summaries, "tests": tests})
    write_csv(
        out / "box_summary.csv",
        ["cohort", "n", "min", "q1", "median", "q3", "max", "mean"],
        [[k, s["n"], s["min"], s["q1"], s["median"], s["q3"], s["max"], s["mean"]] for k, s in summaries.items()],
    )
    for k, t in tests.items():
        log.info("%s: U=%.1f p=%.3g", k, t["U"], t["p"])
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="run configuration (YAML or JSON)")
    common.add_argument("--seed", type=int, metavar="N", help="override the root seed")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--quiet", action="store_true", help="only print errors")

    parser = argparse.ArgumentParser(prog="hybridbots", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    # subcommands accept the global flags too; SUPPRESS keeps values given before the subcommand
    sub_common = argparse.ArgumentParser(add_help=False)
    for action in common._actions:
        kwargs = {"help": action.help, "default": argparse.SUPPRESS}
        if isinstance(action, argparse._StoreTrueAction):
            sub_common.add_argument(*action.option_strings, action="store_true", **kwargs)
        else:
            sub_common.add_argument(*action.option_strings, type=action.type, metavar=action.metavar, **kwargs)

    p = sub.add_parser("run", parents=[sub_common], help="simulate the experiment plan")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("detect", parents=[sub_common], help="score every active account of a state export")
    p.add_argument("--state", metavar="PATH", help="state.jsonl written by run")
    p.add_argument("--weights", metavar="PATH", help="weights.json written by calibrate")
    p.add_argument("--truth", metavar="PATH", help="roster.json; appends an evaluation-only archetype column")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("calibrate", parents=[sub_common], help="fit detector weights (and optionally growth)")
    p.add_argument("--state", metavar="PATH")
    p.add_argument("--roster", metavar="PATH")
    p.add_argument("--baseline", metavar="PATH", help="baseline.json; its accounts are left out of training")
    p.add_argument("--humans", type=int, default=500, help="human accounts in the training set")
    p.add_argument("--growth-target", type=float, metavar="N", help="fit follow-back probability to N followers")
    p.add_argument("--growth-seeds", type=int, default=5)
    p.add_argument("--tolerance", type=float, default=0.1)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("report", parents=[sub_common], help="cohort box summaries and rank-sum tests")
    p.add_argument("--scores", metavar="PATH")
    p.add_argument("--roster", metavar="PATH")
    p.add_argument("--baseline", metavar="PATH")
    p.add_argument("--fixture", action="store_true", help="add the packaged 27-bot score fixture as a cohort")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(
        level=logging.ERROR if args.quiet else logging.INFO,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        return args.func(args)
    except (ConfigError, UsageError) as err:
        log.error("%s", err)
        return EXIT_USAGE
    except Exception as err:  # noqa: BLE001 - map every other failure to the runtime exit code
        log.exception("runtime error: %s", err)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
