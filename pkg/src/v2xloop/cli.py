"""Command-line front end: run, batch, sweep, report, replay."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .harness import replay, run_batch, run_episode, run_sweep
from .logio import read_json, write_json
from .scenarios import (SCENARIO_IDS, build_scenario, spec_from_dict,
                        spec_to_dict)

# ablation switch per scenario: the flag each builder exposes
_ABLATIONS = {"s2": ("v2x_off", "v2x_enabled"),
              "s3": ("updates_off", "updates_enabled"),
              "s4": ("gate_off", "gate_enabled")}


def parse_seeds(text: str) -> list[int]:
    """'1..30' inclusive range, or comma-separated values, or one seed."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValueError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    return [int(v) for v in text.split(",") if v.strip() != ""]


def _load_spec(args):
    if args.config is not None:
        spec = spec_from_dict(read_json(args.config))
        if args.scenario is not None and spec.scenario_id != args.scenario:
            raise SystemExit(f"--config is for {spec.scenario_id!r}, "
                             f"--scenario says {args.scenario!r}")
        return spec
    if args.scenario is None:
        raise SystemExit("need --scenario or --config")
    kwargs = {}
    if getattr(args, "ablation", False):
        if args.scenario not in _ABLATIONS:
            raise SystemExit(f"{args.scenario} has no ablation switch")
        _, flag = _ABLATIONS[args.scenario]
        kwargs[flag] = False
    return build_scenario(args.scenario, **kwargs)


def _fmt_value(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return f"{v:.4g}"
    return str(v)


def _print_metrics(metrics: dict) -> None:
    order = ["termination", "sim_time", "completion", "progress_fraction",
             "lateral_rmse", "heading_rmse_deg", "ttc_min", "collisions",
             "v2x_reaction_ms", "update_activation_s", "trigger_latency_ms",
             "mota", "motp", "id_switches", "false_positive_rate",
             "false_negative_rate", "steer_variance", "throttle_variance",
             "brake_energy"]
    width = max(len(k) for k in order)
    for key in order:
        if key in metrics:
            print(f"  {key:<{width}}  {_fmt_value(metrics[key])}")


def cmd_run(args) -> int:
    spec = _load_spec(args)
    out = Path(args.out) if args.out else None
    result = run_episode(spec, args.seed, out)
    if out is not None:
        write_json(out / "scenario.json", spec_to_dict(spec))
    print(f"{spec.scenario_id} seed={args.seed} -> {result.metrics.termination} "
          f"at t={result.metrics.sim_time:.2f}s")
    _print_metrics(result.summary["metrics"])
    if out is not None:
        print(f"outputs in {out}")
    return 0


def cmd_batch(args) -> int:
    spec = _load_spec(args)
    seeds = parse_seeds(args.seeds)
    out = Path(args.out) if args.out else None
    results, payload = run_batch(spec, seeds, out)
    if out is not None:
        write_json(out / "scenario.json", spec_to_dict(spec))
    agg = payload["aggregate"]
    print(f"{spec.scenario_id}: {len(results)} episodes")
    print(f"  completion_rate      {agg['completion_rate']:.3f}")
    print(f"  collision_episodes   {agg['collision_episodes']}")
    for key in ("lateral_rmse", "v2x_reaction_ms", "update_activation_s",
                "false_positive_rate", "false_negative_rate", "mota"):
        cell = agg.get(key)
        if isinstance(cell, dict) and cell.get("mean") is not None:
            print(f"  {key:<20} {cell['mean']:.4g} (sd {cell['sd']:.3g})")
    if out is not None:
        print(f"outputs in {out}")
    return 0


def cmd_sweep(args) -> int:
    grid = read_json(args.grid)
    scenario_ids = [s.strip() for s in args.scenarios.split(",") if s.strip()]
    for sid in scenario_ids:
        if sid not in SCENARIO_IDS:
            raise SystemExit(f"unknown scenario {sid!r}")
    seeds = parse_seeds(args.seeds)
    out = Path(args.out) if args.out else None
    result = run_sweep(grid, scenario_ids, seeds, out)
    print(f"swept {len(result.points)} configs over {scenario_ids} x {len(seeds)} seeds")
    print(f"  frontier size        {len(result.frontier)}")
    print(f"  discarded (collided) {result.discarded_collided}")
    if result.knee is not None:
        print(f"  knee                 {result.knee.config_id} "
              f"J={tuple(round(v, 4) for v in result.knee.objectives)}")
    if result.hypervolume is not None:
        print(f"  hypervolume          {result.hypervolume:.4f}")
    if out is not None:
        print(f"outputs in {out}")
    return 0


def cmd_report(args) -> int:
    root = Path(args.in_dir)
    if (root / "summary.json").exists():
        summary = read_json(root / "summary.json")
        print(f"episode {summary['scenario_id']} seed={summary['seed']}: "
              f"{summary['termination']} at t={summary['sim_time']:.2f}s")
        _print_metrics(summary["metrics"])
        return 0
    if (root / "batch.json").exists():
        payload = read_json(root / "batch.json")
        agg = payload["aggregate"]
        print(f"batch {payload['scenario_id']}: {agg['episodes']} episodes, "
              f"completion_rate={agg['completion_rate']:.3f}, "
              f"collisions={agg['collision_episodes']}")
        print(f"{'seed':>6}  {'termination':<14} {'rmse':>8} {'ttc':>8} "
              f"{'fpr':>6} {'fnr':>6}")
        for ep in payload["episodes"]:
            m = ep["metrics"]
            print(f"{ep['seed']:>6}  {m['termination']:<14} "
                  f"{_fmt_value(m['lateral_rmse']):>8} "
                  f"{_fmt_value(m['ttc_min']):>8} "
                  f"{_fmt_value(m['false_positive_rate']):>6} "
                  f"{_fmt_value(m['false_negative_rate']):>6}")
        return 0
    if (root / "pareto.json").exists():
        payload = read_json(root / "pareto.json")
        print(f"sweep over {payload['scenario_ids']} seeds={payload['seeds']}")
        print(f"  frontier: {', '.join(payload['frontier'])}")
        if payload.get("knee"):
            print(f"  knee: {payload['knee']['config_id']} "
                  f"J={[round(v, 4) for v in payload['knee']['objectives']]}")
        print(f"  hypervolume: {_fmt_value(payload.get('hypervolume'))}")
        print(f"  discarded_collided: {payload['discarded_collided']}")
        return 0
    raise SystemExit(f"no summary.json, batch.json, or pareto.json under {root}")


def cmd_replay(args) -> int:
    from dataclasses import asdict

    from .logio import _round_floats

    root = Path(args.log)
    metrics = replay(root)
    print(f"replayed {root}")
    _print_metrics(asdict(metrics))
    summary_path = root / "summary.json"
    if not summary_path.exists() and root.name == "logs":
        summary_path = root.parent / "summary.json"
    if summary_path.exists():
        stored = read_json(summary_path)["metrics"]
        recomputed = json.loads(json.dumps(_round_floats(asdict(metrics))))
        if recomputed == stored:
            print("replay matches stored summary")
            return 0
        diffs = {k for k in stored if stored[k] != recomputed.get(k)}
        print(f"REPLAY MISMATCH in fields: {sorted(diffs)}")
        return 1
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="v2xloop",
        description="Closed-loop V2X fusion, gating, and replanning testbed")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_scenario_opts(p):
        p.add_argument("--scenario", choices=SCENARIO_IDS, default=None)
        p.add_argument("--config", default=None,
                       help="JSON scenario document (overrides --scenario)")
        p.add_argument("--ablation", action="store_true",
                       help="disable the scenario's subject capability "
                            "(s2: V2X, s3: updates, s4: gate)")

    p_run = sub.add_parser("run", help="run one seeded episode")
    add_scenario_opts(p_run)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_batch = sub.add_parser("batch", help="run one scenario over many seeds")
    add_scenario_opts(p_batch)
    p_batch.add_argument("--seeds", required=True, help="e.g. 1..30 or 1,2,5")
    p_batch.add_argument("--out", default=None)
    p_batch.set_defaults(func=cmd_batch)

    p_sweep = sub.add_parser("sweep", help="grid-sweep operating points")
    p_sweep.add_argument("--grid", required=True,
                         help="JSON file: {field: [values, ...], ...}")
    p_sweep.add_argument("--scenarios", default="s1,s2",
                         help="comma-separated scenario ids")
    p_sweep.add_argument("--seeds", default="0..4")
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_report = sub.add_parser("report", help="summarize a results directory")
    p_report.add_argument("--in", dest="in_dir", required=True)
    p_report.set_defaults(func=cmd_report)

    p_replay = sub.add_parser("replay", help="recompute metrics from logs")
    p_replay.add_argument("--log", required=True,
                          help="episode output directory (or its logs/)")
    p_replay.set_defaults(func=cmd_replay)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
