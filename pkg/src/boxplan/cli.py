"""Command-line harness.

Subcommands:
  run        one agent configuration; writes episodes.csv (+ config echo)
  sweep      stepsize/temperature grid search; writes selection.csv
  diag       run with the uncertainty-error diagnostic column filled
  aggregate  episodes.csv -> smoothed curve CSV (episode, mean, stderr)

Configurations come from a YAML file (--config), a shipped preset
(--preset group/agent), or flags; flags override file values.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness.config import (
    AgentConfig,
    ExperimentConfig,
    load_config,
    load_preset,
    preset_names,
)
from .harness.records import aggregate, read_records, write_curve, write_records
from .harness.runner import run_experiment
from .harness.sweep import sweep_and_select, write_selection


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="experiment YAML file")
    p.add_argument("--preset", help="preset name '<group>/<agent>' or '<group>' with --agent")
    p.add_argument("--env", help="goright | goright10 | acrobot | acrobot-distractor")
    p.add_argument("--agent", help="agent name within the preset group")
    p.add_argument("--alpha", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--episodes", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int)


def _resolve_config(args) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        if "/" not in args.preset and not args.agent:
            raise SystemExit("--preset needs '<group>/<agent>' or a '<group>' plus --agent")
        name = args.preset if "/" in args.preset else f"{args.preset}/{args.agent}"
        cfg = load_preset(name)
    elif args.env:
        # bare --env runs the model-free baseline
        cfg = ExperimentConfig(
            env=args.env, agent=AgentConfig(label="q-learning", model="none", horizon=1, alpha=0.1)
        )
    else:
        raise SystemExit("one of --config, --preset, or --env is required")
    overrides = {}
    if args.env:
        overrides["env"] = args.env
    for name, key in (
        ("trials", "trials"),
        ("episodes", "episodes"),
        ("seed", "seed"),
        ("threads", "threads"),
    ):
        value = getattr(args, name)
        if value is not None:
            overrides[key] = value
    if args.out:
        overrides["out_dir"] = args.out
    agent_overrides = {}
    if args.alpha is not None:
        agent_overrides["alpha"] = args.alpha
    if args.tau is not None:
        agent_overrides["tau"] = args.tau
    if agent_overrides:
        overrides["agent"] = agent_overrides
    return cfg.replace(**overrides) if overrides else cfg


def _cmd_run(args) -> int:
    cfg = _resolve_config(args)
    if cfg.out_dir is None:
        cfg = cfg.replace(out_dir="results")
    records = run_experiment(cfg)
    last = [r.eval_return for r in records if r.episode == cfg.resolved_episodes - 1]
    print(
        f"{cfg.agent.label}: {cfg.trials} trial(s) x {cfg.resolved_episodes} episodes"
        f" -> {Path(cfg.out_dir) / 'episodes.csv'}"
    )
    print(f"final-episode eval return (mean over trials): {sum(last) / len(last):.4f}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _resolve_config(args)
    alphas = [float(x) for x in args.alphas.split(",")] if args.alphas else None
    taus = [float(x) for x in args.taus.split(",")] if args.taus else None
    result = sweep_and_select(cfg, alphas=alphas, taus=taus, trials=args.trials or 10)
    out = Path(cfg.out_dir or "results")
    out.mkdir(parents=True, exist_ok=True)
    write_selection(result, out / "selection.csv")
    print(f"baseline: alpha={result.baseline_alpha} final={result.baseline_final:.4f}")
    print(f"selected: alpha={result.selected_alpha} tau={result.selected_tau}")
    print(f"table -> {out / 'selection.csv'}")
    return 0


def _cmd_diag(args) -> int:
    cfg = _resolve_config(args).replace(diag=True)
    if cfg.out_dir is None:
        cfg = cfg.replace(out_dir="results")
    records = run_experiment(cfg)
    errs = [r.median_unc_error for r in records if r.median_unc_error is not None]
    mean_err = sum(errs) / len(errs) if errs else float("nan")
    print(f"mean per-episode median uncertainty error: {mean_err:.6f}")
    print(f"episodes table -> {Path(cfg.out_dir) / 'episodes.csv'}")
    return 0


def _cmd_aggregate(args) -> int:
    records = read_records(args.episodes_csv)
    rows = aggregate(records, column=args.column, window=args.window)
    write_curve(rows, args.out)
    print(f"curve ({len(rows)} points) -> {args.out}")
    return 0


def _cmd_presets(_args) -> int:
    for name in preset_names():
        print(name)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="boxplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one agent configuration")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid search over alpha and tau")
    _add_common(p_sweep)
    p_sweep.add_argument("--alphas", help="comma-separated stepsize grid")
    p_sweep.add_argument("--taus", help="comma-separated temperature grid")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_diag = sub.add_parser("diag", help="run with the uncertainty-error diagnostic")
    _add_common(p_diag)
    p_diag.set_defaults(func=_cmd_diag)

    p_agg = sub.add_parser("aggregate", help="episodes CSV -> smoothed curve CSV")
    p_agg.add_argument("episodes_csv")
    p_agg.add_argument("--out", required=True)
    p_agg.add_argument("--column", default="eval_return", choices=["eval_return", "train_return"])
    p_agg.add_argument("--window", type=int, default=100)
    p_agg.set_defaults(func=_cmd_aggregate)

    p_presets = sub.add_parser("presets", help="list shipped preset names")
    p_presets.set_defaults(func=_cmd_presets)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
