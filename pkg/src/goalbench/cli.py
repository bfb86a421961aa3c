"""Command-line interface: run / certify / summarize."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import certificates as certs
from .environments import ENV_NAMES, make_env
from .env_core import ConfigurationError
from .runner import (
    AGENT_NAMES,
    RunConfig,
    config_from_tree,
    parse_config_text,
    read_episode_csv,
    read_summary_csv,
    run_experiment,
)


def parse_seeds(text: str):
    """Accept '1..10' ranges and comma lists like '1,2,5'."""
    text = text.strip()
    if ".." in text:
        a, b = text.split("..", 1)
        return tuple(range(int(a), int(b) + 1))
    return tuple(int(tok) for tok in text.split(",") if tok)


def _cmd_run(args) -> int:
    tree = {}
    if args.config:
        tree = parse_config_text(Path(args.config).read_text(encoding="utf-8"))
    cfg = config_from_tree(tree) if tree else RunConfig()
    overrides = {}
    if args.agent:
        overrides["agent"] = args.agent
    if args.env:
        overrides["env"] = args.env
    if args.seeds:
        overrides["seeds"] = parse_seeds(args.seeds)
    if args.episodes is not None:
        overrides["episodes"] = args.episodes
    if args.out:
        overrides["output_dir"] = args.out
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if args.integrator:
        overrides["integrator"] = args.integrator
    cfg = replace(cfg, **overrides)
    manifest = run_experiment(cfg)
    print(f"wrote {len(manifest)} files under {cfg.output_dir}")
    return 0


def _iter_seed_dirs(root: Path):
    for agent_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for env_dir in sorted(p for p in agent_dir.iterdir() if p.is_dir()):
            seed_dirs = sorted(p for p in env_dir.iterdir()
                               if p.is_dir() and p.name.startswith("seed_"))
            if seed_dirs:
                yield agent_dir.name, env_dir.name, seed_dirs


def _cmd_certify(args) -> int:
    root = Path(args.indir)
    if not root.is_dir():
        print(f"certify: no such directory: {root}", file=sys.stderr)
        return 2
    lines = []
    for agent, env, seed_dirs in _iter_seed_dirs(root):
        try:
            spec = make_env(env)
        except ConfigurationError:
            continue
        episodes = []
        for sd in seed_dirs:
            episodes.extend(sorted(sd.glob("episode_*.csv")))
        if not episodes:
            continue
        logs = [read_episode_csv(p) for p in episodes]
        reached = [log.entered_goal(spec) for log in logs]
        entry_steps = [log.first_entry_step(spec) for log in logs]
        entry_steps = [e for e in entry_steps if e is not None]
        stats = certs.ReachingStats(n_runs=len(logs), n_reached=sum(reached),
                                    delta=args.delta)
        dists = [spec.goal.distance(log.states) for log in logs]
        env_fit = certs.fit_exp_envelope(dists)
        nu_bar = args.nu_bar if args.nu_bar is not None else 1e-3 * spec.dt

        lines.append(f"run: {agent}/{env}")
        lines.append(f"episodes: {len(logs)}")
        lines.append(f"reached: {sum(reached)}")
        lines.append(f"reached_fraction: {sum(reached) / len(logs):.6f}")
        lines.append(
            f"hoeffding_lower_bound[delta={args.delta}]: "
            f"{certs.hoeffding_lower_bound(stats):.6f}")
        if entry_steps:
            lines.append(f"first_entry_step_min: {min(entry_steps)}")
            lines.append(f"first_entry_step_median: "
                         f"{int(np.median(entry_steps))}")
            lines.append(f"first_entry_step_max: {max(entry_steps)}")
        lines.append(f"envelope_C: {env_fit.C:.6g}")
        lines.append(f"envelope_lambda_per_step: {env_fit.lam:.6g}")
        lines.append(f"envelope_coverage_ok: "
                     f"{certs.envelope_covers(env_fit, dists)}")
        # certification bookkeeping, meaningful only for certified agents
        cert_logs = [log for log in logs
                     if np.any(np.asarray(log.modes) == "certified")]
        if cert_logs:
            total_acc, min_gap, budget_ok = 0, np.inf, True
            for log in cert_logs:
                acc_steps = np.flatnonzero(np.asarray(log.modes) == "certified")
                total_acc += len(acc_steps)
                vals = log.certified_values[acc_steps]
                prev = np.concatenate([[log.certified_values[0]], vals[:-1]])
                if len(acc_steps):
                    gaps = vals - prev
                    if acc_steps[0] == 0:
                        gaps = gaps[1:]  # no predecessor value inside the log
                    if gaps.size:
                        min_gap = min(min_gap, float(np.min(gaps)))
                lam0 = -log.certified_values[0]
                if len(acc_steps) > certs.update_budget(lam0, nu_bar):
                    budget_ok = False
            lines.append(f"acceptances: {total_acc}")
            if np.isfinite(min_gap):
                lines.append(f"min_ladder_gap: {min_gap:.6g}")
            lines.append(f"budget_ok[nu_bar={nu_bar:g}]: {budget_ok}")
        if args.relax_factor is not None:
            eta = 1.0 - certs.hoeffding_lower_bound(stats)
            bound = certs.reaching_probability_bound(
                eta, args.relax_factor, args.t_relax)
            lines.append(
                f"reaching_probability_bound[T_relax={args.t_relax}]: {bound:.6f}")
        lines.append("")
    report = "\n".join(lines).rstrip() + "\n"
    if args.out:
        Path(args.out).write_text(report, encoding="utf-8")
    print(report, end="")
    return 0


def _cmd_summarize(args) -> int:
    root = Path(args.indir)
    if not root.is_dir():
        print(f"summarize: no such directory: {root}", file=sys.stderr)
        return 2
    rows = ["agent,env,seed,episode,return,steps"]
    for agent, env, seed_dirs in _iter_seed_dirs(root):
        for sd in seed_dirs:
            summary_path = sd / "summary.csv"
            if not summary_path.exists():
                continue
            summary = read_summary_csv(summary_path)
            for e, r, s in zip(summary.episodes, summary.returns, summary.steps):
                rows.append(
                    f"{agent},{env},{summary.seed},{int(e)},"
                    f"{format(float(r), '.17g')},{int(s)}")
    out = "\n".join(rows) + "\n"
    Path(args.out).write_text(out, encoding="utf-8")
    print(f"wrote {args.out} ({len(rows) - 1} rows)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="goalbench",
        description="Goal-reaching RL workbench: certified agent, baselines, "
                    "certificates.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a multi-seed experiment")
    r.add_argument("--agent", choices=AGENT_NAMES)
    r.add_argument("--env", choices=ENV_NAMES)
    r.add_argument("--seeds", help="e.g. 1..10 or 1,2,5")
    r.add_argument("--episodes", type=int)
    r.add_argument("--config", help="config file; flags override its values")
    r.add_argument("--jobs", type=int, help="parallel seed workers")
    r.add_argument("--out", help="output directory")
    r.add_argument("--integrator", choices=("rk4", "euler"))
    r.set_defaults(fn=_cmd_run)

    c = sub.add_parser("certify", help="emit goal-reaching certificates for logs")
    c.add_argument("--in", dest="indir", required=True)
    c.add_argument("--out", help="also write the report to this file")
    c.add_argument("--delta", type=float, default=0.05)
    c.add_argument("--nu-bar", type=float, default=None)
    c.add_argument("--relax-factor", type=float, default=None)
    c.add_argument("--t-relax", type=int, default=0)
    c.set_defaults(fn=_cmd_certify)

    s = sub.add_parser("summarize", help="aggregate per-seed summaries into one CSV")
    s.add_argument("--in", dest="indir", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=_cmd_summarize)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
