"""Readers for the workbench CSV contract.

Episode files: header ``step,time_s,state_*,action_*,reward,cum_reward,mode,
certified_value,relax_prob,xi``; per-seed summaries: ``episode,return,steps``.
Run layout: ``<root>/<agent>/<env>/seed_<k>/...``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class PlotInputError(ValueError):
    pass


@dataclass(frozen=True)
class Episode:
    agent: str
    env: str
    seed: int
    times: np.ndarray
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    modes: list


@dataclass(frozen=True)
class Summary:
    agent: str
    env: str
    seed: int
    episodes: np.ndarray
    returns: np.ndarray
    steps: np.ndarray


def _identity_from_path(path: Path):
    parts = path.resolve().parts
    seed, env, agent = 0, "unknown", "unknown"
    if len(parts) >= 4 and parts[-2].startswith("seed_"):
        seed = int(parts[-2].split("_", 1)[1])
        env, agent = parts[-3], parts[-4]
    return agent, env, seed


def read_episode(path) -> Episode:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").strip().split("\n")
    header = lines[0].split(",")
    if not header or header[0] != "step":
        raise PlotInputError(f"{path}: missing or malformed header row")
    sd = sum(1 for h in header if h.startswith("state_"))
    ad = sum(1 for h in header if h.startswith("action_"))
    times, states, actions, rewards, modes = [], [], [], [], []
    for i, line in enumerate(lines[1:], start=2):
        row = line.split(",")
        if len(row) != len(header):
            raise PlotInputError(
                f"{path}: row {i} has {len(row)} fields, expected {len(header)}")
        try:
            times.append(float(row[1]))
            states.append([float(v) for v in row[2:2 + sd]])
            actions.append([float(v) for v in row[2 + sd:2 + sd + ad]])
            rewards.append(float(row[2 + sd + ad]))
        except ValueError as exc:
            raise PlotInputError(f"{path}: row {i}: {exc}") from exc
        modes.append(row[2 + sd + ad + 2])
    agent, env, seed = _identity_from_path(path)
    return Episode(agent=agent, env=env, seed=seed,
                   times=np.array(times), states=np.array(states),
                   actions=np.array(actions), rewards=np.array(rewards),
                   modes=modes)


def read_summary(path) -> Summary:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").strip().split("\n")
    if not lines or lines[0] != "episode,return,steps":
        raise PlotInputError(f"{path}: unexpected summary header")
    if len(lines) < 2:
        raise PlotInputError(f"{path}: summary holds no episodes")
    eps, rets, steps = [], [], []
    for line in lines[1:]:
        e, r, s = line.split(",")
        eps.append(int(e))
        rets.append(float(r))
        steps.append(int(s))
    agent, env, seed = _identity_from_path(path)
    return Summary(agent=agent, env=env, seed=seed, episodes=np.array(eps),
                   returns=np.array(rets), steps=np.array(steps, dtype=int))


def discover_summaries(root) -> dict:
    """{(agent, env): [Summary per seed]} for a run directory, with
    per-file errors reported together."""
    root = Path(root)
    if not root.is_dir():
        raise PlotInputError(f"no such run directory: {root}")
    found = {}
    errors = []
    for path in sorted(root.glob("*/*/seed_*/summary.csv")):
        try:
            summary = read_summary(path)
        except PlotInputError as exc:
            errors.append(str(exc))
            continue
        found.setdefault((summary.agent, summary.env), []).append(summary)
    if errors:
        raise PlotInputError("unreadable summaries:\n  " + "\n  ".join(errors))
    if not found:
        raise PlotInputError(f"no summaries found under {root}")
    return found
