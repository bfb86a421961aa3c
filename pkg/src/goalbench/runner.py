"""Experiment orchestration: configs, seeding, CSV persistence, manifests.

Output layout:  ``output_dir/{agent}/{env}/seed_{k}/episode_{j}.csv`` plus a
per-seed ``summary.csv`` (episode, return, steps) and a run-level
``manifest.txt`` listing sha256 content hashes.  CSV files are UTF-8 with LF
line endings, '.' decimals, 17-significant-digit floats, mandatory header.

Randomness everywhere flows from Philox (a named 64-bit counter-based
generator) streams split by seed then episode; see ``env_core.make_rng``.
Logs, not streams, are the compatibility contract.
"""

from __future__ import annotations

import ast
import concurrent.futures
import hashlib
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .baselines import BaselineAgent, GaeConfig, default_gae_config
from .calf import CalfAgent, CalfConfig, default_calf_config
from .env_core import ConfigurationError, EpisodeLog, run_episode
from .environments import ENV_NAMES, make_env
from .nominal_policies import NominalAgent

AGENT_NAMES = ("nominal", "calf", "calfq", "reinforce", "sdpg", "ppo")


@dataclass(frozen=True)
class RunConfig:
    """Fully determines a reproducible multi-seed run."""

    agent: str = "nominal"
    env: str = "omnibot"
    seeds: tuple = tuple(range(1, 11))
    episodes: int = 20
    output_dir: str = "runs"
    jobs: int = 1
    integrator: str = "rk4"
    calf: Optional[CalfConfig] = None
    gae: Optional[GaeConfig] = None

    def __post_init__(self):
        if self.agent not in AGENT_NAMES:
            raise ConfigurationError(f"unknown agent '{self.agent}'")
        if self.env not in ENV_NAMES:
            raise ConfigurationError(f"unknown environment '{self.env}'")
        if len(self.seeds) == 0 or len(set(self.seeds)) != len(self.seeds):
            raise ConfigurationError("seeds must be non-empty and distinct")
        if self.episodes < 1:
            raise ConfigurationError("need at least one episode")


def build_agent(config: RunConfig, spec):
    if config.agent == "nominal":
        return NominalAgent(spec)
    if config.agent in ("calf", "calfq"):
        variant = "state-critic" if config.agent == "calf" else "state-action-critic"
        if config.calf is not None:
            cfg = replace(config.calf, variant=variant)
        else:
            cfg = default_calf_config(spec.name, variant=variant)
        return CalfAgent(spec, cfg)
    cfg = config.gae if config.gae is not None else default_gae_config(
        spec.name, config.agent)
    return BaselineAgent(spec, config.agent, cfg)


# -- CSV persistence --------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def episode_columns(state_dim: int, action_dim: int):
    return (["step", "time_s"]
            + [f"state_{i}" for i in range(state_dim)]
            + [f"action_{i}" for i in range(action_dim)]
            + ["reward", "cum_reward", "mode", "certified_value",
               "relax_prob", "xi"])


def write_episode_csv(path: Path, log: EpisodeLog) -> None:
    sd, ad = log.states.shape[1], log.actions.shape[1]
    times = log.times()
    lines = [",".join(episode_columns(sd, ad))]
    for t in range(log.horizon):
        row = (
            [str(t), _fmt(times[t])]
            + [_fmt(v) for v in log.states[t]]
            + [_fmt(v) for v in log.actions[t]]
            + [_fmt(log.rewards[t]), _fmt(log.cum_rewards[t]), log.modes[t],
               _fmt(log.certified_values[t]), _fmt(log.relax_probs[t]),
               str(int(log.xi[t]))]
        )
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_episode_csv(path: Path) -> EpisodeLog:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    rows = [line.split(",") for line in text.strip().split("\n")]
    header, data = rows[0], rows[1:]
    if not header or header[0] != "step":
        raise ConfigurationError(f"{path}: missing or malformed header row")
    sd = sum(1 for h in header if h.startswith("state_"))
    ad = sum(1 for h in header if h.startswith("action_"))
    n = len(data)
    states = np.empty((n, sd))
    actions = np.empty((n, ad))
    rewards = np.empty(n)
    cum = np.empty(n)
    cert = np.empty(n)
    relax = np.empty(n)
    xi = np.empty(n, dtype=int)
    modes = []
    times = np.empty(n)
    for i, row in enumerate(data):
        if len(row) != len(header):
            raise ConfigurationError(
                f"{path}: row {i + 2} has {len(row)} fields, expected {len(header)}")
        times[i] = float(row[1])
        states[i] = [float(v) for v in row[2: 2 + sd]]
        actions[i] = [float(v) for v in row[2 + sd: 2 + sd + ad]]
        base = 2 + sd + ad
        rewards[i] = float(row[base])
        cum[i] = float(row[base + 1])
        modes.append(row[base + 2])
        cert[i] = float(row[base + 3])
        relax[i] = float(row[base + 4])
        xi[i] = int(row[base + 5])
    # identity fields recovered from the output layout when available
    parts = path.resolve().parts
    seed = episode = 0
    agent = env = "unknown"
    if len(parts) >= 4 and parts[-2].startswith("seed_"):
        seed = int(parts[-2].split("_")[1])
        env = parts[-3]
        agent = parts[-4]
    if path.stem.startswith("episode_"):
        episode = int(path.stem.split("_")[1])
    dt = float(times[1] - times[0]) if n > 1 else 0.01
    return EpisodeLog(agent=agent, env=env, seed=seed, episode=episode, dt=dt,
                      states=states, actions=actions, rewards=rewards,
                      cum_rewards=cum, modes=modes, certified_values=cert,
                      relax_probs=relax, xi=xi)


@dataclass(frozen=True)
class SeedSummary:
    agent: str
    env: str
    seed: int
    episodes: np.ndarray
    returns: np.ndarray
    steps: np.ndarray


def write_summary_csv(path: Path, summary: SeedSummary) -> None:
    lines = ["episode,return,steps"]
    for e, r, s in zip(summary.episodes, summary.returns, summary.steps):
        lines.append(f"{int(e)},{_fmt(r)},{int(s)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_summary_csv(path: Path) -> SeedSummary:
    path = Path(path)
    rows = path.read_text(encoding="utf-8").strip().split("\n")
    if rows[0] != "episode,return,steps":
        raise ConfigurationError(f"{path}: unexpected summary header")
    eps, rets, steps = [], [], []
    for row in rows[1:]:
        e, r, s = row.split(",")
        eps.append(int(e))
        rets.append(float(r))
        steps.append(int(s))
    parts = path.resolve().parts
    seed = int(parts[-2].split("_")[1]) if parts[-2].startswith("seed_") else 0
    return SeedSummary(agent=parts[-4] if len(parts) >= 4 else "unknown",
                       env=parts[-3] if len(parts) >= 3 else "unknown",
                       seed=seed, episodes=np.array(eps),
                       returns=np.array(rets), steps=np.array(steps))


# -- orchestration -----------------------------------------------------------

def _run_seed(config: RunConfig, seed: int) -> list:
    spec = make_env(config.env, integrator=config.integrator)
    agent = build_agent(config, spec)
    seed_dir = Path(config.output_dir) / config.agent / config.env / f"seed_{seed}"
    seed_dir.mkdir(parents=True, exist_ok=True)
    episodes, returns, steps = [], [], []
    for ep in range(config.episodes):
        log = run_episode(spec, agent, seed, ep, agent_name=config.agent)
        write_episode_csv(seed_dir / f"episode_{ep}.csv", log)
        episodes.append(ep)
        returns.append(log.episode_return)
        steps.append(log.horizon)
    summary = SeedSummary(config.agent, config.env, seed, np.array(episodes),
                          np.array(returns), np.array(steps))
    write_summary_csv(seed_dir / "summary.csv", summary)
    return [seed_dir / f"episode_{ep}.csv" for ep in range(config.episodes)] + [
        seed_dir / "summary.csv"
    ]


def run_experiment(config: RunConfig) -> dict:
    """Execute all seeds and return the {relative path: sha256} manifest."""
    all_files = []
    if config.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as ex:
            futures = [ex.submit(_run_seed, config, s) for s in config.seeds]
            for fut in futures:
                all_files.extend(fut.result())
    else:
        for s in config.seeds:
            all_files.extend(_run_seed(config, s))
    root = Path(config.output_dir)
    manifest = {}
    for f in sorted(all_files):
        digest = hashlib.sha256(Path(f).read_bytes()).hexdigest()
        manifest[str(Path(f).relative_to(root))] = digest
    lines = [f"{digest}  {rel}" for rel, digest in sorted(manifest.items())]
    (root / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


def relative_return(agent_summary: SeedSummary,
                    nominal_summary: SeedSummary) -> np.ndarray:
    """Per-episode agent return minus the (scalar) nominal return."""
    if agent_summary.env != nominal_summary.env:
        raise ConfigurationError(
            f"environment mismatch: {agent_summary.env} vs {nominal_summary.env}")
    return agent_summary.returns - float(nominal_summary.returns[0])


def rolling_median(series, window: int) -> np.ndarray:
    """Centered rolling median with shrinking windows at the boundaries."""
    if window % 2 == 0 or window < 1:
        raise ConfigurationError("window must be odd and >= 1")
    series = np.asarray(series, dtype=float)
    if window > len(series):
        raise ConfigurationError("window exceeds series length")
    half = window // 2
    n = len(series)
    return np.array([
        np.median(series[max(0, i - half): min(n, i + half + 1)])
        for i in range(n)
    ])


# -- config file format -------------------------------------------------------

def parse_config_text(text: str) -> dict:
    """Nested key-value format: ``section.key = literal`` per line, '#' comments."""
    out = {}
    for ln, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line {ln}: expected 'key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        try:
            value = ast.literal_eval(val)
        except (ValueError, SyntaxError):
            value = val  # bare string
        node = out
        *path, leaf = key.split(".")
        for p in path:
            node = node.setdefault(p, {})
        node[leaf] = value
    return out


def format_config_text(tree: dict, prefix: str = "") -> str:
    lines = []
    for key, value in tree.items():
        full = f"{prefix}{key}"
        if isinstance(value, dict):
            lines.append(format_config_text(value, prefix=f"{full}."))
        else:
            lines.append(f"{full} = {value!r}")
    return "\n".join(lines)


def _dataclass_from_tree(cls, tree: dict):
    names = {f.name for f in fields(cls)}
    unknown = set(tree) - names
    if unknown:
        raise ConfigurationError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    coerced = {}
    for k, v in tree.items():
        coerced[k] = tuple(v) if isinstance(v, list) else v
    return cls(**coerced)


def config_from_tree(tree: dict) -> RunConfig:
    tree = dict(tree)
    calf = tree.pop("calf", None)
    gae = tree.pop("gae", None)
    if "seeds" in tree:
        tree["seeds"] = tuple(tree["seeds"])
    cfg = _dataclass_from_tree(RunConfig, tree)
    if calf is not None:
        cfg = replace(cfg, calf=_dataclass_from_tree(CalfConfig, calf))
    if gae is not None:
        cfg = replace(cfg, gae=_dataclass_from_tree(GaeConfig, gae))
    return cfg


def config_to_tree(cfg) -> dict:
    """Dataclass -> plain nested dict, dropping Nones (lossless round-trip)."""
    out = {}
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if hasattr(v, "__dataclass_fields__"):
            out[f.name] = config_to_tree(v)
        elif isinstance(v, tuple):
            out[f.name] = list(v)
        else:
            out[f.name] = v
    return out
