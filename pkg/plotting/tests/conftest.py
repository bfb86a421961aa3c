"""Fixture CSVs written directly against the published schema (the plotting
package never invokes the workbench)."""

import numpy as np
import pytest


def write_summary(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["episode,return,steps"]
    for ep, ret, steps in rows:
        lines.append(f"{ep},{format(float(ret), '.17g')},{steps}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_episode(path, states, actions, dt=0.01, mode="nominal"):
    states = np.asarray(states, dtype=float)
    actions = np.asarray(actions, dtype=float)
    sd, ad = states.shape[1], actions.shape[1]
    header = (["step", "time_s"] + [f"state_{i}" for i in range(sd)]
              + [f"action_{i}" for i in range(ad)]
              + ["reward", "cum_reward", "mode", "certified_value",
                 "relax_prob", "xi"])
    lines = [",".join(header)]
    cum = 0.0
    for t in range(len(states)):
        reward = -float(np.sum(states[t] ** 2))
        cum += reward
        row = ([str(t), format(t * dt, ".17g")]
               + [format(v, ".17g") for v in states[t]]
               + [format(v, ".17g") for v in actions[t]]
               + [format(reward, ".17g"), format(cum, ".17g"), mode,
                  "nan", "0", "0"])
        lines.append(",".join(row))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


@pytest.fixture
def run_tree(tmp_path):
    """A small two-agent omnibot run: nominal reference plus one learner."""
    root = tmp_path / "runs"
    nominal = [(0, -100.0, 50)]
    write_summary(root / "nominal" / "omnibot" / "seed_1" / "summary.csv", nominal)
    learner = {
        1: [(0, -100.0, 50), (1, -80.0, 50), (2, -60.0, 50)],
        2: [(0, -100.0, 50), (1, -90.0, 50), (2, -40.0, 50)],
    }
    for seed, rows in learner.items():
        write_summary(root / "calf" / "omnibot" / f"seed_{seed}" / "summary.csv",
                      rows)
    return root


@pytest.fixture
def episode_csv(tmp_path):
    t = np.arange(120)
    states = np.stack([-10 * np.exp(-0.05 * t), -10 * np.exp(-0.05 * t)], axis=1)
    actions = np.stack([5 * np.exp(-0.05 * t), 5 * np.exp(-0.05 * t)], axis=1)
    path = tmp_path / "runs" / "calf" / "omnibot" / "seed_3" / "episode_0.csv"
    write_episode(path, states, actions)
    return path
