"""Trajectory figures: state components with goal bands, actions below."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .csvio import PlotInputError, read_episode
from .goals import GOAL_BANDS

matplotlib.rcParams["svg.hashsalt"] = "goalbench-plots"


def plot_trajectory(episode_csv, out_file, env: str = None):
    """Render one episode; returns (path, number of goal bands drawn).

    The environment (for the goal-band overlay) is taken from the run layout
    when recognizable, else from the ``env`` argument.
    """
    ep = read_episode(episode_csv)
    env = env or (ep.env if ep.env in GOAL_BANDS else None)
    if env is not None and env not in GOAL_BANDS:
        raise PlotInputError(f"unknown environment '{env}'")
    bands = GOAL_BANDS.get(env, []) if env else []

    fig, (ax_s, ax_a) = plt.subplots(2, 1, figsize=(7, 6), sharex=True,
                                     height_ratios=[2, 1])
    n_bands = 0
    for j in range(ep.states.shape[1]):
        ax_s.plot(ep.times, ep.states[:, j], label=f"state_{j}", linewidth=1.2)
    for column, center, halfwidth in bands:
        idx = int(column.split("_")[1])
        if idx >= ep.states.shape[1]:
            raise PlotInputError(
                f"{env}: goal band column {column} absent from the CSV "
                f"({ep.states.shape[1]} state columns)")
        color = ax_s.lines[idx].get_color()
        ax_s.axhspan(center - halfwidth, center + halfwidth, alpha=0.15,
                     color=color)
        n_bands += 1
    ax_s.set_ylabel("state")
    ax_s.set_title(f"{env or 'episode'} (seed {ep.seed}, agent {ep.agent})")
    ax_s.legend(loc="best", fontsize=8)

    for j in range(ep.actions.shape[1]):
        ax_a.plot(ep.times, ep.actions[:, j], label=f"action_{j}", linewidth=1.2)
    ax_a.set_xlabel("time [s]")
    ax_a.set_ylabel("action")
    ax_a.legend(loc="best", fontsize=8)

    fig.tight_layout()
    out_file = Path(out_file)
    fig.savefig(out_file, metadata={"Date": None})
    plt.close(fig)
    return out_file, n_bands
