"""Smoothed learning-curve figures: median across seeds of the per-episode
return relative to the deterministic fallback controller."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvio import PlotInputError, discover_summaries
from .smoothing import rolling_median

# deterministic SVG output: fixed hash salt, no embedded dates
matplotlib.rcParams["svg.hashsalt"] = "goalbench-plots"


@dataclass(frozen=True)
class CurveSpec:
    root: str
    window: int = 1
    reference_agent: str = "nominal"


def _median_curve(summaries, window, reference):
    smoothed = []
    for s in summaries:
        rel = s.returns - reference
        largest_odd = len(rel) if len(rel) % 2 else len(rel) - 1
        smoothed.append(rolling_median(rel, min(window, largest_odd)))
    length = min(len(c) for c in smoothed)
    stack = np.vstack([c[:length] for c in smoothed])
    return np.median(stack, axis=0), length


def build_curves(spec: CurveSpec):
    """{env: {agent: (x_steps, y_median)}} plus the per-env reference value."""
    found = discover_summaries(spec.root)
    envs = sorted({env for _, env in found})
    out = {}
    for env in envs:
        agents = {agent: summaries for (agent, e), summaries in found.items()
                  if e == env}
        ref_summaries = agents.get(spec.reference_agent)
        if ref_summaries is None:
            raise PlotInputError(
                f"{env}: no '{spec.reference_agent}' reference run found")
        reference = float(ref_summaries[0].returns[0])
        env_curves = {}
        for agent, summaries in sorted(agents.items()):
            horizons = {tuple(s.steps) for s in summaries}
            if len(horizons) != 1:
                raise PlotInputError(f"{env}/{agent}: seeds disagree on horizons")
            y, length = _median_curve(summaries, spec.window, reference)
            x = np.cumsum(summaries[0].steps[:length])
            env_curves[agent] = (x, y)
        out[env] = {"curves": env_curves, "reference": reference}
    return out


def render_figure(env: str, payload: dict):
    """One labelled figure for one environment's curves (agent -> line)."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for agent, (x, y) in payload["curves"].items():
        ax.plot(x, y, label=agent, linewidth=1.6)
    ax.axhline(0.0, color="gray", linewidth=0.8, linestyle="--")
    ax.set_xlabel("environment steps")
    ax.set_ylabel("return relative to nominal")
    ax.set_title(env)
    ax.legend(loc="best")
    fig.tight_layout()
    return fig


def plot_learning_curves(root, out_file, window: int = 1,
                         reference_agent: str = "nominal"):
    """Write one vector figure per environment; returns the written paths.

    With several environments under ``root`` the environment name is
    suffixed onto the output stem.
    """
    data = build_curves(CurveSpec(root=root, window=window,
                                  reference_agent=reference_agent))
    out_file = Path(out_file)
    written = []
    multi = len(data) > 1
    for env, payload in sorted(data.items()):
        fig = render_figure(env, payload)
        target = (out_file.with_name(f"{out_file.stem}_{env}{out_file.suffix}")
                  if multi else out_file)
        fig.savefig(target, metadata={"Date": None})
        plt.close(fig)
        written.append(target)
    return written
