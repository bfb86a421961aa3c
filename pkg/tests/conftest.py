"""Shared fixtures: the full certified-agent sweep and acceptance reporting.

Tests marked ``@pytest.mark.acceptance("<criterion>")`` get one PASS/FAIL line
per criterion in the terminal summary.
"""

import time
from collections import Counter

import numpy as np
import pytest
from hypothesis import settings

import goalbench as gb
from goalbench.calf import CalfAgent
from goalbench.env_core import make_rng, run_episode
from goalbench.nominal_policies import NominalAgent

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")

_ACCEPTANCE_RESULTS = {}

SWEEP_SEEDS = tuple(range(1, 11))
SWEEP_EPISODES = 20


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): marks a test as one acceptance criterion")
    config.addinivalue_line("markers", "slow: long-running empirical check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        name = marker.args[0]
        _ACCEPTANCE_RESULTS[name] = "PASS" if report.passed else "FAIL"
    elif marker and report.when == "setup" and report.failed:
        _ACCEPTANCE_RESULTS[marker.args[0]] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"ACCEPTANCE [{outcome}] {name}")


def run_nominal(env_name: str):
    spec = gb.make_env(env_name)
    return spec, run_episode(spec, NominalAgent(spec), seed=1, agent_name="nominal")


@pytest.fixture(scope="session")
def nominal_runs():
    """One deterministic nominal episode per environment, with wall time."""
    t0 = time.time()
    runs = {name: run_nominal(name) for name in gb.ENV_NAMES}
    return {"runs": runs, "elapsed": time.time() - t0}


def _sweep_one_env(env_name: str):
    spec = gb.make_env(env_name)
    rows = []
    t0 = time.time()
    for seed in SWEEP_SEEDS:
        agent = CalfAgent(spec)
        for ep in range(SWEEP_EPISODES):
            # pre-reset with an identical stream to snapshot the epoch state;
            # run_episode repeats the reset with the same draws
            agent.reset(spec, ep, make_rng(seed, ep))
            cs = agent.critic_state
            epoch_start_value = cs.cert_value
            acc_before = cs.acceptances
            log = run_episode(spec, agent, seed, ep, agent_name="calf")
            cs = agent.critic_state
            acc_steps = [t for t, m in enumerate(log.modes) if m == "certified"]
            gaps, prev = [], epoch_start_value
            for t in acc_steps:
                gaps.append(log.certified_values[t] - prev)
                prev = log.certified_values[t]
            rows.append(dict(
                seed=seed, episode=ep,
                entered=log.entered_goal(spec),
                episode_return=log.episode_return,
                modes=Counter(log.modes),
                horizon=log.horizon,
                gaps=gaps,
                nu_bar=cs.nu_bar,
                lambda0=cs.lambda0,
                epoch_acceptances=cs.acceptances,
                episode_acceptances=cs.acceptances - acc_before,
                budget=cs.budget(),
                relax_probs=log.relax_probs.copy(),
                xi_total=int(log.xi.sum()),
            ))
    return rows, time.time() - t0


@pytest.fixture(scope="session")
def calf_sweep():
    """Default-config certified-agent runs: 10 seeds x 6 envs x 20 episodes."""
    out = {}
    for name in gb.ENV_NAMES:
        rows, elapsed = _sweep_one_env(name)
        out[name] = {"rows": rows, "elapsed": elapsed}
    return out
