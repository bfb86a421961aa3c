"""Acceptance suite: one test per primary criterion, each at its stated
tolerance.  The terminal summary prints one PASS/FAIL line per criterion."""

import math
import time

import numpy as np
import pytest

import goalbench as gb
from goalbench.baselines import MLP, make_policy
from goalbench.calf import CalfAgent, default_calf_config
from goalbench.certificates import (
    ReachingStats,
    envelope_covers,
    fit_exp_envelope,
    hoeffding_lower_bound,
    q_pochhammer,
)
from goalbench.critic import QCritic, ValueCritic
from goalbench.env_core import run_episode
from goalbench.nominal_policies import NominalAgent
from goalbench.runner import RunConfig, run_experiment

from test_env_core import rk4_error_ratio

INFEASIBLE_NU = 1e12


@pytest.mark.acceptance("nominal goal reaching (six environments, < 5 s)")
def test_nominal_goal_reaching(nominal_runs):
    assert nominal_runs["elapsed"] < 5.0, "nominal sweep exceeded 5 s"
    for name, (spec, log) in nominal_runs["runs"].items():
        entered = log.entered_goal(spec)
        print(f"  nominal {name}: entered={entered} "
              f"at step {log.first_entry_step(spec)}")
        assert entered, f"{name}: nominal policy missed the goal set"


@pytest.mark.acceptance("fallback oracle equivalence (bit-for-bit, six environments)")
def test_fallback_oracle_equivalence(nominal_runs):
    for name, (spec, nom_log) in nominal_runs["runs"].items():
        cfg = default_calf_config(
            name, relax_factor=0.0, relax_prob_min=0.0, relax_prob_max=0.0,
            nu_bar=INFEASIBLE_NU, nominal_first=False,
        )
        calf_log = run_episode(spec, CalfAgent(spec, cfg), seed=1,
                               agent_name="calf")
        assert np.array_equal(calf_log.states, nom_log.states), name
        assert np.array_equal(calf_log.actions, nom_log.actions), name
        assert np.array_equal(calf_log.rewards, nom_log.rewards), name
        assert all(m == "nominal" for m in calf_log.modes), name


@pytest.mark.acceptance("Theorem-1 empirical preservation (10 seeds x 6 envs x 20 episodes)")
def test_theorem1_goal_reaching_preserved(nominal_runs, calf_sweep):
    violations = []
    for name, data in calf_sweep.items():
        spec, nom_log = nominal_runs["runs"][name]
        assert nom_log.entered_goal(spec)  # the criterion's precondition
        for row in data["rows"]:
            if not row["entered"]:
                violations.append((name, row["seed"], row["episode"]))
        entered = sum(r["entered"] for r in data["rows"])
        print(f"  {name}: {entered}/{len(data['rows'])} episodes entered")
    assert not violations, f"episodes missing the goal set: {violations}"


@pytest.mark.acceptance("certified ladder and update budget (zero tolerance)")
def test_certified_ladder_and_budget(calf_sweep):
    for name, data in calf_sweep.items():
        for row in data["rows"]:
            for gap in row["gaps"]:
                assert gap >= row["nu_bar"], (
                    f"{name} seed {row['seed']} ep {row['episode']}: "
                    f"ladder gap {gap} below nu_bar {row['nu_bar']}")
            assert row["epoch_acceptances"] <= row["budget"], (
                f"{name} seed {row['seed']} ep {row['episode']}: "
                f"{row['epoch_acceptances']} acceptances exceed budget "
                f"{row['budget']}")
        total = sum(r["episode_acceptances"] for r in data["rows"])
        print(f"  {name}: {total} acceptances across the sweep, all within budget")


@pytest.mark.acceptance("relax schedule: p_t = p0 * kappa^t (4 ulp) and Markov bound")
def test_relax_schedule():
    # exact geometric schedule on one episode per environment
    for name in gb.ENV_NAMES:
        spec = gb.make_env(name)
        cfg = default_calf_config(name, nominal_first=False)
        agent = CalfAgent(spec, cfg)
        log = run_episode(spec, agent, seed=3, agent_name="calf")
        p0 = log.relax_probs[0]
        expected = p0 * cfg.relax_factor ** np.arange(log.horizon, dtype=float)
        tol = 4 * np.spacing(np.maximum(expected, np.finfo(float).tiny))
        assert np.all(np.abs(log.relax_probs - expected) <= tol), name

    # empirical mean relaxed-step count over 100 seeded episodes
    kappa, p0, horizon = 0.9, 0.5, 200
    spec = gb.replace_spec(gb.make_env("omnibot"), horizon_steps=horizon)
    cfg = default_calf_config("omnibot", relax_factor=kappa, relax_prob_min=p0,
                              relax_prob_max=p0, nu_bar=INFEASIBLE_NU,
                              nominal_first=False, actor_candidates=1)
    counts = []
    for seed in range(100):
        log = run_episode(spec, CalfAgent(spec, cfg), seed=seed, agent_name="calf")
        counts.append(int(log.xi.sum()))
    counts = np.asarray(counts, dtype=float)
    se = counts.std(ddof=1) / math.sqrt(len(counts))
    bound = 1.0 / (1.0 - kappa)
    print(f"  mean relaxed steps {counts.mean():.3f} vs bound {bound} + 3*{se:.3f}")
    assert counts.mean() <= bound + 3 * se


@pytest.mark.acceptance("learning benefit on omnibot (median ep-20 >= nominal, < 2 min)")
def test_learning_benefit_omnibot(nominal_runs, calf_sweep):
    data = calf_sweep["omnibot"]
    assert data["elapsed"] < 120.0, "omnibot sweep exceeded its runtime budget"
    _, nom_log = nominal_runs["runs"]["omnibot"]
    last_ep = max(r["episode"] for r in data["rows"])
    finals = [r["episode_return"] for r in data["rows"] if r["episode"] == last_ep]
    median = float(np.median(finals))
    print(f"  median episode-{last_ep + 1} return {median:.1f} "
          f"vs nominal {nom_log.episode_return:.1f}")
    assert median >= nom_log.episode_return


@pytest.mark.acceptance("numerics: analytic gradients <= 1e-5 rel.; RK4 ratio >= 12")
def test_numerics():
    def rel_err(a, b):
        return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)

    def fd(f, w, h=1e-6):
        g = np.zeros_like(w)
        for i in range(len(w)):
            e = np.zeros_like(w)
            e[i] = h
            g[i] = (f(w + e) - f(w - e)) / (2 * h)
        return g

    worst = 0.0
    checked = 0
    for seed in range(8):  # state-valued critic TD gradients
        rng = np.random.default_rng(seed)
        model = ValueCritic(2, width=4)
        w = rng.normal(size=model.n_params)
        Z = rng.normal(size=(6, 2))
        R = rng.uniform(-2, 0, 5)
        _, grad = model.td_loss_and_grad(w, Z, R, 0.95, 2)
        err = rel_err(grad, fd(lambda x: model.td_loss_and_grad(x, Z, R, 0.95, 2)[0], w))
        worst = max(worst, err)
        checked += 1
    for seed in range(6):  # state-action critic TD gradients
        rng = np.random.default_rng(50 + seed)
        model = QCritic(2, 1, width=4)
        w = rng.normal(size=model.n_params)
        U = rng.normal(size=(5, 3))
        R = rng.uniform(-2, 0, 4)
        _, grad = model.td_loss_and_grad(w, U, R, 0.9, 1)
        err = rel_err(grad, fd(lambda x: model.td_loss_and_grad(x, U, R, 0.9, 1)[0], w))
        worst = max(worst, err)
        checked += 1
    spec = gb.make_env("omnibot")
    mlp, dist = make_policy(spec, (3,), sigma_scale=0.1)
    for seed in range(6):  # policy-gradient score coefficients
        rng = np.random.default_rng(100 + seed)
        theta = mlp.init(rng, scale=0.3)
        S = rng.uniform(-3, 3, size=(4, 2))
        A = rng.uniform(-1, 1, size=(4, 2))
        coeffs = rng.normal(size=4)

        def f(th):
            mu = mlp.forward(th, S)
            lp = np.sum((-0.5 * ((A - mu) / dist.sigma) ** 2
                         - np.log(_z_norm(dist, mu))), axis=1)
            return float(np.sum(coeffs * lp))

        def _z_norm(d, mu):
            from goalbench.truncnorm import norm_cdf
            return norm_cdf((d.hi - mu) / d.sigma) - norm_cdf((d.lo - mu) / d.sigma)

        from goalbench.baselines import _policy_score_grad
        grad = _policy_score_grad(mlp, dist, theta, S, A, coeffs)
        err = rel_err(grad, fd(f, theta))
        worst = max(worst, err)
        checked += 1
    print(f"  {checked} gradient instances, worst relative error {worst:.2e}")
    assert checked == 20
    assert worst <= 1e-5

    ratio = rk4_error_ratio()
    print(f"  RK4 halving-error ratio {ratio:.1f}")
    assert ratio >= 12.0


@pytest.mark.acceptance("certificates: q-Pochhammer, Hoeffding (1e-12), envelope coverage")
def test_certificates():
    for q in (0.0, 0.3, 0.9):
        assert q_pochhammer(0.0, q) == 1.0
    for c in (0.0, 0.4, 0.99):
        assert q_pochhammer(c, 0.0) == 1.0 - c

    got = hoeffding_lower_bound(ReachingStats(200, 180, 0.05))
    independent = 180 / 200 - math.sqrt(math.log(1 / 0.05) / (2 * 200))
    assert abs(got - independent) <= 1e-12

    rng = np.random.default_rng(17)
    trajs = [np.abs(rng.normal(4, 1)) * np.exp(-rng.uniform(0.001, 0.05)
                                               * np.arange(400))
             for _ in range(12)]
    env = fit_exp_envelope(trajs)
    assert envelope_covers(env, trajs)

    spec = gb.make_env("omnibot")
    sims = [spec.goal.distance(
        run_episode(spec, NominalAgent(spec), seed=s, agent_name="nominal").states)
        for s in range(1, 11)]
    env2 = fit_exp_envelope(sims)
    assert envelope_covers(env2, sims)
    print(f"  omnibot envelope: C={env2.C:.3f}, lambda={env2.lam:.4f}/step")


@pytest.mark.acceptance("reproducibility: identical RunConfig => identical hashes")
def test_reproducibility(tmp_path):
    manifests = []
    for sub in ("a", "b"):
        cfg = RunConfig(agent="calf", env="omnibot", seeds=(1,), episodes=2,
                        output_dir=str(tmp_path / sub))
        manifests.append(run_experiment(cfg))
    assert manifests[0] == manifests[1]
    cfg_n = [RunConfig(agent="nominal", env="pendulum", seeds=(1, 2), episodes=1,
                       output_dir=str(tmp_path / f"n{k}")) for k in (0, 1)]
    assert run_experiment(cfg_n[0]) == run_experiment(cfg_n[1])
    print(f"  {len(manifests[0])} files hashed identically across reruns")
