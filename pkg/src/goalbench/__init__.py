"""Goal-reaching RL workbench: certified critic agent, six ODE benchmarks,
nominal controllers, on-policy baselines, and stochastic certificates."""

from .env_core import (
    BoxConstraint,
    ConfigurationError,
    EnvironmentSpec,
    EpisodeLog,
    GoalBox,
    IntegrationDivergedError,
    clip_action,
    goal_distance,
    in_goal,
    integrate_step,
    make_rng,
    replace_spec,
    run_episode,
    wrap_angle,
)
from .environments import ENV_NAMES, make_env, reward
from .nominal_policies import NominalAgent, NominalPolicy, make_nominal, nominal_action
from .critic import (
    CriticState,
    KappaBounds,
    QCritic,
    ValueCritic,
    critic_value,
    td_loss,
    td_residuals,
    try_critic_update,
    try_critic_update_q,
)
from .calf import (
    CalfAgent,
    CalfConfig,
    calf_step,
    default_calf_config,
    greedy_action,
    init_episode,
)
from .baselines import (
    BaselineAgent,
    GaeConfig,
    MLP,
    default_gae_config,
    gae_advantages,
    ppo_losses,
    reinforce_update,
    vpg_update,
)
from .certificates import (
    ExpEnvelope,
    ReachingStats,
    fit_exp_envelope,
    hoeffding_lower_bound,
    q_pochhammer,
    reaching_probability_bound,
    update_budget,
)
from .runner import RunConfig, relative_return, rolling_median, run_experiment

__version__ = "0.1.0"
