import pytest

from goalplot.csvio import PlotInputError, read_episode
from goalplot.goals import GOAL_BANDS
from goalplot.traj import plot_trajectory

from conftest import write_episode


def test_episode_parsing_and_identity(episode_csv):
    ep = read_episode(episode_csv)
    assert ep.agent == "calf" and ep.env == "omnibot" and ep.seed == 3
    assert ep.states.shape == (120, 2)
    assert ep.actions.shape == (120, 2)


def test_goal_band_count_matches_constraints(episode_csv, tmp_path):
    out = tmp_path / "traj.svg"
    _, bands = plot_trajectory(episode_csv, out)
    assert bands == len(GOAL_BANDS["omnibot"])
    assert out.exists() and b"<svg" in out.read_bytes()


def test_env_override_flag(episode_csv, tmp_path):
    # interpreting the two state columns under the two-tank goal boxes
    _, bands = plot_trajectory(episode_csv, tmp_path / "t.svg", env="2tank")
    assert bands == len(GOAL_BANDS["2tank"])


def test_unknown_env_rejected(episode_csv, tmp_path):
    with pytest.raises(PlotInputError, match="unknown environment"):
        plot_trajectory(episode_csv, tmp_path / "t.svg", env="walker")


def test_band_column_absent_from_csv(episode_csv, tmp_path):
    # lunar bands reference state_2, but the fixture has two state columns
    with pytest.raises(PlotInputError, match="state_2 absent"):
        plot_trajectory(episode_csv, tmp_path / "t.svg", env="lunar_lander")


def test_constant_trajectory_renders(tmp_path):
    import numpy as np
    path = tmp_path / "runs" / "nominal" / "omnibot" / "seed_1" / "episode_0.csv"
    write_episode(path, np.zeros((30, 2)), np.zeros((30, 2)))
    out = tmp_path / "flat.svg"
    plot_trajectory(path, out)
    assert out.exists()


def test_malformed_csv_reports_row_number(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text(
        "step,time_s,state_0,action_0,reward,cum_reward,mode,"
        "certified_value,relax_prob,xi\n"
        "0,0.0,1.0,0.5,-1.0,-1.0,nominal,nan,0,0\n"
        "1,oops,1.0,0.5,-1.0,-2.0,nominal,nan,0,0\n",
        encoding="utf-8")
    with pytest.raises(PlotInputError, match="row 3"):
        plot_trajectory(bad, tmp_path / "x.svg", env="omnibot")


def test_byte_stable_output(episode_csv, tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    plot_trajectory(episode_csv, a)
    plot_trajectory(episode_csv, b)
    assert a.read_bytes() == b.read_bytes()
