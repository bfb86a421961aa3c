import numpy as np
import pytest

from goalbench.cli import main, parse_seeds


def test_parse_seeds_forms():
    assert parse_seeds("1..10") == tuple(range(1, 11))
    assert parse_seeds("1,2,5") == (1, 2, 5)
    assert parse_seeds("7") == (7,)


def test_run_certify_summarize_pipeline(tmp_path, capsys):
    out = tmp_path / "runs"
    rc = main(["run", "--agent", "nominal", "--env", "omnibot", "--seeds", "1",
               "--episodes", "1", "--out", str(out)])
    assert rc == 0
    assert (out / "nominal" / "omnibot" / "seed_1" / "episode_0.csv").exists()

    rc = main(["certify", "--in", str(out), "--delta", "0.05"])
    assert rc == 0
    report = capsys.readouterr().out
    assert "run: nominal/omnibot" in report
    assert "reached: 1" in report
    assert "hoeffding_lower_bound" in report
    assert "envelope_coverage_ok: True" in report

    csv_out = tmp_path / "agg.csv"
    rc = main(["summarize", "--in", str(out), "--out", str(csv_out)])
    assert rc == 0
    rows = csv_out.read_text().strip().split("\n")
    assert rows[0] == "agent,env,seed,episode,return,steps"
    assert len(rows) == 2
    assert rows[1].startswith("nominal,omnibot,1,0,")


def test_certify_reports_calf_bookkeeping(tmp_path, capsys):
    out = tmp_path / "runs"
    main(["run", "--agent", "calf", "--env", "omnibot", "--seeds", "1",
          "--episodes", "2", "--out", str(out)])
    main(["certify", "--in", str(out), "--relax-factor", "0.99",
          "--t-relax", "100"])
    report = capsys.readouterr().out
    assert "acceptances:" in report
    assert "budget_ok" in report
    assert "reaching_probability_bound[T_relax=100]:" in report


def test_run_with_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("agent = nominal\nenv = pendulum\nseeds = [1]\n"
                   "episodes = 1\noutput_dir = 'ignored'\n", encoding="utf-8")
    out = tmp_path / "override"
    rc = main(["run", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    assert (out / "nominal" / "pendulum" / "seed_1" / "summary.csv").exists()


def test_certify_missing_directory(tmp_path, capsys):
    assert main(["certify", "--in", str(tmp_path / "nope")]) == 2
