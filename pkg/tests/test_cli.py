"""Command-line entry point."""

import csv
import json

import numpy as np
import pytest

from minimax_exploiter.cli import main
from minimax_exploiter.dqn import DqnAgent, DqnConfig
from minimax_exploiter.neural import MlpSpec


def test_train_verb(tmp_path, capsys):
    config = tmp_path / "exp.ini"
    out_dir = tmp_path / "out"
    config.write_text(f"""
[experiment]
name = smoke
environment = tictactoe
mode = vanilla
hidden = 8
max_env_steps = 400
eval_interval = 5
eval_episodes = 2
learn_start = 32
seeds = 0
output_dir = {out_dir}
""")
    assert main(["train", str(config)]) == 0
    assert (out_dir / "seed0.csv").exists()
    assert (out_dir / "seed0.ckpt").exists()
    assert "seed 0" in capsys.readouterr().out


def test_train_verb_bad_config_exits_2(tmp_path, capsys):
    config = tmp_path / "exp.ini"
    config.write_text("[experiment]\nenvironment = go\nmax_env_steps = 10\n")
    assert main(["train", str(config)]) == 2
    err = json.loads(capsys.readouterr().err.strip())
    assert err["error"] == "EnvironmentUnknownError"


def test_tournament_verb(tmp_path, capsys):
    rng = np.random.default_rng(0)
    paths = []
    for i in range(2):
        agent = DqnAgent(MlpSpec(27, (8,), 9), DqnConfig(), rng)
        path = tmp_path / f"ckpt{i}.bin"
        agent.save(path)
        paths.append(str(path))
    out = tmp_path / "tournament.csv"
    code = main(["tournament", *paths, "--environment", "tictactoe",
                 "--games", "10", "--output", str(out)])
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 2  # header + the single pairing
    assert rows[0][0] == "first"


def test_curves_verb(tmp_path):
    from minimax_exploiter.harness import MetricRow, write_metrics
    for seed in (0, 1):
        write_metrics(tmp_path / f"s{seed}.csv",
                      [MetricRow(seed, 0, 0, 0.0, 0.1, 0.0, 0)])
    out = tmp_path / "curves.csv"
    code = main(["curves", str(tmp_path / "s0.csv"), str(tmp_path / "s1.csv"),
                 "--output", str(out)])
    assert code == 0
    assert out.exists()


def test_verify_verb(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
