"""Configuration-driven experiment runner.

Turn-based experiments train one agent against the scripted minimax
opponent (exact for Tic-Tac-Toe, depth-limited for Connect 4) under a fixed
environment-step budget; DuelSim experiments run the in-process league.
Each seed writes its own metrics CSV; given a seed and a step budget a run
is deterministic except for the recorded wall-clock column.

Config files are flat INI key-value sections; see ``parse_config``.
"""

from __future__ import annotations

import configparser
import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Role, play_episode
from .dqn import DqnAgent, DqnConfig, FrozenPolicy, ReplayBuffer
from .errors import (ConfigInvalidError, EnvironmentUnknownError,
                     MisalignedGridsError)
from .games import available_games, make_env
from .league import LeagueConfig, LeagueResult, LeagueRunner
from .search import MinimaxConfig, act as minimax_act
from .shaping import (ExploiterRewardConfig, OracleEvaluator, RewardMode,
                      pair_transitions, td_discount, transform_batch)

METRIC_HEADER = ("seed", "env_steps", "episodes", "wall_seconds",
                 "eval_score", "win_rate", "generation")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    env_id: str
    mode: RewardMode = RewardMode.VANILLA
    alpha: float = 0.1
    opponent_blunder: float = 0.0
    shaping_gamma: float = 0.995
    gamma: float = 0.995
    epsilon: float = 0.01
    learning_rate: float = 1e-3
    hidden_dims: tuple[int, ...] = (64, 64)
    opponent_depth: int | None = None  # None = search to completion
    learn_every: int = 1
    batch_size: int = 64
    replay_capacity: int = 100_000
    learn_start: int = 1000
    target_sync_period: int = 1000
    max_env_steps: int | None = None
    max_wall_seconds: float | None = None
    seeds: tuple[int, ...] = (0,)
    eval_interval: int = 100  # training episodes between evaluations
    eval_episodes: int = 100
    stop_at_score: float | None = None
    output_dir: str = "runs/experiment"
    # league-only knobs
    league_window: int = 200
    league_threshold: float = 0.85
    pretrain_env_steps: int = 20_000

    def __post_init__(self):
        if self.env_id not in available_games():
            raise EnvironmentUnknownError(f"unknown environment {self.env_id!r}")
        if not self.seeds:
            raise ConfigInvalidError("seeds must be non-empty")
        if self.max_env_steps is None and self.max_wall_seconds is None:
            raise ConfigInvalidError("at least one budget bound must be set")
        if not 0.0 <= self.opponent_blunder < 1.0:
            raise ConfigInvalidError("opponent_blunder must be in [0, 1)")

    def reward_min_max(self) -> tuple[float, float]:
        return (-10.0, 10.0) if self.env_id == "duelsim" else (-1.0, 1.0)


@dataclass
class MetricRow:
    seed: int
    env_steps: int
    episodes: int
    wall_seconds: float
    eval_score: float
    win_rate: float
    generation: int

    def as_csv(self) -> list:
        return [self.seed, self.env_steps, self.episodes,
                f"{self.wall_seconds:.3f}", f"{self.eval_score:.6f}",
                f"{self.win_rate:.6f}", self.generation]


@dataclass
class SeedResult:
    seed: int
    rows: list[MetricRow]
    checkpoint_path: str | None
    first_reach_step: int | None  # only set when stop_at_score was given
    league: LeagueResult | None = None


def parse_config(path) -> ExperimentConfig:
    """Flat INI schema: section [experiment] with optional [league]."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read or "experiment" not in parser:
        raise ConfigInvalidError(f"missing [experiment] section in {path}")
    exp = parser["experiment"]
    lg = parser["league"] if "league" in parser else {}

    def ints(value: str) -> tuple[int, ...]:
        return tuple(int(x) for x in value.replace(" ", "").split(",") if x)

    try:
        depth = exp.getint("opponent_depth", fallback=0)
        return ExperimentConfig(
            name=exp.get("name", Path(path).stem),
            env_id=exp.get("environment"),
            mode=RewardMode(exp.get("mode", "vanilla")),
            alpha=exp.getfloat("alpha", 0.1),
            opponent_blunder=exp.getfloat("opponent_blunder", 0.0),
            shaping_gamma=exp.getfloat("shaping_gamma", 0.995),
            gamma=exp.getfloat("gamma", 0.995),
            epsilon=exp.getfloat("epsilon", 0.01),
            learning_rate=exp.getfloat("learning_rate", 1e-3),
            hidden_dims=ints(exp.get("hidden", "64,64")),
            opponent_depth=depth if depth > 0 else None,
            learn_every=exp.getint("learn_every", 1),
            batch_size=exp.getint("batch_size", 64),
            replay_capacity=exp.getint("replay_capacity", 100_000),
            learn_start=exp.getint("learn_start", 1000),
            target_sync_period=exp.getint("target_sync_period", 1000),
            max_env_steps=exp.getint("max_env_steps", fallback=None),
            max_wall_seconds=exp.getfloat("max_wall_seconds", fallback=None),
            seeds=ints(exp.get("seeds", "0")),
            eval_interval=exp.getint("eval_interval", 100),
            eval_episodes=exp.getint("eval_episodes", 100),
            stop_at_score=exp.getfloat("stop_at_score", fallback=None),
            output_dir=exp.get("output_dir", f"runs/{exp.get('name', 'run')}"),
            league_window=int(lg.get("window", 200)),
            league_threshold=float(lg.get("threshold", 0.85)),
            pretrain_env_steps=int(lg.get("pretrain_env_steps", 20_000)),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigInvalidError(f"bad experiment config {path}: {exc}") from exc


def _dqn_config(cfg: ExperimentConfig, reward_cfg: ExploiterRewardConfig) -> DqnConfig:
    return DqnConfig(
        gamma=td_discount(reward_cfg, cfg.gamma),
        epsilon=cfg.epsilon,
        replay_capacity=cfg.replay_capacity,
        batch_size=cfg.batch_size,
        target_sync_period=cfg.target_sync_period,
        learn_start=cfg.learn_start,
        learning_rate=cfg.learning_rate,
    )


def _reward_cfg(cfg: ExperimentConfig) -> ExploiterRewardConfig:
    r_min, r_max = cfg.reward_min_max()
    return ExploiterRewardConfig(mode=cfg.mode, alpha=cfg.alpha,
                                 gamma=cfg.shaping_gamma,
                                 reward_min=r_min, reward_max=r_max)


def _scripted_policy(env, mcfg: MinimaxConfig, rng=None, blunder: float = 0.0):
    """Minimax policy, optionally blundering: with probability ``blunder``
    per move it plays a uniform random legal action from ``rng`` instead of
    searching. Seeded per episode, a positive blunder rate turns the frozen
    opponent into a fixed stochastic policy whose games vary across
    episodes, so it cannot be beaten by memorising one game line."""
    def policy(obs, mask, role):
        if rng is not None and blunder > 0.0 and rng.random() < blunder:
            return int(rng.choice(np.flatnonzero(mask)))
        return minimax_act(env.state, role, mcfg)
    return policy


def evaluate_policy(env_id: str, policy: FrozenPolicy, mcfg: MinimaxConfig,
                    episodes: int, blunder: float = 0.0) -> tuple[float, float]:
    """Greedy evaluation vs the scripted opponent with first-mover
    alternation. Returns (mean terminal reward, win rate).

    The scripted opponent keeps one fixed tie-break seed — it is a frozen
    policy, the target the exploiter is meant to crack. With a positive
    ``blunder`` rate each evaluation episode draws its blunders from an
    episode-indexed seed, so the evaluation distribution is identical for
    every learner and every run."""
    env = make_env(env_id)
    total = 0.0
    wins = 0
    for i in range(episodes):
        opp_rng = (np.random.default_rng((714, i))
                   if blunder > 0.0 else None)
        agent_role = Role.FIRST if i % 2 == 0 else Role.SECOND
        policies = {
            agent_role: lambda obs, mask, role: policy.act(obs, mask),
            agent_role.opponent: _scripted_policy(env, mcfg, opp_rng,
                                                  blunder),
        }
        trace = play_episode(env, policies, seed=i, episode_id=i)
        reward = sum(tr.reward for tr in trace.transitions[agent_role])
        total += reward
        if reward > 0:
            wins += 1
    return total / episodes, wins / episodes


def train_turn_based_seed(cfg: ExperimentConfig, seed: int,
                          out_dir: Path | None) -> SeedResult:
    """One seeded training run against the scripted minimax opponent."""
    env = make_env(cfg.env_id)
    rng = np.random.default_rng(seed)
    reward_cfg = _reward_cfg(cfg)
    from .neural import MlpSpec
    spec = MlpSpec(env.obs_dim, cfg.hidden_dims, env.num_actions)
    agent = DqnAgent(spec, _dqn_config(cfg, reward_cfg), rng)
    buffer = ReplayBuffer(cfg.replay_capacity, env.obs_dim, env.num_actions)
    # one canonical frozen opponent per environment/depth: every seed and
    # every reward mode faces the same deterministic scripted policy, so
    # run-to-run differences come from the learner alone
    mcfg = MinimaxConfig(max_depth=cfg.opponent_depth, tie_break_seed=0)

    rows: list[MetricRow] = []
    start = time.monotonic()
    env_steps = 0
    episodes = 0
    first_reach = None
    learn_debt = 0.0

    def record_eval():
        nonlocal first_reach
        score, win_rate = evaluate_policy(
            cfg.env_id, agent.frozen(), mcfg, cfg.eval_episodes,
            cfg.opponent_blunder)
        rows.append(MetricRow(seed, env_steps, episodes,
                              time.monotonic() - start, score, win_rate, 0))
        if (first_reach is None and cfg.stop_at_score is not None
                and score >= cfg.stop_at_score):
            first_reach = env_steps
        return score

    record_eval()
    while True:
        if cfg.max_env_steps is not None and env_steps >= cfg.max_env_steps:
            break
        if (cfg.max_wall_seconds is not None
                and time.monotonic() - start >= cfg.max_wall_seconds):
            break
        if first_reach is not None:
            break
        agent_role = Role.FIRST if episodes % 2 == 0 else Role.SECOND
        opp_rng = (np.random.default_rng((seed, episodes, 101))
                   if cfg.opponent_blunder > 0.0 else None)
        policies = {
            agent_role: lambda obs, mask, role:
                agent.select_action(obs, mask, rng),
            agent_role.opponent: _scripted_policy(env, mcfg, opp_rng,
                                                  cfg.opponent_blunder),
        }
        trace = play_episode(env, policies,
                             seed=int(rng.integers(2 ** 31)),
                             episode_id=episodes)
        env_steps += env.timestamp
        episodes += 1
        agent_side = trace.transitions[agent_role]
        if cfg.mode is RewardMode.VANILLA:
            transformed = list(agent_side)
        else:
            paired = pair_transitions(agent_side,
                                      trace.transitions[agent_role.opponent])
            episode_eval = OracleEvaluator(cfg.env_id, agent_role.opponent,
                                           mcfg)
            transformed, _ = transform_batch(paired, episode_eval, reward_cfg)
        for tr in transformed:
            buffer.add_transition(tr)
        learn_debt += len(transformed) / cfg.learn_every
        while learn_debt >= 1.0:
            learn_debt -= 1.0
            if len(buffer) >= max(agent.config.learn_start,
                                  agent.config.batch_size):
                agent.learn_step(buffer, rng)
        if episodes % cfg.eval_interval == 0:
            record_eval()

    if rows and rows[-1].env_steps != env_steps:
        record_eval()

    checkpoint_path = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        checkpoint_path = str(out_dir / f"seed{seed}.ckpt")
        agent.save(checkpoint_path)
    return SeedResult(seed, rows, checkpoint_path, first_reach)


def run_league_seed(cfg: ExperimentConfig, seed: int,
                    out_dir: Path | None) -> SeedResult:
    journal_path = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        journal_path = str(out_dir / f"seed{seed}.journal")
        Path(journal_path).write_text("", encoding="utf-8")
    league_cfg = LeagueConfig(
        env_id=cfg.env_id,
        exploiter_mode=cfg.mode,
        alpha=cfg.alpha,
        shaping_gamma=cfg.shaping_gamma,
        reward_min=cfg.reward_min_max()[0],
        reward_max=cfg.reward_min_max()[1],
        hidden_dims=cfg.hidden_dims,
        dqn=DqnConfig(gamma=cfg.gamma, epsilon=cfg.epsilon,
                      replay_capacity=cfg.replay_capacity,
                      batch_size=cfg.batch_size,
                      target_sync_period=cfg.target_sync_period,
                      learn_start=cfg.learn_start,
                      learning_rate=cfg.learning_rate),
        threshold=cfg.league_threshold,
        window=cfg.league_window,
        pretrain_env_steps=cfg.pretrain_env_steps,
        total_env_steps=cfg.max_env_steps or 100_000,
        seed=seed,
        journal_path=journal_path,
    )
    start = time.monotonic()
    result = LeagueRunner(league_cfg).run()
    rows = [MetricRow(seed, result.env_steps, result.episodes,
                      time.monotonic() - start, float("nan"), float("nan"),
                      result.converged_exploiters)]
    checkpoint_path = None
    if out_dir is not None:
        checkpoint_path = str(out_dir / f"seed{seed}.ckpt")
        result.main_agent.save(checkpoint_path)
    return SeedResult(seed, rows, checkpoint_path, None, league=result)


def run_experiment(cfg: ExperimentConfig,
                   out_root: str | Path | None = None) -> list[SeedResult]:
    """Train every configured seed and write per-seed metric CSVs plus
    checkpoints under the output directory."""
    out_dir = Path(out_root) if out_root is not None else Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = []
    for seed in cfg.seeds:
        if cfg.env_id == "duelsim":
            result = run_league_seed(cfg, seed, out_dir)
        else:
            result = train_turn_based_seed(cfg, seed, out_dir)
        write_metrics(out_dir / f"seed{seed}.csv", result.rows)
        results.append(result)
    return results


def write_metrics(path, rows: list[MetricRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRIC_HEADER)
        for row in rows:
            writer.writerow(row.as_csv())


def read_metrics(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def first_reach_step(rows: list[MetricRow], threshold: float) -> int | None:
    for row in rows:
        if row.eval_score >= threshold:
            return row.env_steps
    return None


def emit_curves(metric_paths: list, out_path) -> None:
    """Aggregate per-seed metric files sharing one evaluation step grid into
    mean and min/max band columns."""
    if not metric_paths:
        raise MisalignedGridsError("no metric files supplied")
    per_file = [read_metrics(p) for p in metric_paths]
    grids = [[int(r["env_steps"]) for r in rows] for rows in per_file]
    if any(g != grids[0] for g in grids[1:]):
        raise MisalignedGridsError(
            "metric files use different evaluation step grids")
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("env_steps", "eval_score_mean", "eval_score_min",
                         "eval_score_max"))
        for i, step in enumerate(grids[0]):
            scores = [float(rows[i]["eval_score"]) for rows in per_file]
            writer.writerow((step, f"{np.mean(scores):.6f}",
                             f"{np.min(scores):.6f}", f"{np.max(scores):.6f}"))
