"""Two-archetype league: opponent pool, win-rate-proportional matchmaking
with uniform mixing, 85% convergence gates, and the Main-Agent /
Main-Exploiter generation lifecycle, run in-process.

The league manager is a single sequential decision-maker; rollouts for the
two learners are interleaved episode by episode and all gate decisions
happen in event order. Pool checkpoints are frozen and never mutated;
entries are append-only.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .core import Outcome, Role, play_episode
from .dqn import DqnAgent, DqnConfig, FrozenPolicy
from .errors import (EmptyPoolError, InconsistentEventError, NotReadyError,
                     UnknownOpponentError)
from .games import make_env
from .games.duelsim import scripted_policy
from .neural import MlpSpec
from .shaping import (ExploiterRewardConfig, NetworkEvaluator, RewardMode,
                      pair_transitions, td_discount, transform_batch)

__all__ = [
    "Archetype", "OpponentPoolEntry", "sample_opponent",
    "ConvergenceMonitor", "exploiter_converged", "main_converged",
    "GenerationState", "GenerationEvent", "advance_generation",
    "LeagueConfig", "LeagueResult", "LeagueRunner",
]

UNIFORM_MIX = 0.1


class Archetype(Enum):
    MAIN_AGENT_SNAPSHOT = "main_agent_snapshot"
    CONVERGED_EXPLOITER = "converged_exploiter"
    SCRIPTED = "scripted"


@dataclass
class OpponentPoolEntry:
    """A frozen opponent plus its empirical win-rate against the current
    Main Agent (the matchmaking weight)."""

    entry_id: str
    archetype: Archetype
    policy: object  # FrozenPolicy, or a policy factory for scripted entries
    win_rate_vs_main: float = 0.0
    games_played: int = 0


def sample_opponent(pool: list[OpponentPoolEntry],
                    rng: np.random.Generator) -> OpponentPoolEntry:
    """10% uniform over the pool, otherwise proportional to win-rate vs the
    current Main Agent; all-zero win-rates fall back to uniform."""
    if not pool:
        raise EmptyPoolError("cannot sample from an empty opponent pool")
    if rng.random() < UNIFORM_MIX:
        return pool[int(rng.integers(len(pool)))]
    weights = np.asarray([e.win_rate_vs_main for e in pool], dtype=np.float64)
    total = weights.sum()
    if total <= 0.0:
        return pool[int(rng.integers(len(pool)))]
    probs = weights / total
    return pool[int(rng.choice(len(pool), p=probs))]


class ConvergenceMonitor:
    """Sliding-window win counters per opponent. Draws count as non-wins."""

    def __init__(self, threshold: float = 0.85, window: int = 200):
        if not 0.0 < threshold <= 1.0:
            raise ValueError(f"threshold must lie in (0,1], got {threshold}")
        if window < 1:
            raise ValueError(f"window must be >= 1, got {window}")
        self.threshold = threshold
        self.window = window
        self._results: dict[str, deque] = {}

    def register(self, opponent_id: str) -> None:
        self._results.setdefault(opponent_id, deque(maxlen=self.window))

    def known(self, opponent_id: str) -> bool:
        return opponent_id in self._results

    def record_result(self, opponent_id: str, outcome: str) -> None:
        if opponent_id not in self._results:
            raise UnknownOpponentError(f"unregistered opponent {opponent_id!r}")
        if outcome not in ("win", "loss", "draw"):
            raise ValueError(f"outcome must be win/loss/draw, got {outcome!r}")
        self._results[opponent_id].append(1 if outcome == "win" else 0)

    def ready(self, opponent_id: str) -> bool:
        if opponent_id not in self._results:
            raise UnknownOpponentError(f"unregistered opponent {opponent_id!r}")
        return len(self._results[opponent_id]) >= self.window

    def win_rate(self, opponent_id: str) -> float:
        if not self.ready(opponent_id):
            raise NotReadyError(
                f"window not full for opponent {opponent_id!r}")
        results = self._results[opponent_id]
        return sum(results) / len(results)


def exploiter_converged(monitor: ConvergenceMonitor, target_id: str) -> bool:
    """85% gate against the single targeted frozen Main Agent."""
    return monitor.win_rate(target_id) >= monitor.threshold


def main_converged(monitor: ConvergenceMonitor,
                   pool: list[OpponentPoolEntry]) -> bool:
    """85% gate against every pool member; vacuously true on an empty pool
    (start-of-league state)."""
    if not pool:
        return True
    return all(monitor.win_rate(e.entry_id) >= monitor.threshold for e in pool)


class GenerationEvent(Enum):
    EXPLOITER_CONVERGED = "exploiter_converged"
    MAIN_CONVERGED = "main_converged"


@dataclass(frozen=True)
class GenerationState:
    """Lifecycle bookkeeping: which frozen Main snapshot the exploiter is
    targeting and whether a newer one is waiting."""

    generation: int
    target_main_id: str
    exploiter_fresh: bool = True
    exploiter_idle: bool = False
    latest_converged_main_id: str | None = None


def advance_generation(state: GenerationState, event: GenerationEvent,
                       new_main_id: str | None = None) -> GenerationState:
    """Apply one lifecycle event.

    ExploiterConverged: the caller freezes the exploiter into the pool; the
    exploiter re-targets (fresh parameters, generation + 1) only if a newer
    converged Main snapshot exists, otherwise it idles at convergence.
    MainConverged: the caller adds the Main snapshot to the pool; the Main
    Agent keeps its network. An idling exploiter re-targets immediately.
    """
    if event is GenerationEvent.MAIN_CONVERGED:
        if new_main_id is None:
            raise InconsistentEventError("MainConverged requires a snapshot id")
        state = replace(state, latest_converged_main_id=new_main_id)
        if state.exploiter_idle:
            return replace(state, generation=state.generation + 1,
                           target_main_id=new_main_id, exploiter_fresh=True,
                           exploiter_idle=False)
        return state
    if event is GenerationEvent.EXPLOITER_CONVERGED:
        if state.exploiter_idle:
            raise InconsistentEventError("an idle exploiter cannot converge")
        newer = state.latest_converged_main_id
        if newer is not None and newer != state.target_main_id:
            return replace(state, generation=state.generation + 1,
                           target_main_id=newer, exploiter_fresh=True)
        return replace(state, exploiter_idle=True)
    raise InconsistentEventError(f"unknown event {event}")


# -- in-process league loop --

@dataclass(frozen=True)
class LeagueConfig:
    env_id: str = "duelsim"
    exploiter_mode: RewardMode = RewardMode.MINIMAX
    alpha: float = 0.01
    shaping_gamma: float = 0.995
    reward_min: float = -10.0
    reward_max: float = 10.0
    hidden_dims: tuple[int, ...] = (64, 64)
    dqn: DqnConfig = field(default_factory=lambda: DqnConfig(
        replay_capacity=50_000, learn_start=500, target_sync_period=500))
    threshold: float = 0.85
    window: int = 200
    pretrain_env_steps: int = 20_000
    total_env_steps: int = 100_000
    seed: int = 0
    journal_path: str | None = None


@dataclass
class LeagueResult:
    converged_exploiters: int
    main_convergences: int
    generation: int
    env_steps: int
    episodes: int
    pool_ids: list[str]
    journal: list[str]
    main_agent: DqnAgent
    exploiter_agent: DqnAgent


class LeagueRunner:
    """Runs one seeded league to a fixed environment-step budget."""

    def __init__(self, cfg: LeagueConfig):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        env = make_env(cfg.env_id)
        self.env = env
        self.spec = MlpSpec(env.obs_dim, cfg.hidden_dims, env.num_actions)
        self.main = DqnAgent(self.spec, cfg.dqn, self.rng)
        exp_dqn = replace(cfg.dqn, gamma=td_discount(
            self._reward_cfg(), cfg.dqn.gamma))
        self.exploiter = DqnAgent(self.spec, exp_dqn, self.rng)
        self.pool: list[OpponentPoolEntry] = []
        self.main_monitor = ConvergenceMonitor(cfg.threshold, cfg.window)
        self.exp_monitor = ConvergenceMonitor(cfg.threshold, cfg.window)
        self.journal: list[str] = []
        self.env_steps = 0
        self.episodes = 0
        self._snapshots = 0
        self._exploiters = 0
        self._main_convergences = 0
        self._frozen: dict[str, FrozenPolicy] = {}

    def _reward_cfg(self) -> ExploiterRewardConfig:
        return ExploiterRewardConfig(
            mode=self.cfg.exploiter_mode, alpha=self.cfg.alpha,
            gamma=self.cfg.shaping_gamma, reward_min=self.cfg.reward_min,
            reward_max=self.cfg.reward_max)

    def _log(self, event: str, **kv) -> None:
        parts = [f"env_steps={self.env_steps}", f"event={event}"]
        parts += [f"{k}={v}" for k, v in kv.items()]
        line = " ".join(parts)
        self.journal.append(line)
        if self.cfg.journal_path:
            with open(self.cfg.journal_path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    # -- rollout helpers --

    def _agent_policy(self, agent: DqnAgent):
        def policy(obs, mask, role):
            return agent.select_action(obs, mask, self.rng)
        return policy

    def _opponent_policy(self, entry: OpponentPoolEntry):
        if entry.archetype is Archetype.SCRIPTED:
            return entry.policy(np.random.default_rng(
                int(self.rng.integers(2 ** 63))))
        policy = entry.policy
        return lambda obs, mask, role: policy.act(obs, mask)

    def _frozen_policy_fn(self, policy: FrozenPolicy):
        return lambda obs, mask, role: policy.act(obs, mask)

    def _play_training_episode(self, agent: DqnAgent, agent_role: Role,
                               opponent_fn, buffer, reward_cfg=None,
                               evaluator=None) -> str:
        """One episode, transitions pushed to the buffer, learner stepped
        once per agent transition. Returns win/loss/draw for the agent."""
        policies = {agent_role: self._agent_policy(agent),
                    agent_role.opponent: opponent_fn}
        trace = play_episode(self.env, policies,
                             seed=int(self.rng.integers(2 ** 31)),
                             episode_id=self.episodes)
        self.episodes += 1
        self.env_steps += self.env.timestamp
        agent_side = trace.transitions[agent_role]
        if reward_cfg is not None and reward_cfg.mode is not RewardMode.VANILLA:
            paired = pair_transitions(agent_side,
                                      trace.transitions[agent_role.opponent])
            transformed, _audit = transform_batch(paired, evaluator, reward_cfg)
        else:
            transformed = list(agent_side)
        for tr in transformed:
            buffer.add_transition(tr)
        for _ in range(len(transformed)):
            if len(buffer) >= max(agent.config.learn_start,
                                  agent.config.batch_size):
                agent.learn_step(buffer, self.rng)
        won = (trace.final_outcome is Outcome.WIN_FIRST) == (agent_role is Role.FIRST)
        if trace.final_outcome is Outcome.DRAW:
            return "draw"
        return "win" if won else "loss"

    # -- league phases --

    def _freeze(self, agent: DqnAgent, prefix: str) -> str:
        if prefix == "main":
            self._snapshots += 1
            entry_id = f"main-{self._snapshots:03d}"
            archetype = Archetype.MAIN_AGENT_SNAPSHOT
        else:
            self._exploiters += 1
            entry_id = f"exploiter-{self._exploiters:03d}"
            archetype = Archetype.CONVERGED_EXPLOITER
        frozen = agent.frozen(entry_id)
        self._frozen[entry_id] = frozen
        self.pool.append(OpponentPoolEntry(entry_id, archetype, frozen))
        self.main_monitor.register(entry_id)
        self._log("pool_insert", id=entry_id, archetype=archetype.value)
        return entry_id

    def _refresh_pool_weights(self) -> None:
        # lazy refresh: opponent weight = its recent win fraction vs the
        # current Main Agent (draws are not opponent wins)
        for entry in self.pool:
            results = self.main_monitor._results.get(entry.entry_id)
            if results:
                entry.win_rate_vs_main = 1.0 - sum(results) / len(results)

    def run(self) -> LeagueResult:
        from .dqn import ReplayBuffer
        cfg = self.cfg
        main_buffer = ReplayBuffer(cfg.dqn.replay_capacity, self.env.obs_dim,
                                   self.env.num_actions)
        exp_buffer = ReplayBuffer(cfg.dqn.replay_capacity, self.env.obs_dim,
                                  self.env.num_actions)
        reward_cfg = self._reward_cfg()

        # phase 1: pretrain the Main Agent against the scripted opponent
        scripted_entry = OpponentPoolEntry("scripted", Archetype.SCRIPTED,
                                           scripted_policy)
        self.main_monitor.register("scripted")
        self._log("pretrain_start")
        seat = Role.FIRST
        # the full pretrain budget is always spent: the point is to freeze a
        # *strong* first Main snapshot, not to stop at the first gate pass
        while self.env_steps < cfg.pretrain_env_steps:
            result = self._play_training_episode(
                self.main, seat, self._opponent_policy(scripted_entry),
                main_buffer)
            self.main_monitor.record_result("scripted", result)
            seat = seat.opponent
        self._log("pretrain_done",
                  win_rate=_fmt_rate(self.main_monitor, "scripted"))

        # phase 2: league proper
        self.pool.append(scripted_entry)
        first_main = self._freeze(self.main, "main")
        gen_state = GenerationState(generation=0, target_main_id=first_main,
                                    latest_converged_main_id=first_main)
        self.exp_monitor.register(first_main)
        self._log("generation_start", generation=0, target=first_main)

        evaluator = NetworkEvaluator(self._frozen[first_main])
        exp_seat = Role.FIRST
        main_seat = Role.FIRST
        while self.env_steps < cfg.total_env_steps:
            # exploiter episode vs its frozen target
            if not gen_state.exploiter_idle:
                target = gen_state.target_main_id
                result = self._play_training_episode(
                    self.exploiter, exp_seat,
                    self._frozen_policy_fn(self._frozen[target]),
                    exp_buffer, reward_cfg, evaluator)
                self.exp_monitor.record_result(target, result)
                exp_seat = exp_seat.opponent
                if (self.exp_monitor.ready(target)
                        and exploiter_converged(self.exp_monitor, target)):
                    entry_id = self._freeze(self.exploiter, "exploiter")
                    self._log("exploiter_converged", id=entry_id,
                              generation=gen_state.generation,
                              target=target)
                    gen_state = advance_generation(
                        gen_state, GenerationEvent.EXPLOITER_CONVERGED)
                    if not gen_state.exploiter_idle:
                        self._reset_exploiter(exp_buffer)
                        exp_buffer = ReplayBuffer(
                            cfg.dqn.replay_capacity, self.env.obs_dim,
                            self.env.num_actions)
                        self.exp_monitor = ConvergenceMonitor(
                            cfg.threshold, cfg.window)
                        self.exp_monitor.register(gen_state.target_main_id)
                        evaluator = NetworkEvaluator(
                            self._frozen[gen_state.target_main_id])
                        self._log("generation_start",
                                  generation=gen_state.generation,
                                  target=gen_state.target_main_id)
                    else:
                        self._log("exploiter_idle",
                                  generation=gen_state.generation)

            if self.env_steps >= cfg.total_env_steps:
                break

            # main episode vs a sampled pool opponent
            self._refresh_pool_weights()
            entry = sample_opponent(self.pool, self.rng)
            result = self._play_training_episode(
                self.main, main_seat, self._opponent_policy(entry),
                main_buffer)
            self.main_monitor.record_result(entry.entry_id, result)
            entry.games_played += 1
            main_seat = main_seat.opponent
            if (all(self.main_monitor.ready(e.entry_id) for e in self.pool)
                    and main_converged(self.main_monitor, self.pool)):
                snapshot = self._freeze(self.main, "main")
                self._main_convergences += 1
                self._log("main_converged", id=snapshot)
                gen_state = advance_generation(
                    gen_state, GenerationEvent.MAIN_CONVERGED,
                    new_main_id=snapshot)
                if (not gen_state.exploiter_idle
                        and gen_state.target_main_id == snapshot):
                    # the idle exploiter was just re-targeted
                    self._reset_exploiter(exp_buffer)
                    exp_buffer = ReplayBuffer(
                        cfg.dqn.replay_capacity, self.env.obs_dim,
                        self.env.num_actions)
                    self.exp_monitor = ConvergenceMonitor(
                        cfg.threshold, cfg.window)
                    self.exp_monitor.register(snapshot)
                    evaluator = NetworkEvaluator(self._frozen[snapshot])
                    self._log("generation_start",
                              generation=gen_state.generation,
                              target=snapshot)
                # make sure every pool member (including the snapshot just
                # added) has a window; existing windows keep their history
                for e in self.pool:
                    self.main_monitor.register(e.entry_id)

        self._log("budget_exhausted",
                  converged_exploiters=self._exploiters,
                  generation=gen_state.generation)
        return LeagueResult(
            converged_exploiters=self._exploiters,
            main_convergences=self._main_convergences,
            generation=gen_state.generation,
            env_steps=self.env_steps,
            episodes=self.episodes,
            pool_ids=[e.entry_id for e in self.pool],
            journal=list(self.journal),
            main_agent=self.main,
            exploiter_agent=self.exploiter,
        )

    def _reset_exploiter(self, _old_buffer) -> None:
        exp_dqn = self.exploiter.config
        self.exploiter = DqnAgent(self.spec, exp_dqn, self.rng)


def _fmt_rate(monitor: ConvergenceMonitor, opponent_id: str) -> str:
    results = monitor._results.get(opponent_id)
    if not results:
        return "n/a"
    return f"{sum(results) / len(results):.3f}"
