"""Exploiter reward transforms.

The Minimax mode rewrites an exploiter's reward as

    r_env - alpha * gamma * (1 - d) * (opp_max_q + |R_min|)

where ``opp_max_q`` is the frozen opponent's maximum legal-action Q-value at
the chronologically paired next state, and the ``|R_min|`` shift keeps the
shaping addition non-positive whenever the opponent's values stay within the
reward bounds. ``d`` is 1 when no opponent decision state follows the
exploiter's action (the episode ended), so shaping never fires on terminal
steps.

GammaZero is the same shaping with alpha forced to 1; the consuming agent is
additionally trained with TD discount 0 (see ``td_discount``), so the shaped
reward becomes its whole Q-target. Aggressive/Defensive are dense baselines
over per-transition damage events. Vanilla is a bit-exact identity.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from enum import Enum
from typing import Protocol, Sequence

import math

import numpy as np

from .core import Role, Transition
from .errors import (EpisodeMismatchError, MissingPairingError,
                     NonFiniteInputError, UnsortedTraceError)

__all__ = [
    "RewardMode", "ExploiterRewardConfig", "minimax_reward",
    "shift_bound_check", "PairedTransition", "pair_transitions",
    "OpponentEvaluator", "NetworkEvaluator", "OracleEvaluator",
    "transform_batch", "AuditRow", "ShapingAudit", "td_discount",
]


class RewardMode(Enum):
    VANILLA = "vanilla"
    MINIMAX = "minimax"
    GAMMA_ZERO = "gamma0"
    AGGRESSIVE = "aggressive"
    DEFENSIVE = "defensive"


@dataclass(frozen=True)
class ExploiterRewardConfig:
    mode: RewardMode = RewardMode.MINIMAX
    alpha: float = 0.1
    gamma: float = 0.995  # discount inside the shaping term, not the TD one
    reward_min: float = -1.0
    reward_max: float = 1.0
    hit_reward: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0,1], got {self.alpha}")

    @property
    def shift(self) -> float:
        return abs(self.reward_min)

    @property
    def effective_alpha(self) -> float:
        return 1.0 if self.mode is RewardMode.GAMMA_ZERO else self.alpha


def td_discount(cfg: ExploiterRewardConfig, base_gamma: float) -> float:
    """TD discount for the agent consuming this reward: 0 under GammaZero."""
    return 0.0 if cfg.mode is RewardMode.GAMMA_ZERO else base_gamma


def minimax_reward(r_env: float, opp_max_q: float, done: int,
                   cfg: ExploiterRewardConfig) -> float:
    if not (math.isfinite(r_env) and math.isfinite(opp_max_q)):
        raise NonFiniteInputError(
            f"non-finite reward input r={r_env} opp_max_q={opp_max_q}")
    return r_env - cfg.effective_alpha * cfg.gamma * (1 - done) * (
        opp_max_q + cfg.shift)


def shift_bound_check(opp_max_q: float, cfg: ExploiterRewardConfig) -> bool:
    """True iff the shifted opponent term is non-positive. A False result is
    an audit signal (function-approximation overshoot), not an error."""
    return -opp_max_q - cfg.shift <= 0.0


@dataclass(frozen=True)
class PairedTransition:
    transition: Transition
    opponent_state: np.ndarray | None
    opponent_legal_mask: np.ndarray | None
    pairing_timestamp: int | None

    @property
    def terminal_paired(self) -> bool:
        return self.opponent_state is None


def pair_transitions(exploiter: Sequence[Transition],
                     opponent: Sequence[Transition]) -> list[PairedTransition]:
    """Chronological pairing: each exploiter transition at decision tick t is
    matched with the opponent's earliest decision state at tick >= t+1 (the
    tick the exploiter's action lands). Opponent states may be reused; with
    no opponent state left, the transition is terminal-paired and receives no
    shaping."""
    for seq, name in ((exploiter, "exploiter"), (opponent, "opponent")):
        ticks = [tr.timestamp for tr in seq]
        if any(b <= a for a, b in zip(ticks, ticks[1:])):
            raise UnsortedTraceError(f"{name} trace is not timestamp-sorted")
    episodes = {tr.episode_id for tr in exploiter} | {tr.episode_id for tr in opponent}
    if len(episodes) > 1:
        raise EpisodeMismatchError(f"transitions span episodes {sorted(episodes)}")
    paired = []
    j = 0
    for tr in exploiter:
        while j < len(opponent) and opponent[j].timestamp < tr.timestamp + 1:
            j += 1
        if j < len(opponent):
            opp = opponent[j]
            paired.append(PairedTransition(tr, opp.state, opp.legal_mask,
                                           opp.timestamp))
        else:
            paired.append(PairedTransition(tr, None, None, None))
    return paired


class OpponentEvaluator(Protocol):
    """Side-effect-free access to the frozen opponent's greedy value."""

    def max_q(self, state: np.ndarray, legal_mask: np.ndarray) -> float: ...


class NetworkEvaluator:
    """Masked max-Q of a frozen opponent network."""

    def __init__(self, policy):
        self._policy = policy

    def max_q(self, state: np.ndarray, legal_mask: np.ndarray) -> float:
        return self._policy.max_q(state, legal_mask)


class OracleEvaluator:
    """Minimax value proxy for a scripted opponent; decodes the opponent's
    one-hot observation back into a board position."""

    def __init__(self, game_id: str, opponent_role: Role, config):
        from .games import connect4, tictactoe
        if game_id == "tictactoe":
            self._decode = tictactoe.obs_to_state
        elif game_id == "connect4":
            self._decode = connect4.obs_to_state
        else:
            raise ValueError(f"no oracle evaluator for game {game_id!r}")
        self._role = opponent_role
        self._config = config

    def max_q(self, state: np.ndarray, legal_mask: np.ndarray) -> float:
        from .search import value_proxy
        board = self._decode(state, self._role)
        return value_proxy(board, self._role, self._config)


@dataclass(frozen=True)
class AuditRow:
    batch_size: int
    bound_violations: int
    mean_shaped_reward: float
    mean_opp_max_q: float


def transform_batch(paired: Sequence[PairedTransition],
                    evaluator: OpponentEvaluator | None,
                    cfg: ExploiterRewardConfig
                    ) -> tuple[list[Transition], AuditRow]:
    """Replace rewards per the configured mode. Returns the transformed
    transitions plus an audit row for the CSV log."""
    if cfg.mode is RewardMode.VANILLA:
        out = [p.transition for p in paired]
        mean_r = float(np.mean([t.reward for t in out])) if out else 0.0
        return out, AuditRow(len(out), 0, mean_r, float("nan"))

    out = []
    violations = 0
    opp_values = []
    for p in paired:
        tr = p.transition
        if cfg.mode in (RewardMode.MINIMAX, RewardMode.GAMMA_ZERO):
            if p.terminal_paired:
                shaped = tr.reward
            else:
                if evaluator is None:
                    raise MissingPairingError(
                        "minimax shaping requires an opponent evaluator")
                opp_max_q = evaluator.max_q(p.opponent_state,
                                            p.opponent_legal_mask)
                if not shift_bound_check(opp_max_q, cfg):
                    violations += 1
                opp_values.append(opp_max_q)
                shaped = minimax_reward(tr.reward, opp_max_q, 0, cfg)
        elif cfg.mode is RewardMode.AGGRESSIVE:
            shaped = tr.reward + cfg.hit_reward * tr.info.get("damage_dealt", 0.0)
        else:  # DEFENSIVE
            shaped = tr.reward - cfg.hit_reward * tr.info.get("damage_taken", 0.0)
        out.append(replace(tr, reward=shaped))

    mean_r = float(np.mean([t.reward for t in out])) if out else 0.0
    mean_q = float(np.mean(opp_values)) if opp_values else float("nan")
    return out, AuditRow(len(out), violations, mean_r, mean_q)


class ShapingAudit:
    """Accumulates per-batch audit rows and writes the CSV log."""

    HEADER = ("batch", "batch_size", "bound_violations",
              "mean_shaped_reward", "mean_opp_max_q")

    def __init__(self):
        self.rows: list[AuditRow] = []

    def record(self, row: AuditRow) -> None:
        self.rows.append(row)

    @property
    def total_violations(self) -> int:
        return sum(r.bound_violations for r in self.rows)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.HEADER)
            for i, r in enumerate(self.rows):
                writer.writerow([i, r.batch_size, r.bound_violations,
                                 f"{r.mean_shaped_reward:.10g}",
                                 f"{r.mean_opp_max_q:.10g}"])
