"""Two-player zero-sum environment contract and episode records.

Every built-in game implements :class:`Environment`. Turn-based games expose a
singleton ``decision_owner`` set that alternates between the two roles;
simultaneous games may put both roles (or, during stuns, neither) in the set.
All records are plain immutable values and safe to hand between threads; an
environment instance itself is single-owner.

Timeline convention: ``reset`` emits the outcome at tick 0 and every ``step``
advances the tick by 1. A transition's ``timestamp`` is the tick at which the
acting role observed its state; ``reward_timestamp`` is the tick at which its
next observation (and folded reward) materialized.
"""

from __future__ import annotations

import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import IncompleteTraceError

__all__ = [
    "Role",
    "Outcome",
    "StepOutcome",
    "Transition",
    "EpisodeTrace",
    "Environment",
    "TraceRecorder",
    "play_episode",
    "returns",
    "write_traces",
    "read_traces",
]


class Role(Enum):
    """One of the two players. ``opponent`` is an involution."""

    FIRST = 0
    SECOND = 1

    @property
    def opponent(self) -> "Role":
        return Role.SECOND if self is Role.FIRST else Role.FIRST


class Outcome(Enum):
    """Terminal classification of an episode."""

    ONGOING = "ongoing"
    WIN_FIRST = "win_first"
    WIN_SECOND = "win_second"
    DRAW = "draw"


@dataclass(frozen=True)
class StepOutcome:
    """What the environment emits after reset/step.

    Rewards are exactly antisymmetric between the two roles at every tick.
    ``info`` carries optional per-role event data (e.g. damage dealt).
    """

    observations: Mapping[Role, np.ndarray]
    rewards: Mapping[Role, float]
    done: bool
    decision_owner: frozenset[Role]
    timestamp: int
    info: Mapping[Role, Mapping[str, float]] = field(default_factory=dict)


@dataclass(frozen=True)
class Transition:
    """One agent step: the unit of replay.

    ``reward`` folds all environment reward the role received between acting
    and its next observation (only terminal rewards are nonzero in the
    built-in games). ``legal_mask`` is the mask under which ``action`` was
    chosen; ``next_legal_mask`` is the mask at ``next_state`` (all-false when
    the episode ended).
    """

    episode_id: int
    role: Role
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool
    timestamp: int
    reward_timestamp: int
    legal_mask: np.ndarray
    next_legal_mask: np.ndarray
    info: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class EpisodeTrace:
    """Per-role, timestamp-sorted transition sequences plus the final result."""

    episode_id: int
    transitions: Mapping[Role, tuple[Transition, ...]]
    final_outcome: Outcome

    def is_complete(self) -> bool:
        return self.final_outcome is not Outcome.ONGOING


class Environment(ABC):
    """Contract shared by all built-in games."""

    game_id: str = ""
    num_actions: int = 0
    obs_dim: int = 0

    @abstractmethod
    def reset(self, seed: int = 0) -> StepOutcome:
        """Start a fresh episode. Identical seed implies identical state."""

    @abstractmethod
    def step(self, actions: Mapping[Role, int]) -> StepOutcome:
        """Apply one action per role in ``decision_owner``."""

    @abstractmethod
    def legal_actions(self, role: Role) -> np.ndarray:
        """Boolean mask over action indices for ``role`` (must be in the
        decision set)."""

    @property
    @abstractmethod
    def decision_owner(self) -> frozenset[Role]:
        ...

    @property
    @abstractmethod
    def done(self) -> bool:
        ...

    @property
    @abstractmethod
    def timestamp(self) -> int:
        ...


def returns(trace: EpisodeTrace, role: Role, discount: float) -> float:
    """Discounted return for ``role`` from the start of the episode.

    Rewards are discounted by the tick at which they realized, which is exact
    for the built-in games (only terminal rewards are nonzero).
    """
    if not trace.is_complete():
        raise IncompleteTraceError("returns() requires a finished episode")
    total = 0.0
    for tr in trace.transitions.get(role, ()):
        total += (discount ** tr.reward_timestamp) * tr.reward
    return total


class TraceRecorder:
    """Builds an :class:`EpisodeTrace` from a stream of step outcomes.

    A role's transition opens when it acts and closes at the next tick where
    the role regains decision rights (or the episode ends), folding any
    reward emitted in between.
    """

    def __init__(self, episode_id: int = 0):
        self.episode_id = episode_id
        self._pending: dict[Role, dict] = {}
        self._closed: dict[Role, list[Transition]] = {Role.FIRST: [], Role.SECOND: []}
        self._last_outcome: StepOutcome | None = None

    def on_reset(self, outcome: StepOutcome) -> None:
        self._last_outcome = outcome

    def on_actions(self, actions: Mapping[Role, int],
                   legal_masks: Mapping[Role, np.ndarray]) -> None:
        assert self._last_outcome is not None
        for role, action in actions.items():
            self._pending[role] = {
                "state": self._last_outcome.observations[role],
                "action": int(action),
                "timestamp": self._last_outcome.timestamp,
                "legal_mask": np.asarray(legal_masks[role], dtype=bool).copy(),
                "reward": 0.0,
                "info": {},
            }

    def on_step(self, outcome: StepOutcome) -> None:
        for role, pend in list(self._pending.items()):
            pend["reward"] += float(outcome.rewards[role])
            role_info = outcome.info.get(role, {})
            for k, v in role_info.items():
                pend["info"][k] = pend["info"].get(k, 0.0) + float(v)
            if outcome.done or role in outcome.decision_owner:
                if outcome.done:
                    next_mask = np.zeros_like(pend["legal_mask"])
                else:
                    next_mask = None  # filled by caller via close mask hook
                self._closed[role].append(Transition(
                    episode_id=self.episode_id,
                    role=role,
                    state=pend["state"],
                    action=pend["action"],
                    reward=pend["reward"],
                    next_state=outcome.observations[role],
                    done=outcome.done,
                    timestamp=pend["timestamp"],
                    reward_timestamp=outcome.timestamp,
                    legal_mask=pend["legal_mask"],
                    next_legal_mask=next_mask if next_mask is not None
                    else self._next_mask_hook(role),
                    info=dict(pend["info"]),
                ))
                del self._pending[role]
        self._last_outcome = outcome

    # replaced by play_episode with a closure over the live environment
    def _next_mask_hook(self, role: Role) -> np.ndarray:
        raise RuntimeError("next-mask hook not installed")

    def build(self, final_outcome: Outcome) -> EpisodeTrace:
        return EpisodeTrace(
            episode_id=self.episode_id,
            transitions={r: tuple(ts) for r, ts in self._closed.items()},
            final_outcome=final_outcome,
        )


def _final_outcome_from_rewards(rewards: Mapping[Role, float]) -> Outcome:
    rf = rewards[Role.FIRST]
    if rf > 0:
        return Outcome.WIN_FIRST
    if rf < 0:
        return Outcome.WIN_SECOND
    return Outcome.DRAW


Policy = Callable[[np.ndarray, np.ndarray, Role], int]


def play_episode(env: Environment, policies: Mapping[Role, Policy],
                 seed: int = 0, episode_id: int = 0,
                 max_ticks: int | None = None) -> EpisodeTrace:
    """Roll one full episode and record it.

    ``policies`` maps each role to a callable ``(obs, legal_mask, role) ->
    action``. Deterministic given the seed and deterministic policies.
    """
    recorder = TraceRecorder(episode_id)
    recorder._next_mask_hook = lambda role: env.legal_actions(role).copy()
    outcome = env.reset(seed)
    recorder.on_reset(outcome)
    while not outcome.done:
        if max_ticks is not None and outcome.timestamp >= max_ticks:
            raise IncompleteTraceError(
                f"episode exceeded {max_ticks} ticks without terminating")
        actions: dict[Role, int] = {}
        masks: dict[Role, np.ndarray] = {}
        for role in sorted(outcome.decision_owner, key=lambda r: r.value):
            mask = env.legal_actions(role)
            actions[role] = policies[role](outcome.observations[role], mask, role)
            masks[role] = mask
        recorder.on_actions(actions, masks)
        outcome = env.step(actions)
        recorder.on_step(outcome)
    return recorder.build(_final_outcome_from_rewards(outcome.rewards))


# -- newline-delimited trace files (audit/replay) --

def _transition_record(tr: Transition) -> dict:
    return {
        "episode_id": tr.episode_id,
        "role": tr.role.name,
        "timestamp": tr.timestamp,
        "reward_timestamp": tr.reward_timestamp,
        "state": [float(x) for x in tr.state],
        "action": tr.action,
        "reward": tr.reward,
        "done": int(tr.done),
    }


def write_traces(path, traces: Iterable[EpisodeTrace]) -> None:
    """One transition per line, JSON-encoded, both roles interleaved by role
    then timestamp."""
    with open(path, "w", encoding="utf-8") as fh:
        for trace in traces:
            for role in (Role.FIRST, Role.SECOND):
                for tr in trace.transitions.get(role, ()):
                    fh.write(json.dumps(_transition_record(tr)) + "\n")


def read_traces(path) -> list[dict]:
    """Parse a trace file back into plain records (audit use)."""
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
