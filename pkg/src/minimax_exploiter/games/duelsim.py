"""DuelSim: a simultaneous-move duel with stuns and guard management.

Both fighters pick from {Attack, Block, Recover, NoOp} each tick unless
stunned. A landed attack (target not blocking) removes one health point and
stuns the target for two ticks, so one fighter can act several times before
its opponent decides again — the per-role decision streams drift apart,
which is exactly what the chronological reward pairing has to handle.

Mechanics (fixed constants, episodes stay short):
  - health starts at 10; the duel ends at 0 health with +/-10 rewards.
  - Block consumes one guard point (of 3); with no guard left it degrades to
    NoOp. Recover refills guard to 3 and, if hit that tick, takes damage but
    no stun. Always-blocking is therefore not a safe strategy.
  - a blocked attack is a parry: the attacker is stunned instead of the
    target, so relentless attacking has a counter. A fighter that is already
    stunned takes damage but cannot be re-stunned, so a parry buys two free
    hits rather than a permanent lock.
  - a tick cap of 200 ends stalled episodes as a 0/0 draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Environment, Role, StepOutcome
from ..errors import IllegalActionError, MissingActionError, NotYourTurnError

ATTACK, BLOCK, RECOVER, NOOP = 0, 1, 2, 3
ACTION_NAMES = ("attack", "block", "recover", "noop")

MAX_HEALTH = 10
MAX_GUARD = 3
STUN_TICKS = 2
TICK_LIMIT = 200
WIN_REWARD = 10.0


@dataclass(frozen=True)
class DuelState:
    health: tuple[int, int]
    stun_ticks_remaining: tuple[int, int]
    guard: tuple[int, int]
    last_action: tuple[int, int]
    tick: int


def observe(state: DuelState, role: Role) -> np.ndarray:
    """14-dim own-relative vector: scalars for both fighters plus one-hot
    last actions."""
    me, them = role.value, role.opponent.value
    scalars = [
        state.health[me] / MAX_HEALTH,
        state.stun_ticks_remaining[me] / STUN_TICKS,
        state.guard[me] / MAX_GUARD,
        state.health[them] / MAX_HEALTH,
        state.stun_ticks_remaining[them] / STUN_TICKS,
        state.guard[them] / MAX_GUARD,
    ]
    own_last = np.zeros(4)
    own_last[state.last_action[me]] = 1.0
    opp_last = np.zeros(4)
    opp_last[state.last_action[them]] = 1.0
    return np.concatenate([scalars, own_last, opp_last]).astype(np.float64)


class DuelSim(Environment):
    game_id = "duelsim"
    num_actions = 4
    obs_dim = 14

    def __init__(self):
        self._state = _initial_state()
        self._done = True

    @property
    def state(self) -> DuelState:
        return self._state

    @property
    def done(self) -> bool:
        return self._done

    @property
    def timestamp(self) -> int:
        return self._state.tick

    @property
    def decision_owner(self) -> frozenset[Role]:
        if self._done:
            return frozenset()
        return frozenset(r for r in Role
                         if self._state.stun_ticks_remaining[r.value] == 0)

    def reset(self, seed: int = 0) -> StepOutcome:
        # Deterministic initial state; the seed only satisfies the contract.
        self._state = _initial_state()
        self._done = False
        return self._outcome({Role.FIRST: 0.0, Role.SECOND: 0.0}, {})

    def legal_actions(self, role: Role) -> np.ndarray:
        if role not in self.decision_owner:
            raise NotYourTurnError(f"{role} is stunned or the duel is over")
        return np.ones(self.num_actions, dtype=bool)

    def step(self, actions) -> StepOutcome:
        owner = self.decision_owner
        chosen = [NOOP, NOOP]
        for role in owner:
            if role not in actions:
                raise MissingActionError(f"no action supplied for {role}")
            a = int(actions[role])
            if not (0 <= a < self.num_actions):
                raise IllegalActionError(f"unknown action {a}")
            chosen[role.value] = a
        for role in actions:
            if role not in owner:
                raise IllegalActionError(f"{role} cannot act while stunned")

        st = self._state
        health = list(st.health)
        guard = list(st.guard)
        stun = list(st.stun_ticks_remaining)
        damage = [0, 0]

        # Block consumes guard; without guard it degrades to NoOp.
        effective = list(chosen)
        for i in (0, 1):
            if effective[i] == BLOCK:
                if guard[i] > 0:
                    guard[i] -= 1
                else:
                    effective[i] = NOOP
            elif effective[i] == RECOVER:
                guard[i] = MAX_GUARD

        new_stun = [max(s - 1, 0) for s in stun]
        for i in (0, 1):
            j = 1 - i
            if effective[i] == ATTACK:
                if effective[j] == BLOCK:
                    # parried: the attacker is the one who gets stunned
                    if stun[i] == 0:
                        new_stun[i] = STUN_TICKS
                    continue
                health[j] -= 1
                damage[i] += 1
                if effective[j] != RECOVER and stun[j] == 0:
                    new_stun[j] = STUN_TICKS

        tick = st.tick + 1
        self._state = DuelState(
            health=(health[0], health[1]),
            stun_ticks_remaining=(new_stun[0], new_stun[1]),
            guard=(guard[0], guard[1]),
            last_action=(effective[0], effective[1]),
            tick=tick,
        )

        rewards = {Role.FIRST: 0.0, Role.SECOND: 0.0}
        first_dead = health[0] <= 0
        second_dead = health[1] <= 0
        if first_dead or second_dead:
            self._done = True
            if first_dead and not second_dead:
                rewards = {Role.FIRST: -WIN_REWARD, Role.SECOND: WIN_REWARD}
            elif second_dead and not first_dead:
                rewards = {Role.FIRST: WIN_REWARD, Role.SECOND: -WIN_REWARD}
            # simultaneous knockout: draw, 0/0
        elif tick >= TICK_LIMIT:
            self._done = True  # stalled duel: draw

        info = {
            Role.FIRST: {"damage_dealt": float(damage[0]),
                         "damage_taken": float(damage[1])},
            Role.SECOND: {"damage_dealt": float(damage[1]),
                          "damage_taken": float(damage[0])},
        }
        return self._outcome(rewards, info)

    def _outcome(self, rewards, info) -> StepOutcome:
        return StepOutcome(
            observations={r: observe(self._state, r) for r in Role},
            rewards=rewards,
            done=self._done,
            decision_owner=self.decision_owner,
            timestamp=self._state.tick,
            info=info,
        )


def _initial_state() -> DuelState:
    return DuelState(
        health=(MAX_HEALTH, MAX_HEALTH),
        stun_ticks_remaining=(0, 0),
        guard=(MAX_GUARD, MAX_GUARD),
        last_action=(NOOP, NOOP),
        tick=0,
    )


def scripted_policy(rng: np.random.Generator):
    """Simple stochastic opponent: mostly attacks, sometimes blocks or
    recovers. Deterministic given the generator state."""
    def act(obs: np.ndarray, legal_mask: np.ndarray, role: Role) -> int:
        u = rng.random()
        if u < 0.55:
            return ATTACK
        if u < 0.80:
            return BLOCK
        if u < 0.95:
            return RECOVER
        return NOOP
    return act
