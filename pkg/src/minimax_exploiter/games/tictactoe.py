"""Tic-Tac-Toe: alternating turns on a 3x3 grid, +1/-1/0 terminal rewards.

Observations are role-relative one-hot planes (empty, own, opponent)
flattened to 27 dims, so the same network can play either seat.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Environment, Outcome, Role, StepOutcome
from ..errors import (IllegalActionError, InvalidStateError,
                      MissingActionError, NotYourTurnError)

LINES = (
    (0, 1, 2), (3, 4, 5), (6, 7, 8),
    (0, 3, 6), (1, 4, 7), (2, 5, 8),
    (0, 4, 8), (2, 4, 6),
)

_EMPTY, _X, _O = 0, 1, 2


@dataclass(frozen=True)
class TicTacToeState:
    cells: tuple[int, ...]  # 9 entries in {0 empty, 1 X, 2 O}
    to_move: Role


def tictactoe_outcome(state: TicTacToeState) -> Outcome:
    """Classify a position: line of three wins, full board draws."""
    cells = state.cells
    n_x = cells.count(_X)
    n_o = cells.count(_O)
    if n_x - n_o not in (0, 1) or len(cells) != 9:
        raise InvalidStateError(f"bad piece counts x={n_x} o={n_o}")
    x_line = any(all(cells[i] == _X for i in line) for line in LINES)
    o_line = any(all(cells[i] == _O for i in line) for line in LINES)
    if x_line and o_line:
        raise InvalidStateError("both players have completed lines")
    if x_line:
        return Outcome.WIN_FIRST
    if o_line:
        return Outcome.WIN_SECOND
    if n_x + n_o == 9:
        return Outcome.DRAW
    return Outcome.ONGOING


def observe(state: TicTacToeState, role: Role) -> np.ndarray:
    """27-dim one-hot planes (empty, own, opponent) for ``role``."""
    own = _X if role is Role.FIRST else _O
    opp = _O if role is Role.FIRST else _X
    cells = np.asarray(state.cells, dtype=np.int64)
    planes = np.stack([cells == _EMPTY, cells == own, cells == opp])
    return planes.astype(np.float64).reshape(-1)


def obs_to_state(obs: np.ndarray, role: Role) -> TicTacToeState:
    """Invert :func:`observe`, assuming ``role`` is to move in the position."""
    planes = np.asarray(obs).reshape(3, 9)
    own = _X if role is Role.FIRST else _O
    opp = _O if role is Role.FIRST else _X
    cells = [0] * 9
    for i in range(9):
        if planes[1, i] > 0.5:
            cells[i] = own
        elif planes[2, i] > 0.5:
            cells[i] = opp
    return TicTacToeState(cells=tuple(cells), to_move=role)


class TicTacToe(Environment):
    game_id = "tictactoe"
    num_actions = 9
    obs_dim = 27

    def __init__(self):
        self._state = TicTacToeState(cells=(0,) * 9, to_move=Role.FIRST)
        self._done = True
        self._tick = 0

    @property
    def state(self) -> TicTacToeState:
        return self._state

    @property
    def done(self) -> bool:
        return self._done

    @property
    def timestamp(self) -> int:
        return self._tick

    @property
    def decision_owner(self) -> frozenset[Role]:
        if self._done:
            return frozenset()
        return frozenset({self._state.to_move})

    def reset(self, seed: int = 0) -> StepOutcome:
        # The initial position is fixed; the seed only satisfies the shared
        # reset contract.
        self._state = TicTacToeState(cells=(0,) * 9, to_move=Role.FIRST)
        self._done = False
        self._tick = 0
        return self._outcome({Role.FIRST: 0.0, Role.SECOND: 0.0})

    def legal_actions(self, role: Role) -> np.ndarray:
        if role not in self.decision_owner:
            raise NotYourTurnError(f"{role} is not in the decision set")
        return np.asarray([c == _EMPTY for c in self._state.cells], dtype=bool)

    def step(self, actions) -> StepOutcome:
        mover = self._state.to_move
        if mover not in actions:
            raise MissingActionError(f"no action supplied for {mover}")
        action = int(actions[mover])
        if not (0 <= action < 9) or self._state.cells[action] != _EMPTY:
            raise IllegalActionError(f"cell {action} is not playable")
        cells = list(self._state.cells)
        cells[action] = _X if mover is Role.FIRST else _O
        self._state = TicTacToeState(cells=tuple(cells), to_move=mover.opponent)
        self._tick += 1
        result = tictactoe_outcome(self._state)
        rewards = {Role.FIRST: 0.0, Role.SECOND: 0.0}
        if result is not Outcome.ONGOING:
            self._done = True
            if result is Outcome.WIN_FIRST:
                rewards = {Role.FIRST: 1.0, Role.SECOND: -1.0}
            elif result is Outcome.WIN_SECOND:
                rewards = {Role.FIRST: -1.0, Role.SECOND: 1.0}
        return self._outcome(rewards)

    def _outcome(self, rewards) -> StepOutcome:
        return StepOutcome(
            observations={r: observe(self._state, r) for r in Role},
            rewards=rewards,
            done=self._done,
            decision_owner=self.decision_owner,
            timestamp=self._tick,
        )
