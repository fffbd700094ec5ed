"""Connect 4 on the standard 6x7 grid, +1/-1/0 terminal rewards.

Observations are role-relative one-hot planes (empty, own, opponent)
flattened to 126 dims. Row 0 is the bottom row; an action drops a piece
into a column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Environment, Outcome, Role, StepOutcome
from ..errors import (IllegalActionError, InvalidStateError,
                      MissingActionError, NotYourTurnError)
from ..kernels import c4_winner

ROWS, COLS = 6, 7
_EMPTY, _P1, _P2 = 0, 1, 2


@dataclass(frozen=True)
class Connect4State:
    grid: tuple[int, ...]  # row-major, 42 entries, row 0 = bottom
    to_move: Role

    def as_array(self) -> np.ndarray:
        return np.asarray(self.grid, dtype=np.int8).reshape(ROWS, COLS)


def connect4_outcome(state: Connect4State) -> Outcome:
    """Four-in-a-row over rows, columns and both diagonals; full grid draws."""
    grid = state.as_array()
    n1 = int((grid == _P1).sum())
    n2 = int((grid == _P2).sum())
    if n1 - n2 not in (0, 1):
        raise InvalidStateError(f"bad piece counts p1={n1} p2={n2}")
    for c in range(COLS):
        col = grid[:, c]
        seen_empty = False
        for r in range(ROWS):
            if col[r] == _EMPTY:
                seen_empty = True
            elif seen_empty:
                raise InvalidStateError(f"floating piece in column {c}")
    winner = c4_winner(grid)
    if winner == _P1:
        return Outcome.WIN_FIRST
    if winner == _P2:
        return Outcome.WIN_SECOND
    if n1 + n2 == ROWS * COLS:
        return Outcome.DRAW
    return Outcome.ONGOING


def observe(state: Connect4State, role: Role) -> np.ndarray:
    own = _P1 if role is Role.FIRST else _P2
    opp = _P2 if role is Role.FIRST else _P1
    grid = np.asarray(state.grid, dtype=np.int64)
    planes = np.stack([grid == _EMPTY, grid == own, grid == opp])
    return planes.astype(np.float64).reshape(-1)


def obs_to_state(obs: np.ndarray, role: Role) -> Connect4State:
    """Invert :func:`observe`, assuming ``role`` is to move."""
    planes = np.asarray(obs).reshape(3, ROWS * COLS)
    own = _P1 if role is Role.FIRST else _P2
    opp = _P2 if role is Role.FIRST else _P1
    grid = [0] * (ROWS * COLS)
    for i in range(ROWS * COLS):
        if planes[1, i] > 0.5:
            grid[i] = own
        elif planes[2, i] > 0.5:
            grid[i] = opp
    return Connect4State(grid=tuple(grid), to_move=role)


class Connect4(Environment):
    game_id = "connect4"
    num_actions = COLS
    obs_dim = 3 * ROWS * COLS

    def __init__(self):
        self._grid = np.zeros((ROWS, COLS), dtype=np.int8)
        self._heights = np.zeros(COLS, dtype=np.int64)
        self._to_move = Role.FIRST
        self._done = True
        self._tick = 0

    @property
    def state(self) -> Connect4State:
        return Connect4State(grid=tuple(int(x) for x in self._grid.reshape(-1)),
                             to_move=self._to_move)

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
        return frozenset({self._to_move})

    def reset(self, seed: int = 0) -> StepOutcome:
        self._grid[:] = _EMPTY
        self._heights[:] = 0
        self._to_move = Role.FIRST
        self._done = False
        self._tick = 0
        return self._outcome({Role.FIRST: 0.0, Role.SECOND: 0.0})

    def legal_actions(self, role: Role) -> np.ndarray:
        if role not in self.decision_owner:
            raise NotYourTurnError(f"{role} is not in the decision set")
        return self._heights < ROWS

    def step(self, actions) -> StepOutcome:
        mover = self._to_move
        if mover not in actions:
            raise MissingActionError(f"no action supplied for {mover}")
        col = int(actions[mover])
        if not (0 <= col < COLS) or self._heights[col] >= ROWS:
            raise IllegalActionError(f"column {col} is not playable")
        row = int(self._heights[col])
        piece = _P1 if mover is Role.FIRST else _P2
        self._grid[row, col] = piece
        self._heights[col] += 1
        self._to_move = mover.opponent
        self._tick += 1
        rewards = {Role.FIRST: 0.0, Role.SECOND: 0.0}
        if c4_winner(self._grid) == piece:
            self._done = True
            win = 1.0 if mover is Role.FIRST else -1.0
            rewards = {Role.FIRST: win, Role.SECOND: -win}
        elif int(self._heights.sum()) == ROWS * COLS:
            self._done = True
        return self._outcome(rewards)

    def _outcome(self, rewards) -> StepOutcome:
        return StepOutcome(
            observations={r: observe(self.state, r) for r in Role},
            rewards=rewards,
            done=self._done,
            decision_owner=self.decision_owner,
            timestamp=self._tick,
        )
