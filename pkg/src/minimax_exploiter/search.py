"""Exact and depth-limited minimax for the turn-based games.

Full-depth Tic-Tac-Toe search is exact and memoized over a canonical state
encoding. Connect 4 search is depth-limited with a window-count static
evaluation at the horizon (see ``_c4pure``) and runs on the compiled kernel
when available (see ``kernels``); the static evaluation makes a shallow
searcher positionally strong rather than random between tactical windows.
Depth-limited Tic-Tac-Toe search keeps 0-valued horizon leaves.

Ties among optimal root moves are broken by a seeded uniform choice that
also mixes in the position, so a fixed seed gives a deterministic move per
position while still varying across positions and seeds.
"""

from __future__ import annotations

import random
import zlib
from dataclasses import dataclass

import numpy as np

from .core import Outcome, Role
from .errors import ConfigInvalidError, NotYourTurnError, TerminalStateError
from .games.connect4 import Connect4State, connect4_outcome
from .games.tictactoe import LINES, TicTacToeState, tictactoe_outcome
from .kernels import c4_root_values

__all__ = ["MinimaxConfig", "Evaluation", "evaluate", "act", "value_proxy",
           "root_values"]


@dataclass(frozen=True)
class MinimaxConfig:
    """``max_depth=None`` means search to the end of the game."""

    max_depth: int | None = None
    tie_break_seed: int = 0

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ConfigInvalidError("max_depth must be >= 1 when limited")


@dataclass(frozen=True)
class Evaluation:
    value: float
    best_action: int


# -- Tic-Tac-Toe search --

_TTT_CACHE: dict[tuple, float] = {}


def _ttt_terminal_value(cells: tuple[int, ...], mover_piece: int) -> float | None:
    """Value for the side to move, or None if the game goes on. The side to
    move can never be the one holding a completed line."""
    for line in LINES:
        a = cells[line[0]]
        if a != 0 and a == cells[line[1]] == cells[line[2]]:
            return -1.0
    if 0 not in cells:
        return 0.0
    return None


def _ttt_negamax(cells: tuple[int, ...], mover_piece: int,
                 depth: int | None) -> float:
    terminal = _ttt_terminal_value(cells, mover_piece)
    if terminal is not None:
        return terminal
    if depth is not None and depth <= 0:
        return 0.0
    if depth is None:
        cached = _TTT_CACHE.get((cells, mover_piece))
        if cached is not None:
            return cached
    other = 3 - mover_piece
    best = -2.0
    for i in range(9):
        if cells[i] == 0:
            child = cells[:i] + (mover_piece,) + cells[i + 1:]
            value = -_ttt_negamax(child, other,
                                  None if depth is None else depth - 1)
            if value > best:
                best = value
            if best == 1.0:
                break
    if depth is None:
        _TTT_CACHE[(cells, mover_piece)] = best
    return best


def _ttt_root_values(state: TicTacToeState, depth: int | None) -> np.ndarray:
    mover = 1 if state.to_move is Role.FIRST else 2
    other = 3 - mover
    values = np.full(9, np.nan, dtype=np.float64)
    for i in range(9):
        if state.cells[i] == 0:
            child = state.cells[:i] + (mover,) + state.cells[i + 1:]
            values[i] = -_ttt_negamax(child, other,
                                      None if depth is None else depth - 1)
    return values


# -- dispatch --

def root_values(state, config: MinimaxConfig) -> np.ndarray:
    """Value of each root action for the side to move; NaN marks illegal
    moves."""
    if isinstance(state, TicTacToeState):
        return _ttt_root_values(state, config.max_depth)
    if isinstance(state, Connect4State):
        if config.max_depth is None:
            raise ConfigInvalidError(
                "unlimited search is not supported for connect4")
        mover = 1 if state.to_move is Role.FIRST else 2
        return c4_root_values(state.as_array(), mover, config.max_depth)
    raise TypeError(f"unsupported state type {type(state).__name__}")


def _outcome_of(state) -> Outcome:
    if isinstance(state, TicTacToeState):
        return tictactoe_outcome(state)
    if isinstance(state, Connect4State):
        return connect4_outcome(state)
    raise TypeError(f"unsupported state type {type(state).__name__}")


def _state_key(state) -> bytes:
    if isinstance(state, TicTacToeState):
        return bytes(state.cells) + bytes([state.to_move.value])
    return bytes(state.grid) + bytes([state.to_move.value])


def _tie_break(values: np.ndarray, state, config: MinimaxConfig) -> int:
    best = np.nanmax(values)
    optimal = [i for i in range(len(values))
               if not np.isnan(values[i]) and values[i] >= best - 1e-9]
    if len(optimal) == 1:
        return optimal[0]
    seed = (config.tie_break_seed * 0x9E3779B1 + 1) ^ zlib.crc32(_state_key(state))
    return random.Random(seed).choice(optimal)


def evaluate(state, role: Role, config: MinimaxConfig) -> Evaluation:
    """Search from a non-terminal position with ``role`` to move."""
    if _outcome_of(state) is not Outcome.ONGOING:
        raise TerminalStateError("evaluate() requires a non-terminal state")
    if role is not state.to_move:
        raise NotYourTurnError("evaluate() expects the side to move")
    values = root_values(state, config)
    best_action = _tie_break(values, state, config)
    return Evaluation(value=float(np.nanmax(values)), best_action=best_action)


def act(state, role: Role, config: MinimaxConfig) -> int:
    """Best move for ``role`` with the seeded tie-break."""
    return evaluate(state, role, config).best_action


def _terminal_utility(outcome: Outcome, role: Role) -> float:
    if outcome is Outcome.DRAW:
        return 0.0
    winner = Role.FIRST if outcome is Outcome.WIN_FIRST else Role.SECOND
    return 1.0 if winner is role else -1.0


def value_proxy(state, role: Role, config: MinimaxConfig) -> float:
    """Scripted-opponent stand-in for a value function: terminal utility at
    the end of the game, search value elsewhere."""
    outcome = _outcome_of(state)
    if outcome is not Outcome.ONGOING:
        return _terminal_utility(outcome, role)
    value = float(np.nanmax(root_values(state, config)))
    return value if role is state.to_move else -value
