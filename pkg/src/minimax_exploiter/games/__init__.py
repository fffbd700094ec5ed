"""Built-in environments and their string-id registry."""

from __future__ import annotations

from ..core import Environment
from ..errors import EnvironmentUnknownError
from .connect4 import Connect4, Connect4State, connect4_outcome
from .duelsim import DuelSim, DuelState, scripted_policy
from .tictactoe import TicTacToe, TicTacToeState, tictactoe_outcome

_REGISTRY: dict[str, type[Environment]] = {
    TicTacToe.game_id: TicTacToe,
    Connect4.game_id: Connect4,
    DuelSim.game_id: DuelSim,
}


def make_env(game_id: str) -> Environment:
    try:
        return _REGISTRY[game_id]()
    except KeyError:
        raise EnvironmentUnknownError(
            f"unknown environment id {game_id!r}; known: {sorted(_REGISTRY)}")


def available_games() -> list[str]:
    return sorted(_REGISTRY)


__all__ = [
    "Connect4", "Connect4State", "connect4_outcome",
    "DuelSim", "DuelState", "scripted_policy",
    "TicTacToe", "TicTacToeState", "tictactoe_outcome",
    "make_env", "available_games",
]
