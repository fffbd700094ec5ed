"""Pure-Python Connect-4 search kernels.

Reference implementation of the compiled kernels in ``_c4kernel``; both must
return identical values. Row 0 is the bottom row. Piece values: 0 empty,
1 first player, 2 second player.

Depth-limited negamax with a static evaluation at the horizon: a
non-terminal leaf is scored by counting, over all 69 four-in-a-row windows,
windows occupied by exactly one side (1/4/32 points for one/two/three
pieces), and squashing the mover-minus-opponent difference through
``0.75 * tanh(diff / 64)``. Leaf values therefore stay inside (-0.75, 0.75)
and can never outweigh a real win (+1) or forced loss (-1) found inside the
search window.
"""

from __future__ import annotations

import math

import numpy as np

ROWS, COLS = 6, 7

BACKEND = "pure"

# weight of a window holding n pieces of one side and none of the other;
# n == 4 is handled as a terminal win before the leaf evaluation runs
_WEIGHTS = (0.0, 1.0, 4.0, 32.0, 0.0)


def _window_table() -> tuple[tuple[int, ...], ...]:
    """Flat cell indices of every four-in-a-row window."""
    wins = []
    for r in range(ROWS):
        for c in range(COLS):
            for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
                if 0 <= r + 3 * dr < ROWS and 0 <= c + 3 * dc < COLS:
                    wins.append(tuple((r + i * dr) * COLS + (c + i * dc)
                                      for i in range(4)))
    return tuple(wins)


_WINDOWS = _window_table()


def _leaf_value(cells: list[int], player: int) -> float:
    """Static evaluation of a non-terminal position for ``player``."""
    opp = 3 - player
    score = 0.0
    for window in _WINDOWS:
        mine = 0
        theirs = 0
        for idx in window:
            v = cells[idx]
            if v == player:
                mine += 1
            elif v == opp:
                theirs += 1
        if theirs == 0:
            score += _WEIGHTS[mine]
        elif mine == 0:
            score -= _WEIGHTS[theirs]
    return 0.75 * math.tanh(score / 64.0)


def _wins_at(cells: list[int], row: int, col: int, player: int) -> bool:
    """Does ``player``'s piece at (row, col) complete a four-line?"""
    for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
        count = 1
        for sign in (1, -1):
            r, c = row + sign * dr, col + sign * dc
            while 0 <= r < ROWS and 0 <= c < COLS and cells[r * COLS + c] == player:
                count += 1
                r += sign * dr
                c += sign * dc
        if count >= 4:
            return True
    return False


def c4_winner(grid) -> int:
    """Full-board scan: 0 no winner, 1 or 2 for a completed four-line."""
    g = np.asarray(grid).reshape(ROWS, COLS)
    cells = [int(x) for x in g.reshape(-1)]
    for r in range(ROWS):
        for c in range(COLS):
            p = cells[r * COLS + c]
            if p != 0 and _wins_at(cells, r, c, p):
                return p
    return 0


def _negamax(cells: list[int], heights: list[int], player: int,
             depth: int, filled: int) -> float:
    """Value for ``player`` to move, searching ``depth`` plies."""
    best = -2.0
    opp = 3 - player
    for col in range(COLS):
        row = heights[col]
        if row >= ROWS:
            continue
        idx = row * COLS + col
        cells[idx] = player
        if _wins_at(cells, row, col, player):
            value = 1.0
        elif filled + 1 == ROWS * COLS:
            value = 0.0
        elif depth <= 1:
            value = _leaf_value(cells, player)
        else:
            heights[col] += 1
            value = -_negamax(cells, heights, opp, depth - 1, filled + 1)
            heights[col] -= 1
        cells[idx] = 0
        if value > best:
            best = value
    if best == -2.0:  # no legal move: full board, draw
        return 0.0
    return best


def c4_root_values(grid, player: int, depth: int) -> np.ndarray:
    """Per-column value of moving there for ``player``, searching ``depth``
    plies total. Full columns get NaN."""
    g = np.asarray(grid).reshape(ROWS, COLS)
    cells = [int(x) for x in g.reshape(-1)]
    heights = [0] * COLS
    filled = 0
    for c in range(COLS):
        h = 0
        while h < ROWS and cells[h * COLS + c] != 0:
            h += 1
        heights[c] = h
        filled += h
    values = np.full(COLS, np.nan, dtype=np.float64)
    opp = 3 - player
    for col in range(COLS):
        row = heights[col]
        if row >= ROWS:
            continue
        idx = row * COLS + col
        cells[idx] = player
        if _wins_at(cells, row, col, player):
            values[col] = 1.0
        elif filled + 1 == ROWS * COLS:
            values[col] = 0.0
        elif depth <= 1:
            values[col] = _leaf_value(cells, player)
        else:
            heights[col] += 1
            values[col] = -_negamax(cells, heights, opp, depth - 1, filled + 1)
            heights[col] -= 1
        cells[idx] = 0
    return values
