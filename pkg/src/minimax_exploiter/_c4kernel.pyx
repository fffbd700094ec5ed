# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Connect-4 search kernels.

Semantics match ``_c4pure`` exactly; see that module for the contract.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport tanh

cnp.import_array()

DEF ROWS = 6
DEF COLS = 7

BACKEND = "cython"

# per-window weight by piece count; windows holding four pieces of a side
# are detected as wins before the leaf evaluation runs
cdef double _WEIGHTS[5]
cdef int _WINDOWS[69][4]
cdef int _N_WINDOWS = 0


def _init_tables():
    global _N_WINDOWS
    cdef int r, c, d, i, n = 0
    cdef int drs[4]
    cdef int dcs[4]
    drs[0] = 0; dcs[0] = 1
    drs[1] = 1; dcs[1] = 0
    drs[2] = 1; dcs[2] = 1
    drs[3] = 1; dcs[3] = -1
    for r in range(ROWS):
        for c in range(COLS):
            for d in range(4):
                if (0 <= r + 3 * drs[d] < ROWS
                        and 0 <= c + 3 * dcs[d] < COLS):
                    for i in range(4):
                        _WINDOWS[n][i] = ((r + i * drs[d]) * COLS
                                          + (c + i * dcs[d]))
                    n += 1
    _N_WINDOWS = n
    _WEIGHTS[0] = 0.0
    _WEIGHTS[1] = 1.0
    _WEIGHTS[2] = 4.0
    _WEIGHTS[3] = 32.0
    _WEIGHTS[4] = 0.0


_init_tables()


cdef double _leaf_value(signed char *cells, int player) nogil:
    """Static evaluation of a non-terminal position for ``player``."""
    cdef int w, i, v, mine, theirs
    cdef int opp = 3 - player
    cdef double score = 0.0
    for w in range(_N_WINDOWS):
        mine = 0
        theirs = 0
        for i in range(4):
            v = cells[_WINDOWS[w][i]]
            if v == player:
                mine += 1
            elif v == opp:
                theirs += 1
        if theirs == 0:
            score += _WEIGHTS[mine]
        elif mine == 0:
            score -= _WEIGHTS[theirs]
    return 0.75 * tanh(score / 64.0)


cdef bint _wins_at(signed char *cells, int row, int col, int player) nogil:
    cdef int dr, dc, sign, r, c, count, d
    cdef int drs[4]
    cdef int dcs[4]
    drs[0] = 0; dcs[0] = 1
    drs[1] = 1; dcs[1] = 0
    drs[2] = 1; dcs[2] = 1
    drs[3] = 1; dcs[3] = -1
    for d in range(4):
        dr = drs[d]
        dc = dcs[d]
        count = 1
        for sign in range(2):
            r = row + dr if sign == 0 else row - dr
            c = col + dc if sign == 0 else col - dc
            while 0 <= r < ROWS and 0 <= c < COLS and cells[r * COLS + c] == player:
                count += 1
                if sign == 0:
                    r += dr; c += dc
                else:
                    r -= dr; c -= dc
        if count >= 4:
            return True
    return False


cdef double _negamax(signed char *cells, int *heights, int player,
                     int depth, int filled) nogil:
    cdef double best = -2.0
    cdef double value
    cdef int col, row, idx
    cdef int opp = 3 - player
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
    if best == -2.0:
        return 0.0
    return best


def c4_winner(grid):
    """Full-board scan: 0 no winner, 1 or 2 for a completed four-line."""
    cdef cnp.ndarray[cnp.int8_t, ndim=1] flat = \
        np.ascontiguousarray(np.asarray(grid, dtype=np.int8).reshape(-1))
    cdef signed char *cells = <signed char *> flat.data
    cdef int r, c, p
    for r in range(ROWS):
        for c in range(COLS):
            p = cells[r * COLS + c]
            if p != 0 and _wins_at(cells, r, c, p):
                return p
    return 0


def c4_root_values(grid, int player, int depth):
    """Per-column value of moving there for ``player``; NaN marks a full
    column."""
    cdef cnp.ndarray[cnp.int8_t, ndim=1] flat = \
        np.ascontiguousarray(np.asarray(grid, dtype=np.int8).reshape(-1))
    cdef signed char *cells = <signed char *> flat.data
    cdef int heights[COLS]
    cdef int col, h, row, idx
    cdef int filled = 0
    cdef int opp = 3 - player
    for col in range(COLS):
        h = 0
        while h < ROWS and cells[h * COLS + col] != 0:
            h += 1
        heights[col] = h
        filled += h
    values = np.full(COLS, np.nan, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = values
    for col in range(COLS):
        row = heights[col]
        if row >= ROWS:
            continue
        idx = row * COLS + col
        cells[idx] = player
        if _wins_at(cells, row, col, player):
            out[col] = 1.0
        elif filled + 1 == ROWS * COLS:
            out[col] = 0.0
        elif depth <= 1:
            out[col] = _leaf_value(cells, player)
        else:
            heights[col] += 1
            out[col] = -_negamax(cells, heights, opp, depth - 1, filled + 1)
            heights[col] -= 1
        cells[idx] = 0
    return values
