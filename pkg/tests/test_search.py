"""Minimax search: exactness, depth cutoffs, seeded tie-breaks."""

import numpy as np
import pytest

from minimax_exploiter.core import Role
from minimax_exploiter.errors import (ConfigInvalidError, NotYourTurnError,
                                      TerminalStateError)
from minimax_exploiter.games.connect4 import Connect4State
from minimax_exploiter.games.tictactoe import TicTacToeState, tictactoe_outcome
from minimax_exploiter.core import Outcome
from minimax_exploiter.search import (MinimaxConfig, act, evaluate,
                                      root_values, value_proxy)

from oracles import c4_search_root, ttt_reachable_states, ttt_value_for_x

EXACT = MinimaxConfig(max_depth=None, tie_break_seed=0)


def _ttt_state(cells, x_to_move):
    return TicTacToeState(cells=cells,
                          to_move=Role.FIRST if x_to_move else Role.SECOND)


def test_ttt_empty_board_is_a_draw():
    state = _ttt_state((0,) * 9, True)
    assert evaluate(state, Role.FIRST, EXACT).value == 0.0


def test_ttt_values_match_independent_search_on_sampled_states():
    rng = np.random.default_rng(4)
    states = [(c, x) for c, x in ttt_reachable_states()
              if tictactoe_outcome(_ttt_state(c, x)) is Outcome.ONGOING]
    for i in rng.choice(len(states), size=300, replace=False):
        cells, x_to_move = states[int(i)]
        state = _ttt_state(cells, x_to_move)
        got = evaluate(state, state.to_move, EXACT).value
        want = ttt_value_for_x(cells, x_to_move)
        if not x_to_move:
            want = -want  # oracle values are from X's side
        assert got == want


def test_ttt_takes_the_forced_win():
    # X to move with two in a row: the winning square is forced
    state = _ttt_state((1, 1, 0,
                        2, 2, 0,
                        0, 0, 0), True)
    ev = evaluate(state, Role.FIRST, EXACT)
    assert ev.value == 1.0
    assert ev.best_action == 2


def test_ttt_blocks_the_forced_loss():
    # O threatens 0-1-2; blocking at 2 is also X's only non-losing move
    # (and it creates a double threat, so it wins outright)
    state = _ttt_state((2, 2, 0,
                        0, 1, 0,
                        0, 0, 1), True)
    ev = evaluate(state, Role.FIRST, EXACT)
    assert ev.best_action == 2
    assert ev.value == 1.0
    others = [v for i, v in enumerate(root_values(state, EXACT))
              if i != 2 and not np.isnan(v)]
    assert all(v == -1.0 for v in others)


def test_tie_break_is_seeded_and_position_dependent():
    state = _ttt_state((0,) * 9, True)  # all nine openings draw
    picks = {act(state, Role.FIRST, MinimaxConfig(tie_break_seed=s))
             for s in range(40)}
    assert len(picks) > 1  # seeds disagree
    for s in range(5):
        cfg = MinimaxConfig(tie_break_seed=s)
        assert act(state, Role.FIRST, cfg) == act(state, Role.FIRST, cfg)


def test_evaluate_guards():
    terminal = _ttt_state((1, 1, 1, 2, 2, 0, 0, 0, 0), False)
    with pytest.raises(TerminalStateError):
        evaluate(terminal, Role.SECOND, EXACT)
    ongoing = _ttt_state((1, 0, 0, 0, 0, 0, 0, 0, 0), False)
    with pytest.raises(NotYourTurnError):
        evaluate(ongoing, Role.FIRST, EXACT)


def test_depth_limited_config_rejects_nonpositive_depth():
    with pytest.raises(ConfigInvalidError):
        MinimaxConfig(max_depth=0)


def test_c4_requires_a_depth_limit():
    state = Connect4State(grid=(0,) * 42, to_move=Role.FIRST)
    with pytest.raises(ConfigInvalidError):
        root_values(state, MinimaxConfig(max_depth=None))


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_c4_root_values_match_bruteforce(depth):
    rng = np.random.default_rng(9)
    from minimax_exploiter.games import make_env
    env = make_env("connect4")
    checked = 0
    for seed in range(40):
        env.reset(seed)
        for _ in range(int(rng.integers(0, 25))):
            if env.done:
                break
            role = next(iter(env.decision_owner))
            mask = env.legal_actions(role)
            env.step({role: int(rng.choice(np.flatnonzero(mask)))})
        if env.done:
            continue
        state = env.state
        got = root_values(state, MinimaxConfig(max_depth=depth))
        mover = 1 if state.to_move is Role.FIRST else 2
        want = c4_search_root(state.as_array(), mover, depth)
        np.testing.assert_allclose(got, want, equal_nan=True)
        checked += 1
    assert checked > 20


def test_c4_shallow_search_prefers_the_center_opening():
    # the static leaf evaluation stays inside (-0.75, 0.75) on a quiet
    # board and rates the center column, which joins the most four-lines,
    # strictly above the edges
    state = Connect4State(grid=(0,) * 42, to_move=Role.FIRST)
    values = root_values(state, MinimaxConfig(max_depth=3))
    assert np.all(np.isfinite(values))
    assert np.all(np.abs(values) < 0.75)
    assert values[3] > values[0]
    assert values[3] > values[6]


def test_value_proxy_signs():
    # X to move and winning: +1 for X, -1 for O, regardless of who asks
    state = _ttt_state((1, 1, 0, 2, 2, 0, 0, 0, 0), True)
    assert value_proxy(state, Role.FIRST, EXACT) == 1.0
    assert value_proxy(state, Role.SECOND, EXACT) == -1.0
    # terminal positions report the terminal utility directly
    won = _ttt_state((1, 1, 1, 2, 2, 0, 0, 0, 0), False)
    assert value_proxy(won, Role.FIRST, EXACT) == 1.0
    assert value_proxy(won, Role.SECOND, EXACT) == -1.0
