"""Built-in environments: rules, observations, reward antisymmetry."""

import numpy as np
import pytest

from minimax_exploiter.core import Outcome, Role
from minimax_exploiter.errors import (EnvironmentUnknownError,
                                      IllegalActionError, InvalidStateError,
                                      NotYourTurnError)
from minimax_exploiter.games import available_games, make_env
from minimax_exploiter.games import connect4, duelsim, tictactoe
from minimax_exploiter.games.duelsim import (ATTACK, BLOCK, MAX_GUARD,
                                             MAX_HEALTH, NOOP, RECOVER,
                                             STUN_TICKS, TICK_LIMIT,
                                             WIN_REWARD)
from minimax_exploiter.games.tictactoe import TicTacToeState

from oracles import c4_winner_scan, ttt_reachable_states, ttt_winner


def test_registry():
    assert set(available_games()) == {"tictactoe", "connect4", "duelsim"}
    with pytest.raises(EnvironmentUnknownError):
        make_env("checkers")


def random_rollout(env, seed):
    rng = np.random.default_rng(seed)
    outcome = env.reset(seed)
    outcomes = [outcome]
    while not outcome.done:
        actions = {}
        for role in outcome.decision_owner:
            mask = env.legal_actions(role)
            actions[role] = int(rng.choice(np.flatnonzero(mask)))
        outcome = env.step(actions)
        outcomes.append(outcome)
    return outcomes


@pytest.mark.parametrize("game_id", ["tictactoe", "connect4", "duelsim"])
def test_rewards_antisymmetric_every_tick(game_id):
    env = make_env(game_id)
    for seed in range(30):
        for outcome in random_rollout(env, seed):
            assert outcome.rewards[Role.FIRST] == -outcome.rewards[Role.SECOND]


# -- Tic-Tac-Toe --

def test_ttt_outcome_matches_line_scan_on_all_reachable_states():
    for cells, x_to_move in ttt_reachable_states():
        state = TicTacToeState(cells=cells, to_move=Role.FIRST if x_to_move
                               else Role.SECOND)
        got = tictactoe.tictactoe_outcome(state)
        winner = ttt_winner(cells)
        if winner == 1:
            assert got is Outcome.WIN_FIRST
        elif winner == 2:
            assert got is Outcome.WIN_SECOND
        elif 0 not in cells:
            assert got is Outcome.DRAW
        else:
            assert got is Outcome.ONGOING


def test_ttt_rejects_impossible_positions():
    with pytest.raises(InvalidStateError):
        tictactoe.tictactoe_outcome(
            TicTacToeState(cells=(1, 1, 1, 0, 0, 0, 0, 0, 0),
                           to_move=Role.SECOND))  # three X, zero O
    with pytest.raises(InvalidStateError):
        tictactoe.tictactoe_outcome(
            TicTacToeState(cells=(1, 1, 1, 2, 2, 2, 1, 2, 0),
                           to_move=Role.FIRST))  # both sides have lines


def test_ttt_observation_roundtrip():
    rng = np.random.default_rng(0)
    states = [s for s in (TicTacToeState(cells=c, to_move=Role.FIRST if x
                                         else Role.SECOND)
                          for c, x in ttt_reachable_states())]
    for state in rng.choice(len(states), size=200, replace=False):
        state = states[int(state)]
        obs = tictactoe.observe(state, state.to_move)
        assert obs.shape == (27,)
        assert tictactoe.obs_to_state(obs, state.to_move) == state
        # the three planes partition the board
        assert np.all(obs.reshape(3, 9).sum(axis=0) == 1)


def test_ttt_illegal_moves_rejected():
    env = make_env("tictactoe")
    env.reset(0)
    env.step({Role.FIRST: 4})
    with pytest.raises(IllegalActionError):
        env.step({Role.SECOND: 4})  # occupied cell
    with pytest.raises(NotYourTurnError):
        env.legal_actions(Role.FIRST)


# -- Connect 4 --

def test_c4_gravity_and_win_detection():
    env = make_env("connect4")
    env.reset(0)
    # first player stacks column 3; second player wanders
    for opp_col in (0, 1, 2):
        env.step({Role.FIRST: 3})
        out = env.step({Role.SECOND: opp_col})
        assert not out.done
    out = env.step({Role.FIRST: 3})  # fourth piece in the column
    assert out.done
    assert out.rewards[Role.FIRST] == 1.0
    grid = env.state.as_array()
    assert list(grid[:4, 3]) == [1, 1, 1, 1]
    assert c4_winner_scan(grid) == 1


def test_c4_outcome_agrees_with_line_scan_on_random_play():
    env = make_env("connect4")
    for seed in range(100):
        outcomes = random_rollout(env, seed)
        grid = env.state.as_array()
        final = outcomes[-1]
        winner = c4_winner_scan(grid)
        if winner == 1:
            assert final.rewards[Role.FIRST] == 1.0
        elif winner == 2:
            assert final.rewards[Role.FIRST] == -1.0
        else:
            assert final.rewards[Role.FIRST] == 0.0
            assert not np.any(grid == 0)  # draws only on a full grid
        assert connect4.connect4_outcome(env.state) is not Outcome.ONGOING


def test_c4_rejects_floating_pieces():
    grid = [0] * 42
    grid[7] = 1  # row 1 with empty row 0 below it
    with pytest.raises(InvalidStateError):
        connect4.connect4_outcome(
            connect4.Connect4State(grid=tuple(grid), to_move=Role.SECOND))


def test_c4_observation_roundtrip():
    env = make_env("connect4")
    rng = np.random.default_rng(5)
    for seed in range(20):
        env.reset(seed)
        for _ in range(int(rng.integers(0, 30))):
            if env.done:
                break
            role = next(iter(env.decision_owner))
            mask = env.legal_actions(role)
            env.step({role: int(rng.choice(np.flatnonzero(mask)))})
        state = env.state
        for role in Role:
            obs = connect4.observe(state, role)
            assert obs.shape == (126,)
            got = connect4.obs_to_state(obs, role)
            assert got.grid == state.grid


def test_c4_full_column_is_illegal():
    env = make_env("connect4")
    env.reset(0)
    for _ in range(3):
        env.step({Role.FIRST: 0})
        env.step({Role.SECOND: 0})
    with pytest.raises(IllegalActionError):
        env.step({Role.FIRST: 0})


# -- DuelSim --

def test_duel_attack_deals_damage_and_stuns():
    env = make_env("duelsim")
    env.reset(0)
    out = env.step({Role.FIRST: ATTACK, Role.SECOND: NOOP})
    st = env.state
    assert st.health == (MAX_HEALTH, MAX_HEALTH - 1)
    assert st.stun_ticks_remaining == (0, STUN_TICKS)
    assert out.decision_owner == frozenset({Role.FIRST})
    assert out.info[Role.FIRST]["damage_dealt"] == 1.0
    assert out.info[Role.SECOND]["damage_taken"] == 1.0
    # victim regains decisions after the stun runs out
    out = env.step({Role.FIRST: NOOP})
    assert out.decision_owner == frozenset({Role.FIRST})
    out = env.step({Role.FIRST: NOOP})
    assert out.decision_owner == frozenset({Role.FIRST, Role.SECOND})


def test_duel_block_consumes_guard_and_degrades_without_it():
    env = make_env("duelsim")
    env.reset(0)
    for i in range(MAX_GUARD):
        env.step({Role.FIRST: ATTACK, Role.SECOND: BLOCK})
        assert env.state.guard[1] == MAX_GUARD - 1 - i
        assert env.state.health[1] == MAX_HEALTH  # blocked: no damage
        while Role.FIRST not in env.decision_owner:  # parried attacker
            env.step({Role.SECOND: NOOP})
    # guard exhausted: the block degrades to a no-op and the hit lands
    env.step({Role.FIRST: ATTACK, Role.SECOND: BLOCK})
    assert env.state.health[1] == MAX_HEALTH - 1
    assert env.state.last_action[1] == NOOP
    assert env.state.stun_ticks_remaining[1] == STUN_TICKS


def test_duel_parry_stuns_the_attacker_without_relocking():
    env = make_env("duelsim")
    env.reset(0)
    env.step({Role.FIRST: ATTACK, Role.SECOND: BLOCK})
    assert env.state.stun_ticks_remaining[0] == STUN_TICKS
    assert env.state.health == (MAX_HEALTH, MAX_HEALTH)
    assert env.decision_owner == frozenset({Role.SECOND})
    # free hits on the stunned attacker do damage but never extend the stun
    env.step({Role.SECOND: ATTACK})
    assert env.state.health[0] == MAX_HEALTH - 1
    assert env.state.stun_ticks_remaining[0] == STUN_TICKS - 1
    env.step({Role.SECOND: ATTACK})
    assert env.state.health[0] == MAX_HEALTH - 2
    assert env.state.stun_ticks_remaining[0] == 0
    assert env.decision_owner == frozenset({Role.FIRST, Role.SECOND})


def test_duel_recover_refills_guard_but_eats_unstunned_damage():
    env = make_env("duelsim")
    env.reset(0)
    env.step({Role.FIRST: ATTACK, Role.SECOND: BLOCK})
    assert env.state.guard[1] == MAX_GUARD - 1
    while Role.FIRST not in env.decision_owner:  # wait out the parry stun
        env.step({Role.SECOND: NOOP})
    env.step({Role.FIRST: ATTACK, Role.SECOND: RECOVER})
    assert env.state.guard[1] == MAX_GUARD
    assert env.state.health[1] == MAX_HEALTH - 1  # hit landed
    assert env.state.stun_ticks_remaining[1] == 0  # but no stun


def test_duel_knockout_rewards_and_simultaneous_draw():
    env = make_env("duelsim")
    env.reset(0)
    out = None
    while not env.done:
        out = env.step({r: ATTACK for r in env.decision_owner})
    assert abs(out.rewards[Role.FIRST]) in (0.0, WIN_REWARD)
    if env.state.health[0] <= 0 and env.state.health[1] <= 0:
        assert out.rewards[Role.FIRST] == 0.0  # simultaneous knockout


def test_duel_tick_cap_draws():
    env = make_env("duelsim")
    env.reset(0)
    out = None
    while not env.done:
        out = env.step({r: NOOP for r in env.decision_owner})
    assert env.state.tick == TICK_LIMIT
    assert out.rewards[Role.FIRST] == 0.0
    assert env.state.health == (MAX_HEALTH, MAX_HEALTH)


def test_duel_observation_is_role_relative():
    env = make_env("duelsim")
    env.reset(0)
    env.step({Role.FIRST: ATTACK, Role.SECOND: BLOCK})
    st = env.state
    a = duelsim.observe(st, Role.FIRST)
    b = duelsim.observe(st, Role.SECOND)
    assert a.shape == (14,)
    # own scalars of one side are the opponent scalars of the other
    np.testing.assert_allclose(a[:3], b[3:6])
    np.testing.assert_allclose(a[3:6], b[:3])
    np.testing.assert_allclose(a[6:10], b[10:14])


def test_duel_stunned_role_cannot_act():
    env = make_env("duelsim")
    env.reset(0)
    env.step({Role.FIRST: ATTACK, Role.SECOND: NOOP})
    with pytest.raises(NotYourTurnError):
        env.legal_actions(Role.SECOND)
    with pytest.raises(IllegalActionError):
        env.step({Role.FIRST: NOOP, Role.SECOND: ATTACK})
