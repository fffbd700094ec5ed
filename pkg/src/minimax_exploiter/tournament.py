"""Round-robin evaluation of frozen checkpoints.

Games are played greedily (epsilon = 0) with first-mover alternation and a
few seeded random opening plies per game so repeated pairings of
deterministic policies do not collapse onto a single line of play. Win
rates count a draw as half a point for each side (``score_rate``); the raw
win/draw fractions are reported separately and satisfy
``wins + losses + draws = games`` per pairing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import Outcome, Role
from .dqn import FrozenPolicy
from .errors import IncompatibleCheckpointsError
from .games import make_env

__all__ = ["TournamentResult", "run_tournament", "play_match"]


@dataclass(frozen=True)
class TournamentResult:
    first_id: str
    second_id: str
    games: int
    wins_first: int
    wins_second: int
    draws: int

    @property
    def win_rate(self) -> float:
        """Fraction of outright wins for the first checkpoint."""
        return self.wins_first / self.games

    @property
    def score_rate(self) -> float:
        """Win rate with draws counted as half for each side."""
        return (self.wins_first + 0.5 * self.draws) / self.games


def _play_game(env, policy_first, policy_second, rng: np.random.Generator,
               opening_plies: int) -> Outcome:
    outcome = env.reset(int(rng.integers(2 ** 31)))
    plies = 0
    while not outcome.done:
        actions = {}
        for role in sorted(outcome.decision_owner, key=lambda r: r.value):
            mask = env.legal_actions(role)
            if plies < opening_plies:
                actions[role] = int(rng.choice(np.flatnonzero(mask)))
            else:
                policy = policy_first if role is Role.FIRST else policy_second
                actions[role] = policy.act(outcome.observations[role], mask)
        outcome = env.step(actions)
        plies += 1
        if outcome.done:
            rf = outcome.rewards[Role.FIRST]
            if rf > 0:
                return Outcome.WIN_FIRST
            if rf < 0:
                return Outcome.WIN_SECOND
            return Outcome.DRAW
    return Outcome.DRAW


def play_match(env_id: str, policy_a: FrozenPolicy, policy_b: FrozenPolicy,
               games: int, rng: np.random.Generator,
               opening_plies: int = 2) -> tuple[int, int, int]:
    """(wins_a, wins_b, draws) over ``games`` with alternating first mover."""
    env = make_env(env_id)
    wins_a = wins_b = draws = 0
    for g in range(games):
        a_first = (g % 2 == 0)
        first, second = (policy_a, policy_b) if a_first else (policy_b, policy_a)
        result = _play_game(env, first, second, rng, opening_plies)
        if result is Outcome.DRAW:
            draws += 1
        elif (result is Outcome.WIN_FIRST) == a_first:
            wins_a += 1
        else:
            wins_b += 1
    return wins_a, wins_b, draws


def run_tournament(env_id: str, checkpoints: list[tuple[str, FrozenPolicy]],
                   games_per_pair: int, rng: np.random.Generator,
                   opening_plies: int = 2) -> list[TournamentResult]:
    """All-pairs round robin; C(n,2) pairings."""
    if len(checkpoints) < 2:
        raise IncompatibleCheckpointsError("need at least two checkpoints")
    env = make_env(env_id)
    for cid, policy in checkpoints:
        if policy.spec.input_dim != env.obs_dim \
                or policy.spec.output_dim != env.num_actions:
            raise IncompatibleCheckpointsError(
                f"checkpoint {cid!r} does not match environment {env_id!r}")
    results = []
    for (id_a, pol_a), (id_b, pol_b) in itertools.combinations(checkpoints, 2):
        wins_a, wins_b, draws = play_match(env_id, pol_a, pol_b,
                                           games_per_pair, rng, opening_plies)
        results.append(TournamentResult(id_a, id_b, games_per_pair,
                                        wins_a, wins_b, draws))
    return results


def results_to_csv_rows(results: list[TournamentResult]) -> list[list]:
    rows = [["first", "second", "games", "wins_first", "wins_second",
             "draws", "win_rate", "score_rate"]]
    for r in results:
        rows.append([r.first_id, r.second_id, r.games, r.wins_first,
                     r.wins_second, r.draws, f"{r.win_rate:.6f}",
                     f"{r.score_rate:.6f}"])
    return rows
