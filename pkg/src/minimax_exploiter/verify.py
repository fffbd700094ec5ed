"""Fast self-checks behind the ``verify`` CLI verb.

These are smoke-sized versions of the invariant suites: zero-sum rollouts,
gradient checking, the non-positivity bound of the shaped reward, the
chronological pairing rule, the matchmaking mixture, and compiled-vs-pure
kernel agreement.
"""

from __future__ import annotations

import numpy as np

from . import _c4pure
from .core import Role, play_episode, returns
from .games import make_env
from .kernels import KERNEL_BACKEND, c4_root_values
from .league import OpponentPoolEntry, Archetype, sample_opponent
from .neural import MlpSpec, backward, forward, init_params
from .shaping import ExploiterRewardConfig, RewardMode, minimax_reward, \
    pair_transitions


def _random_policy(rng: np.random.Generator):
    return lambda obs, mask, role: int(rng.choice(np.flatnonzero(mask)))


def check_zero_sum(rollouts_per_game: int = 100) -> tuple[bool, str]:
    for game_id in ("tictactoe", "connect4", "duelsim"):
        env = make_env(game_id)
        rng = np.random.default_rng(7)
        for ep in range(rollouts_per_game):
            policies = {r: _random_policy(rng) for r in Role}
            trace = play_episode(env, policies, seed=ep, episode_id=ep)
            for gamma in (1.0, 0.995):
                g1 = returns(trace, Role.FIRST, gamma)
                g2 = returns(trace, Role.SECOND, gamma)
                if abs(g1 + g2) > 1e-12:
                    return False, f"{game_id} episode {ep}: G1+G2={g1 + g2}"
    return True, "returns antisymmetric across all games"


def check_gradients(instances: int = 3) -> tuple[bool, str]:
    h = 1e-5
    for seed in range(instances):
        rng = np.random.default_rng(seed)
        spec = MlpSpec(5, (8, 8), 3)
        params = init_params(spec, rng)
        states = rng.normal(size=(4, 5))
        actions = rng.integers(0, 3, size=4)
        targets = rng.normal(size=4)
        _, grad = backward(spec, params, states, actions, targets)
        idx = rng.choice(spec.num_params, size=30, replace=False)
        for i in idx:
            p_hi = params.copy()
            p_hi[i] += h
            p_lo = params.copy()
            p_lo[i] -= h
            def loss_at(p):
                q = forward(spec, p, states)
                err = q[np.arange(4), actions] - targets
                return float(np.mean(err ** 2))
            fd = (loss_at(p_hi) - loss_at(p_lo)) / (2 * h)
            denom = max(abs(fd), abs(grad[i]), 1e-8)
            if abs(fd - grad[i]) / denom > 1e-4:
                return False, f"seed {seed} param {i}: fd={fd} grad={grad[i]}"
    return True, "finite differences agree"


def check_shift_bound(samples: int = 10_000) -> tuple[bool, str]:
    rng = np.random.default_rng(3)
    for _ in range(samples):
        r_min = -float(rng.uniform(0.5, 10))
        cfg = ExploiterRewardConfig(mode=RewardMode.MINIMAX,
                                    alpha=float(rng.uniform(0, 1)),
                                    gamma=float(rng.uniform(0, 1)),
                                    reward_min=r_min, reward_max=-r_min)
        q = float(rng.uniform(r_min, -r_min))
        d = int(rng.integers(0, 2))
        addition = minimax_reward(0.0, q, d, cfg)
        if d == 1 and addition != 0.0:
            return False, f"terminal shaping fired: {addition}"
        if d == 0 and addition > 1e-12:
            return False, f"positive shaping addition: {addition}"
    return True, "shaped addition non-positive, terminal-gated"


def check_pairing(episodes: int = 50) -> tuple[bool, str]:
    env = make_env("duelsim")
    rng = np.random.default_rng(11)
    reused_any = False
    for ep in range(episodes):
        policies = {r: _random_policy(rng) for r in Role}
        trace = play_episode(env, policies, seed=ep, episode_id=ep)
        exp = trace.transitions[Role.FIRST]
        opp = trace.transitions[Role.SECOND]
        paired = pair_transitions(exp, opp)
        if len(paired) != len(exp):
            return False, f"episode {ep}: pairing dropped transitions"
        ticks = [p.pairing_timestamp for p in paired
                 if p.pairing_timestamp is not None]
        if len(ticks) != len(set(ticks)):
            reused_any = True
    if not reused_any:
        return False, "no reused opponent state across seeded episodes"
    return True, "pairing complete with reused opponent states"


def check_matchmaking(draws: int = 10_000) -> tuple[bool, str]:
    pool = [OpponentPoolEntry("a", Archetype.MAIN_AGENT_SNAPSHOT, None, 0.8),
            OpponentPoolEntry("b", Archetype.CONVERGED_EXPLOITER, None, 0.2),
            OpponentPoolEntry("c", Archetype.SCRIPTED, None, 0.0)]
    rng = np.random.default_rng(5)
    counts = {"a": 0, "b": 0, "c": 0}
    for _ in range(draws):
        counts[sample_opponent(pool, rng).entry_id] += 1
    expected = {"a": 0.9 * 0.8 + 0.1 / 3, "b": 0.9 * 0.2 + 0.1 / 3,
                "c": 0.1 / 3}
    for key, p in expected.items():
        freq = counts[key] / draws
        sigma = (p * (1 - p) / draws) ** 0.5
        if abs(freq - p) > 4 * sigma:
            return False, f"{key}: freq {freq:.4f} vs expected {p:.4f}"
    return True, "mixture frequencies within 4 sigma"


def check_kernels(positions: int = 20) -> tuple[bool, str]:
    rng = np.random.default_rng(13)
    env = make_env("connect4")
    for i in range(positions):
        env.reset(i)
        for _ in range(int(rng.integers(0, 20))):
            if env.done:
                break
            role = next(iter(env.decision_owner))
            mask = env.legal_actions(role)
            env.step({role: int(rng.choice(np.flatnonzero(mask)))})
        if env.done:
            continue
        grid = env.state.as_array()
        mover = 1 if env.state.to_move is Role.FIRST else 2
        for depth in (1, 3):
            active = c4_root_values(grid, mover, depth)
            pure = _c4pure.c4_root_values(grid, mover, depth)
            if not np.allclose(active, pure, equal_nan=True):
                return False, f"position {i} depth {depth}: kernels disagree"
    return True, f"active backend '{KERNEL_BACKEND}' matches pure python"


CHECKS = (
    ("zero-sum rollouts", check_zero_sum),
    ("gradient check", check_gradients),
    ("shift bound", check_shift_bound),
    ("chronological pairing", check_pairing),
    ("matchmaking mixture", check_matchmaking),
    ("kernel agreement", check_kernels),
)


def run_all(verbose: bool = True) -> bool:
    ok_all = True
    for name, fn in CHECKS:
        ok, detail = fn()
        ok_all = ok_all and ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return ok_all
