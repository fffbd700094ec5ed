"""Competitive self-play toolkit built around the minimax-shaped exploiter
reward: zero-sum games, minimax oracles, a double-DQN learner, reward
transforms, an in-process league, and an experiment harness.
"""

from .core import EpisodeTrace, Outcome, Role, StepOutcome, Transition, returns
from .games import available_games, make_env
from .kernels import KERNEL_BACKEND
from .search import Evaluation, MinimaxConfig, act, evaluate, value_proxy
from .shaping import ExploiterRewardConfig, RewardMode, minimax_reward

__version__ = "0.1.0"

__all__ = [
    "EpisodeTrace", "Outcome", "Role", "StepOutcome", "Transition", "returns",
    "available_games", "make_env", "KERNEL_BACKEND",
    "Evaluation", "MinimaxConfig", "act", "evaluate", "value_proxy",
    "ExploiterRewardConfig", "RewardMode", "minimax_reward",
    "__version__",
]
