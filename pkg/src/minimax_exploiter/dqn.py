"""Double-DQN learner: ring replay buffer, masked epsilon-greedy actor,
online-argmax/target-eval TD targets, periodic target sync, checkpointing.

Exploration is a fixed epsilon (no annealing). Argmax ties break to the
lowest action index so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import (BufferTooSmallError, FormatVersionMismatchError,
                     FrozenModelError, NoLegalActionError)
from .neural import (AdamState, MlpSpec, adam_step, backward, forward,
                     init_params, params_to_bytes)

NEG_INF = -1e30


@dataclass(frozen=True)
class DqnConfig:
    gamma: float = 0.995
    epsilon: float = 0.01
    replay_capacity: int = 100_000
    batch_size: int = 64
    target_sync_period: int = 1000
    learn_start: int = 1000
    learning_rate: float = 1e-3
    loss: str = "mse"

    def __post_init__(self):
        assert self.batch_size <= self.replay_capacity
        assert 0.0 <= self.gamma <= 1.0
        assert 0.0 <= self.epsilon <= 1.0


class ReplayBuffer:
    """Fixed-capacity ring of transitions with FIFO eviction."""

    def __init__(self, capacity: int, obs_dim: int, num_actions: int):
        self.capacity = capacity
        self.size = 0
        self._head = 0
        self._states = np.zeros((capacity, obs_dim))
        self._actions = np.zeros(capacity, dtype=np.int64)
        self._rewards = np.zeros(capacity)
        self._next_states = np.zeros((capacity, obs_dim))
        self._dones = np.zeros(capacity)
        self._next_masks = np.zeros((capacity, num_actions), dtype=bool)

    def add(self, state, action, reward, next_state, done, next_mask) -> None:
        i = self._head
        self._states[i] = state
        self._actions[i] = action
        self._rewards[i] = reward
        self._next_states[i] = next_state
        self._dones[i] = float(done)
        self._next_masks[i] = next_mask
        self._head = (self._head + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def add_transition(self, tr) -> None:
        self.add(tr.state, tr.action, tr.reward, tr.next_state, tr.done,
                 tr.next_legal_mask)

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict:
        idx = rng.integers(0, self.size, size=batch_size)
        return {
            "states": self._states[idx],
            "actions": self._actions[idx],
            "rewards": self._rewards[idx],
            "next_states": self._next_states[idx],
            "dones": self._dones[idx],
            "next_masks": self._next_masks[idx],
        }

    def __len__(self) -> int:
        return self.size


def masked_greedy(q: np.ndarray, legal_mask: np.ndarray) -> int:
    """Argmax over legal actions; ties break to the lowest index."""
    if not np.any(legal_mask):
        raise NoLegalActionError("all actions masked")
    masked = np.where(legal_mask, q, NEG_INF)
    return int(np.argmax(masked))


class FrozenPolicy:
    """Inference-only snapshot of a Q-network."""

    def __init__(self, spec: MlpSpec, params: np.ndarray,
                 checkpoint_id: str = ""):
        self.spec = spec
        self.params = params.copy()
        self.params.flags.writeable = False
        self.checkpoint_id = checkpoint_id

    def q_values(self, state: np.ndarray) -> np.ndarray:
        return forward(self.spec, self.params, state)

    def act(self, state: np.ndarray, legal_mask: np.ndarray) -> int:
        return masked_greedy(self.q_values(state), legal_mask)

    def max_q(self, state: np.ndarray, legal_mask: np.ndarray) -> float:
        if not np.any(legal_mask):
            raise NoLegalActionError("all actions masked")
        q = self.q_values(state)
        return float(np.max(np.where(legal_mask, q, NEG_INF)))

    def learn_step(self, *args, **kwargs):
        raise FrozenModelError("frozen models are inference-only")


class DqnAgent:
    """Owns the online/target parameter pair and the optimizer state."""

    def __init__(self, spec: MlpSpec, config: DqnConfig,
                 rng: np.random.Generator):
        self.spec = spec
        self.config = config
        self.params = init_params(spec, rng)
        self.target_params = self.params.copy()
        self.opt = AdamState(learning_rate=config.learning_rate)
        self.steps = 0  # learner steps, not env steps

    def q_values(self, state: np.ndarray) -> np.ndarray:
        return forward(self.spec, self.params, state)

    def select_action(self, state: np.ndarray, legal_mask: np.ndarray,
                      rng: np.random.Generator) -> int:
        legal_mask = np.asarray(legal_mask, dtype=bool)
        if not np.any(legal_mask):
            raise NoLegalActionError("all actions masked")
        if rng.random() < self.config.epsilon:
            return int(rng.choice(np.flatnonzero(legal_mask)))
        return masked_greedy(self.q_values(state), legal_mask)

    def td_targets(self, batch: dict) -> np.ndarray:
        """y = r + gamma * (1-d) * Q_target(s', argmax_a Q_online(s', a)),
        with the argmax restricted to legal actions in s'."""
        next_states = batch["next_states"]
        masks = np.asarray(batch["next_masks"], dtype=bool)
        dones = batch["dones"]
        # terminal rows have all-false masks; give them a dummy legal action,
        # the (1-d) gate zeroes their bootstrap anyway
        safe_masks = masks.copy()
        safe_masks[~safe_masks.any(axis=1), 0] = True
        q_online = forward(self.spec, self.params, next_states)
        q_target = forward(self.spec, self.target_params, next_states)
        argmax = np.argmax(np.where(safe_masks, q_online, NEG_INF), axis=1)
        bootstrap = q_target[np.arange(len(argmax)), argmax]
        return batch["rewards"] + self.config.gamma * (1.0 - dones) * bootstrap

    def learn_step(self, buffer: ReplayBuffer,
                   rng: np.random.Generator) -> float:
        threshold = max(self.config.learn_start, self.config.batch_size)
        if len(buffer) < threshold:
            raise BufferTooSmallError(
                f"buffer has {len(buffer)} < {threshold} transitions")
        batch = buffer.sample(self.config.batch_size, rng)
        targets = self.td_targets(batch)
        loss, grad = backward(self.spec, self.params, batch["states"],
                              batch["actions"], targets, loss=self.config.loss)
        self.params = adam_step(self.params, grad, self.opt)
        self.steps += 1
        if self.steps % self.config.target_sync_period == 0:
            self.target_params = self.params.copy()
        return loss

    def frozen(self, checkpoint_id: str = "") -> FrozenPolicy:
        return FrozenPolicy(self.spec, self.params, checkpoint_id)

    # -- checkpointing: neural-module format carrying online+target stacked,
    #    with config and step counter in the human-readable header --

    def to_bytes(self) -> bytes:
        stacked = np.concatenate([self.params, self.target_params])
        metadata = {"kind": "dqn-agent", "config": asdict(self.config),
                    "steps": self.steps}
        return params_to_bytes(self.spec, stacked, metadata)

    @classmethod
    def from_bytes(cls, data: bytes) -> "DqnAgent":
        spec_twice, stacked, metadata = params_from_bytes_stacked(data)
        if metadata.get("kind") != "dqn-agent":
            raise FormatVersionMismatchError("not a dqn-agent checkpoint")
        config = DqnConfig(**metadata["config"])
        agent = cls.__new__(cls)
        agent.spec = spec_twice
        agent.config = config
        n = spec_twice.num_params
        agent.params = stacked[:n].copy()
        agent.target_params = stacked[n:].copy()
        agent.opt = AdamState(learning_rate=config.learning_rate)
        agent.steps = int(metadata["steps"])
        return agent

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "DqnAgent":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def params_from_bytes_stacked(data: bytes):
    """Decode a checkpoint whose body holds online+target stacked in one
    vector (twice the spec size)."""
    import json
    import struct
    if data[:4] != b"MMXP":
        raise FormatVersionMismatchError("bad magic; not a parameter blob")
    if len(data) < 8:
        raise FormatVersionMismatchError("truncated header")
    (blob_len,) = struct.unpack("<I", data[4:8])
    if len(data) < 8 + blob_len:
        raise FormatVersionMismatchError("truncated header")
    header = json.loads(data[8:8 + blob_len].decode())
    if header.get("format_version") != 1:
        raise FormatVersionMismatchError(
            f"unsupported format version {header.get('format_version')}")
    spec = MlpSpec(header["input_dim"], tuple(header["hidden_dims"]),
                   header["output_dim"])
    body = data[8 + blob_len:]
    if len(body) != 2 * spec.num_params * 8:
        raise FormatVersionMismatchError("truncated parameter body")
    stacked = np.frombuffer(body, dtype="<f8").astype(np.float64)
    return spec, stacked, header["metadata"]


def load_frozen(path, checkpoint_id: str = "") -> FrozenPolicy:
    """Load a checkpoint as an inference-only policy (online params)."""
    agent = DqnAgent.load(path)
    return FrozenPolicy(agent.spec, agent.params,
                        checkpoint_id or str(path))
