"""Replay and rollout storage, plus generalised advantage estimation."""
from __future__ import annotations

import numpy as np


class ReplayBuffer:
    """Fixed-capacity ring buffer with uniform sampling."""

    def __init__(self, capacity: int, obs_shape, stats_shape, rng: np.random.Generator,
                 obs_dtype=np.uint8):
        self.capacity = int(capacity)
        self.rng = rng
        self.obs = np.zeros((capacity, *obs_shape), dtype=obs_dtype)
        self.next_obs = np.zeros_like(self.obs)
        self.stats = np.zeros((capacity, *stats_shape))
        self.next_stats = np.zeros_like(self.stats)
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.terminals = np.zeros(capacity)
        self.pos = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def add(self, obs, stats, action, reward, next_obs, next_stats, terminal) -> None:
        i = self.pos
        self.obs[i] = obs
        self.stats[i] = stats
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_obs[i] = next_obs
        self.next_stats[i] = next_stats
        self.terminals[i] = float(terminal)
        self.pos = (self.pos + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int) -> dict[str, np.ndarray]:
        idx = self.rng.integers(0, self.size, size=batch_size)
        return {
            "obs": self.obs[idx], "stats": self.stats[idx], "actions": self.actions[idx],
            "rewards": self.rewards[idx], "next_obs": self.next_obs[idx],
            "next_stats": self.next_stats[idx], "terminals": self.terminals[idx],
        }


def gae(rewards, values, dones, last_values, gamma: float, lam: float):
    """Generalised advantage estimates over a (T, ...) rollout.

    ``dones[t]`` marks that the episode ended with transition ``t``, so the
    value after it is not bootstrapped. ``last_values`` is the value of the
    state following the final transition. Returns ``(advantages, returns)``
    with ``returns = advantages + values``.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    T = rewards.shape[0]
    adv = np.zeros_like(rewards)
    last = np.zeros_like(rewards[0])
    next_values = np.asarray(last_values, dtype=np.float64)
    for t in reversed(range(T)):
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_values * nonterminal - values[t]
        last = delta + gamma * lam * nonterminal * last
        adv[t] = last
        next_values = values[t]
    return adv, adv + values


class RolloutBuffer:
    """``n_steps`` x ``n_envs`` on-policy storage."""

    def __init__(self, n_steps: int, n_envs: int, obs_shape, stats_shape):
        self.n_steps, self.n_envs = n_steps, n_envs
        self.obs = np.zeros((n_steps, n_envs, *obs_shape), dtype=np.uint8)
        self.stats = np.zeros((n_steps, n_envs, *stats_shape))
        self.actions = np.zeros((n_steps, n_envs), dtype=np.int64)
        self.logprobs = np.zeros((n_steps, n_envs))
        self.values = np.zeros((n_steps, n_envs))
        self.rewards = np.zeros((n_steps, n_envs))
        self.dones = np.zeros((n_steps, n_envs))
        self.advantages = None
        self.returns = None
        self.t = 0

    def add(self, obs, stats, actions, logprobs, values, rewards, dones) -> None:
        t = self.t
        self.obs[t] = obs
        self.stats[t] = stats
        self.actions[t] = actions
        self.logprobs[t] = logprobs
        self.values[t] = values
        self.rewards[t] = rewards
        self.dones[t] = dones
        self.t += 1

    @property
    def full(self) -> bool:
        return self.t >= self.n_steps

    def finish(self, last_values, gamma: float, lam: float) -> None:
        self.advantages, self.returns = gae(self.rewards, self.values, self.dones,
                                            last_values, gamma, lam)

    def flat(self) -> dict[str, np.ndarray]:
        if self.advantages is None:
            raise RuntimeError("compute advantages with finish() before consuming the rollout")
        n = self.n_steps * self.n_envs
        return {
            "obs": self.obs.reshape(n, *self.obs.shape[2:]),
            "stats": self.stats.reshape(n, *self.stats.shape[2:]),
            "actions": self.actions.reshape(n),
            "logprobs": self.logprobs.reshape(n),
            "values": self.values.reshape(n),
            "advantages": self.advantages.reshape(n),
            "returns": self.returns.reshape(n),
        }

    def clear(self) -> None:
        self.t = 0
        self.advantages = None
        self.returns = None
