"""Tabular Q-learning over discrete (unaugmented) states."""
from __future__ import annotations

from collections import defaultdict
from typing import Callable, Hashable

import numpy as np

from ..augment import ConfigError
from .config import TabularConfig


def tabular_q_update(Q, transition, alpha: float, gamma: float):
    """``Q(s,a) += alpha (r + gamma max_a' Q(s',a') - Q(s,a))``; terminals bootstrap 0.

    ``transition`` is ``(s, a, r, s_next, terminal)``.
    """
    s, a, r, s_next, terminal = transition
    target = r if terminal else r + gamma * float(np.max(Q[s_next]))
    Q[s][a] += alpha * (target - Q[s][a])
    return Q


class TabularQAgent:
    def __init__(self, cfg: TabularConfig, n_actions: int, rng: np.random.Generator,
                 stats_shape=(0,)):
        if int(np.prod(stats_shape)) > 0:
            raise ConfigError("tabular agents only accept unaugmented states (encoding 'none')")
        self.cfg = cfg
        self.n_actions = n_actions
        self.rng = rng
        self.Q: dict[Hashable, np.ndarray] = defaultdict(
            lambda: np.full(n_actions, cfg.optimistic_init, dtype=np.float64))
        self.num_timesteps = 0

    def act_one(self, key, epsilon: float) -> int:
        if self.rng.random() < epsilon:
            return int(self.rng.integers(self.n_actions))
        return int(np.argmax(self.Q[key]))

    def greedy_one(self, key) -> int:
        return int(np.argmax(self.Q[key]))

    def train(self, vec, total_steps: int, hook: Callable | None = None, seed: int | None = None):
        cfg = self.cfg
        _, stats, infos = vec.reset(seed)
        if int(np.prod(stats.shape[1:])) > 0:
            raise ConfigError("tabular agents only accept unaugmented states (encoding 'none')")
        if hook is not None:
            hook(0, infos, reset=True)
        keys = [tuple(info["cell"]) for info in infos]
        while self.num_timesteps < total_steps:
            actions = [self.act_one(k, cfg.epsilon) for k in keys]
            _, _, rewards, dones, infos = vec.step(actions)
            self.num_timesteps += vec.n
            for i, info in enumerate(infos):
                nxt = tuple(info["cell"])
                tabular_q_update(self.Q, (keys[i], actions[i], rewards[i], nxt,
                                          bool(dones[i] and info["terminal"])), cfg.alpha, cfg.gamma)
                keys[i] = tuple(info["reset_cell"]) if dones[i] else nxt
            if hook is not None:
                hook(self.num_timesteps, infos)
        return self
