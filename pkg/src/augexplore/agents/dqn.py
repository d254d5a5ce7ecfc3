"""Deep Q-learning with a replay buffer and a hard-copied target network."""
from __future__ import annotations

from typing import Callable

import numpy as np

from ..nn import Adam, Sequential
from .buffers import ReplayBuffer
from .config import DQNConfig, epsilon_at
from .models import build_network


def huber(delta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Smooth-L1 loss per element and its derivative."""
    a = np.abs(delta)
    loss = np.where(a < 1.0, 0.5 * delta ** 2, a - 0.5)
    return loss, np.clip(delta, -1.0, 1.0)


def td_targets(next_q_target: np.ndarray, rewards, terminals, gamma: float) -> np.ndarray:
    return rewards + gamma * (1.0 - terminals) * next_q_target.max(axis=1)


def dqn_update(q_net: Sequential, target_net: Sequential, adapter, optimizer, batch,
               gamma: float, loss: str = "huber") -> float:
    """One gradient step on a sampled batch; returns the mean TD loss."""
    next_q = target_net.forward(adapter(batch["next_obs"], batch["next_stats"]))
    y = td_targets(next_q, batch["rewards"], batch["terminals"], gamma)
    q = q_net.forward(adapter(batch["obs"], batch["stats"]))
    idx = np.arange(q.shape[0])
    delta = q[idx, batch["actions"]] - y
    if loss == "huber":
        per, dper = huber(delta)
    else:
        per, dper = 0.5 * delta ** 2, delta
    grad = np.zeros_like(q)
    grad[idx, batch["actions"]] = dper / q.shape[0]
    q_net.zero_grad()
    q_net.backward(grad)
    optimizer.step(q_net)
    return float(per.mean())


def greedy_actions(q: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. the lowest action index
    return np.argmax(q, axis=1)


class DQNAgent:
    def __init__(self, cfg: DQNConfig, obs_shape, stats_shape, n_actions: int,
                 rng: np.random.Generator):
        self.cfg = cfg
        self.n_actions = n_actions
        self.rng = rng
        self.q, self.adapter = build_network(obs_shape, stats_shape, n_actions, cfg.arch, rng)
        self.q_target = self.q.copy()
        self.optimizer = Adam(cfg.lr, max_grad_norm=cfg.max_grad_norm)
        self.buffer = ReplayBuffer(min(cfg.buffer_size, 10_000_000), obs_shape, stats_shape, rng)
        self.num_timesteps = 0
        self.last_loss = float("nan")

    @property
    def net(self) -> Sequential:
        return self.q

    def q_values(self, obs, stats) -> np.ndarray:
        return self.q.forward(self.adapter(obs, stats))

    def act(self, obs, stats, epsilon: float) -> np.ndarray:
        actions = greedy_actions(self.q_values(obs, stats))
        explore = self.rng.random(actions.shape[0]) < epsilon
        if explore.any():
            actions[explore] = self.rng.integers(0, self.n_actions, size=int(explore.sum()))
        return actions

    def greedy(self, obs, stats) -> np.ndarray:
        return greedy_actions(self.q_values(obs, stats))

    def sync_target(self) -> None:
        tau = self.cfg.tau
        if tau >= 1.0:
            self.q_target.load_param_dict({k: v.copy() for k, v in self.q.param_dict().items()})
            return
        tgt = self.q_target.param_dict()
        for k, v in self.q.param_dict().items():
            tgt[k][...] = (1 - tau) * tgt[k] + tau * v

    def train(self, vec, total_steps: int, hook: Callable | None = None, seed: int | None = None):
        cfg = self.cfg
        n = vec.n
        obs, stats, infos = vec.reset(seed)
        if hook is not None:
            hook(0, infos, reset=True)
        target_every = max(cfg.target_update_interval // n, 1)
        calls = 0
        while self.num_timesteps < total_steps:
            eps = epsilon_at(self.num_timesteps, total_steps, cfg.exploration_fraction,
                             cfg.exploration_initial_eps, cfg.exploration_final_eps)
            actions = self.act(obs, stats, eps)
            nobs, nstats, rewards, dones, infos = vec.step(actions)
            self.num_timesteps += n
            calls += 1
            for i in range(n):
                if dones[i]:
                    nxt_o, nxt_s = infos[i]["terminal_obs"], infos[i]["terminal_stats"]
                    term = infos[i]["terminal"]
                else:
                    nxt_o, nxt_s, term = nobs[i], nstats[i], False
                self.buffer.add(obs[i], stats[i], actions[i], rewards[i], nxt_o, nxt_s, term)
            if calls % target_every == 0:
                self.sync_target()
            if calls % cfg.train_freq == 0 and self.num_timesteps > cfg.learning_starts:
                for _ in range(cfg.gradient_steps):
                    self.last_loss = dqn_update(self.q, self.q_target, self.adapter, self.optimizer,
                                                self.buffer.sample(cfg.batch_size), cfg.gamma, cfg.loss)
            obs, stats = nobs, nstats
            if hook is not None:
                hook(self.num_timesteps, infos)
        return self
