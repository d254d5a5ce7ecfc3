"""A2C and PPO on a shared actor-critic network.

The network emits ``n_actions`` policy logits followed by one value column.
Loss helpers return both the scalar terms and the gradient with respect to
the network output, so updates are a single backward pass.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from ..nn import Adam, RMSProp, SGD, Sequential
from .buffers import RolloutBuffer
from .config import A2CConfig, PPOConfig
from .models import build_network


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def _entropy_terms(logp: np.ndarray):
    p = np.exp(logp)
    ent = -(p * logp).sum(axis=1)
    # d entropy / d logits_j = -p_j (log p_j + H)
    dent = -p * (logp + ent[:, None])
    return ent, dent


def _dlogp(logp: np.ndarray, actions: np.ndarray) -> np.ndarray:
    """Jacobian rows of log pi(a|s) w.r.t. logits: onehot(a) - softmax."""
    g = -np.exp(logp)
    g[np.arange(len(actions)), actions] += 1.0
    return g


def normalize(adv: np.ndarray) -> np.ndarray:
    return (adv - adv.mean()) / (adv.std() + 1e-8)


def a2c_losses(logits, values, actions, advantages, returns, ent_coef: float, vf_coef: float):
    b = logits.shape[0]
    logp_all = log_softmax(logits)
    logp = logp_all[np.arange(b), actions]
    policy_loss = -float(np.mean(advantages * logp))
    value_loss = float(np.mean((returns - values) ** 2))
    d_logits = -(advantages[:, None] * _dlogp(logp_all, actions)) / b
    losses = {"policy": policy_loss, "value": value_loss}
    total = policy_loss + vf_coef * value_loss
    if ent_coef != 0.0:
        ent, dent = _entropy_terms(logp_all)
        losses["entropy"] = float(ent.mean())
        total -= ent_coef * losses["entropy"]
        d_logits -= ent_coef * dent / b
    losses["total"] = total
    d_values = vf_coef * 2.0 * (values - returns) / b
    return losses, np.concatenate([d_logits, d_values[:, None]], axis=1)


def ppo_losses(logits, values, actions, old_logp, advantages, returns, clip_range: float,
               ent_coef: float, vf_coef: float, normalize_advantage: bool = True):
    b = logits.shape[0]
    if normalize_advantage and b > 1:
        advantages = normalize(advantages)
    logp_all = log_softmax(logits)
    logp = logp_all[np.arange(b), actions]
    ratio = np.exp(logp - old_logp)
    clipped = np.clip(ratio, 1 - clip_range, 1 + clip_range)
    surr1 = advantages * ratio
    surr2 = advantages * clipped
    policy_loss = -float(np.mean(np.minimum(surr1, surr2)))
    # gradient flows only where the unclipped term is the active minimum
    active = surr1 <= surr2
    d_logp = -(advantages * ratio * active) / b
    d_logits = d_logp[:, None] * _dlogp(logp_all, actions)
    value_loss = float(np.mean((returns - values) ** 2))
    losses = {"policy": policy_loss, "value": value_loss,
              "clip_fraction": float(np.mean(np.abs(ratio - 1) > clip_range))}
    total = policy_loss + vf_coef * value_loss
    if ent_coef != 0.0:
        ent, dent = _entropy_terms(logp_all)
        losses["entropy"] = float(ent.mean())
        total -= ent_coef * losses["entropy"]
        d_logits -= ent_coef * dent / b
    losses["total"] = total
    d_values = vf_coef * 2.0 * (values - returns) / b
    return losses, np.concatenate([d_logits, d_values[:, None]], axis=1)


class ActorCriticAgent:
    """Shared-trunk categorical policy with a scalar value head."""

    def __init__(self, cfg: A2CConfig | PPOConfig, obs_shape, stats_shape, n_actions: int,
                 rng: np.random.Generator):
        self.cfg = cfg
        self.n_actions = n_actions
        self.rng = rng
        self.net, self.adapter = build_network(obs_shape, stats_shape, n_actions + 1, cfg.arch, rng)
        head = self.net.layers[-1]
        head.W[:, :n_actions] *= 0.01
        self.obs_shape, self.stats_shape = tuple(obs_shape), tuple(stats_shape)
        if isinstance(cfg, A2CConfig):
            if cfg.use_rms_prop:
                self.optimizer = RMSProp(cfg.lr, alpha=0.99, eps=cfg.rms_prop_eps,
                                         max_grad_norm=cfg.max_grad_norm)
            else:
                self.optimizer = SGD(cfg.lr, cfg.max_grad_norm)
        else:
            self.optimizer = Adam(cfg.lr, eps=cfg.adam_eps, max_grad_norm=cfg.max_grad_norm)
        self.num_timesteps = 0
        self.last_losses: dict = {}

    def forward(self, obs, stats):
        out = self.net.forward(self.adapter(obs, stats))
        return out[:, :self.n_actions], out[:, self.n_actions]

    def sample(self, logits: np.ndarray) -> np.ndarray:
        p = np.exp(log_softmax(logits))
        cdf = np.cumsum(p, axis=1)
        u = self.rng.random((logits.shape[0], 1)) * cdf[:, -1:]
        return np.minimum((u > cdf).sum(axis=1), self.n_actions - 1)

    def act(self, obs, stats):
        logits, values = self.forward(obs, stats)
        actions = self.sample(logits)
        logp = log_softmax(logits)[np.arange(len(actions)), actions]
        return actions, logp, values

    def greedy(self, obs, stats) -> np.ndarray:
        logits, _ = self.forward(obs, stats)
        return np.argmax(logits, axis=1)

    def _apply(self, dout: np.ndarray) -> None:
        self.net.zero_grad()
        self.net.backward(dout)
        self.optimizer.step(self.net)

    def update(self, data: dict) -> dict:
        cfg = self.cfg
        if isinstance(cfg, A2CConfig):
            adv = data["advantages"]
            if cfg.normalize_advantage:
                adv = normalize(adv)
            logits, values = self.forward(data["obs"], data["stats"])
            losses, dout = a2c_losses(logits, values, data["actions"], adv, data["returns"],
                                      cfg.ent_coef, cfg.vf_coef)
            self._apply(dout)
            return losses
        n = data["actions"].shape[0]
        losses = {}
        for _ in range(cfg.n_epochs):
            order = self.rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                logits, values = self.forward(data["obs"][idx], data["stats"][idx])
                losses, dout = ppo_losses(logits, values, data["actions"][idx], data["logprobs"][idx],
                                          data["advantages"][idx], data["returns"][idx],
                                          cfg.clip_range, cfg.ent_coef, cfg.vf_coef,
                                          cfg.normalize_advantage)
                self._apply(dout)
        return losses

    def train(self, vec, total_steps: int, hook: Callable | None = None, seed: int | None = None):
        cfg = self.cfg
        n = vec.n
        rollout = RolloutBuffer(cfg.n_steps, n, self.obs_shape, self.stats_shape)
        obs, stats, infos = vec.reset(seed)
        if hook is not None:
            hook(0, infos, reset=True)
        while self.num_timesteps < total_steps:
            rollout.clear()
            while not rollout.full:
                actions, logp, values = self.act(obs, stats)
                nobs, nstats, rewards, dones, infos = vec.step(actions)
                self.num_timesteps += n
                truncated = [i for i in range(n) if dones[i] and not infos[i]["terminal"]]
                if truncated:
                    # bootstrap through time limits from the final observation
                    t_obs = np.stack([infos[i]["terminal_obs"] for i in truncated])
                    t_stats = np.stack([infos[i]["terminal_stats"] for i in truncated])
                    _, t_val = self.forward(t_obs, t_stats)
                    rewards = rewards.copy()
                    rewards[truncated] += cfg.gamma * t_val
                rollout.add(obs, stats, actions, logp, values, rewards, dones)
                obs, stats = nobs, nstats
                if hook is not None:
                    hook(self.num_timesteps, infos)
            _, last_values = self.forward(obs, stats)
            rollout.finish(last_values, cfg.gamma, cfg.gae_lambda)
            self.last_losses = self.update(rollout.flat())
        return self
