from __future__ import annotations

import numpy as np

from .actor_critic import ActorCriticAgent, a2c_losses, ppo_losses
from .buffers import ReplayBuffer, RolloutBuffer, gae
from .config import (
    A2CConfig,
    ArchConfig,
    DQNConfig,
    PPOConfig,
    TabularConfig,
    agent_config_from_dict,
    agent_config_to_dict,
    epsilon_at,
)
from .dqn import DQNAgent, dqn_update
from .tabular import TabularQAgent, tabular_q_update
from .vec import VecEnv


def make_agent(cfg, obs_shape, stats_shape, n_actions: int, rng: np.random.Generator):
    if isinstance(cfg, TabularConfig):
        return TabularQAgent(cfg, n_actions, rng, stats_shape)
    if isinstance(cfg, DQNConfig):
        return DQNAgent(cfg, obs_shape, stats_shape, n_actions, rng)
    return ActorCriticAgent(cfg, obs_shape, stats_shape, n_actions, rng)


__all__ = [
    "A2CConfig", "ActorCriticAgent", "ArchConfig", "DQNAgent", "DQNConfig", "PPOConfig",
    "ReplayBuffer", "RolloutBuffer", "TabularConfig", "TabularQAgent", "VecEnv",
    "a2c_losses", "agent_config_from_dict", "agent_config_to_dict", "dqn_update",
    "epsilon_at", "gae", "make_agent", "ppo_losses", "tabular_q_update",
]
