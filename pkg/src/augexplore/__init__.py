"""Exploration bonuses whose sufficient statistics are appended to the agent's state.

Submodules: :mod:`envs` (mazes and DeepSea), :mod:`bonuses` (count, ellipsoid and
Gaussian surprise engines), :mod:`augment` (observation augmentation and replay
checks), :mod:`nn` (a small numpy network library), :mod:`agents` (tabular Q, DQN,
A2C, PPO) and :mod:`harness` (configs, training driver, metrics, CLI).
"""
from .augment import AugmentedEnv, ConfigError, StatEncoding
from .bonuses import BonusConfig, make_engine
from .envs import EnvSpec, load_maze, make_env

__version__ = "0.1.0"

__all__ = ["AugmentedEnv", "BonusConfig", "ConfigError", "EnvSpec", "StatEncoding",
           "load_maze", "make_engine", "make_env"]
