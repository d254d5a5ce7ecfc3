"""Hyperparameter containers.

Defaults are the published tables; the desk presets in
``augexplore/presets`` override the expensive ones (buffer size, rollout
length, learning starts).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Any, Mapping


@dataclass
class ArchConfig:
    kind: str = "cnn"                      # cnn | mlp
    channels: list = field(default_factory=lambda: [16, 16])
    strides: list = field(default_factory=lambda: [2, 2])
    hidden: int = 128
    fusion: str = "stack"                  # stack | dual

    def __post_init__(self):
        if self.kind not in ("cnn", "mlp"):
            raise ValueError(f"unknown arch kind {self.kind!r}")
        if self.fusion not in ("stack", "dual"):
            raise ValueError(f"unknown fusion {self.fusion!r}")
        if len(self.channels) != len(self.strides):
            raise ValueError("channels and strides must have equal length")

    @classmethod
    def large(cls) -> "ArchConfig":
        """Three 64-channel stride-2 convolutions and a 512-unit embedding."""
        return cls(kind="cnn", channels=[64, 64, 64], strides=[2, 2, 2], hidden=512, fusion="dual")


@dataclass
class TabularConfig:
    algo: str = "tabular_q"
    num_envs: int = 1
    alpha: float = 0.5
    gamma: float = 0.99
    epsilon: float = 0.1
    optimistic_init: float = 0.0


@dataclass
class DQNConfig:
    algo: str = "dqn"
    num_envs: int = 16
    lr: float = 1e-4
    buffer_size: int = 1_000_000
    learning_starts: int = 50_000
    batch_size: int = 32
    tau: float = 1.0
    gamma: float = 0.99
    train_freq: int = 4
    gradient_steps: int = 4
    target_update_interval: int = 10_000
    exploration_fraction: float = 0.1
    exploration_initial_eps: float = 1.0
    exploration_final_eps: float = 0.05
    max_grad_norm: float = 10.0
    loss: str = "huber"
    arch: ArchConfig = field(default_factory=ArchConfig)


@dataclass
class PPOConfig:
    algo: str = "ppo"
    num_envs: int = 16
    lr: float = 3e-4
    n_steps: int = 2048
    batch_size: int = 64
    n_epochs: int = 10
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_range: float = 0.2
    normalize_advantage: bool = True
    ent_coef: float = 0.0
    vf_coef: float = 0.5
    max_grad_norm: float = 0.5
    adam_eps: float = 1e-5
    arch: ArchConfig = field(default_factory=ArchConfig)


@dataclass
class A2CConfig:
    algo: str = "a2c"
    num_envs: int = 16
    lr: float = 7e-4
    n_steps: int = 5
    gamma: float = 0.99
    gae_lambda: float = 1.0
    ent_coef: float = 0.0
    vf_coef: float = 0.5
    max_grad_norm: float = 0.5
    rms_prop_eps: float = 1e-5
    use_rms_prop: bool = True
    normalize_advantage: bool = False
    arch: ArchConfig = field(default_factory=ArchConfig)


_CLASSES = {"tabular_q": TabularConfig, "dqn": DQNConfig, "ppo": PPOConfig, "a2c": A2CConfig}
AgentConfig = TabularConfig | DQNConfig | PPOConfig | A2CConfig


def agent_config_from_dict(data: Mapping[str, Any]) -> AgentConfig:
    data = dict(data)
    algo = data.get("algo", "dqn")
    if algo not in _CLASSES:
        raise ValueError(f"unknown algorithm {algo!r}")
    cls = _CLASSES[algo]
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown {algo} settings: {sorted(unknown)}")
    if "arch" in data:
        data["arch"] = ArchConfig(**data["arch"])
    cfg = cls(**data)
    _validate(cfg)
    return cfg


def agent_config_to_dict(cfg: AgentConfig) -> dict[str, Any]:
    return asdict(cfg)


def _validate(cfg) -> None:
    if cfg.num_envs < 1:
        raise ValueError("num_envs must be >= 1")
    if not 0.0 <= cfg.gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    for name in ("gae_lambda", "exploration_fraction", "exploration_initial_eps",
                 "exploration_final_eps", "epsilon", "alpha", "tau"):
        v = getattr(cfg, name, None)
        if v is not None and not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1]")
    for name in ("lr", "batch_size", "n_steps", "n_epochs", "buffer_size", "train_freq",
                 "target_update_interval"):
        v = getattr(cfg, name, None)
        if v is not None and v <= 0:
            raise ValueError(f"{name} must be positive")
    if getattr(cfg, "clip_range", 1.0) <= 0:
        raise ValueError("clip_range must be positive")


def epsilon_at(step: int, total_steps: int, fraction: float = 0.1,
               initial: float = 1.0, final: float = 0.05) -> float:
    """Linear decay from ``initial`` to ``final`` over ``fraction * total_steps``."""
    if step < 0:
        raise ValueError("step must be >= 0")
    horizon = fraction * total_steps
    if horizon <= 0 or step >= horizon:
        return final
    return initial + (final - initial) * step / horizon
