"""Experiment configuration (JSON).

Schema::

    {
      "name": str,
      "env": {"asset": "maze15", "max_steps": 150}
           | {"kind": "maze", "ascii": [rows...], "max_steps": int}
           | {"kind": "deepsea", "n": int},
      "bonus": {"kind": "none|count_sqrt|count_salesman|e3b|smax", "beta": float,
                "lambda": float, "sigma_floor": float, "scope": "episodic|global",
                "intrinsic_scale": float},
      "sofe": {"enabled": bool,
               "encoding": {"kind": "...", "normalization": "log1p|unit_max|raw"}},
      "agent": {"algo": "tabular_q|dqn|a2c|ppo", ...hyperparameters, "arch": {...}},
      "run": {"total_steps": int, "seeds": [int, ...], "eval_every": int,
              "eval_episodes": int, "final_eval_episodes": int, "tail_fraction": float},
      "output_dir": str
    }
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from ..agents.config import (
    AgentConfig,
    TabularConfig,
    agent_config_from_dict,
    agent_config_to_dict,
)
from ..augment import ConfigError, StatEncoding
from ..bonuses import BonusConfig
from ..envs import BUNDLED_MAZES, EnvSpec, MazeFormatError, load_maze

_DEFAULT_ENCODING = {
    "count_sqrt": "counts_grid",
    "count_salesman": "counts_grid",
    "e3b": "ellipsoid_diag",
    "smax": "gaussian_params",
}


@dataclass
class RunConfig:
    total_steps: int = 200_000
    seeds: list = field(default_factory=lambda: [0])
    eval_every: int = 10_000
    eval_episodes: int = 10
    final_eval_episodes: int = 10
    tail_fraction: float = 0.1

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("run.seeds must be nonempty")
        if self.total_steps <= 0 or self.eval_every <= 0:
            raise ConfigError("run.total_steps and run.eval_every must be positive")
        if self.eval_episodes < 1 or self.final_eval_episodes < 1:
            raise ConfigError("evaluation needs at least one episode")
        if not 0.0 < self.tail_fraction <= 1.0:
            raise ConfigError("run.tail_fraction must lie in (0, 1]")


@dataclass
class ExperimentConfig:
    name: str
    env: dict
    bonus: BonusConfig
    sofe_enabled: bool
    encoding: StatEncoding
    agent: AgentConfig
    run: RunConfig
    output_dir: str = "runs"

    def env_spec(self) -> EnvSpec:
        return env_spec_from_dict(self.env)

    @property
    def active_encoding(self) -> StatEncoding:
        return self.encoding if self.sofe_enabled else StatEncoding("none")

    def label(self) -> tuple[str, str, str]:
        env = self.env.get("asset") or (
            f"deepsea-{self.env['n']}" if self.env.get("kind") == "deepsea" else self.env.get("name", "maze"))
        return env, f"{self.bonus.kind}/{self.bonus.scope}", "sofe" if self.sofe_enabled else "vanilla"

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "env": copy.deepcopy(self.env),
            "bonus": self.bonus.to_dict(),
            "sofe": {"enabled": self.sofe_enabled, "encoding": self.encoding.to_dict()},
            "agent": agent_config_to_dict(self.agent),
            "run": {
                "total_steps": self.run.total_steps, "seeds": list(self.run.seeds),
                "eval_every": self.run.eval_every, "eval_episodes": self.run.eval_episodes,
                "final_eval_episodes": self.run.final_eval_episodes,
                "tail_fraction": self.run.tail_fraction,
            },
            "output_dir": self.output_dir,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def env_spec_from_dict(data: Mapping[str, Any]) -> EnvSpec:
    if "asset" in data:
        return load_maze(data["asset"], data.get("max_steps"))
    return EnvSpec.from_dict(data)


def config_from_dict(data: Mapping[str, Any]) -> ExperimentConfig:
    """Validate and build a config; every problem raises :class:`ConfigError`."""
    try:
        data = copy.deepcopy(dict(data))
        for key in ("env", "bonus", "agent", "run"):
            if key not in data:
                raise ConfigError(f"missing section {key!r}")
        env = dict(data["env"])
        if "asset" in env:
            if env["asset"] not in BUNDLED_MAZES and not str(env["asset"]).startswith("deepsea-"):
                raise ConfigError(f"unknown maze asset {env['asset']!r}")
        env_spec_from_dict(env)  # validates the layout
        bonus = BonusConfig.from_dict(data["bonus"])
        sofe = data.get("sofe", {}) or {}
        enabled = bool(sofe.get("enabled", False))
        enc_data = dict(sofe.get("encoding") or {})
        enc_data.setdefault("kind", _DEFAULT_ENCODING.get(bonus.kind, "none") if enabled else "none")
        encoding = StatEncoding(**enc_data)
        if enabled:
            if bonus.kind == "none":
                raise ConfigError("augmentation needs a bonus to take statistics from")
            encoding.check_compatible(bonus.kind)
        agent = agent_config_from_dict(data["agent"])
        if isinstance(agent, TabularConfig) and enabled and encoding.kind != "none":
            raise ConfigError("tabular agents pair only with unaugmented states")
        run = RunConfig(**data["run"])
        return ExperimentConfig(
            name=data.get("name", "experiment"),
            env=env,
            bonus=bonus,
            sofe_enabled=enabled,
            encoding=encoding,
            agent=agent,
            run=run,
            output_dir=data.get("output_dir", "runs"),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError, MazeFormatError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data)


def preset_names() -> list[str]:
    root = resources.files("augexplore") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> dict[str, Any]:
    """Raw dict of a shipped preset (``augexplore/presets/<name>.json``)."""
    path = resources.files("augexplore") / "presets" / f"{name}.json"
    return json.loads(path.read_text())


def with_overrides(data: Mapping[str, Any], overrides: Mapping[str, Any]) -> dict[str, Any]:
    """Copy of ``data`` with dotted-key overrides, e.g. ``{"sofe.enabled": True}``."""
    out = copy.deepcopy(dict(data))
    for dotted, value in overrides.items():
        node = out
        parts = dotted.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
    return out
