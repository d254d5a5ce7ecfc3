"""Goal-directing probe: mark one cell as never visited and watch the agent."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..augment import AugmentedEnv, ConfigError, StatEncoding
from ..bonuses import BonusConfig, CountEngine, CountTable, count_bonus_salesman, seed_counts
from ..envs import EnvSpec, MazeEnv, reachable_cells
from .runner import greedy_action


@dataclass
class ProbeReport:
    goal_cell: tuple
    reached: bool
    steps_to_goal: int | None
    trajectory: list


def probe_prior(spec: EnvSpec, goal_cell) -> dict:
    """Count 1 on every reachable cell except ``goal_cell``, which stays at 0."""
    goal_cell = tuple(goal_cell)
    reach = reachable_cells(spec)
    if goal_cell not in reach:
        raise ConfigError(f"probe cell {goal_cell} is not reachable")
    if goal_cell == spec.start:
        raise ConfigError("the probe cell must differ from the start cell")
    return {c: 1 for c in reach if c != goal_cell}


def salesman_field(spec: EnvSpec, prior: dict) -> np.ndarray:
    """Salesman bonus each cell would pay under ``prior`` (walls are 0)."""
    table = seed_counts(CountTable(), prior)
    out = np.zeros(spec.shape)
    for cell in reachable_cells(spec):
        out[cell] = count_bonus_salesman(table, cell)
    return out


def goal_directing_probe(agent, spec: EnvSpec, goal_cell, encoding: StatEncoding,
                         bonus: BonusConfig | None = None, max_steps: int | None = None) -> ProbeReport:
    """Greedy rollout with counts seeded so that only ``goal_cell`` looks novel."""
    goal_cell = tuple(goal_cell)
    bonus = bonus or BonusConfig(kind="count_sqrt", scope="episodic")
    if bonus.kind not in ("count_sqrt", "count_salesman"):
        raise ConfigError("the probe needs a count-based bonus")
    obs_shape = getattr(getattr(agent, "adapter", None), "obs_shape", None)
    if obs_shape is not None and tuple(obs_shape) != (3, *spec.shape):
        raise ConfigError(f"agent expects observations {obs_shape}, maze gives {(3, *spec.shape)}")
    if max_steps is not None:
        spec = EnvSpec(spec.kind, spec.width, spec.height, spec.walls, spec.start, spec.goal,
                       max_steps, spec.deepsea_n, spec.name)
    env = AugmentedEnv(MazeEnv(spec), CountEngine(bonus, spec.shape), encoding)
    env.prior = probe_prior(spec, goal_cell)
    aug, _, done, info = env.reset()
    traj = [tuple(info["cell"])]
    while not done:
        aug, _, done, info = env.step(greedy_action(agent, aug, info["cell"]))
        traj.append(tuple(info["cell"]))
        if traj[-1] == goal_cell:
            return ProbeReport(goal_cell, True, len(traj) - 1, traj)
    return ProbeReport(goal_cell, False, None, traj)
