"""Synchronous vector of augmented environments with auto-reset."""
from __future__ import annotations

import numpy as np

from ..augment import AugmentedEnv


class VecEnv:
    """Steps ``n`` :class:`AugmentedEnv` instances in lockstep.

    When an episode ends the environment is reset immediately; the final
    observation is kept in ``info["terminal_obs"]``/``info["terminal_stats"]``
    and the new start cell in ``info["reset_cell"]``. ``info["episode"]``
    summarises the finished episode.
    """

    def __init__(self, envs: list[AugmentedEnv]):
        self.envs = envs
        self.n = len(envs)
        self._ext = np.zeros(self.n)
        self._int = np.zeros(self.n)
        self._len = np.zeros(self.n, dtype=int)

    @property
    def n_actions(self) -> int:
        return self.envs[0].n_actions

    @property
    def obs_shape(self):
        return self.envs[0].env.observation_shape

    @property
    def stats_shape(self):
        return self.envs[0].stats_shape

    def reset(self, seed: int | None = None):
        obs, stats, infos = [], [], []
        for e in self.envs:
            aug, _, _, info = e.reset(seed)
            obs.append(aug.base)
            stats.append(aug.stats)
            infos.append(info)
        self._ext[:] = 0.0
        self._int[:] = 0.0
        self._len[:] = 0
        return np.stack(obs), np.stack(stats), infos

    def step(self, actions):
        obs, stats, rewards, dones, infos = [], [], np.zeros(self.n), np.zeros(self.n, bool), []
        for i, (e, a) in enumerate(zip(self.envs, actions)):
            aug, r, done, info = e.step(int(a))
            self._ext[i] += info["extrinsic"]
            self._int[i] += info["intrinsic"]
            self._len[i] += 1
            if done:
                info["terminal"] = bool(info.get("goal_reached", False)) or e.env.spec.kind == "deepsea"
                info["terminal_obs"] = aug.base
                info["terminal_stats"] = aug.stats
                info["episode"] = {"extrinsic_return": self._ext[i], "intrinsic_return": self._int[i],
                                   "length": int(self._len[i])}
                self._ext[i] = self._int[i] = 0.0
                self._len[i] = 0
                aug, _, _, rinfo = e.reset()
                info["reset_cell"] = rinfo["cell"]
            obs.append(aug.base)
            stats.append(aug.stats)
            rewards[i] = r
            dones[i] = done
            infos.append(info)
        return np.stack(obs), np.stack(stats), rewards, dones, infos
