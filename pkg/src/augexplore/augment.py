"""State augmentation with bonus statistics.

:class:`AugmentedEnv` wraps an environment and a bonus engine. Each step
returns the base observation together with an encoding of the engine's
statistics *after* the transition, and a reward that combines the
extrinsic reward with the intrinsic bonus. With those statistics in the
observation, the bonus is a deterministic function of
``(augmented state, action, next augmented state)``;
:func:`replay_determinism_check` verifies that on recorded traces.
"""
from __future__ import annotations

import hashlib
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

import numpy as np

from .bonuses import (
    BonusConfig,
    BonusEngine,
    CountEngine,
    E3BEngine,
    FeatureMap,
    SMaxEngine,
    combine_rewards,
    default_feature_map,
    gaussian_neg_log_pdf,
)

ENCODING_KINDS = ("none", "counts_grid", "ellipsoid_diag", "ellipsoid_full", "gaussian_params")
NORMALIZATIONS = ("log1p", "unit_max", "raw")
_COMPATIBLE = {
    "counts_grid": ("count_sqrt", "count_salesman"),
    "ellipsoid_diag": ("e3b",),
    "ellipsoid_full": ("e3b",),
    "gaussian_params": ("smax",),
}


class ConfigError(ValueError):
    """Inconsistent wiring of environment, bonus, encoding or agent."""


@dataclass
class StatEncoding:
    kind: str = "none"
    normalization: str = "log1p"

    def __post_init__(self):
        if self.kind not in ENCODING_KINDS:
            raise ConfigError(f"unknown encoding {self.kind!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"unknown normalization {self.normalization!r}")

    def check_compatible(self, bonus_kind: str) -> None:
        if self.kind == "none":
            return
        if bonus_kind not in _COMPATIBLE[self.kind]:
            raise ConfigError(f"encoding {self.kind!r} cannot encode a {bonus_kind!r} bonus")

    def to_dict(self) -> dict[str, str]:
        return {"kind": self.kind, "normalization": self.normalization}


def stats_shape(encoding: StatEncoding, grid_shape: tuple[int, int],
                feature_dim: int | None = None) -> tuple[int, ...]:
    if encoding.kind == "counts_grid":
        return tuple(grid_shape)
    d = feature_dim
    if encoding.kind == "ellipsoid_diag":
        return (d,)
    if encoding.kind == "ellipsoid_full":
        return (d, d)
    if encoding.kind == "gaussian_params":
        return (2 * d,)
    return (0,)


def normalize_counts(grid: np.ndarray, normalization: str) -> np.ndarray:
    if normalization == "log1p":
        return np.log1p(grid)
    if normalization == "unit_max":
        top = grid.max()
        return grid / top if top > 0 else grid.copy()
    return grid.astype(np.float64, copy=True)


def decode_counts(encoded: np.ndarray, normalization: str) -> np.ndarray:
    """Invert :func:`normalize_counts` back to integer counts."""
    if normalization == "log1p":
        return np.rint(np.expm1(encoded)).astype(np.int64)
    if normalization == "raw":
        return np.rint(encoded).astype(np.int64)
    raise ConfigError("unit_max count encodings are not invertible")


def encode_stats(engine: BonusEngine, encoding: StatEncoding) -> np.ndarray:
    """Encode the engine's current statistics as a float array."""
    kind = encoding.kind
    if kind == "none":
        return np.zeros(0)
    encoding.check_compatible(engine.config.kind)
    if kind == "counts_grid":
        assert isinstance(engine, CountEngine)
        return normalize_counts(engine.grid(), encoding.normalization)
    if kind == "ellipsoid_diag":
        assert isinstance(engine, E3BEngine)
        return np.diag(engine.ellipsoid.C_inv).copy()
    if kind == "ellipsoid_full":
        assert isinstance(engine, E3BEngine)
        return engine.ellipsoid.C_inv.copy()
    assert isinstance(engine, SMaxEngine)
    stats = engine.stats
    return np.concatenate([stats.mean, stats.variance(engine.config.sigma_floor)])


@dataclass
class AugmentedObservation:
    base: np.ndarray
    stats: np.ndarray


class AugmentedEnv:
    """Environment + bonus engine + statistics encoding.

    ``prior`` (counts only) is written into the table after every reset,
    before the first state is observed.
    """

    def __init__(self, env, engine: BonusEngine, encoding: StatEncoding,
                 intrinsic_scale: float | None = None):
        encoding.check_compatible(engine.config.kind)
        self.env = env
        self.engine = engine
        self.encoding = encoding
        self.intrinsic_scale = (engine.config.intrinsic_scale
                                if intrinsic_scale is None else intrinsic_scale)
        self.prior: Mapping | None = None

    @property
    def n_actions(self) -> int:
        return self.env.n_actions

    @property
    def stats_shape(self) -> tuple[int, ...]:
        fm = getattr(self.engine, "feature_map", None)
        return stats_shape(self.encoding, self.engine.grid_shape, fm.dim if fm else None)

    def _augment(self, obs: np.ndarray) -> AugmentedObservation:
        return AugmentedObservation(obs, encode_stats(self.engine, self.encoding))

    def reset(self, seed: int | None = None):
        res = self.env.reset(seed)
        self.engine.reset()
        if self.prior is not None:
            if not isinstance(self.engine, CountEngine):
                raise ConfigError("count priors need a count bonus")
            self.engine.seed(self.prior)
        self.engine.observe(res.info["cell"])
        info = dict(res.info, extrinsic=0.0, intrinsic=0.0)
        return self._augment(res.observation), 0.0, False, info

    def step(self, action: int):
        res = self.env.step(action)
        intrinsic = self.engine.transition(res.info["cell"])
        reward = combine_rewards(res.extrinsic_reward, intrinsic, self.intrinsic_scale)
        info = dict(res.info, extrinsic=res.extrinsic_reward, intrinsic=intrinsic)
        return self._augment(res.observation), reward, res.done, info


def augmented_step(wrapped: AugmentedEnv, action: int):
    return wrapped.step(action)


# ---------------------------------------------------------------------------
# trace recording and replay
# ---------------------------------------------------------------------------

def obs_hash(obs: np.ndarray) -> str:
    arr = np.ascontiguousarray(obs)
    return hashlib.sha1(arr.tobytes() + str(arr.shape).encode()).hexdigest()


@dataclass
class TraceRecorder:
    """Collects one record per reset/step; dumps line-delimited JSON."""

    records: list = field(default_factory=list)

    def add(self, aug: AugmentedObservation, action: int | None, reward: float,
            done: bool, info: Mapping[str, Any]) -> None:
        self.records.append({
            "step": int(info["step"]),
            "obs_hash": obs_hash(aug.base),
            "cell": [int(v) for v in info["cell"]],
            "stats": aug.stats.tolist(),
            "action": None if action is None else int(action),
            "extrinsic": float(info.get("extrinsic", 0.0)),
            "intrinsic": float(info.get("intrinsic", 0.0)),
            "reward": float(reward),
            "done": bool(done),
        })

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec) + "\n")

    @staticmethod
    def load(path) -> list:
        with open(path) as fh:
            return [json.loads(line) for line in fh if line.strip()]


def record_trace(wrapped: AugmentedEnv, actions: Iterable[int], seed: int = 0) -> list:
    """Drive ``wrapped`` through ``actions``, resetting whenever an episode ends."""
    rec = TraceRecorder()
    aug, r, done, info = wrapped.reset(seed)
    rec.add(aug, None, r, done, info)
    for a in actions:
        if done:
            aug, r, done, info = wrapped.reset(seed)
            rec.add(aug, None, r, done, info)
        aug, r, done, info = wrapped.step(int(a))
        rec.add(aug, a, r, done, info)
    return rec.records


def recompute_intrinsic(prev: Mapping, cur: Mapping, bonus: BonusConfig,
                        encoding: StatEncoding, feature_map: FeatureMap | None = None) -> float:
    """Bonus for ``prev -> cur`` using only the two augmented states."""
    kind = bonus.kind
    cell = tuple(cur["cell"])
    if kind == "none":
        return 0.0
    if encoding.kind == "none":
        raise ConfigError("cannot recompute a bonus from an unaugmented trace")
    encoding.check_compatible(kind)
    if kind == "count_sqrt":
        n = decode_counts(np.asarray(cur["stats"]), encoding.normalization)[cell]
        return bonus.beta / math.sqrt(n)
    if kind == "count_salesman":
        n = decode_counts(np.asarray(prev["stats"]), encoding.normalization)[cell]
        return 1.0 if n == 0 else 0.0
    stats = np.asarray(prev["stats"], dtype=np.float64)
    if kind == "e3b":
        if encoding.kind == "ellipsoid_full":
            psi = feature_map.encode(cell)
            return float(psi @ stats @ psi)
        if feature_map.kind != "one_hot":
            raise ConfigError("diagonal ellipsoid encodings only determine one-hot bonuses")
        return float(stats[int(np.argmax(feature_map.encode(cell)))])
    d = stats.shape[0] // 2
    return gaussian_neg_log_pdf(feature_map.encode(cell), stats[:d], stats[d:])


@dataclass
class ReplayReport:
    n_transitions: int
    recomputable: bool
    mismatches: int
    max_abs_error: float
    witness_groups: int
    witnesses: list

    @property
    def deterministic(self) -> bool:
        return self.recomputable and self.mismatches == 0


def _transitions(trace: list):
    for prev, cur in zip(trace, trace[1:]):
        if cur["action"] is None or prev["done"]:
            continue
        yield prev, cur


def replay_determinism_check(trace: list, bonus: BonusConfig, encoding: StatEncoding,
                             grid_shape: tuple[int, int],
                             feature_map: FeatureMap | None = None,
                             tol: float = 1e-12) -> ReplayReport:
    """Recompute every intrinsic reward from the stored augmented states.

    Counts must match exactly; elliptical and Gaussian bonuses within
    ``tol``. Independently, transitions are grouped by unaugmented
    ``(obs, action, next_obs)`` and groups that carry more than one distinct
    reward are reported as witnesses of non-stationarity.
    """
    feature_map = feature_map or default_feature_map(bonus.kind, grid_shape)
    exact = bonus.kind in ("count_sqrt", "count_salesman", "none")
    recomputable = encoding.kind != "none" or bonus.kind == "none"
    n = mismatches = 0
    worst = 0.0
    groups: dict = defaultdict(set)
    for prev, cur in _transitions(trace):
        n += 1
        groups[(prev["obs_hash"], cur["action"], cur["obs_hash"])].add(cur["intrinsic"])
        if not recomputable:
            continue
        value = recompute_intrinsic(prev, cur, bonus, encoding, feature_map)
        err = abs(value - cur["intrinsic"])
        worst = max(worst, err)
        if (err != 0.0) if exact else (err > tol * max(1.0, abs(value))):
            mismatches += 1
    witnesses = [(k, sorted(v)) for k, v in groups.items() if len(v) > 1]
    return ReplayReport(n, recomputable, mismatches, worst, len(witnesses), witnesses)
