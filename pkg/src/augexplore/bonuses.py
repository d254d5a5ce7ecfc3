"""Intrinsic-reward engines and their sufficient statistics.

Three families are provided:

* visitation counts, with a dense ``beta / sqrt(N)`` bonus and a sparse
  "salesman" bonus paid only on the first visit;
* an elliptical bonus ``psi^T C^{-1} psi`` whose inverse is maintained by
  rank-one (Sherman-Morrison) updates;
* a surprise bonus ``-log p(s)`` under a running diagonal Gaussian.

Ordering on a transition into ``s'``: the salesman, elliptical and surprise
bonuses read the statistics *before* ``s'`` is folded in; the square-root
count bonus reads the count *after* the update, so it never divides by 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping

import numpy as np

BONUS_KINDS = ("none", "count_sqrt", "count_salesman", "e3b", "smax")
SCOPES = ("episodic", "global")
_LOG_2PI = math.log(2.0 * math.pi)


class BonusOrderError(RuntimeError):
    """A bonus was queried at a point where it is undefined (update-order bug)."""


@dataclass
class BonusConfig:
    kind: str = "none"
    beta: float = 1.0
    lam: float = 0.1
    sigma_floor: float = 1e-4
    scope: str = "episodic"
    intrinsic_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in BONUS_KINDS:
            raise ValueError(f"unknown bonus kind {self.kind!r}")
        if self.scope not in SCOPES:
            raise ValueError(f"unknown scope {self.scope!r}")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if not self.lam > 0:
            raise ValueError("lambda must be > 0")
        if not self.sigma_floor > 0:
            raise ValueError("sigma_floor must be > 0")

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "beta": self.beta, "lambda": self.lam,
                "sigma_floor": self.sigma_floor, "scope": self.scope,
                "intrinsic_scale": self.intrinsic_scale}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "BonusConfig":
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        return cls(**data)


# ---------------------------------------------------------------------------
# counts
# ---------------------------------------------------------------------------

@dataclass
class CountTable:
    counts: dict = field(default_factory=dict)
    total: int = 0

    def get(self, key: Hashable) -> int:
        return self.counts.get(key, 0)

    def copy(self) -> "CountTable":
        return CountTable(dict(self.counts), self.total)


def count_update(table: CountTable, key: Hashable) -> CountTable:
    """Increment the count of ``key`` by one (in place)."""
    table.counts[key] = table.counts.get(key, 0) + 1
    table.total += 1
    return table


def count_bonus_sqrt(table: CountTable, key: Hashable, beta: float = 1.0) -> float:
    n = table.get(key)
    if n <= 0:
        raise BonusOrderError(
            f"sqrt bonus queried for {key!r} with count 0; update the table first")
    return beta / math.sqrt(n)


def count_bonus_salesman(table: CountTable, key: Hashable) -> float:
    return 1.0 if table.get(key) == 0 else 0.0


def seed_counts(table: CountTable, prior: Mapping[Hashable, int]) -> CountTable:
    """Replace the table contents with ``prior``; later updates stack on top."""
    counts = {k: int(v) for k, v in prior.items() if int(v) != 0}
    if any(v < 0 for v in counts.values()):
        raise ValueError("prior counts must be nonnegative")
    table.counts = counts
    table.total = sum(counts.values())
    return table


# ---------------------------------------------------------------------------
# elliptical bonus
# ---------------------------------------------------------------------------

@dataclass
class EllipsoidState:
    dim: int
    lam: float
    C: np.ndarray
    C_inv: np.ndarray

    @classmethod
    def fresh(cls, dim: int, lam: float) -> "EllipsoidState":
        return cls(dim, lam, lam * np.eye(dim), np.eye(dim) / lam)

    def copy(self) -> "EllipsoidState":
        return EllipsoidState(self.dim, self.lam, self.C.copy(), self.C_inv.copy())


def _check_dim(ell: EllipsoidState, psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.float64).reshape(-1)
    if psi.shape[0] != ell.dim:
        raise ValueError(f"feature has dim {psi.shape[0]}, ellipsoid has dim {ell.dim}")
    return psi


def e3b_bonus(ell: EllipsoidState, psi: np.ndarray) -> float:
    psi = _check_dim(ell, psi)
    return float(psi @ ell.C_inv @ psi)


def e3b_update(ell: EllipsoidState, psi: np.ndarray) -> EllipsoidState:
    """Fold ``psi psi^T`` into C and update C_inv with the rank-one identity."""
    psi = _check_dim(ell, psi)
    u = ell.C_inv @ psi
    denom = 1.0 + psi @ u
    ell.C += np.outer(psi, psi)
    ell.C_inv -= np.outer(u, u) / denom
    # C_inv stays symmetric in exact arithmetic; keep it so numerically
    ell.C_inv = 0.5 * (ell.C_inv + ell.C_inv.T)
    return ell


@dataclass
class EquivalenceReport:
    n_steps: int
    max_rel_deviation: float
    bonuses: list
    expected: list

    def passed(self, tol: float = 1e-9) -> bool:
        return self.max_rel_deviation <= tol


def e3b_onehot_equivalence_check(trace: Iterable[int], lam: float,
                                 n_states: int | None = None) -> EquivalenceReport:
    """Run the elliptical bonus on one-hot features next to a count table.

    With one-hot features the maintained inverse is diagonal with entries
    ``1 / (lam + N(s))``, so every bonus must equal ``1 / (lam + N_pre(s))``.
    """
    trace = [int(s) for s in trace]
    if n_states is None:
        n_states = max(trace) + 1 if trace else 1
    ell = EllipsoidState.fresh(n_states, lam)
    table = CountTable()
    eye = np.eye(n_states)
    got, want = [], []
    worst = 0.0
    for s in trace:
        b = e3b_bonus(ell, eye[s])
        ref = 1.0 / (lam + table.get(s))
        got.append(b)
        want.append(ref)
        worst = max(worst, abs(b - ref) / abs(ref))
        e3b_update(ell, eye[s])
        count_update(table, s)
    return EquivalenceReport(len(trace), worst, got, want)


# ---------------------------------------------------------------------------
# surprise (Gaussian) bonus
# ---------------------------------------------------------------------------

@dataclass
class GaussianStats:
    dim: int
    mean: np.ndarray
    m2: np.ndarray
    n: int = 0

    @classmethod
    def fresh(cls, dim: int) -> "GaussianStats":
        return cls(dim, np.zeros(dim), np.zeros(dim), 0)

    def variance(self, sigma_floor: float = 1e-4) -> np.ndarray:
        # before any sample the model is a unit Gaussian at the origin
        if self.n == 0:
            return np.ones(self.dim)
        return np.maximum(self.m2 / self.n, sigma_floor)

    def copy(self) -> "GaussianStats":
        return GaussianStats(self.dim, self.mean.copy(), self.m2.copy(), self.n)


def gaussian_neg_log_pdf(x: np.ndarray, mean: np.ndarray, var: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    return float(0.5 * np.sum(_LOG_2PI + np.log(var) + (x - mean) ** 2 / var))


def smax_bonus(stats: GaussianStats, x: np.ndarray, sigma_floor: float = 1e-4) -> float:
    return gaussian_neg_log_pdf(x, stats.mean, stats.variance(sigma_floor))


def smax_update(stats: GaussianStats, x: np.ndarray) -> GaussianStats:
    """Welford update of the running mean and sum of squared deviations."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    stats.n += 1
    delta = x - stats.mean
    stats.mean = stats.mean + delta / stats.n
    stats.m2 = stats.m2 + delta * (x - stats.mean)
    return stats


def combine_rewards(extrinsic: float, intrinsic: float, intrinsic_scale: float) -> float:
    return extrinsic + intrinsic_scale * intrinsic


# ---------------------------------------------------------------------------
# feature maps and engines
# ---------------------------------------------------------------------------

@dataclass
class FeatureMap:
    """Fixed map from a discrete state key to a feature vector."""

    kind: str
    dim: int
    encode: Callable[[Any], np.ndarray]

    @classmethod
    def one_hot(cls, grid_shape: tuple[int, int]) -> "FeatureMap":
        h, w = grid_shape
        eye = np.eye(h * w)
        return cls("one_hot", h * w, lambda cell: eye[cell[0] * w + cell[1]])

    @classmethod
    def identity(cls, dim: int = 2) -> "FeatureMap":
        return cls("identity", dim, lambda key: np.asarray(key, dtype=np.float64).reshape(-1))

    @classmethod
    def custom(cls, dim: int, fn: Callable[[Any], np.ndarray]) -> "FeatureMap":
        return cls("custom", dim, lambda key: np.asarray(fn(key), dtype=np.float64).reshape(-1))


def default_feature_map(kind: str, grid_shape: tuple[int, int]) -> FeatureMap | None:
    if kind == "e3b":
        return FeatureMap.one_hot(grid_shape)
    if kind == "smax":
        return FeatureMap.identity(2)
    return None


class BonusEngine:
    """Owns one bonus's statistics for a single environment instance.

    ``observe`` folds a state in without paying a bonus (used for the first
    state of an episode); ``transition`` pays the bonus for arriving in a
    state and updates the statistics in the order the bonus requires.
    """

    kind = "none"

    def __init__(self, config: BonusConfig, grid_shape: tuple[int, int]):
        self.config = config
        self.grid_shape = tuple(grid_shape)
        self._fresh()

    def _fresh(self) -> None:
        pass

    def reset(self) -> None:
        if self.config.scope == "episodic":
            self._fresh()

    def observe(self, key) -> None:
        pass

    def transition(self, key) -> float:
        return 0.0

    def state_dict(self) -> dict[str, Any]:
        return {"kind": self.kind}

    def load_state_dict(self, state: Mapping[str, Any]) -> None:
        pass


class CountEngine(BonusEngine):
    def __init__(self, config: BonusConfig, grid_shape: tuple[int, int]):
        self.kind = config.kind
        super().__init__(config, grid_shape)

    def _fresh(self) -> None:
        self.table = CountTable()

    def observe(self, key) -> None:
        count_update(self.table, tuple(key))

    def transition(self, key) -> float:
        key = tuple(key)
        if self.kind == "count_salesman":
            bonus = count_bonus_salesman(self.table, key)
            count_update(self.table, key)
            return bonus
        count_update(self.table, key)
        return count_bonus_sqrt(self.table, key, self.config.beta)

    def seed(self, prior: Mapping[Hashable, int]) -> None:
        seed_counts(self.table, {tuple(k): v for k, v in prior.items()})

    def grid(self) -> np.ndarray:
        out = np.zeros(self.grid_shape)
        for (r, c), n in self.table.counts.items():
            out[r, c] = n
        return out

    def state_dict(self) -> dict[str, Any]:
        items = sorted(self.table.counts.items())
        return {"kind": self.kind, "counts": [[r, c, n] for (r, c), n in items],
                "total": self.table.total}

    def load_state_dict(self, state: Mapping[str, Any]) -> None:
        self.table = CountTable({(int(r), int(c)): int(n) for r, c, n in state["counts"]},
                                int(state["total"]))


class E3BEngine(BonusEngine):
    kind = "e3b"

    def __init__(self, config: BonusConfig, grid_shape: tuple[int, int],
                 feature_map: FeatureMap | None = None):
        self.feature_map = feature_map or FeatureMap.one_hot(grid_shape)
        super().__init__(config, grid_shape)

    def _fresh(self) -> None:
        self.ellipsoid = EllipsoidState.fresh(self.feature_map.dim, self.config.lam)

    def observe(self, key) -> None:
        e3b_update(self.ellipsoid, self.feature_map.encode(key))

    def transition(self, key) -> float:
        psi = self.feature_map.encode(key)
        bonus = e3b_bonus(self.ellipsoid, psi)
        e3b_update(self.ellipsoid, psi)
        return bonus

    def state_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "lambda": self.ellipsoid.lam,
                "C": self.ellipsoid.C.tolist(), "C_inv": self.ellipsoid.C_inv.tolist()}

    def load_state_dict(self, state: Mapping[str, Any]) -> None:
        C = np.asarray(state["C"], dtype=np.float64)
        self.ellipsoid = EllipsoidState(C.shape[0], float(state["lambda"]), C,
                                        np.asarray(state["C_inv"], dtype=np.float64))


class SMaxEngine(BonusEngine):
    kind = "smax"

    def __init__(self, config: BonusConfig, grid_shape: tuple[int, int],
                 feature_map: FeatureMap | None = None):
        self.feature_map = feature_map or FeatureMap.identity(2)
        super().__init__(config, grid_shape)

    def _fresh(self) -> None:
        self.stats = GaussianStats.fresh(self.feature_map.dim)

    def observe(self, key) -> None:
        smax_update(self.stats, self.feature_map.encode(key))

    def transition(self, key) -> float:
        x = self.feature_map.encode(key)
        bonus = smax_bonus(self.stats, x, self.config.sigma_floor)
        smax_update(self.stats, x)
        return bonus

    def state_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "mean": self.stats.mean.tolist(),
                "m2": self.stats.m2.tolist(), "n": self.stats.n}

    def load_state_dict(self, state: Mapping[str, Any]) -> None:
        mean = np.asarray(state["mean"], dtype=np.float64)
        self.stats = GaussianStats(mean.shape[0], mean,
                                   np.asarray(state["m2"], dtype=np.float64), int(state["n"]))


def make_engine(config: BonusConfig, grid_shape: tuple[int, int],
                feature_map: FeatureMap | None = None) -> BonusEngine:
    if config.kind in ("count_sqrt", "count_salesman"):
        return CountEngine(config, grid_shape)
    if config.kind == "e3b":
        return E3BEngine(config, grid_shape, feature_map)
    if config.kind == "smax":
        return SMaxEngine(config, grid_shape, feature_map)
    return BonusEngine(config, grid_shape)
