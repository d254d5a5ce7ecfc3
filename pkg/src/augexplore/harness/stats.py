"""Interquartile mean and seed-stratified bootstrap intervals."""
from __future__ import annotations

from typing import Sequence

import numpy as np


def iqm(values) -> float:
    """Mean after dropping ``floor(n/4)`` values from each end of the sorted sample."""
    x = np.sort(np.asarray(values, dtype=np.float64).reshape(-1))
    n = x.size
    if n == 0:
        raise ValueError("iqm of an empty sample")
    k = n // 4
    return float(x[k:n - k].mean())


def stratified_bootstrap_ci(per_seed_samples: Sequence, iters: int = 2000, level: float = 0.95,
                            seed: int = 0) -> tuple[float, float]:
    """Percentile interval of the pooled IQM, resampling within each seed.

    Each replicate draws, for every seed independently, as many samples as
    that seed has (with replacement), pools them and takes the IQM.
    """
    strata = [np.asarray(s, dtype=np.float64).reshape(-1) for s in per_seed_samples]
    if len(strata) < 2:
        raise ValueError("need at least two seeds")
    if any(s.size == 0 for s in strata):
        raise ValueError("every seed needs at least one sample")
    rng = np.random.default_rng(seed)
    reps = np.empty(iters)
    for b in range(iters):
        pooled = np.concatenate([s[rng.integers(0, s.size, size=s.size)] for s in strata])
        reps[b] = iqm(pooled)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(reps, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


def intervals_overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return not (a[1] < b[0] or b[1] < a[0])
