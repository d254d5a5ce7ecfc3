"""Aggregate run directories into IQM tables, recomputed from the raw CSVs."""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from pathlib import Path

import numpy as np

from .config import load_config
from .metrics import MetricsLog
from .runner import tail_rows
from .stats import iqm, stratified_bootstrap_ci

REPORT_COLUMNS = ("env", "bonus", "augmentation", "n_seeds",
                  "final_eval_return_iqm", "tail_return_iqm", "tail_return_ci_low", "tail_return_ci_high",
                  "tail_coverage_iqm", "tail_coverage_ci_low", "tail_coverage_ci_high")


def read_eval_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def collect_runs(root) -> dict[tuple, list[dict]]:
    """Per-seed tail samples grouped by (env, bonus, augmentation)."""
    groups: dict[tuple, list[dict]] = defaultdict(list)
    for cfg_path in sorted(Path(root).rglob("config.json")):
        cfg = load_config(cfg_path)
        for seed_dir in sorted(cfg_path.parent.glob("seed*")):
            metrics_path = seed_dir / "metrics.csv"
            eval_path = seed_dir / "eval.csv"
            if not (metrics_path.exists() and eval_path.exists()):
                continue
            log = MetricsLog.from_csv(metrics_path)
            evals = read_eval_csv(eval_path)
            if not log.rows or not evals:
                continue
            idx = tail_rows(log, cfg.run.tail_fraction)
            groups[cfg.label()].append({
                "final_return": evals[-1]["eval_return"],
                "tail_return": log.column("extrinsic_return")[idx],
                "tail_coverage": log.column("episode_coverage")[idx],
            })
    return dict(groups)


def _ci(samples: list) -> tuple[float, float]:
    if len(samples) < 2:
        return float("nan"), float("nan")
    return stratified_bootstrap_ci(samples)


def report_rows(root) -> list[tuple]:
    rows = []
    for (env, bonus, aug), seeds in sorted(collect_runs(root).items()):
        ret = [s["tail_return"] for s in seeds]
        cov = [s["tail_coverage"] for s in seeds]
        rows.append((env, bonus, aug, len(seeds),
                     iqm([s["final_return"] for s in seeds]),
                     iqm(np.concatenate(ret)), *_ci(ret),
                     iqm(np.concatenate(cov)), *_ci(cov)))
    return rows


def format_report(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()
