"""Coverage tracking, metrics logs and heatmap files."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

METRIC_COLUMNS = ("seed", "env_step", "episode", "extrinsic_return", "intrinsic_return",
                  "episode_coverage", "global_coverage")


class CoverageTracker:
    """Visited-cell sets for the current episode and for the whole run."""

    def __init__(self, reachable: set):
        if not reachable:
            raise ValueError("coverage needs a nonempty reachable set")
        self.reachable = set(reachable)
        self.denominator = len(self.reachable)
        self.episode_cells: set = set()
        self.global_cells: set = set()

    def start_episode(self, cell) -> None:
        self.episode_cells = set()
        self.visit(cell)

    def visit(self, cell) -> None:
        cell = tuple(cell)
        self.episode_cells.add(cell)
        self.global_cells.add(cell)

    def episodic(self) -> float:
        return coverage(self.episode_cells, self.denominator)

    def global_(self) -> float:
        return coverage(self.global_cells, self.denominator)


def coverage(visited, denominator: int) -> float:
    if denominator <= 0:
        raise ValueError("coverage denominator must be positive")
    return len(visited) / denominator


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


@dataclass
class MetricsLog:
    rows: list = field(default_factory=list)

    def add(self, seed, env_step, episode, extrinsic_return, intrinsic_return,
            episode_coverage, global_coverage) -> None:
        self.rows.append((int(seed), int(env_step), int(episode), float(extrinsic_return),
                          float(intrinsic_return), float(episode_coverage), float(global_coverage)))

    def column(self, name: str) -> np.ndarray:
        i = METRIC_COLUMNS.index(name)
        return np.array([r[i] for r in self.rows])

    def to_csv(self, path) -> None:
        Path(path).write_text(self.to_csv_string())

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(METRIC_COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, path) -> "MetricsLog":
        log = cls()
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != METRIC_COLUMNS:
                raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
            for rec in reader:
                log.add(*(rec[c] if i >= 3 else int(rec[c]) for i, c in enumerate(METRIC_COLUMNS)))
        return log


def emit_heatmap(counts: np.ndarray, path) -> tuple[Path, Path]:
    """Write ``<path>.csv`` (raw counts) and ``<path>.pgm`` (plain P2, max -> 255)."""
    counts = np.asarray(counts)
    base = Path(path)
    base.parent.mkdir(parents=True, exist_ok=True)
    csv_path = base.with_suffix(".csv")
    pgm_path = base.with_suffix(".pgm")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in counts:
            w.writerow([int(v) if float(v).is_integer() else float(v) for v in row])
    top = counts.max() if counts.size else 0
    pix = np.zeros(counts.shape, dtype=int) if top <= 0 else np.rint(255 * counts / top).astype(int)
    h, w_ = counts.shape
    lines = ["P2", f"{w_} {h}", "255"] + [" ".join(str(v) for v in row) for row in pix]
    pgm_path.write_text("\n".join(lines) + "\n")
    return csv_path, pgm_path


def read_heatmap_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        return np.array([[float(v) for v in row] for row in csv.reader(fh)])


def read_pgm(path) -> np.ndarray:
    tokens = Path(path).read_text().split()
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    w, h = int(tokens[1]), int(tokens[2])
    return np.array([int(t) for t in tokens[4:4 + w * h]]).reshape(h, w)
