"""Training/evaluation driver: one environment+bonus+agent stack per seed."""
from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..agents import TabularQAgent, VecEnv, make_agent
from ..augment import AugmentedEnv, ConfigError
from ..bonuses import make_engine
from ..envs import make_env, reachable_cells
from ..nn import load_tensors, save_tensors
from .config import ExperimentConfig
from .metrics import CoverageTracker, MetricsLog, emit_heatmap

log = logging.getLogger(__name__)

EVAL_COLUMNS = ("seed", "env_step", "eval_return", "eval_episode_coverage")


def build_env(cfg: ExperimentConfig, spec=None) -> AugmentedEnv:
    spec = spec or cfg.env_spec()
    engine = make_engine(cfg.bonus, spec.shape)
    return AugmentedEnv(make_env(spec), engine, cfg.active_encoding)


def build_agent(cfg: ExperimentConfig, seed: int, env: AugmentedEnv | None = None):
    env = env or build_env(cfg)
    rng = np.random.default_rng(seed)
    return make_agent(cfg.agent, env.env.observation_shape, env.stats_shape, env.n_actions, rng)


def agent_tensors(agent, grid_shape) -> dict[str, np.ndarray]:
    if isinstance(agent, TabularQAgent):
        q = np.zeros((*grid_shape, agent.n_actions))
        for (r, c), row in agent.Q.items():
            q[r, c] = row
        return {"q_table": q}
    return agent.net.param_dict()


def load_agent_tensors(agent, tensors: dict[str, np.ndarray]) -> None:
    if isinstance(agent, TabularQAgent):
        q = tensors["q_table"]
        for r in range(q.shape[0]):
            for c in range(q.shape[1]):
                agent.Q[(r, c)] = q[r, c].copy()
        return
    try:
        agent.net.load_param_dict(tensors)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"checkpoint does not fit this agent/environment: {exc}") from exc
    if hasattr(agent, "q_target"):
        agent.sync_target()


def greedy_action(agent, aug, cell) -> int:
    if isinstance(agent, TabularQAgent):
        return agent.greedy_one(tuple(cell))
    return int(agent.greedy(aug.base[None], aug.stats[None])[0])


@dataclass
class EvalResult:
    returns: np.ndarray
    coverages: np.ndarray
    visits: np.ndarray

    @property
    def mean_return(self) -> float:
        return float(self.returns.mean())

    @property
    def mean_coverage(self) -> float:
        return float(self.coverages.mean())


def evaluate(agent, cfg: ExperimentConfig, n_episodes: int, engine_state: dict | None = None,
             spec=None) -> EvalResult:
    """Greedy episodes; global-scope statistics restart from ``engine_state`` each episode."""
    spec = spec or cfg.env_spec()
    env = build_env(cfg, spec)
    reach = reachable_cells(spec)
    visits = np.zeros(spec.shape)
    returns, covs = [], []
    for _ in range(n_episodes):
        if engine_state is not None and cfg.bonus.scope == "global":
            env.engine.load_state_dict(engine_state)
        aug, _, done, info = env.reset()
        tracker = CoverageTracker(reach)
        tracker.start_episode(info["cell"])
        visits[info["cell"]] += 1
        ret = 0.0
        while not done:
            aug, _, done, info = env.step(greedy_action(agent, aug, info["cell"]))
            ret += info["extrinsic"]
            tracker.visit(info["cell"])
            visits[info["cell"]] += 1
        returns.append(ret)
        covs.append(tracker.episodic())
    return EvalResult(np.array(returns), np.array(covs), visits)


class TrainingMonitor:
    """Hook called by the agents after every vector step."""

    def __init__(self, cfg: ExperimentConfig, seed: int, vec: VecEnv, agent, spec):
        self.cfg, self.seed, self.vec, self.agent, self.spec = cfg, seed, vec, agent, spec
        reach = reachable_cells(spec)
        self.trackers = [CoverageTracker(reach) for _ in range(vec.n)]
        self.global_cells: set = set()
        self.denominator = len(reach)
        self.visits = np.zeros(spec.shape)
        self.log = MetricsLog()
        self.evals: list[tuple] = []
        self.episodes = 0
        self.next_eval = cfg.run.eval_every

    def _visit(self, i: int, cell) -> None:
        self.trackers[i].visit(cell)
        self.global_cells.add(tuple(cell))
        self.visits[tuple(cell)] += 1

    def __call__(self, step: int, infos, reset: bool = False) -> None:
        for i, info in enumerate(infos):
            if reset:
                self.trackers[i].start_episode(info["cell"])
                self._visit(i, info["cell"])
                continue
            self._visit(i, info["cell"])
            if "episode" in info:
                ep = info["episode"]
                self.log.add(self.seed, step, self.episodes, ep["extrinsic_return"],
                             ep["intrinsic_return"], self.trackers[i].episodic(),
                             len(self.global_cells) / self.denominator)
                self.episodes += 1
                self.trackers[i].start_episode(info["reset_cell"])
                self._visit(i, info["reset_cell"])
        if not reset and step >= self.next_eval:
            while self.next_eval <= step:
                self.next_eval += self.cfg.run.eval_every
            res = evaluate(self.agent, self.cfg, self.cfg.run.eval_episodes,
                           self.vec.envs[0].engine.state_dict(), self.spec)
            self.evals.append((self.seed, step, res.mean_return, res.mean_coverage))
            log.info("seed %d step %d eval return %.3f coverage %.3f", self.seed, step,
                     res.mean_return, res.mean_coverage)


@dataclass
class SeedResult:
    seed: int
    metrics: MetricsLog
    evals: list
    final: EvalResult
    summary: dict
    agent: object = field(repr=False, default=None)
    seed_dir: Path | None = None


def tail_rows(metrics: MetricsLog, fraction: float) -> np.ndarray:
    """Indices of the last ``fraction`` of training episodes (at least one)."""
    n = len(metrics.rows)
    k = max(1, int(round(fraction * n)))
    return np.arange(max(0, n - k), n)


def run_seed(cfg: ExperimentConfig, seed: int, out_dir: Path | None = None) -> SeedResult:
    spec = cfg.env_spec()
    envs = [build_env(cfg, spec) for _ in range(cfg.agent.num_envs)]
    vec = VecEnv(envs)
    agent = make_agent(cfg.agent, vec.obs_shape, vec.stats_shape, vec.n_actions,
                       np.random.default_rng(seed))
    monitor = TrainingMonitor(cfg, seed, vec, agent, spec)
    t0 = time.perf_counter()
    agent.train(vec, cfg.run.total_steps, hook=monitor, seed=seed)
    engine_state = envs[0].engine.state_dict()
    final = evaluate(agent, cfg, cfg.run.final_eval_episodes, engine_state, spec)
    monitor.evals.append((seed, agent.num_timesteps, final.mean_return, final.mean_coverage))
    idx = tail_rows(monitor.log, cfg.run.tail_fraction) if monitor.log.rows else np.array([], int)
    ext = monitor.log.column("extrinsic_return")[idx] if len(idx) else np.zeros(0)
    cov = monitor.log.column("episode_coverage")[idx] if len(idx) else np.zeros(0)
    summary = {
        "seed": seed,
        "env_steps": agent.num_timesteps,
        "episodes": len(monitor.log.rows),
        "final_eval_return": final.mean_return,
        "final_eval_coverage": final.mean_coverage,
        "tail_extrinsic_return": float(ext.mean()) if ext.size else 0.0,
        "tail_episode_coverage": float(cov.mean()) if cov.size else 0.0,
        "total_extrinsic_return": float(monitor.log.column("extrinsic_return").sum()) if monitor.log.rows else 0.0,
        "final_global_coverage": len(monitor.global_cells) / monitor.denominator,
    }
    log.info("seed %d done in %.1fs: %s", seed, time.perf_counter() - t0, summary)
    seed_dir = None
    if out_dir is not None:
        seed_dir = Path(out_dir) / f"seed{seed}"
        seed_dir.mkdir(parents=True, exist_ok=True)
        monitor.log.to_csv(seed_dir / "metrics.csv")
        with open(seed_dir / "eval.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(EVAL_COLUMNS)
            for s, step, ret, c in monitor.evals:
                w.writerow([s, step, repr(float(ret)), repr(float(c))])
        emit_heatmap(monitor.visits, seed_dir / "heatmap_train")
        emit_heatmap(final.visits, seed_dir / "heatmap_eval")
        save_tensors(seed_dir / "checkpoint.bin", agent_tensors(agent, spec.shape))
        (seed_dir / "engine.json").write_text(json.dumps(engine_state) + "\n")
        (seed_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return SeedResult(seed, monitor.log, monitor.evals, final, summary, agent, seed_dir)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    seeds: dict
    output_dir: Path | None

    def summaries(self) -> list[dict]:
        return [r.summary for r in self.seeds.values()]


def run_experiment(cfg: ExperimentConfig, output_dir=None, seeds=None) -> ExperimentResult:
    """Train and evaluate every seed; writes artifacts when ``output_dir`` is given."""
    out = Path(output_dir) if output_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        cfg.save(out / "config.json")
    results = {}
    for seed in (seeds if seeds is not None else cfg.run.seeds):
        results[seed] = run_seed(cfg, int(seed), out)
    return ExperimentResult(cfg, results, out)


def load_checkpoint_agent(cfg: ExperimentConfig, path, seed: int = 0):
    agent = build_agent(cfg, seed)
    load_agent_tensors(agent, load_tensors(path))
    return agent
