"""Deterministic grid simulators: entity-map mazes and DeepSea.

Both environments expose the same small surface::

    result = env.reset(seed)
    result = env.step(action)

where ``result`` is a :class:`StepResult`. Maze actions are
0=up, 1=right, 2=down, 3=left. DeepSea actions are 0=left, 1=right.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

import numpy as np

Cell = tuple[int, int]

MAZE_ACTIONS = ("up", "right", "down", "left")
DEEPSEA_ACTIONS = ("left", "right")
_MOVES = {0: (-1, 0), 1: (0, 1), 2: (1, 0), 3: (0, -1)}


class MazeFormatError(ValueError):
    """Raised for malformed ASCII maze layouts."""


class EnvUsageError(RuntimeError):
    """Raised when an environment is driven outside its contract."""


@dataclass
class EnvSpec:
    kind: str
    width: int
    height: int
    walls: np.ndarray
    start: Cell
    goal: Cell | None = None
    max_steps: int = 100
    deepsea_n: int | None = None
    name: str = ""

    def __post_init__(self):
        self.walls = np.asarray(self.walls, dtype=bool)
        self.start = tuple(int(v) for v in self.start)
        if self.goal is not None:
            self.goal = tuple(int(v) for v in self.goal)
        if self.kind not in ("maze", "deepsea"):
            raise ValueError(f"unknown env kind {self.kind!r}")
        if self.walls.shape != (self.height, self.width):
            raise ValueError("walls grid does not match width/height")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        for label, cell in (("start", self.start), ("goal", self.goal)):
            if cell is None:
                continue
            r, c = cell
            if not (0 <= r < self.height and 0 <= c < self.width):
                raise ValueError(f"{label} {cell} outside the grid")
            if self.walls[r, c]:
                raise ValueError(f"{label} {cell} is a wall cell")
        if self.kind == "deepsea":
            n = self.deepsea_n
            if n is None or self.width != n or self.height != n:
                raise ValueError("deepsea spec needs width == height == deepsea_n")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def to_ascii(self) -> str:
        rows = []
        for r in range(self.height):
            line = []
            for c in range(self.width):
                if self.walls[r, c]:
                    line.append("#")
                elif (r, c) == self.start:
                    line.append("S")
                elif (r, c) == self.goal:
                    line.append("G")
                else:
                    line.append(".")
            rows.append("".join(line))
        return "\n".join(rows)

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "deepsea":
            return {"kind": "deepsea", "n": self.deepsea_n, "name": self.name}
        return {
            "kind": "maze",
            "ascii": self.to_ascii().split("\n"),
            "max_steps": self.max_steps,
            "name": self.name,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EnvSpec":
        if data.get("kind") == "deepsea":
            return deepsea_spec(int(data["n"]))
        text = data["ascii"]
        if isinstance(text, list):
            text = "\n".join(text)
        return maze_from_ascii(text, max_steps=int(data.get("max_steps", 100)),
                               name=data.get("name", ""))


def maze_from_ascii(text: str, max_steps: int = 100, name: str = "") -> EnvSpec:
    """Parse a rectangular layout of ``#`` (wall), ``.`` (floor), ``S`` and ``G``.

    Exactly one ``S`` is required and at most one ``G`` is allowed.
    """
    lines = [ln.rstrip("\r") for ln in text.strip("\n").split("\n")]
    lines = [ln for ln in lines if ln.strip() != ""]
    if not lines:
        raise MazeFormatError("empty maze")
    width = len(lines[0])
    if any(len(ln) != width for ln in lines):
        raise MazeFormatError("maze rows have different lengths")
    bad = set("".join(lines)) - set("#.SG")
    if bad:
        raise MazeFormatError(f"unexpected characters {sorted(bad)}")
    starts = [(r, c) for r, ln in enumerate(lines) for c, ch in enumerate(ln) if ch == "S"]
    goals = [(r, c) for r, ln in enumerate(lines) for c, ch in enumerate(ln) if ch == "G"]
    if len(starts) != 1:
        raise MazeFormatError(f"expected exactly one 'S', found {len(starts)}")
    if len(goals) > 1:
        raise MazeFormatError(f"expected at most one 'G', found {len(goals)}")
    walls = np.array([[ch == "#" for ch in ln] for ln in lines], dtype=bool)
    return EnvSpec(
        kind="maze",
        width=width,
        height=len(lines),
        walls=walls,
        start=starts[0],
        goal=goals[0] if goals else None,
        max_steps=max_steps,
        name=name,
    )


def deepsea_spec(n: int) -> EnvSpec:
    return EnvSpec(
        kind="deepsea",
        width=n,
        height=n,
        walls=np.zeros((n, n), dtype=bool),
        start=(0, 0),
        goal=(n - 1, n - 1),
        max_steps=n,
        deepsea_n=n,
        name=f"deepsea-{n}",
    )


BUNDLED_MAZES = {
    "maze1": ("maze1_32.txt", 512),
    "maze2": ("maze2_32.txt", 512),
    "maze3": ("maze3_32.txt", 512),
    "open9": ("open9.txt", 100),
    "maze15": ("maze15.txt", 150),
    "sparse15": ("sparse15.txt", 150),
}


def load_maze(name: str, max_steps: int | None = None) -> EnvSpec:
    """Load one of the bundled layouts (see ``BUNDLED_MAZES``)."""
    if name.startswith("deepsea-"):
        return deepsea_spec(int(name.split("-", 1)[1]))
    if name not in BUNDLED_MAZES:
        raise KeyError(f"unknown maze asset {name!r}")
    fname, default_steps = BUNDLED_MAZES[name]
    text = (resources.files("augexplore") / "assets" / "mazes" / fname).read_text()
    return maze_from_ascii(text, max_steps=max_steps or default_steps, name=name)


@dataclass
class StepResult:
    observation: np.ndarray
    extrinsic_reward: float
    done: bool
    info: dict = field(default_factory=dict)


class MazeEnv:
    """Four-action gridworld returning (avatar, wall, goal) boolean channels.

    Bumping into a wall leaves the agent in place. Entering the goal pays 1
    and ends the episode; otherwise the episode is cut at ``max_steps``.
    """

    n_actions = 4

    def __init__(self, spec: EnvSpec):
        if spec.kind != "maze":
            raise ValueError("MazeEnv needs a maze spec")
        self.spec = spec
        self._static = np.zeros((3, spec.height, spec.width), dtype=bool)
        self._static[1] = spec.walls
        if spec.goal is not None:
            self._static[2][spec.goal] = True
        self.pos: Cell = spec.start
        self.t = 0
        self.done = True

    @property
    def observation_shape(self) -> tuple[int, int, int]:
        return self._static.shape

    @property
    def agent_cell(self) -> Cell:
        return self.pos

    def observation(self) -> np.ndarray:
        obs = self._static.copy()
        obs[0][self.pos] = True
        return obs

    def reset(self, seed: int | None = None) -> StepResult:
        # layouts are fixed; the seed only exists for interface symmetry
        self.pos = self.spec.start
        self.t = 0
        self.done = False
        return StepResult(self.observation(), 0.0, False, {"cell": self.pos, "step": 0})

    def step(self, action: int) -> StepResult:
        if self.done:
            raise EnvUsageError("step() called on a finished episode; call reset()")
        if action not in _MOVES:
            raise ValueError(f"invalid maze action {action!r}")
        dr, dc = _MOVES[int(action)]
        r, c = self.pos[0] + dr, self.pos[1] + dc
        if 0 <= r < self.spec.height and 0 <= c < self.spec.width and not self.spec.walls[r, c]:
            self.pos = (r, c)
        self.t += 1
        reward = 0.0
        reached = self.spec.goal is not None and self.pos == self.spec.goal
        if reached:
            reward = 1.0
        self.done = reached or self.t >= self.spec.max_steps
        info = {"cell": self.pos, "step": self.t, "goal_reached": reached}
        return StepResult(self.observation(), reward, self.done, info)


class DeepSeaEnv:
    """N x N DeepSea with a fixed (non-randomised) left/right action map.

    The agent starts top-left and drops one row per step. Moving right costs
    0.01/N; taking ``right`` from the bottom-right cell pays +1. Episodes last
    exactly N steps. The last move cannot leave the grid, so the terminal
    observation keeps the agent on the bottom row.
    """

    n_actions = 2

    def __init__(self, spec: EnvSpec):
        if spec.kind != "deepsea":
            raise ValueError("DeepSeaEnv needs a deepsea spec")
        self.spec = spec
        self.n = int(spec.deepsea_n)
        self.pos: Cell = (0, 0)
        self.t = 0
        self.done = True

    @property
    def observation_shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def agent_cell(self) -> Cell:
        return self.pos

    def observation(self) -> np.ndarray:
        obs = np.zeros((self.n, self.n), dtype=bool)
        obs[self.pos] = True
        return obs

    def reset(self, seed: int | None = None) -> StepResult:
        self.pos = (0, 0)
        self.t = 0
        self.done = False
        return StepResult(self.observation(), 0.0, False, {"cell": self.pos, "step": 0})

    def step(self, action: int) -> StepResult:
        if self.done:
            raise EnvUsageError("step() called on a finished episode; call reset()")
        if action not in (0, 1):
            raise ValueError(f"invalid deepsea action {action!r}")
        n = self.n
        row, col = self.pos
        reward = 0.0
        if action == 1:
            if col == n - 1 and row == n - 1:
                reward += 1.0
            reward -= 0.01 / n
            col = min(col + 1, n - 1)
        else:
            col = max(col - 1, 0)
        self.t += 1
        self.pos = (min(row + 1, n - 1), col)
        self.done = self.t >= n
        goal = reward > 0.5
        return StepResult(self.observation(), reward, self.done,
                          {"cell": self.pos, "step": self.t, "goal_reached": goal})


def make_env(spec: EnvSpec) -> MazeEnv | DeepSeaEnv:
    if spec.kind == "deepsea":
        return DeepSeaEnv(spec)
    return MazeEnv(spec)


def reachable_cells(spec: EnvSpec, start: Cell | None = None) -> set[Cell]:
    """Cells reachable from ``start`` (default: the maze's start cell)."""
    origin = spec.start if start is None else tuple(start)
    if spec.kind == "deepsea":
        n = spec.deepsea_n
        return {(r, c) for r in range(n) for c in range(n) if c <= r}
    seen = {origin}
    queue = deque([origin])
    while queue:
        r, c = queue.popleft()
        for dr, dc in _MOVES.values():
            nr, nc = r + dr, c + dc
            if (0 <= nr < spec.height and 0 <= nc < spec.width
                    and not spec.walls[nr, nc] and (nr, nc) not in seen):
                seen.add((nr, nc))
                queue.append((nr, nc))
    return seen


def shortest_path_length(spec: EnvSpec, a: Cell, b: Cell) -> int | None:
    """BFS distance between two maze cells, or None when disconnected."""
    dist = {tuple(a): 0}
    queue = deque([tuple(a)])
    while queue:
        cur = queue.popleft()
        if cur == tuple(b):
            return dist[cur]
        r, c = cur
        for dr, dc in _MOVES.values():
            nxt = (r + dr, c + dc)
            if (0 <= nxt[0] < spec.height and 0 <= nxt[1] < spec.width
                    and not spec.walls[nxt] and nxt not in dist):
                dist[nxt] = dist[cur] + 1
                queue.append(nxt)
    return None
