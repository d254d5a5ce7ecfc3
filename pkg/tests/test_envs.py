"""Maze and DeepSea simulators."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from augexplore.envs import (
    BUNDLED_MAZES,
    DeepSeaEnv,
    EnvSpec,
    EnvUsageError,
    MazeEnv,
    MazeFormatError,
    deepsea_spec,
    load_maze,
    make_env,
    maze_from_ascii,
    reachable_cells,
    shortest_path_length,
)

UP, RIGHT, DOWN, LEFT = range(4)

FIVE = """\
#####
#S..#
#...#
#..G#
#####
"""


def bordered(n):
    rows = ["#" * n] + ["#" + "." * (n - 2) + "#" for _ in range(n - 2)] + ["#" * n]
    mid = n // 2
    rows[mid] = rows[mid][:mid] + "S" + rows[mid][mid + 1:]
    return "\n".join(rows)


class TestMazeFromAscii:
    def test_ring_of_walls(self):
        spec = maze_from_ascii("###\n#S#\n###")
        assert spec.shape == (3, 3)
        assert spec.walls.sum() == 8
        assert spec.start == (1, 1)
        assert spec.goal is None

    def test_five_by_five_layout(self):
        spec = maze_from_ascii(FIVE)
        assert spec.goal == (3, 3)
        assert spec.walls[0].all() and spec.walls[-1].all()
        assert spec.walls[:, 0].all() and spec.walls[:, -1].all()
        assert not spec.walls[1:-1, 1:-1].any()

    def test_two_starts_rejected(self):
        with pytest.raises(MazeFormatError):
            maze_from_ascii("####\n#SS#\n####")

    def test_missing_start_rejected(self):
        with pytest.raises(MazeFormatError):
            maze_from_ascii("###\n#.#\n###")

    def test_ragged_rows_rejected(self):
        with pytest.raises(MazeFormatError):
            maze_from_ascii("####\n#S#\n####")

    def test_two_goals_rejected(self):
        with pytest.raises(MazeFormatError):
            maze_from_ascii("#####\n#SGG#\n#####")

    def test_unknown_character_rejected(self):
        with pytest.raises(MazeFormatError):
            maze_from_ascii("###\n#SX\n###")

    def test_ascii_round_trip(self):
        spec = maze_from_ascii(FIVE, max_steps=7)
        again = maze_from_ascii(spec.to_ascii(), max_steps=7)
        np.testing.assert_array_equal(spec.walls, again.walls)
        assert (spec.start, spec.goal) == (again.start, again.goal)

    def test_dict_round_trip(self):
        spec = maze_from_ascii(FIVE, max_steps=7)
        again = EnvSpec.from_dict(spec.to_dict())
        np.testing.assert_array_equal(spec.walls, again.walls)
        assert again.max_steps == 7

    def test_deepsea_dict_round_trip(self):
        again = EnvSpec.from_dict(deepsea_spec(6).to_dict())
        assert again.kind == "deepsea" and again.deepsea_n == 6 and again.shape == (6, 6)


class TestMazeEnv:
    def test_reset_places_avatar_at_start(self):
        env = MazeEnv(maze_from_ascii(FIVE))
        res = env.reset(seed=0)
        avatar = res.observation[0]
        assert avatar.sum() == 1 and avatar[1, 1]
        assert res.info["step"] == 0 and not res.done and res.extrinsic_reward == 0.0

    def test_reset_is_repeatable(self):
        env = MazeEnv(maze_from_ascii(FIVE))
        a = env.reset(seed=3).observation
        env.step(RIGHT)
        b = env.reset(seed=3).observation
        np.testing.assert_array_equal(a, b)

    def test_observation_matches_listing(self):
        """Three channels of 5x5: avatar, walls, goal."""
        env = MazeEnv(maze_from_ascii(FIVE))
        obs = env.reset().observation
        assert obs.shape == (3, 5, 5)
        expected_walls = np.ones((5, 5), dtype=bool)
        expected_walls[1:4, 1:4] = False
        np.testing.assert_array_equal(obs[1], expected_walls)
        goal = np.zeros((5, 5), dtype=bool)
        goal[3, 3] = True
        np.testing.assert_array_equal(obs[2], goal)

    def test_wall_blocks_movement(self):
        env = MazeEnv(maze_from_ascii(FIVE))
        env.reset()
        res = env.step(UP)
        assert res.info["cell"] == (1, 1)
        assert res.extrinsic_reward == 0.0

    def test_entering_goal_pays_and_ends(self):
        env = MazeEnv(maze_from_ascii(FIVE))
        env.reset()
        for a in (RIGHT, RIGHT, DOWN):
            res = env.step(a)
            assert not res.done
        res = env.step(DOWN)
        assert res.extrinsic_reward == 1.0 and res.done and res.info["goal_reached"]

    def test_timeout_without_goal(self):
        env = MazeEnv(maze_from_ascii(FIVE, max_steps=4))
        env.reset()
        total, done = 0.0, False
        while not done:
            res = env.step(UP)
            total += res.extrinsic_reward
            done = res.done
        assert res.info["step"] == 4 and total == 0.0

    def test_step_after_done_raises(self):
        env = MazeEnv(maze_from_ascii(FIVE, max_steps=1))
        env.reset()
        env.step(LEFT)
        with pytest.raises(EnvUsageError):
            env.step(LEFT)

    def test_invalid_action(self):
        env = MazeEnv(maze_from_ascii(FIVE))
        env.reset()
        with pytest.raises(ValueError):
            env.step(7)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(0, 3), min_size=1, max_size=60))
    def test_deterministic_and_shape_stable(self, actions):
        spec = load_maze("open9")
        a, b = MazeEnv(spec), MazeEnv(spec)
        a.reset(), b.reset()
        for act in actions:
            if a.done:
                break
            ra, rb = a.step(act), b.step(act)
            np.testing.assert_array_equal(ra.observation, rb.observation)
            assert ra.observation.shape == (3, 9, 9)
            assert ra.observation[0].sum() == 1
            if ra.done:
                assert ra.info["step"] == spec.max_steps or ra.info["goal_reached"]


class TestDeepSea:
    def run(self, n, policy):
        env = DeepSeaEnv(deepsea_spec(n))
        res = env.reset()
        total, steps = 0.0, 0
        while not res.done:
            res = env.step(policy(steps))
            total += res.extrinsic_reward
            steps += 1
        return total, steps

    def test_always_left_returns_zero(self):
        assert self.run(10, lambda t: 0) == (0.0, 10)

    def test_always_right_returns_point_nine_nine(self):
        total, steps = self.run(10, lambda t: 1)
        assert steps == 10
        assert total == pytest.approx(1 - 10 * 0.01 / 10, abs=1e-12)

    def test_single_right_move_costs(self):
        env = DeepSeaEnv(deepsea_spec(10))
        env.reset()
        assert env.step(1).extrinsic_reward == pytest.approx(-0.001)

    def test_row_tracks_time(self):
        env = DeepSeaEnv(deepsea_spec(6))
        obs = env.reset().observation
        assert obs.sum() == 1 and obs[0, 0]
        for t in range(1, 6):
            res = env.step(t % 2)
            assert res.observation.sum() == 1
            assert res.info["cell"][0] == min(t, 5)

    def test_step_after_done_raises(self):
        env = DeepSeaEnv(deepsea_spec(3))
        env.reset()
        for _ in range(3):
            env.step(0)
        with pytest.raises(EnvUsageError):
            env.step(0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 12), st.lists(st.integers(0, 1), min_size=12, max_size=12))
    def test_episode_length_is_n(self, n, actions):
        total, steps = self.run(n, lambda t: actions[t])
        assert steps == n
        assert total <= 1.0


class TestReachability:
    def test_bordered_five(self):
        assert len(reachable_cells(maze_from_ascii(bordered(5)))) == 9

    def test_disconnected_pocket_excluded(self):
        spec = maze_from_ascii("#######\n#S.#..#\n#######")
        assert reachable_cells(spec) == {(1, 1), (1, 2)}

    def test_enclosed_start(self):
        spec = maze_from_ascii("#####\n#S#.#\n#####")
        assert reachable_cells(spec) == {(1, 1)}

    def test_fixed_point(self):
        spec = load_maze("maze15")
        cells = reachable_cells(spec)
        for cell in list(cells)[::10]:
            assert reachable_cells(spec, start=cell) == cells

    def test_shortest_path(self):
        spec = maze_from_ascii(FIVE)
        assert shortest_path_length(spec, spec.start, spec.goal) == 4

    def test_deepsea_triangle(self):
        cells = reachable_cells(deepsea_spec(4))
        assert cells == {(r, c) for r in range(4) for c in range(r + 1)}


class TestBundledMazes:
    @pytest.mark.parametrize("name", sorted(BUNDLED_MAZES))
    def test_loads_and_is_connected(self, name):
        spec = load_maze(name)
        assert spec.kind == "maze"
        cells = reachable_cells(spec)
        assert spec.start in cells
        if spec.goal is not None:
            assert spec.goal in cells

    def test_large_mazes_are_32(self):
        for name in ("maze1", "maze2", "maze3"):
            assert load_maze(name).shape == (32, 32)

    def test_sparse_goal_is_far(self):
        spec = load_maze("sparse15")
        assert spec.shape == (15, 15)
        assert shortest_path_length(spec, spec.start, spec.goal) >= 30

    def test_deepsea_name(self):
        spec = load_maze("deepsea-7")
        assert spec.kind == "deepsea" and spec.deepsea_n == 7

    def test_max_steps_override(self):
        assert load_maze("maze15", max_steps=42).max_steps == 42

    def test_make_env_dispatch(self):
        assert isinstance(make_env(load_maze("open9")), MazeEnv)
        assert isinstance(make_env(deepsea_spec(5)), DeepSeaEnv)
