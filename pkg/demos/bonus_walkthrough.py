"""Walk a fixed route through a small maze and print every bonus engine's reward.

Run: python3 demos/bonus_walkthrough.py
"""
import numpy as np

from augexplore.bonuses import BonusConfig, e3b_onehot_equivalence_check, make_engine
from augexplore.envs import MazeEnv, maze_from_ascii

LAYOUT = """\
#######
#S....#
#.###.#
#.....#
#######
"""
ROUTE = [1, 1, 1, 3, 3, 3, 2, 2, 1, 1, 0, 0]  # right x3, back, down, right, up


def main():
    spec = maze_from_ascii(LAYOUT, max_steps=50)
    kinds = ["count_sqrt", "count_salesman", "e3b", "smax"]
    engines = {k: make_engine(BonusConfig(kind=k), spec.shape) for k in kinds}
    env = MazeEnv(spec)
    cell = env.reset().info["cell"]
    for eng in engines.values():
        eng.reset()
        eng.observe(cell)
    print(f"{'step':>4} {'cell':>8} " + " ".join(f"{k:>15}" for k in kinds))
    for t, action in enumerate(ROUTE, 1):
        cell = env.step(action).info["cell"]
        row = " ".join(f"{engines[k].transition(cell):15.4f}" for k in kinds)
        print(f"{t:>4} {str(cell):>8} {row}")

    print("\nWith one-hot features and a tiny ridge the elliptical bonus is an inverse count:")
    rep = e3b_onehot_equivalence_check([0, 1, 0, 0, 2, 1, 0], lam=1e-6)
    for b, want in zip(rep.bonuses, rep.expected):
        print(f"  bonus {b:14.6e}   1/(lam + N_pre) {want:14.6e}")
    print(f"  worst relative gap {rep.max_rel_deviation:.2e}")


if __name__ == "__main__":
    np.set_printoptions(precision=4)
    main()
