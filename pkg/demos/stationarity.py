"""Why exposing the bonus statistics makes the reward a function of the state.

A policy walks back and forth in a corridor. Without augmentation the same
(observation, action, next observation) triple pays different count bonuses
at different times. With the count grid appended to the observation every
reward is recomputed exactly from the augmented transition.

Run: python3 demos/stationarity.py
"""
from augexplore.augment import AugmentedEnv, StatEncoding, record_trace, replay_determinism_check
from augexplore.bonuses import BonusConfig, make_engine
from augexplore.envs import make_env, maze_from_ascii

CORRIDOR = "######\n#S...#\n######"
ACTIONS = [1, 1, 3, 3, 1, 1, 3, 3, 1, 1]


def check(encoding: str):
    spec = maze_from_ascii(CORRIDOR, max_steps=len(ACTIONS))
    bonus = BonusConfig(kind="count_sqrt")
    env = AugmentedEnv(make_env(spec), make_engine(bonus, spec.shape), StatEncoding(encoding))
    trace = record_trace(env, ACTIONS)
    return replay_determinism_check(trace, bonus, StatEncoding(encoding), spec.shape)


def main():
    vanilla = check("none")
    print(f"plain observations: {vanilla.witness_groups} transition groups pay more than one reward")
    for key, rewards in vanilla.witnesses[:3]:
        print(f"  transition {key[1:]} -> rewards {[round(r, 4) for r in rewards]}")
    aug = check("counts_grid")
    print(f"with the count grid: {aug.mismatches} mismatches over {aug.n_transitions} transitions, "
          f"deterministic={aug.deterministic}")


if __name__ == "__main__":
    main()
