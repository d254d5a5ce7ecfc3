"""Train DQN on a small DeepSea with three reward and observation setups.

A scaled-down version of the deepsea-10 preset that finishes in under a
minute on one CPU core. With left and right fixed on every row, epsilon-greedy
exploration alone finds the treasure at this size, so all three variants
usually solve it.

Run: python3 demos/deepsea_quick.py
"""
from augexplore.harness import config_from_dict, load_preset, run_seed, with_overrides

SMALL = {
    "env.n": 6,
    "run.total_steps": 40_000,
    "run.eval_every": 10_000,
    "run.final_eval_episodes": 100,
    "agent.learning_starts": 2_000,
    "agent.target_update_interval": 1_000,
    "agent.lr": 5e-4,
    "agent.arch": {"kind": "mlp", "hidden": 64},
}


def main():
    base = with_overrides(load_preset("deepsea-10"), SMALL)
    variants = [
        ("bonus + count grid", {}),
        ("bonus only", {"sofe.enabled": False}),
        ("no bonus", {"sofe.enabled": False, "bonus.kind": "none"}),
    ]
    for label, overrides in variants:
        cfg = config_from_dict(with_overrides(base, overrides))
        res = run_seed(cfg, seed=0)
        s = res.summary
        print(f"{label:>20}: greedy return {s['final_eval_return']:.3f}, "
              f"cells ever visited {s['final_global_coverage']:.2f}")


if __name__ == "__main__":
    main()
