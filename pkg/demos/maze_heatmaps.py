"""Train A2C on the 15x15 maze with and without the count grid and write heatmaps.

Writes runs/demo-heatmaps/<variant>/seed0/heatmap_train.pgm (viewable in most
image viewers) and prints the coverage reached late in training.

Run: python3 demos/maze_heatmaps.py [total_steps]
"""
import sys

from augexplore.harness import config_from_dict, load_preset, run_experiment, with_overrides


def main(total_steps: int):
    base = with_overrides(load_preset("maze-free-exploration"),
                          {"run.total_steps": total_steps, "run.seeds": [0]})
    for variant, overrides in [("sofe", {}), ("vanilla", {"sofe.enabled": False})]:
        out = f"runs/demo-heatmaps/{variant}"
        res = run_experiment(config_from_dict(with_overrides(base, overrides)), out)
        s = res.summaries()[0]
        print(f"{variant:>8}: late-training episodic coverage {s['tail_episode_coverage']:.3f}, "
              f"heatmap {out}/seed0/heatmap_train.pgm")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 50_000)
