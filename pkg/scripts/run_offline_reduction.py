"""Offline reduction behavior: start each test function from 100 uniformly
sampled points and delete the argmin-scored point down to one, logging the
SMSE per size and criterion.  One results file per function."""

from pathlib import Path

from budgetgp.harness import ExperimentConfig, cmd_reduce_sweep

OUT = Path(__file__).resolve().parent.parent / "results"
FUNCTIONS = ("himmelblau", "rastrigin", "rosenbrock", "six-hump-camel")


def main():
    OUT.mkdir(exist_ok=True)
    for name in FUNCTIONS:
        config = ExperimentConfig(
            benchmark=name,
            seeds=tuple(range(5)),
            initial_train=100,
            eval_size=900,
            reduce_min_size=1,
            out=str(OUT / f"reduction_{name}.csv"),
        )
        cmd_reduce_sweep(config)
        print(f"{name}: wrote {config.out}")


if __name__ == "__main__":
    main()
