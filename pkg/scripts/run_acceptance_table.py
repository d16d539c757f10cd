"""Acceptance behavior: stream each benchmark's training remainder through
the budget-100 online loop with the insertion gate disabled, with and
without the acceptance criterion; reports final SMSE and the accepted
fraction per criterion.  Spatial selection maps are emitted for the 2-D
functions."""

from pathlib import Path

from budgetgp.harness import ExperimentConfig, cmd_accept_eval, format_records

OUT = Path(__file__).resolve().parent.parent / "results"
BENCHMARKS = (
    "rastrigin",
    "rosenbrock",
    "himmelblau",
    "six-hump-camel",
    "bouc-wen",
    "tanks",
    "van-der-pol",
)


def main():
    OUT.mkdir(exist_ok=True)
    for name in BENCHMARKS:
        config = ExperimentConfig(
            benchmark=name,
            seeds=(0,),
            budget=100,
            maps=True,
            out=str(OUT / f"acceptance_{name}.csv"),
        )
        records = cmd_accept_eval(config)
        print(f"== {name}")
        print(format_records(records), end="")


if __name__ == "__main__":
    main()
