"""Online evaluation with a single insertion threshold active: one pass with
the variance gate, one with the error gate, per benchmark.  Thresholds
follow the published configurations."""

from pathlib import Path

from budgetgp.harness import ExperimentConfig, cmd_online_eval, format_records

OUT = Path(__file__).resolve().parent.parent / "results"

VAR_THRESHOLDS = {
    "rastrigin": 0.5,
    "rosenbrock": 0.5,
    "himmelblau": 0.5,
    "six-hump-camel": 0.01,
    "bouc-wen": 0.001,
    "tanks": 0.003,
    "van-der-pol": 0.00075,
}
ERR_THRESHOLDS = {
    "rastrigin": 2.5,
    "rosenbrock": 25.0,
    "himmelblau": 25.0,
    "six-hump-camel": 0.5,
    "bouc-wen": 5e-5,
    "tanks": 0.05,
    "van-der-pol": 0.005,
}


def main():
    OUT.mkdir(exist_ok=True)
    for gate, thresholds in (("var", VAR_THRESHOLDS), ("err", ERR_THRESHOLDS)):
        for name, threshold in thresholds.items():
            config = ExperimentConfig(
                benchmark=name,
                seeds=(0,),
                budget=100,
                var_threshold=threshold if gate == "var" else None,
                err_threshold=threshold if gate == "err" else None,
                out=str(OUT / f"online_{gate}_{name}.csv"),
            )
            records = cmd_online_eval(config)
            print(f"== {name} ({gate} = {threshold})")
            print(format_records(records), end="")


if __name__ == "__main__":
    main()
