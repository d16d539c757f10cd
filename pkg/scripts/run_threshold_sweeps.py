"""Error-threshold sweeps for the oscillator and the thermal-zone benchmark,
with the full-GP baseline row per seed (the zone model's baseline uses a
1000-point subsample of its 17k training rows)."""

from pathlib import Path

from budgetgp.harness import ExperimentConfig, cmd_threshold_sweep

OUT = Path(__file__).resolve().parent.parent / "results"

GRIDS = {
    "van-der-pol": (0.0005, 0.001, 0.0025, 0.005, 0.0075, 0.01, 0.015),
    "building": (0.05, 0.075, 0.1, 0.125, 0.15, 0.2, 0.25),
}


def main():
    OUT.mkdir(exist_ok=True)
    for name, grid in GRIDS.items():
        config = ExperimentConfig(
            benchmark=name,
            seeds=(0,),
            budget=100,
            thresholds_grid=grid,
            out=str(OUT / f"threshold_sweep_{name}.csv"),
        )
        cmd_threshold_sweep(config)
        print(f"{name}: wrote {config.out}")


if __name__ == "__main__":
    main()
