"""Experiment harness: benchmark resolution, hyperparameter training and the
implementations behind the CLI subcommands.

Every command takes an :class:`ExperimentConfig`, returns the result records
it produced and, when an output path is configured, writes them (plus a
metadata sidecar embedding the full configuration) through
:mod:`budgetgp.dataio`.  Commands are deterministic given the config and
seeds; nothing in the output depends on wall-clock time except the measured
medians of ``bench``.
"""

from __future__ import annotations

import dataclasses
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .criteria import CriterionKind, PartitionView, reduction_score
from .dataio import (
    ResultRecord,
    TabularDataset,
    load_csv_dataset,
    normalize_apply,
    normalize_fit,
    sha256_of_file,
    smse,
    write_results,
)
from .gp import (
    Dataset,
    Hyperparameters,
    NumericalError,
    fit_cache,
    log_marginal_likelihood,
    optimize_hyperparameters,
    predict,
)
from .online import OnlineGp, run_stream
from .systems import (
    BENCHMARK_BOUNDS,
    LAG_PRESETS,
    PARAMS_VERSION,
    SYSTEM_DEFAULTS,
    bouc_wen_dataset,
    building_dataset,
    eval_benchmark_function,
    sample_uniform,
    tanks_dataset,
    van_der_pol_dataset,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "resolve_benchmark",
    "train_hyperparameters",
    "save_hyper_file",
    "load_hyper_file",
    "cmd_generate",
    "cmd_train",
    "cmd_reduce_sweep",
    "cmd_accept_eval",
    "cmd_online_eval",
    "cmd_threshold_sweep",
    "cmd_bench",
    "COMPLEXITY_MODEL",
    "DEFAULT_STREAM_SIZES",
]


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the fields."""


FUNCTION_BENCHMARKS = tuple(sorted(BENCHMARK_BOUNDS))
SYSTEM_BENCHMARKS = ("bouc-wen", "tanks", "van-der-pol", "building")

# Streamed-point counts per benchmark (dataset size minus the initial
# training sample); used when the config does not override stream_size.
DEFAULT_STREAM_SIZES = {
    "himmelblau": 500,
    "rastrigin": 500,
    "rosenbrock": 500,
    "six-hump-camel": 500,
    "van-der-pol": 900,
    "bouc-wen": 897,
    "tanks": 922,
    "building": 17418,
}

# Operation-count models of one partition evaluation per criterion,
# reported alongside the measured timings.
COMPLEXITY_MODEL = {
    "prior-entropy": "N^3/6 + N^2 + N",
    "predictive-entropy": "N^3/6 + 3/2 N^2 + 2 N",
    "mean-relevance": "N^3/6 + 2 N^2 + 3 N",
    "lpd": "N^3/6 + 5/2 N^2 + 3 N",
    "mll": "N^3/6 + 2 N^2 + 2 N",
}

_EVAL_SEED_OFFSET = 90001
_DEFAULT_CRITERIA = ("prior-entropy", "mean-relevance", "mll")


@dataclass
class ExperimentConfig:
    benchmark: str = ""
    criteria: tuple = _DEFAULT_CRITERIA
    budget: int = 100
    var_threshold: float | None = None
    err_threshold: float | None = None
    use_acceptance: bool = False
    seeds: tuple = (0,)
    initial_train: int = 100
    stream_size: int | None = None
    eval_size: int = 500
    data_file: str | None = None
    target_column: str | None = None
    hyper_file: str | None = None
    train_restarts: int = 3
    train_max_iters: int = 200
    train_tol: float = 1e-5
    thresholds_grid: tuple | None = None
    reduce_min_size: int = 1
    baseline_max: int = 1000
    bench_repeats: int = 1000
    bench_sizes: tuple = (20, 100)
    mr_reference: str = "model"
    maps: bool = False
    verify: bool = False
    out: str | None = None

    def __post_init__(self):
        self.criteria = tuple(self.criteria)
        self.seeds = tuple(int(s) for s in self.seeds)
        if self.thresholds_grid is not None:
            self.thresholds_grid = tuple(float(t) for t in self.thresholds_grid)

    def criterion_kinds(self) -> list:
        try:
            return [CriterionKind(c) for c in self.criteria]
        except ValueError as exc:
            raise ConfigError(f"criteria: {exc}") from None

    def validate(self) -> None:
        problems = []
        known = FUNCTION_BENCHMARKS + SYSTEM_BENCHMARKS + ("csv",)
        if self.benchmark not in known:
            problems.append(f"benchmark: unknown {self.benchmark!r} (choose from {known})")
        if self.benchmark == "csv" and not (self.data_file and self.target_column):
            problems.append("data_file/target_column: required for the csv benchmark")
        if not self.criteria:
            problems.append("criteria: need at least one")
        if not self.seeds:
            problems.append("seeds: need at least one")
        if self.budget < 1:
            problems.append("budget: must be >= 1")
        if self.initial_train < 2:
            problems.append("initial_train: must be >= 2")
        if self.var_threshold is not None and self.var_threshold < 0:
            problems.append("var_threshold: must be >= 0")
        if self.err_threshold is not None and self.err_threshold < 0:
            problems.append("err_threshold: must be >= 0")
        if self.mr_reference not in ("model", "target"):
            problems.append("mr_reference: must be 'model' or 'target'")
        if problems:
            raise ConfigError("; ".join(problems))
        self.criterion_kinds()

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            payload = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config file {path}: {exc}") from None
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(payload) - names
        if unknown:
            raise ConfigError(f"config file {path}: unknown keys {sorted(unknown)}")
        return cls(**payload)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out


@dataclass
class BenchmarkData:
    """One seed's worth of benchmark data: the initial training sample, the
    ordered stream of incoming points and a held-out evaluation set."""

    initial: Dataset
    stream: list
    eval_set: Dataset
    feature_names: tuple = ()
    target_name: str = "y"

    @property
    def full_train(self) -> Dataset:
        X = np.vstack([self.initial.inputs] + [x[None, :] for x, _ in self.stream]) \
            if self.stream else self.initial.inputs
        y = np.concatenate([self.initial.targets, [t for _, t in self.stream]]) \
            if self.stream else self.initial.targets
        return Dataset(X, y)


def _as_stream(d: Dataset) -> list:
    return [(d.inputs[i], float(d.targets[i])) for i in range(d.n)]


def _lag_feature_names(benchmark: str) -> tuple:
    lags = LAG_PRESETS[benchmark]
    names = [f"y_lag{j}" for j in range(1, lags.n_y + 1)]
    for u_index, n_u in enumerate(lags.n_u, start=1):
        names += [f"u{u_index}_lag{j}" for j in range(1, n_u + 1)]
    return tuple(names)


def _system_train_val(benchmark: str, seed: int):
    if benchmark == "van-der-pol":
        return van_der_pol_dataset(seed), van_der_pol_dataset(seed + _EVAL_SEED_OFFSET)
    if benchmark == "bouc-wen":
        return bouc_wen_dataset(seed), bouc_wen_dataset(seed + _EVAL_SEED_OFFSET)
    if benchmark == "tanks":
        return tanks_dataset(seed), tanks_dataset(seed + _EVAL_SEED_OFFSET)
    if benchmark == "building":
        return building_dataset(seed)
    raise ConfigError(f"benchmark: unknown system {benchmark!r}")


def _normalized_split(train: Dataset, val: Dataset, names, config) -> BenchmarkData:
    """First-rows training split with z-scoring fitted on the initial slice
    only, so no statistics leak in from streamed or validation data."""
    initial_rows = min(config.initial_train, train.n)
    head = TabularDataset(names, train.inputs[:initial_rows], "y",
                          train.targets[:initial_rows], {"path": "initial"})
    stats = normalize_fit(head)

    def apply(d: Dataset) -> Dataset:
        t = TabularDataset(names, d.inputs, "y", d.targets)
        return normalize_apply(stats, t).to_dataset()

    train_n, val_n = apply(train), apply(val)
    initial = train_n.subset(np.arange(initial_rows))
    rest = train_n.subset(np.arange(initial_rows, train_n.n))
    if config.stream_size is not None:
        rest = rest.subset(np.arange(min(config.stream_size, rest.n)))
    return BenchmarkData(initial, _as_stream(rest), val_n, names)


def resolve_benchmark(config: ExperimentConfig, seed: int) -> BenchmarkData:
    """Materialize one seed of the configured benchmark."""
    b = config.benchmark
    if b in BENCHMARK_BOUNDS:
        stream_size = (
            config.stream_size if config.stream_size is not None
            else DEFAULT_STREAM_SIZES[b]
        )
        data = sample_uniform(b, config.initial_train + stream_size, seed)
        initial = data.subset(np.arange(config.initial_train))
        rest = data.subset(np.arange(config.initial_train, data.n))
        eval_set = sample_uniform(b, config.eval_size, seed + _EVAL_SEED_OFFSET)
        return BenchmarkData(initial, _as_stream(rest), eval_set, ("x1", "x2"))

    if b in SYSTEM_BENCHMARKS:
        train, val = _system_train_val(b, seed)
        names = _lag_feature_names(b)
        if b == "building":
            return _normalized_split(train, val, names, config)
        initial = train.subset(np.arange(config.initial_train))
        rest = train.subset(np.arange(config.initial_train, train.n))
        if config.stream_size is not None:
            rest = rest.subset(np.arange(min(config.stream_size, rest.n)))
        return BenchmarkData(initial, _as_stream(rest), val, names)

    if b == "csv":
        table = load_csv_dataset(config.data_file, config.target_column)
        n = table.n
        eval_n = min(config.eval_size, max(2, n // 10))
        train = Dataset(table.rows[: n - eval_n], table.targets[: n - eval_n])
        val = Dataset(table.rows[n - eval_n:], table.targets[n - eval_n:])
        return _normalized_split(train, val, table.feature_names, config)

    raise ConfigError(f"benchmark: unknown {b!r}")


# --- hyperparameter training ----------------------------------------------------


def train_hyperparameters(train: Dataset, seed: int, config: ExperimentConfig) -> Hyperparameters:
    """Maximize the evidence on the initial sample from a data-driven start,
    with log-space bounds keeping the noise floor away from degeneracy."""
    vy = max(float(np.var(train.targets)), 1e-8)
    span = np.maximum(train.inputs.max(axis=0) - train.inputs.min(axis=0), 1e-6)
    init = Hyperparameters(
        signal_variance=vy,
        lengthscales=np.maximum(train.inputs.std(axis=0), 1e-3),
        noise_variance=0.01 * vy,
    )
    bounds = (
        [(np.log(1e-3 * vy), np.log(1e3 * vy))]
        + [(np.log(1e-2 * s), np.log(1e2 * s)) for s in span]
        + [(np.log(1e-6 * vy), np.log(vy))]
    )
    return optimize_hyperparameters(
        train,
        init,
        max_iters=config.train_max_iters,
        tol=config.train_tol,
        bounds=bounds,
        restarts=config.train_restarts,
        rng=np.random.default_rng(seed + 77),
    )


def save_hyper_file(path, benchmark: str, per_seed: dict) -> None:
    payload = {
        "format_version": 1,
        "benchmark": benchmark,
        "per_seed": {
            str(seed): {
                "signal_variance": h.signal_variance,
                "lengthscales": h.lengthscales.tolist(),
                "noise_variance": h.noise_variance,
            }
            for seed, h in per_seed.items()
        },
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_hyper_file(path) -> dict:
    payload = json.loads(Path(path).read_text())
    if payload.get("format_version") != 1:
        raise ConfigError(f"hyper file {path}: unsupported format version")
    return {
        int(seed): Hyperparameters(
            signal_variance=entry["signal_variance"],
            lengthscales=np.asarray(entry["lengthscales"]),
            noise_variance=entry["noise_variance"],
        )
        for seed, entry in payload["per_seed"].items()
    }


def _hyper_for(config: ExperimentConfig, seed: int, data: BenchmarkData) -> Hyperparameters:
    if config.hyper_file:
        per_seed = load_hyper_file(config.hyper_file)
        if seed not in per_seed:
            raise ConfigError(f"hyper_file: no entry for seed {seed}")
        return per_seed[seed]
    return train_hyperparameters(data.initial, seed, config)


# --- output helpers --------------------------------------------------------------


def _write_dataset_csv(path, dataset: Dataset, feature_names, target_name="y") -> None:
    lines = [",".join(list(feature_names) + [target_name])]
    for i in range(dataset.n):
        cells = [repr(float(v)) for v in dataset.inputs[i]]
        cells.append(repr(float(dataset.targets[i])))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def _write_metadata(out_path, config: ExperimentConfig, extra: dict) -> None:
    meta = {"config": config.to_dict()}
    meta.update(extra)
    Path(out_path).with_suffix(".meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def _finish(records, config: ExperimentConfig, command: str) -> list:
    if config.out:
        out = Path(config.out)
        write_results(records, out)
        _write_metadata(out, config, {"command": command,
                                      "results_sha256": sha256_of_file(out)})
    return records


# --- commands ---------------------------------------------------------------------


def cmd_generate(config: ExperimentConfig) -> list:
    """Materialize the benchmark to CSV: a training file, a validation file
    and a metadata sidecar; system benchmarks also get a versioned
    parameter file whose checksum lands in the metadata."""
    config.validate()
    if not config.out:
        raise ConfigError("out: generate needs an output path")
    out = Path(config.out)
    records = []
    for seed in config.seeds:
        data = resolve_benchmark(config, seed)
        train = data.full_train
        stem = out.with_suffix("") if len(config.seeds) == 1 else Path(
            f"{out.with_suffix('')}_seed{seed}"
        )
        train_path = stem.with_suffix(".csv")
        val_path = Path(f"{stem}_val.csv")
        _write_dataset_csv(train_path, train, data.feature_names, data.target_name)
        _write_dataset_csv(val_path, data.eval_set, data.feature_names, data.target_name)
        extra = {
            "command": "generate",
            "seed": seed,
            "rows_train": train.n,
            "rows_val": data.eval_set.n,
            "train_sha256": sha256_of_file(train_path),
            "val_sha256": sha256_of_file(val_path),
        }
        if config.benchmark in SYSTEM_BENCHMARKS:
            params_path = Path(f"{stem}.params.json")
            params_path.write_text(
                json.dumps(
                    {
                        "params_version": PARAMS_VERSION,
                        "system": config.benchmark,
                        "params": SYSTEM_DEFAULTS[config.benchmark],
                    },
                    indent=2,
                )
                + "\n"
            )
            extra["params_sha256"] = sha256_of_file(params_path)
        _write_metadata(train_path, config, extra)
        records.append(
            ResultRecord(
                benchmark=config.benchmark, command="generate", criterion="",
                seed=seed, budget=config.budget, size=train.n,
            )
        )
    return records


def cmd_train(config: ExperimentConfig) -> list:
    """Fit hyperparameters per seed on the initial training sample and
    persist them for downstream commands."""
    config.validate()
    if not config.out:
        raise ConfigError("out: train needs an output path for the hyper file")
    per_seed = {}
    records = []
    for seed in config.seeds:
        data = resolve_benchmark(config, seed)
        hyper = train_hyperparameters(data.initial, seed, config)
        per_seed[seed] = hyper
        records.append(
            ResultRecord(
                benchmark=config.benchmark, command="train", criterion="",
                seed=seed, budget=config.budget, size=data.initial.n,
                smse=_initial_smse(data, hyper),
                note=f"lml={log_marginal_likelihood(data.initial, hyper)!r}",
            )
        )
    save_hyper_file(config.out, config.benchmark, per_seed)
    _write_metadata(Path(config.out), config,
                    {"command": "train", "hyper_sha256": sha256_of_file(config.out)})
    return records


def _initial_smse(data: BenchmarkData, hyper: Hyperparameters) -> float:
    cache = fit_cache(data.initial, hyper)
    mu, _ = predict(cache, data.initial, hyper, data.eval_set.inputs)
    return smse(mu, data.eval_set.targets)


def _verify_removal(dataset: Dataset, hyper, kind, chosen: int, mr_reference: str) -> None:
    """Shadow oracle for small sets: recompute every deletion score without
    any cache reuse and insist on the same argmin."""
    scores = [
        reduction_score(kind, PartitionView(dataset, i, None), hyper,
                        mean_reference=mr_reference)
        for i in range(dataset.n)
    ]
    expected = int(np.argmin(scores))
    if expected != chosen:
        raise NumericalError(
            f"reduce-sweep verification failed at size {dataset.n}: "
            f"removed {chosen}, oracle says {expected}"
        )


def cmd_reduce_sweep(config: ExperimentConfig) -> list:
    """Offline reduction: repeatedly delete the argmin-scored point down to
    ``reduce_min_size``, logging the SMSE at every size for each criterion."""
    config.validate()
    records = []
    for seed in config.seeds:
        data = resolve_benchmark(config, seed)
        hyper = _hyper_for(config, seed, data)
        for kind in config.criterion_kinds():
            current = data.initial
            while True:
                cache = fit_cache(current, hyper)
                mu, _ = predict(cache, current, hyper, data.eval_set.inputs)
                records.append(
                    ResultRecord(
                        benchmark=config.benchmark, command="reduce-sweep",
                        criterion=kind.value, seed=seed, budget=config.budget,
                        size=current.n, smse=smse(mu, data.eval_set.targets),
                    )
                )
                if current.n <= max(config.reduce_min_size, 1):
                    break
                scores = [
                    reduction_score(kind, PartitionView(current, i, None), hyper,
                                    base_cache=cache, mean_reference=config.mr_reference)
                    for i in range(current.n)
                ]
                r = int(np.argmin(scores))
                if config.verify and current.n <= 12:
                    _verify_removal(current, hyper, kind, r, config.mr_reference)
                current = current.with_row_removed(r)
    return _finish(records, config, "reduce-sweep")


def _online_model(data: BenchmarkData, hyper, kind, config, accept: bool,
                  var_threshold=None, err_threshold=None) -> OnlineGp:
    initial = data.initial
    if initial.n > config.budget:
        initial = initial.subset(np.arange(config.budget))
    return OnlineGp(
        dataset=initial, hyper=hyper, budget=config.budget, criterion=kind,
        var_threshold=var_threshold, err_threshold=err_threshold,
        use_acceptance=accept,
    )


def _selection_maps(config, data, model, kind, accept_tag):
    """Prediction-error and standard-deviation grids plus the selected
    dataset coordinates, written as plot-ready CSVs."""
    bound = BENCHMARK_BOUNDS[config.benchmark]
    axis = np.linspace(-bound, bound, 60)
    xx, yy = np.meshgrid(axis, axis)
    grid = np.column_stack([xx.ravel(), yy.ravel()])
    truth = eval_benchmark_function(config.benchmark, grid[:, 0], grid[:, 1])
    mu, var = predict(model.cache, model.dataset, model.hyper, grid)
    stem = Path(config.out).with_suffix("")
    map_path = Path(f"{stem}_map_{kind.value}{accept_tag}.csv")
    lines = ["x1,x2,abs_error,std"]
    for row, err, sd in zip(grid, np.abs(truth - mu), np.sqrt(var)):
        lines.append(",".join(repr(float(v)) for v in (row[0], row[1], err, sd)))
    map_path.write_text("\n".join(lines) + "\n")
    points_path = Path(f"{stem}_points_{kind.value}{accept_tag}.csv")
    lines = ["x1,x2,y"]
    for i in range(model.dataset.n):
        x = model.dataset.inputs[i]
        lines.append(
            ",".join(repr(float(v)) for v in (x[0], x[1], model.dataset.targets[i]))
        )
    points_path.write_text("\n".join(lines) + "\n")


def cmd_accept_eval(config: ExperimentConfig) -> list:
    """Stream the training remainder with the insertion gate disabled, with
    and without the acceptance criterion; report final SMSE and the
    fraction of points accepted into the model."""
    config.validate()
    records = []
    for seed in config.seeds:
        data = resolve_benchmark(config, seed)
        hyper = _hyper_for(config, seed, data)
        records.append(
            ResultRecord(
                benchmark=config.benchmark, command="accept-eval", criterion="initial",
                seed=seed, budget=config.budget, size=data.initial.n,
                smse=_initial_smse(data, hyper),
            )
        )
        for kind in config.criterion_kinds():
            for accept in (False, True):
                model = _online_model(data, hyper, kind, config, accept)
                model, outcomes, summary = run_stream(model, data.stream, data.eval_set)
                records.append(
                    ResultRecord(
                        benchmark=config.benchmark, command="accept-eval",
                        criterion=kind.value, seed=seed, budget=config.budget,
                        use_acceptance=accept, size=model.dataset.n,
                        smse=summary.final_smse, mean_variance=summary.mean_variance,
                        revised=summary.revised,
                        accepted_fraction=summary.revised / max(summary.steps, 1),
                    )
                )
                if config.maps and config.out and config.benchmark in BENCHMARK_BOUNDS:
                    _selection_maps(config, data, model, kind,
                                    "_accept" if accept else "_normal")
    return _finish(records, config, "accept-eval")


def cmd_online_eval(config: ExperimentConfig) -> list:
    """Online loop with exactly one insertion threshold active; reports
    SMSE, mean predictive variance and revised-point counts with and
    without acceptance."""
    config.validate()
    if (config.var_threshold is None) == (config.err_threshold is None):
        raise ConfigError(
            "var_threshold/err_threshold: online-eval needs exactly one of them"
        )
    records = []
    for seed in config.seeds:
        data = resolve_benchmark(config, seed)
        hyper = _hyper_for(config, seed, data)
        for kind in config.criterion_kinds():
            for accept in (False, True):
                model = _online_model(
                    data, hyper, kind, config, accept,
                    var_threshold=config.var_threshold,
                    err_threshold=config.err_threshold,
                )
                model, _, summary = run_stream(model, data.stream, data.eval_set)
                records.append(
                    ResultRecord(
                        benchmark=config.benchmark, command="online-eval",
                        criterion=kind.value, seed=seed, budget=config.budget,
                        var_threshold=config.var_threshold,
                        err_threshold=config.err_threshold,
                        use_acceptance=accept, size=model.dataset.n,
                        smse=summary.final_smse, mean_variance=summary.mean_variance,
                        revised=summary.revised,
                    )
                )
    return _finish(records, config, "online-eval")


def _baseline_record(config, data, hyper, seed) -> ResultRecord:
    """Full GP on the complete training data (subsampled to ``baseline_max``
    rows when larger), evaluated like the online runs."""
    full = data.full_train
    if full.n > config.baseline_max:
        idx = np.sort(
            np.random.default_rng(seed + 555).choice(
                full.n, size=config.baseline_max, replace=False
            )
        )
        full = full.subset(idx)
    cache = fit_cache(full, hyper)
    mu, var = predict(cache, full, hyper, data.eval_set.inputs)
    return ResultRecord(
        benchmark=config.benchmark, command="threshold-sweep", criterion="baseline",
        seed=seed, budget=config.budget, size=full.n,
        smse=smse(mu, data.eval_set.targets), mean_variance=float(np.mean(var)),
    )


def cmd_threshold_sweep(config: ExperimentConfig) -> list:
    """Sweep the error threshold over a grid, logging SMSE, mean predictive
    variance and revised counts per (threshold, criterion, acceptance,
    seed); one full-GP baseline row accompanies each seed."""
    config.validate()
    grid = config.thresholds_grid or (0.0005, 0.001, 0.0025, 0.005, 0.0075, 0.01, 0.015)
    records = []
    for seed in config.seeds:
        data = resolve_benchmark(config, seed)
        hyper = _hyper_for(config, seed, data)
        records.append(_baseline_record(config, data, hyper, seed))
        for threshold in grid:
            for kind in config.criterion_kinds():
                for accept in (False, True):
                    model = _online_model(
                        data, hyper, kind, config, accept, err_threshold=threshold
                    )
                    model, _, summary = run_stream(model, data.stream, data.eval_set)
                    records.append(
                        ResultRecord(
                            benchmark=config.benchmark, command="threshold-sweep",
                            criterion=kind.value, seed=seed, budget=config.budget,
                            err_threshold=threshold, use_acceptance=accept,
                            size=model.dataset.n, smse=summary.final_smse,
                            mean_variance=summary.mean_variance,
                            revised=summary.revised,
                        )
                    )
    return _finish(records, config, "threshold-sweep")


def cmd_bench(config: ExperimentConfig) -> list:
    """Median wall-clock time of one partition evaluation per criterion at
    each benchmark size, reported next to the operation-count model (the
    ordering is reported, never asserted)."""
    rng = np.random.default_rng(config.seeds[0] if config.seeds else 0)
    records = []
    kinds = list(CriterionKind)  # the cost comparison always covers all five
    for n in config.bench_sizes:
        X = rng.uniform(-2.0, 2.0, size=(n, 2))
        y = np.sin(X @ np.array([1.0, -0.7])) + 0.1 * rng.normal(size=n)
        dataset = Dataset(X, y)
        hyper = Hyperparameters(1.0, np.array([1.0, 1.0]), 0.05)
        cache = fit_cache(dataset, hyper)
        candidate = (rng.uniform(-2, 2, size=2), float(rng.normal()))
        partition = PartitionView(dataset, n // 2, candidate)
        for kind in kinds:
            reduction_score(kind, partition, hyper, base_cache=cache)  # warm up
            samples = np.empty(config.bench_repeats)
            for rep in range(config.bench_repeats):
                start = time.perf_counter()
                reduction_score(kind, partition, hyper, base_cache=cache)
                samples[rep] = time.perf_counter() - start
            records.append(
                ResultRecord(
                    benchmark="random", command="bench", criterion=kind.value,
                    seed=int(config.seeds[0] if config.seeds else 0),
                    budget=config.budget, size=n,
                    median_ms=float(np.median(samples) * 1e3),
                    repeats=config.bench_repeats,
                    note=f"ops: {COMPLEXITY_MODEL[kind.value]}",
                )
            )
    return _finish(records, config, "bench")


def format_records(records) -> str:
    """Console table: one aligned line per record, blank columns dropped."""
    if not records:
        return "(no records)"
    columns = [
        "benchmark", "command", "criterion", "seed", "size", "err_threshold",
        "var_threshold", "use_acceptance", "smse", "mean_variance", "revised",
        "accepted_fraction", "median_ms", "note",
    ]
    live = [
        c for c in columns
        if any(getattr(r, c) not in (None, "", False) for r in records)
    ]
    buffer = io.StringIO()
    rows = [[_fmt(getattr(r, c)) for c in live] for r in records]
    widths = [max(len(h), *(len(row[j]) for row in rows)) for j, h in enumerate(live)]
    buffer.write("  ".join(h.ljust(w) for h, w in zip(live, widths)).rstrip() + "\n")
    for row in rows:
        buffer.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")
    return buffer.getvalue()


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)
