"""Tabular ingestion, normalization, the SMSE metric and result persistence.

CSV files are comma separated with a header row, UTF-8, '.' decimals and no
thousands separators.  Result files round-trip losslessly: floats are
written with shortest round-trip repr and parsed back bit-identically.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .gp import Dataset

__all__ = [
    "IngestionError",
    "NormalizationError",
    "TabularDataset",
    "NormalizationStats",
    "ResultRecord",
    "load_csv_dataset",
    "normalize_fit",
    "normalize_apply",
    "smse",
    "write_results",
    "read_results",
    "sha256_of_file",
]

# Cell contents treated as a missing value; rows containing one are dropped
# (and counted) rather than rejected with an error.
_MISSING = {"", "na", "nan", "null"}


class IngestionError(ValueError):
    """A file could not be parsed into a numeric table."""


class NormalizationError(ValueError):
    """Normalization statistics could not be fitted or applied."""


@dataclass(frozen=True, eq=False)
class TabularDataset:
    """A named numeric table split into features and one target column.

    ``provenance`` records where the data came from (path, checksum, how
    many rows were dropped for missing values, normalization source).
    """

    feature_names: tuple
    rows: np.ndarray
    target_name: str
    targets: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        if rows.shape[0] != targets.shape[0]:
            raise ValueError("rows and targets disagree on length")
        if rows.size and not np.all(np.isfinite(rows)):
            raise ValueError("non-finite feature entries after ingestion")
        if targets.size and not np.all(np.isfinite(targets)):
            raise ValueError("non-finite target entries after ingestion")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def to_dataset(self) -> Dataset:
        return Dataset(self.rows, self.targets)


@dataclass(frozen=True, eq=False)
class NormalizationStats:
    """Feature z-scoring statistics plus the target mean, fitted on a
    training split only (``source`` records which one)."""

    feature_means: np.ndarray
    feature_stds: np.ndarray
    target_mean: float
    source: str = ""


def sha256_of_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_csv_dataset(path, target_column: str) -> TabularDataset:
    """Parse a headed CSV into features and the named target column.

    Rows containing missing or non-finite cells are dropped and counted in
    the provenance; any other unparsable cell raises
    :class:`IngestionError` naming the row and column.
    """
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if target_column not in header:
            raise IngestionError(f"{path}: missing target column {target_column!r}")
        t_idx = header.index(target_column)
        feature_names = [h for j, h in enumerate(header) if j != t_idx]

        rows, targets = [], []
        rejected = 0
        for r, record in enumerate(reader, start=2):  # 1-based, after header
            if len(record) != len(header):
                raise IngestionError(
                    f"{path}: row {r} has {len(record)} cells, expected {len(header)}"
                )
            values = []
            missing = False
            for j, cell in enumerate(record):
                text = cell.strip()
                if text.lower() in _MISSING:
                    missing = True
                    continue
                try:
                    value = float(text)
                except ValueError:
                    raise IngestionError(
                        f"{path}: unparsable cell at row {r}, column {header[j]!r}: {cell!r}"
                    ) from None
                if not np.isfinite(value):
                    missing = True
                    continue
                values.append(value)
            if missing:
                rejected += 1
                continue
            targets.append(values.pop(t_idx))
            rows.append(values)

    if not rows:
        raise IngestionError(f"{path}: no usable data rows")
    return TabularDataset(
        feature_names=tuple(feature_names),
        rows=np.asarray(rows),
        target_name=target_column,
        targets=np.asarray(targets),
        provenance={
            "path": str(path),
            "sha256": sha256_of_file(path),
            "rows_rejected": rejected,
        },
    )


def normalize_fit(train: TabularDataset) -> NormalizationStats:
    """Fit z-scoring statistics on a training split; constant columns are an
    error since they cannot be scaled."""
    if train.n == 0:
        raise NormalizationError("cannot fit statistics on an empty table")
    means = train.rows.mean(axis=0)
    stds = train.rows.std(axis=0)
    flat = np.flatnonzero(stds <= 0.0)
    if flat.size:
        names = ", ".join(train.feature_names[j] for j in flat)
        raise NormalizationError(f"constant feature column(s): {names}")
    return NormalizationStats(
        feature_means=means,
        feature_stds=stds,
        target_mean=float(train.targets.mean()),
        source=train.provenance.get("path", "training split"),
    )


def normalize_apply(stats: NormalizationStats, data: TabularDataset) -> TabularDataset:
    """Z-score features and demean the target with previously fitted stats;
    never re-fits on the data it is applied to."""
    if data.rows.shape[1] != stats.feature_means.shape[0]:
        raise NormalizationError(
            f"statistics cover {stats.feature_means.shape[0]} features, "
            f"data has {data.rows.shape[1]}"
        )
    provenance = dict(data.provenance)
    provenance["normalized_with"] = stats.source
    return TabularDataset(
        feature_names=data.feature_names,
        rows=(data.rows - stats.feature_means) / stats.feature_stds,
        target_name=data.target_name,
        targets=data.targets - stats.target_mean,
        provenance=provenance,
    )


def smse(predictions, targets) -> float:
    """Mean squared error normalized by the population (1/N) variance of the
    targets, so that predicting the target mean scores exactly 1."""
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape or targets.ndim != 1:
        raise ValueError("predictions and targets must be equal-length vectors")
    if targets.size < 2:
        raise ValueError("need at least two targets")
    variance = float(np.var(targets))
    if variance == 0.0:
        raise ValueError("target variance is zero; SMSE undefined")
    return float(np.mean((targets - predictions) ** 2)) / variance


# --- result records -----------------------------------------------------------


@dataclass
class ResultRecord:
    """One row of an experiment output; configuration fields are embedded so
    every row is self-describing."""

    benchmark: str
    command: str
    criterion: str
    seed: int
    budget: int
    var_threshold: float | None = None
    err_threshold: float | None = None
    use_acceptance: bool = False
    size: int | None = None
    smse: float | None = None
    mean_variance: float | None = None
    revised: int | None = None
    accepted_fraction: float | None = None
    median_ms: float | None = None
    repeats: int | None = None
    note: str = ""


_FIELDS = [f.name for f in fields(ResultRecord)]
_FLOAT_FIELDS = {"var_threshold", "err_threshold", "smse", "mean_variance",
                 "accepted_fraction", "median_ms"}
_INT_FIELDS = {"seed", "budget", "size", "revised", "repeats"}


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(name: str, text: str):
    if text == "":
        return None if name not in ("note", "benchmark", "command", "criterion") else ""
    if name == "use_acceptance":
        return text == "true"
    if name in _FLOAT_FIELDS:
        return float(text)
    if name in _INT_FIELDS:
        return int(text)
    return text


def write_results(records, path, fmt: str | None = None) -> None:
    """Write records as CSV (default) or JSON with a deterministic column
    order; floats use shortest round-trip repr so files are byte-stable."""
    path = Path(path)
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
    records = list(records)
    if fmt == "json":
        payload = [
            {name: getattr(r, name) for name in _FIELDS} for r in records
        ]
        path.write_text(json.dumps(payload, indent=2) + "\n")
        return
    if fmt != "csv":
        raise ValueError(f"unknown results format {fmt!r}")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(_FIELDS)
    for r in records:
        writer.writerow([_cell(getattr(r, name)) for name in _FIELDS])
    path.write_text(buffer.getvalue())


def read_results(path) -> list:
    path = Path(path)
    if path.suffix.lower() == ".json":
        payload = json.loads(path.read_text())
        return [ResultRecord(**{k: v for k, v in row.items()}) for row in payload]
    out = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _FIELDS:
            raise IngestionError(f"{path}: unexpected results header")
        for record in reader:
            kwargs = {name: _parse(name, text) for name, text in zip(header, record)}
            out.append(ResultRecord(**kwargs))
    return out
