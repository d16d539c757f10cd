"""Budget-constrained online GP updates.

The update loop for one incoming point ``(x, y)``:

1. insertion gate: keep the point only if its predictive variance exceeds
   the variance threshold (strict) or its absolute prediction error reaches
   the error threshold; with both thresholds disabled every point passes.
2. under budget: append and re-cache.
3. at budget: the acceptance gate compares the point's acceptance score
   against the cached minimum over the stored rows; if it passes, the
   reduction criterion scores every replace-one partition and the argmin
   row is swapped for the point.

Hyperparameters stay frozen while streaming; only the dataset changes.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .criteria import (
    CriterionKind,
    PartitionView,
    acceptance_score,
    acceptance_scores,
    reduction_score,
)
from .gp import (
    Dataset,
    FactorizationError,
    Hyperparameters,
    NumericalError,
    PosteriorCache,
    fit_cache,
    predict,
)

__all__ = [
    "Decision",
    "StepOutcome",
    "OnlineGp",
    "RunSummary",
    "insert_decision",
    "accept_decision",
    "select_removal",
    "step",
    "run_stream",
    "save_snapshot",
    "load_snapshot",
    "SNAPSHOT_FORMAT_VERSION",
]

logger = logging.getLogger(__name__)

SNAPSHOT_FORMAT_VERSION = 1


class Decision(Enum):
    REJECTED_INSERTION = "rejected-insertion"
    APPENDED = "appended"
    REJECTED_ACCEPTANCE = "rejected-acceptance"
    REPLACED = "replaced"
    FAILED = "failed"


@dataclass
class StepOutcome:
    """What happened to one streamed point."""

    decision: Decision
    replaced_index: int | None = None
    scores: np.ndarray | None = None
    smse_running: float | None = None
    error: str | None = None

    @property
    def revised(self) -> bool:
        return self.decision in (Decision.APPENDED, Decision.REPLACED)


@dataclass
class OnlineGp:
    """Mutable state of the online loop: dataset, frozen hyperparameters,
    posterior cache, budget, insertion thresholds, criterion selection and
    the cached acceptance scores of the stored rows."""

    dataset: Dataset
    hyper: Hyperparameters
    budget: int
    criterion: CriterionKind = CriterionKind.MARGINAL_LOG_LIKELIHOOD
    var_threshold: float | None = None
    err_threshold: float | None = None
    use_acceptance: bool = False
    cache: PosteriorCache = field(init=False)
    acc_scores: np.ndarray | None = field(init=False, default=None)
    j_min: float | None = field(init=False, default=None)

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if self.dataset.n > self.budget:
            raise ValueError(
                f"initial dataset ({self.dataset.n} rows) exceeds budget {self.budget}"
            )
        if self.var_threshold is not None and self.var_threshold < 0:
            raise ValueError("var_threshold must be >= 0 or disabled")
        if self.err_threshold is not None and self.err_threshold < 0:
            raise ValueError("err_threshold must be >= 0 or disabled")
        self._recache(self.dataset)

    def _recache(self, dataset: Dataset) -> None:
        """Fit the cache for ``dataset`` and commit it (plus the acceptance
        score cache) atomically; on failure the previous state is intact."""
        cache = fit_cache(dataset, self.hyper)
        scores = None
        if self.use_acceptance:
            scores = acceptance_scores(self.criterion, cache, dataset, self.hyper)
        self.dataset = dataset
        self.cache = cache
        self.acc_scores = scores
        self.j_min = float(np.min(scores)) if scores is not None else None


def insert_decision(model: OnlineGp, point: tuple) -> bool:
    """Insertion gate: variance strictly above the variance threshold, or
    absolute prediction error at or above the error threshold.  Always true
    with both thresholds disabled."""
    if model.var_threshold is None and model.err_threshold is None:
        return True
    x, y = point
    mu, var = predict(
        model.cache, model.dataset, model.hyper, np.asarray(x, float).reshape(1, -1)
    )
    if model.var_threshold is not None and float(var[0]) > model.var_threshold:
        return True
    if model.err_threshold is not None and abs(float(y) - float(mu[0])) >= model.err_threshold:
        return True
    return False


def accept_decision(model: OnlineGp, point: tuple) -> bool:
    """Acceptance gate at budget: the candidate's acceptance score must
    strictly exceed the cached minimum over the stored rows."""
    if not model.use_acceptance:
        return True
    if model.j_min is None:
        raise RuntimeError("acceptance score cache missing; model not re-cached")
    score = acceptance_score(
        model.criterion, model.cache, model.dataset, model.hyper, point
    )
    return score > model.j_min


def _removal_scores(model: OnlineGp, point: tuple) -> np.ndarray:
    scores = np.empty(model.dataset.n)
    for i in range(model.dataset.n):
        partition = PartitionView(model.dataset, i, candidate=point)
        scores[i] = reduction_score(
            model.criterion, partition, model.hyper, base_cache=model.cache
        )
    return scores


def select_removal(model: OnlineGp, point: tuple) -> int:
    """Index of the stored row to replace: argmin of the reduction scores
    over all replace-one partitions, smallest index on ties."""
    return int(np.argmin(_removal_scores(model, point)))


def step(model: OnlineGp, point: tuple) -> tuple[OnlineGp, StepOutcome]:
    """Process one streamed point through the insertion, acceptance and
    reduction gates.  Numerical failures abort the step: the point is
    dropped, the model is left unchanged and the error is recorded on the
    outcome."""
    x, y = point
    try:
        if not insert_decision(model, point):
            return model, StepOutcome(Decision.REJECTED_INSERTION)
        if model.dataset.n < model.budget:
            model._recache(model.dataset.with_appended(x, y))
            return model, StepOutcome(Decision.APPENDED)
        if not accept_decision(model, point):
            return model, StepOutcome(Decision.REJECTED_ACCEPTANCE)
        scores = _removal_scores(model, point)
        r = int(np.argmin(scores))
        model._recache(model.dataset.with_row_replaced(r, x, y))
        return model, StepOutcome(Decision.REPLACED, replaced_index=r, scores=scores)
    except (FactorizationError, NumericalError) as exc:
        logger.warning("online step skipped after numerical failure: %s", exc)
        return model, StepOutcome(Decision.FAILED, error=str(exc))


@dataclass
class RunSummary:
    """End-of-stream metrics: SMSE and mean latent variance over the
    evaluation set, and how many streamed points entered the model."""

    revised: int
    steps: int
    final_smse: float | None = None
    mean_variance: float | None = None


def _eval_metrics(model: OnlineGp, eval_set: Dataset):
    from .dataio import smse

    mu, var = predict(model.cache, model.dataset, model.hyper, eval_set.inputs)
    return smse(mu, eval_set.targets), float(np.mean(var))


def run_stream(
    model: OnlineGp,
    stream,
    eval_set: Dataset | None = None,
    track_smse: bool = False,
) -> tuple[OnlineGp, list[StepOutcome], RunSummary]:
    """Apply :func:`step` to every point of the stream in order.

    ``stream`` yields ``(x, y)`` pairs.  With ``track_smse`` each outcome
    additionally records the running SMSE on ``eval_set``.
    """
    outcomes: list[StepOutcome] = []
    for point in stream:
        model, outcome = step(model, point)
        if track_smse and eval_set is not None:
            outcome.smse_running = _eval_metrics(model, eval_set)[0]
        outcomes.append(outcome)
    summary = RunSummary(
        revised=sum(1 for o in outcomes if o.revised), steps=len(outcomes)
    )
    if eval_set is not None:
        summary.final_smse, summary.mean_variance = _eval_metrics(model, eval_set)
    return model, outcomes, summary


def snapshot_dict(model: OnlineGp) -> dict:
    return {
        "format_version": SNAPSHOT_FORMAT_VERSION,
        "budget": model.budget,
        "criterion": model.criterion.value,
        "var_threshold": model.var_threshold,
        "err_threshold": model.err_threshold,
        "use_acceptance": model.use_acceptance,
        "hyper": {
            "signal_variance": model.hyper.signal_variance,
            "lengthscales": model.hyper.lengthscales.tolist(),
            "noise_variance": model.hyper.noise_variance,
        },
        "inputs": model.dataset.inputs.tolist(),
        "targets": model.dataset.targets.tolist(),
    }


def model_from_snapshot(payload: dict) -> OnlineGp:
    version = payload.get("format_version")
    if version != SNAPSHOT_FORMAT_VERSION:
        raise ValueError(f"unsupported snapshot format version {version!r}")
    hyper = Hyperparameters(
        signal_variance=payload["hyper"]["signal_variance"],
        lengthscales=np.asarray(payload["hyper"]["lengthscales"]),
        noise_variance=payload["hyper"]["noise_variance"],
    )
    return OnlineGp(
        dataset=Dataset(np.asarray(payload["inputs"]), np.asarray(payload["targets"])),
        hyper=hyper,
        budget=payload["budget"],
        criterion=CriterionKind(payload["criterion"]),
        var_threshold=payload["var_threshold"],
        err_threshold=payload["err_threshold"],
        use_acceptance=payload["use_acceptance"],
    )


def save_snapshot(model: OnlineGp, path) -> None:
    """Persist the online model (dataset, hyperparameters, thresholds,
    criterion, budget) as a versioned JSON record; the cache is refit on
    load."""
    Path(path).write_text(json.dumps(snapshot_dict(model), indent=2))


def load_snapshot(path) -> OnlineGp:
    return model_from_snapshot(json.loads(Path(path).read_text()))
