"""Reduction and acceptance criteria for budget-constrained GP updates.

A reduction criterion scores every replace-one-point partition of the
training set (or delete-one partition when no replacement candidate is
given); the stored point whose partition scores lowest is the one to drop.
Each criterion has a paired acceptance criterion that filters candidates
against the cached minimum score of the stored points before any partition
sweep runs.

Two pairs of criteria are exact duals and always pick the same point:
prior entropy with predictive entropy (through the block-determinant
identity of the joint covariance), and marginal log likelihood with log
predictive density (through the chain-rule factorization of the joint
density).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .gp import (
    LOG_2PI,
    Dataset,
    Hyperparameters,
    NumericalError,
    PosteriorCache,
    fit_cache,
    gaussian_entropy,
    log_marginal_likelihood,
    predict,
)

__all__ = [
    "CriterionKind",
    "AcceptanceKind",
    "PartitionView",
    "acceptance_kind_for",
    "loo_predict",
    "reduction_score",
    "acceptance_score",
    "acceptance_scores",
]


class CriterionKind(Enum):
    PRIOR_ENTROPY = "prior-entropy"
    PREDICTIVE_ENTROPY = "predictive-entropy"
    MEAN_RELEVANCE = "mean-relevance"
    MARGINAL_LOG_LIKELIHOOD = "mll"
    LOG_PREDICTIVE_DENSITY = "lpd"


class AcceptanceKind(Enum):
    VARIANCE = "variance"
    SQUARED_ERROR = "squared-error"
    NEGATIVE_LOG_PREDICTIVE_DENSITY = "negative-lpd"


_ACCEPTANCE_PAIRING = {
    CriterionKind.PRIOR_ENTROPY: AcceptanceKind.VARIANCE,
    CriterionKind.PREDICTIVE_ENTROPY: AcceptanceKind.VARIANCE,
    CriterionKind.MEAN_RELEVANCE: AcceptanceKind.SQUARED_ERROR,
    CriterionKind.MARGINAL_LOG_LIKELIHOOD: AcceptanceKind.NEGATIVE_LOG_PREDICTIVE_DENSITY,
    CriterionKind.LOG_PREDICTIVE_DENSITY: AcceptanceKind.NEGATIVE_LOG_PREDICTIVE_DENSITY,
}


def acceptance_kind_for(kind: CriterionKind) -> AcceptanceKind:
    """The acceptance criterion paired with a reduction criterion."""
    return _ACCEPTANCE_PAIRING[kind]


@dataclass(frozen=True, eq=False)
class PartitionView:
    """One partition of the training set: row ``replaced_index`` swapped for
    ``candidate`` (an ``(x, y)`` pair), or simply deleted when ``candidate``
    is ``None``."""

    base: Dataset
    replaced_index: int
    candidate: tuple | None = None

    def __post_init__(self):
        if not 0 <= self.replaced_index < self.base.n:
            raise ValueError(
                f"replaced_index {self.replaced_index} out of range for "
                f"{self.base.n} rows"
            )
        if self.candidate is not None:
            x = np.asarray(self.candidate[0], dtype=float).reshape(-1)
            if x.shape[0] != self.base.dim:
                raise ValueError(
                    f"candidate has {x.shape[0]} features, dataset has {self.base.dim}"
                )

    @property
    def removed_x(self) -> np.ndarray:
        return self.base.inputs[self.replaced_index]

    @property
    def removed_y(self) -> float:
        return float(self.base.targets[self.replaced_index])

    def materialize(self) -> Dataset:
        """The reduced dataset: base with the removed row swapped for the
        candidate (same size), or dropped (size N-1) in deletion mode."""
        if self.candidate is None:
            return self.base.with_row_removed(self.replaced_index)
        x, y = self.candidate
        return self.base.with_row_replaced(self.replaced_index, x, float(y))


def loo_predict(partition: PartitionView, hyper: Hyperparameters):
    """Predictive mean and latent variance at the removed input, conditioned
    on the partition's reduced dataset."""
    reduced = partition.materialize()
    cache = fit_cache(reduced, hyper)
    mu, var = predict(cache, reduced, hyper, partition.removed_x[None, :])
    return float(mu[0]), float(var[0])


def _neg_log_density(err_sq: float, total_var: float) -> float:
    if total_var <= 0.0:
        raise NumericalError("non-positive variance in log-density evaluation")
    return 0.5 * math.log(2.0 * math.pi * total_var) + err_sq / (2.0 * total_var)


def reduction_score(
    kind: CriterionKind,
    partition: PartitionView,
    hyper: Hyperparameters,
    base_cache: PosteriorCache | None = None,
    mean_reference: str = "model",
) -> float:
    """Score one partition; the removal loop takes the argmin over partitions.

    Scores per kind, writing D' for the reduced dataset and (x_i, y_i) for
    the removed row:

    - predictive entropy: Gaussian entropy of the latent prediction at x_i
      given D'.
    - prior entropy: negated Gaussian entropy of the marginal over D' 's
      targets (noise-inclusive covariance).
    - mean relevance: squared change of the predictive mean at x_i between
      the full model and D'.  With ``mean_reference="target"`` the stored
      target y_i replaces the full-model mean.
    - marginal log likelihood: log evidence of D'.
    - log predictive density: negated Gaussian log density of y_i under the
      noisy prediction at x_i given D'.

    ``base_cache`` lets callers reuse the full model's cache for the mean
    relevance reference instead of refitting it per partition.
    """
    if kind is CriterionKind.PREDICTIVE_ENTROPY:
        _, var = loo_predict(partition, hyper)
        if var <= 0.0:
            raise NumericalError("zero predictive variance in entropy score")
        return gaussian_entropy(1, math.log(var))

    if kind is CriterionKind.PRIOR_ENTROPY:
        reduced = partition.materialize()
        cache = fit_cache(reduced, hyper)
        log_det = 2.0 * float(np.sum(np.log(np.diagonal(cache.chol))))
        return -gaussian_entropy(reduced.n, log_det)

    if kind is CriterionKind.MEAN_RELEVANCE:
        mu_loo, _ = loo_predict(partition, hyper)
        if mean_reference == "target":
            reference = partition.removed_y
        elif mean_reference == "model":
            if base_cache is None:
                base_cache = fit_cache(partition.base, hyper)
            mu_full, _ = predict(
                base_cache, partition.base, hyper, partition.removed_x[None, :]
            )
            reference = float(mu_full[0])
        else:
            raise ValueError(f"unknown mean_reference {mean_reference!r}")
        return (reference - mu_loo) ** 2

    if kind is CriterionKind.MARGINAL_LOG_LIKELIHOOD:
        return log_marginal_likelihood(partition.materialize(), hyper)

    if kind is CriterionKind.LOG_PREDICTIVE_DENSITY:
        mu, var = loo_predict(partition, hyper)
        err_sq = (partition.removed_y - mu) ** 2
        return _neg_log_density(err_sq, var + hyper.noise_variance)

    raise ValueError(f"unknown criterion {kind!r}")


def acceptance_score(
    kind: CriterionKind,
    cache: PosteriorCache,
    dataset: Dataset,
    hyper: Hyperparameters,
    point: tuple,
) -> float:
    """Acceptance score of one point against the current full model.

    Stored rows and candidates are scored identically (stored rows are left
    in the model).  Dispatch follows the reduction criterion's pairing:
    latent variance, squared prediction error, or negative Gaussian log
    density of the target under the noisy prediction.
    """
    x, y = point
    x = np.asarray(x, dtype=float).reshape(1, -1)
    mu, var = predict(cache, dataset, hyper, x)
    acc = acceptance_kind_for(kind)
    if acc is AcceptanceKind.VARIANCE:
        return float(var[0])
    if acc is AcceptanceKind.SQUARED_ERROR:
        return (float(y) - float(mu[0])) ** 2
    return _neg_log_density(
        (float(y) - float(mu[0])) ** 2, float(var[0]) + hyper.noise_variance
    )


def acceptance_scores(
    kind: CriterionKind,
    cache: PosteriorCache,
    dataset: Dataset,
    hyper: Hyperparameters,
) -> np.ndarray:
    """Acceptance scores of every stored row.

    Rows go through the same single-point path as candidates so that a
    candidate coinciding with a stored row reproduces its cached score bit
    for bit; the strict comparison against the cached minimum then behaves
    exactly at the boundary.
    """
    return np.array(
        [
            acceptance_score(
                kind, cache, dataset, hyper, (dataset.inputs[i], float(dataset.targets[i]))
            )
            for i in range(dataset.n)
        ]
    )
