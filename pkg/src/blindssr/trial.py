"""Two-group trial data model and blinded variance quantities.

The interim analysis never unblinds treatment assignment: it sees only the
pooled one-sample variance of all stage-1 observations (the "total
variance").  That statistic decomposes into a within-group part q1 and a
between-group part q2, which are independent chi-square / non-central
chi-square variates; the decomposition drives both the analytics and the
diagnostics elsewhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "InsufficientDataError",
    "TrialDesign",
    "StageData",
    "StageSummary",
    "summarize_stage1",
    "expected_total_variance",
    "var_total_variance",
]


class InsufficientDataError(ValueError):
    """A group has too few observations to summarize."""


@dataclass(frozen=True)
class TrialDesign:
    """Fixed parameters of a two-group equivalence or non-inferiority trial.

    Parameters
    ----------
    delta_low, delta_up : float
        Lower and upper equivalence margins.  A pure non-inferiority
        design uses ``delta_low = -inf``.
    sigma : float
        True common within-group standard deviation.
    n1_stage1, n2_stage1 : int
        Per-group stage-1 sample sizes.
    alpha : float
        One-sided test level.
    beta : float
        One minus the planning power target.
    assumed_diff_d : float
        Mean difference assumed when re-estimating the sample size at the
        blinded interim (default 0).
    """

    delta_low: float
    delta_up: float
    sigma: float
    n1_stage1: int
    n2_stage1: int
    alpha: float = 0.05
    beta: float = 0.10
    assumed_diff_d: float = 0.0

    def __post_init__(self):
        if not self.delta_low < self.delta_up:
            raise ValueError(
                f"delta_low must be < delta_up, got ({self.delta_low}, {self.delta_up})")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not 0 < self.alpha < 0.5:
            raise ValueError(f"alpha must be in (0, 0.5), got {self.alpha}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must be in (0, 1), got {self.beta}")
        if self.n1_stage1 < 1 or self.n2_stage1 < 1:
            raise ValueError("stage-1 group sizes must be positive integers")


@dataclass(frozen=True)
class StageData:
    """Observed responses for both groups in one stage."""

    group1_values: np.ndarray
    group2_values: np.ndarray

    def __post_init__(self):
        g1 = np.asarray(self.group1_values, dtype=float)
        g2 = np.asarray(self.group2_values, dtype=float)
        if not (np.all(np.isfinite(g1)) and np.all(np.isfinite(g2))):
            raise ValueError("observations must be finite")
        object.__setattr__(self, "group1_values", g1)
        object.__setattr__(self, "group2_values", g2)


@dataclass(frozen=True)
class StageSummary:
    """Blinded stage-1 summary: means, variance decomposition, total variance."""

    mean1: float
    mean2: float
    pooled_mean: float
    q1: float = field(metadata={"doc": "within-group sum of squares"})
    q2: float = field(metadata={"doc": "between-group sum of squares"})
    total_variance: float
    n_total_stage1: int


def summarize_stage1(data: StageData) -> StageSummary:
    """Reduce stage-1 observations to the blinded variance decomposition.

    q1 is the within-group sum of squares, q2 the between-group one, and
    the total variance is (q1 + q2)/(n_total - 1): the plain one-sample
    variance of all observations pooled, computable without unblinding.
    """
    g1, g2 = data.group1_values, data.group2_values
    n1, n2 = len(g1), len(g2)
    if n1 < 2 or n2 < 2:
        raise InsufficientDataError(
            f"need >= 2 observations per group, got {n1} and {n2}")
    n_tot = n1 + n2
    mean1 = float(np.mean(g1))
    mean2 = float(np.mean(g2))
    pooled = (n1 * mean1 + n2 * mean2) / n_tot
    q1 = float(np.sum((g1 - mean1) ** 2) + np.sum((g2 - mean2) ** 2))
    q2 = n1 * (mean1 - pooled) ** 2 + n2 * (mean2 - pooled) ** 2
    return StageSummary(
        mean1=mean1,
        mean2=mean2,
        pooled_mean=pooled,
        q1=q1,
        q2=q2,
        total_variance=(q1 + q2) / (n_tot - 1),
        n_total_stage1=n_tot,
    )


def expected_total_variance(design: TrialDesign, delta: float) -> float:
    """Exact mean of the blinded total variance at true difference delta.

    Exceeds sigma^2 whenever delta != 0; the excess is the between-group
    term n1*n2*delta^2 / (n_tot*(n_tot-1)).
    """
    n1, n2 = design.n1_stage1, design.n2_stage1
    n_tot = n1 + n2
    sig2 = design.sigma ** 2
    return sig2 + n1 * n2 * delta ** 2 / (n_tot * (n_tot - 1))


def var_total_variance(n_per_group: int, delta: float, sigma: float) -> float:
    """Exact variance of the total variance for equal group sizes.

    Scales with sigma**4, as a variance of a variance estimate must: the
    within part contributes Var of sigma^2*chisq(2n-2) and the between
    part Var of sigma^2*chisq(1; n*delta^2/(2*sigma^2)), independent by
    the orthogonal decomposition.
    """
    if n_per_group < 1:
        raise ValueError("n_per_group must be a positive integer")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    n = n_per_group
    ratio2 = (delta / sigma) ** 2
    return 2.0 * sigma ** 4 / (2 * n - 1) ** 2 * (n * (2.0 + ratio2) - 1.0)
