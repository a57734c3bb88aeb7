"""Blinded sample size re-estimation: the rule, the formula, its moments.

The interim sample size estimate plugs the blinded total variance into the
normal-approximation formula, so its distribution (and hence the realized
trial size) is driven entirely by the total variance distribution.  The
moment helpers here quantify that: the estimate's mean carries a + n/(4n-2)
bias term and, because the total variance is inflated by the true group
difference, the estimate does not vanish even as the margin grows without
bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import std_normal_quantile
from .trial import var_total_variance

__all__ = [
    "InfeasiblePlanningError",
    "SsrRule",
    "planning_factor",
    "required_sample_size_raw",
    "required_sample_size",
    "apply_ssr_rule",
    "expected_n_hat",
    "sd_n_hat",
    "limit_n_hat_infinite_margin",
]


class InfeasiblePlanningError(ValueError):
    """Planning difference at or beyond the margin: no finite sample size."""


@dataclass(frozen=True)
class SsrRule:
    """Per-group total-size bounds for the re-estimation step.

    ``n_max`` may be ``math.inf`` for an unbounded rule; ``n_min`` acts as
    the floor even when the estimate comes out smaller.
    """

    n_min: int
    n_max: float = math.inf

    def __post_init__(self):
        if self.n_min < 1:
            raise ValueError(f"n_min must be a positive integer, got {self.n_min}")
        if self.n_max < self.n_min:
            raise ValueError(
                f"n_max must be >= n_min, got ({self.n_min}, {self.n_max})")
        if math.isfinite(self.n_max) and self.n_max != int(self.n_max):
            raise ValueError(f"finite n_max must be an integer, got {self.n_max}")

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.n_max)


def planning_factor(alpha: float, beta: float) -> float:
    """2*(Z_{1-beta/2} + Z_{1-alpha})^2, the constant of the size formula."""
    return 2.0 * (std_normal_quantile(1.0 - beta / 2.0)
                  + std_normal_quantile(1.0 - alpha)) ** 2


def required_sample_size_raw(delta0: float, assumed_diff: float, sigma_hat: float,
                             alpha: float, beta: float) -> float:
    """Pre-ceiling per-group sample size from the normal approximation."""
    if abs(assumed_diff) >= delta0:
        raise InfeasiblePlanningError(
            f"assumed difference {assumed_diff} must be strictly inside "
            f"the margin {delta0}")
    if sigma_hat <= 0:
        raise ValueError(f"sigma_hat must be positive, got {sigma_hat}")
    return planning_factor(alpha, beta) * (sigma_hat / (delta0 - assumed_diff)) ** 2


def required_sample_size(delta0: float, assumed_diff: float, sigma_hat: float,
                         alpha: float, beta: float) -> int:
    """Per-group sample size, rounded up to the next integer."""
    return math.ceil(required_sample_size_raw(
        delta0, assumed_diff, sigma_hat, alpha, beta))


def apply_ssr_rule(n_hat: int, n_stage1: int, rule: SsrRule) -> int:
    """Stage-2 per-group size m implied by the estimate and the bounds.

    The realized per-group total n_stage1 + m always lands in
    [n_min, n_max]; a small estimate still tops the trial up to n_min.
    """
    if rule.n_min < n_stage1:
        raise ValueError(
            f"rule n_min {rule.n_min} must be >= stage-1 size {n_stage1}")
    if n_hat <= rule.n_min:
        return rule.n_min - n_stage1
    return int(min(n_hat, rule.n_max)) - n_stage1


def expected_n_hat(delta0: float, n_stage1: int, alpha: float, beta: float) -> float:
    """Exact mean of the pre-ceiling size estimate (sigma=1, D=0 scope).

    Follows from the total-variance mean at delta = delta0:
    factor * (1/delta0^2 + n/(4n-2)).
    """
    n = n_stage1
    return planning_factor(alpha, beta) * (1.0 / delta0 ** 2 + n / (4.0 * n - 2.0))


def sd_n_hat(delta0: float, n_stage1: int, delta: float,
             alpha: float, beta: float) -> float:
    """Exact SD of the pre-ceiling size estimate (sigma=1, D=0 scope)."""
    sd_tv = math.sqrt(var_total_variance(n_stage1, delta, 1.0))
    return planning_factor(alpha, beta) * sd_tv / delta0 ** 2


def limit_n_hat_infinite_margin(n_stage1: int, alpha: float, beta: float) -> float:
    """Limit of the size estimate's mean as the margin grows without bound.

    Nonzero because the blinded variance estimate inflates with the
    margin-sized true difference: n/(2n-1) * (Z_{1-beta/2}+Z_{1-alpha})^2.
    """
    n = n_stage1
    return planning_factor(alpha, beta) * n / (4.0 * n - 2.0)
