"""Final-analysis machinery: pooled variance, TOST, case classification.

Equivalence is declared (Case 1) only when both one-sided nulls are
rejected at level alpha; non-inferiority needs only the upper test.  The
decision is identical to checking whether the (1-2*alpha) confidence
interval lies strictly inside the margins.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .distributions import student_t_quantile
from .trial import InsufficientDataError, TrialDesign

__all__ = [
    "Case",
    "TostOutcome",
    "pooled_variance",
    "classify_case",
    "tost_decide",
    "tost_decide_from_stats",
    "ni_reject_h02",
]


class Case(enum.IntEnum):
    """Joint outcome of the two one-sided tests.

    CASE1: both rejected (equivalence declared).
    CASE2: upper rejected only (the conservatism source in TOST).
    CASE3: lower rejected only.
    CASE4: neither rejected.
    """

    CASE1 = 1
    CASE2 = 2
    CASE3 = 3
    CASE4 = 4


@dataclass(frozen=True)
class TostOutcome:
    diff_d: float
    pooled_sd: float
    t_low: float
    t_up: float
    ci_low: float
    ci_high: float
    case_label: Case
    reject_h01: bool
    reject_h02: bool


def pooled_variance(group1, group2) -> float:
    """Two-sample pooled variance with the n1+n2-2 divisor."""
    g1 = np.asarray(group1, dtype=float)
    g2 = np.asarray(group2, dtype=float)
    n1, n2 = len(g1), len(g2)
    if n1 < 2 or n2 < 2:
        raise InsufficientDataError(
            f"need >= 2 observations per group, got {n1} and {n2}")
    ss = np.sum((g1 - g1.mean()) ** 2) + np.sum((g2 - g2.mean()) ** 2)
    return float(ss) / (n1 + n2 - 2)


def classify_case(reject_h01: bool, reject_h02: bool) -> Case:
    if reject_h01 and reject_h02:
        return Case.CASE1
    if reject_h02:
        return Case.CASE2
    if reject_h01:
        return Case.CASE3
    return Case.CASE4


def _signed_limit_stat(d: float, margin: float) -> float:
    # t statistic limit as s -> 0: sign of (d - margin) times infinity
    if d > margin:
        return math.inf
    if d < margin:
        return -math.inf
    return 0.0


def tost_decide_from_stats(diff_d: float, pooled_sd: float, n1: int, n2: int,
                           design: TrialDesign) -> TostOutcome:
    """TOST decision from sufficient statistics.

    Parameters
    ----------
    diff_d : float
        Observed difference of group means.
    pooled_sd : float
        Square root of the pooled variance.
    n1, n2 : int
        Per-group totals the statistics were computed from.

    Notes
    -----
    With ``pooled_sd == 0`` (all observations equal) the t statistics are
    taken at their s -> 0 limits, so each null is rejected exactly when d
    is strictly on its alternative side.  This keeps mass simulation free
    of NaNs without changing any decision reachable with s > 0.
    """
    df = n1 + n2 - 2
    q = student_t_quantile(1.0 - design.alpha, df)
    if pooled_sd == 0.0:
        t_low = _signed_limit_stat(diff_d, design.delta_low)
        t_up = _signed_limit_stat(diff_d, design.delta_up)
        ci_low = ci_high = diff_d
    else:
        se = pooled_sd * math.sqrt((n1 + n2) / (n1 * n2))
        t_low = (diff_d - design.delta_low) / se
        t_up = (diff_d - design.delta_up) / se
        ci_low = diff_d - q * se
        ci_high = diff_d + q * se
    reject_h01 = t_low > q
    reject_h02 = t_up < -q
    return TostOutcome(
        diff_d=diff_d,
        pooled_sd=pooled_sd,
        t_low=t_low,
        t_up=t_up,
        ci_low=ci_low,
        ci_high=ci_high,
        case_label=classify_case(reject_h01, reject_h02),
        reject_h01=reject_h01,
        reject_h02=reject_h02,
    )


def tost_decide(group1, group2, design: TrialDesign) -> TostOutcome:
    """Run both one-sided t tests on raw data and classify the outcome."""
    g1 = np.asarray(group1, dtype=float)
    g2 = np.asarray(group2, dtype=float)
    s = math.sqrt(pooled_variance(g1, g2))
    return tost_decide_from_stats(
        float(g1.mean() - g2.mean()), s, len(g1), len(g2), design)


def ni_reject_h02(outcome: TostOutcome) -> bool:
    """Non-inferiority rejection: the upper null fell, regardless of the lower."""
    return outcome.reject_h02
