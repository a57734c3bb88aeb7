"""Blinded sample-size re-estimation in equivalence and non-inferiority
trials: Monte Carlo measurement of the type I error inflation caused by
re-estimating the total sample size from the blinded interim variance,
plus an exact quadrature treatment of the variance-threshold stopping
rule for cross-validation.
"""

from .engine import (
    BinnedRejectionReport,
    GridSpec,
    PeakScanResult,
    Scenario,
    ScenarioResult,
    ThresholdRuleResult,
    binned_rejection_analysis,
    peak_alpha_scan,
    run_grid,
    run_scenario,
    run_scenarios,
    simulate_threshold_rule,
    simulate_trial,
)
from .exact import (
    ExactSetting,
    IntegrationLimits,
    QuadratureError,
    eq_type1_exact,
    ni_type1_exact,
    prob_reject_and_small_variance,
    prob_small_variance,
    solve_integration_limits,
)
from .ssr import (
    InfeasiblePlanningError,
    SsrRule,
    apply_ssr_rule,
    expected_n_hat,
    limit_n_hat_infinite_margin,
    planning_factor,
    required_sample_size,
    sd_n_hat,
)
from .tost import Case, TostOutcome, classify_case, tost_decide
from .trial import (
    InsufficientDataError,
    StageSummary,
    TrialDesign,
    expected_total_variance,
    summarize_stage1,
    var_total_variance,
)

__version__ = "1.0.0"

__all__ = [
    "BinnedRejectionReport",
    "Case",
    "ExactSetting",
    "GridSpec",
    "InfeasiblePlanningError",
    "InsufficientDataError",
    "IntegrationLimits",
    "PeakScanResult",
    "QuadratureError",
    "Scenario",
    "ScenarioResult",
    "SsrRule",
    "StageSummary",
    "ThresholdRuleResult",
    "TostOutcome",
    "TrialDesign",
    "apply_ssr_rule",
    "binned_rejection_analysis",
    "classify_case",
    "eq_type1_exact",
    "expected_n_hat",
    "expected_total_variance",
    "limit_n_hat_infinite_margin",
    "ni_type1_exact",
    "peak_alpha_scan",
    "planning_factor",
    "prob_reject_and_small_variance",
    "prob_small_variance",
    "required_sample_size",
    "run_grid",
    "run_scenario",
    "run_scenarios",
    "sd_n_hat",
    "simulate_threshold_rule",
    "simulate_trial",
    "solve_integration_limits",
    "summarize_stage1",
    "tost_decide",
    "var_total_variance",
    "__version__",
]
