"""Deterministic parallel Monte Carlo engine for two-stage trials.

Sampling works at the sufficient-statistic level: for a group of k iid
N(mu, sigma^2) observations, the sample mean and the within-group sum of
squares are independent with known distributions (normal and scaled
chi-square), so drawing the pair is distributionally identical to drawing
the k observations and summarizing them, at O(1) cost per replicate no
matter how large the re-estimated stage 2 gets.  ``simulate_trial`` keeps
a literal per-observation path for auditing single replicates; the
aggregate counters produced by ``run_scenario`` come from the vectorized
statistic-level kernel, so the two paths agree in distribution but not
draw-for-draw.

Reproducibility contract: replicates are processed in fixed-size chunks,
and each chunk owns a Philox stream derived from the master seed plus a
hash of the scenario's parameter values plus the chunk index.  Results
are therefore bit-identical for any worker count, and any scenario rerun
in isolation reproduces its cell from a grid run exactly.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .distributions import student_t_quantile
from .ssr import SsrRule, apply_ssr_rule, planning_factor, required_sample_size
from .tost import Case, TostOutcome, tost_decide
from .trial import StageData, StageSummary, TrialDesign, summarize_stage1

__all__ = [
    "CHUNK_SIZE",
    "Scenario",
    "ScenarioResult",
    "GridSpec",
    "BinnedRejectionReport",
    "PeakScanResult",
    "ThresholdRuleResult",
    "simulate_trial",
    "run_scenario",
    "run_scenarios",
    "run_grid",
    "binned_rejection_analysis",
    "peak_alpha_scan",
    "simulate_threshold_rule",
    "round_half_up",
]

CHUNK_SIZE = 1 << 16

# spawn-key tags keep chunk streams, per-replicate streams and the
# threshold-rule simulator in disjoint namespaces
_TAG_CHUNK = 0
_TAG_REPLICATE = 1
_TAG_THRESHOLD = 2


def round_half_up(x: float) -> int:
    """Round to the nearest integer with ties going up."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class Scenario:
    """One simulation cell: a design, a re-estimation rule, a truth, a seed."""

    design: TrialDesign
    rule: SsrRule
    true_delta: float
    replications: int
    master_seed: int

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        d = self.design
        if d.n1_stage1 != d.n2_stage1:
            raise ValueError("simulation scenarios require equal group sizes")
        if self.rule.n_min < d.n1_stage1:
            raise ValueError(
                f"rule n_min {self.rule.n_min} below stage-1 size {d.n1_stage1}")
        if math.isfinite(d.delta_up) and abs(d.assumed_diff_d) >= d.delta_up:
            raise ValueError("assumed interim difference must lie inside the margin")


@dataclass(frozen=True)
class ScenarioResult:
    """Aggregated counts and moments for one scenario."""

    scenario: Scenario
    count_case1: int
    count_case2: int
    count_case3: int
    count_case4: int
    sum_realized_n: int
    sum_realized_n_sq: int
    sum_sigma_t2: float

    def __post_init__(self):
        total = (self.count_case1 + self.count_case2
                 + self.count_case3 + self.count_case4)
        if total != self.scenario.replications:
            raise ValueError(
                f"case counts sum to {total}, expected {self.scenario.replications}")

    @property
    def replications(self) -> int:
        return self.scenario.replications

    @property
    def pct_case1(self) -> float:
        return 100.0 * self.count_case1 / self.replications

    @property
    def pct_case2(self) -> float:
        return 100.0 * self.count_case2 / self.replications

    @property
    def pct_case3(self) -> float:
        return 100.0 * self.count_case3 / self.replications

    @property
    def pct_case4(self) -> float:
        return 100.0 * self.count_case4 / self.replications

    @property
    def ni_rejection_pct(self) -> float:
        # exact identity with the case percentages, by construction
        return self.pct_case1 + self.pct_case2

    @property
    def mean_realized_n(self) -> float:
        return self.sum_realized_n / self.replications

    @property
    def sd_realized_n(self) -> float:
        r = self.replications
        if r < 2:
            return 0.0
        var = (self.sum_realized_n_sq - self.sum_realized_n ** 2 / r) / (r - 1)
        return math.sqrt(max(var, 0.0))

    @property
    def mean_sigma_t2(self) -> float:
        return self.sum_sigma_t2 / self.replications


@dataclass(frozen=True)
class BinnedRejectionReport:
    """Rejection rates of the fixed and two-stage designs by total-variance bin.

    The first bin is exactly the no-extension region (m = 0); the rest of
    the mass is split into nine equal-count bins.  Rejection here means
    rejecting the upper null, the non-inferiority reading.
    """

    threshold_sigma_t2: float
    bin_edges: tuple[float, ...]
    bin_counts: tuple[int, ...]
    reject_pct_fixed: tuple[float, ...]
    reject_pct_two_stage: tuple[float, ...]
    first_bin_mass_pct: float
    overall_reject_pct_fixed: float
    overall_reject_pct_two_stage: float
    replications: int


@dataclass(frozen=True)
class PeakScanResult:
    """Result of scanning %Case1 over a margin grid at a fixed stage-1 size."""

    n_stage1: int
    delta0_grid: tuple[float, ...]
    pct_case1: tuple[float, ...]
    peak_pct_case1: float
    argmax_delta0: float
    results: tuple[ScenarioResult, ...]


@dataclass(frozen=True)
class ThresholdRuleResult:
    """Monte Carlo estimates for the variance-threshold stopping rule."""

    prob_small: float
    ni_joint_small: float
    eq_joint_small: float
    ni_unconditional: float
    eq_unconditional: float
    replications: int


@dataclass(frozen=True)
class GridSpec:
    """Cartesian simulation grid over stage-1 sizes, bound ratios and margins.

    ``n_min_ratios`` and ``n_max_ratios`` are multiples of the stage-1
    size; they are rounded half-up to integers per cell, and ``math.inf``
    is allowed as an n_max ratio for the unbounded rule.
    """

    n_stage1: tuple[int, ...]
    n_min_ratios: tuple[float, ...]
    n_max_ratios: tuple[float, ...]
    delta0: tuple[float, ...]
    replications: int
    master_seed: int
    sigma: float = 1.0
    alpha: float = 0.05
    beta: float = 0.10

    def __post_init__(self):
        for name in ("n_stage1", "n_min_ratios", "n_max_ratios", "delta0"):
            if not getattr(self, name):
                raise ValueError(f"grid list {name} must be non-empty")
        if min(self.n_min_ratios) < 1.0:
            raise ValueError("n_min ratios must be >= 1")
        if min(self.n_max_ratios) < max(self.n_min_ratios):
            raise ValueError(
                "every n_max ratio must be >= every n_min ratio, got "
                f"max(n_min_ratios)={max(self.n_min_ratios)}, "
                f"min(n_max_ratios)={min(self.n_max_ratios)}")
        if min(self.delta0) <= 0:
            raise ValueError("margins delta0 must be positive")

    def cell_count(self) -> int:
        return (len(self.n_stage1) * len(self.n_min_ratios)
                * len(self.n_max_ratios) * len(self.delta0))

    def scenarios(self) -> list[Scenario]:
        """Cells in deterministic nested order; each carries the master seed."""
        out = []
        for nt in self.n_stage1:
            for rmin in self.n_min_ratios:
                for rmax in self.n_max_ratios:
                    for d0 in self.delta0:
                        n_min = round_half_up(rmin * nt)
                        n_max = math.inf if math.isinf(rmax) else round_half_up(rmax * nt)
                        design = TrialDesign(
                            delta_low=-d0, delta_up=d0, sigma=self.sigma,
                            n1_stage1=nt, n2_stage1=nt,
                            alpha=self.alpha, beta=self.beta)
                        rule = SsrRule(n_min=n_min, n_max=n_max)
                        out.append(Scenario(
                            design=design, rule=rule, true_delta=d0,
                            replications=self.replications,
                            master_seed=self.master_seed))
        return out


@lru_cache(maxsize=None)
def _t_crit(p: float, df: int) -> float:
    return student_t_quantile(p, df)


def _t_crit_array(p: float, dof: np.ndarray) -> np.ndarray:
    uniq, inverse = np.unique(dof, return_inverse=True)
    vals = np.array([_t_crit(p, int(v)) for v in uniq])
    return vals[inverse]


def _scenario_spawn_words(scenario: Scenario) -> tuple[int, ...]:
    """Stable 128-bit fingerprint of the cell's parameter values.

    Hashing values rather than grid indices is what makes an isolated
    rerun of one cell reproduce the full-grid run bit-for-bit.
    """
    d, r = scenario.design, scenario.rule
    key = ("ssr-cell-v1", d.delta_low, d.delta_up, d.sigma,
           d.n1_stage1, d.n2_stage1, d.alpha, d.beta, d.assumed_diff_d,
           r.n_min, r.n_max, scenario.true_delta)
    digest = hashlib.blake2b(repr(key).encode(), digest_size=16).digest()
    return tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))


def _chunk_rng(scenario: Scenario, tag: int, index: int) -> np.random.Generator:
    words = _scenario_spawn_words(scenario)
    seq = np.random.SeedSequence(entropy=scenario.master_seed,
                                 spawn_key=words + (tag, index))
    return np.random.Generator(np.random.Philox(seq))


def simulate_trial(scenario: Scenario,
                   replicate_index: int) -> tuple[TostOutcome, StageSummary, int]:
    """Simulate one replicate at the observation level.

    Fully determined by (scenario parameters, master_seed,
    replicate_index).  Stage-1 data are drawn per group, the blinded
    summary drives the re-estimation, stage-2 data are appended, and the
    final decision tests all observations.
    """
    if replicate_index < 0:
        raise ValueError("replicate_index must be non-negative")
    d = scenario.design
    rng = _chunk_rng(scenario, _TAG_REPLICATE, replicate_index)
    nt = d.n1_stage1
    g1 = rng.normal(scenario.true_delta, d.sigma, nt)
    g2 = rng.normal(0.0, d.sigma, nt)
    summary = summarize_stage1(StageData(g1, g2))
    if math.isinf(d.delta_up):
        n_hat = 0    # formula limit: no information demand from an open margin
    else:
        n_hat = required_sample_size(
            d.delta_up, d.assumed_diff_d, math.sqrt(summary.total_variance),
            d.alpha, d.beta) if summary.total_variance > 0 else 0
    m = apply_ssr_rule(n_hat, nt, scenario.rule)
    if m > 0:
        g1 = np.concatenate([g1, rng.normal(scenario.true_delta, d.sigma, m)])
        g2 = np.concatenate([g2, rng.normal(0.0, d.sigma, m)])
    outcome = tost_decide(g1, g2, d)
    return outcome, summary, nt + m


def _ssr_chunk(scenario: Scenario, chunk_index: int, count: int,
               collect: bool):
    """Vectorized statistic-level kernel for one chunk of replicates.

    Draw order is fixed and independent of the ``collect`` flag: stage-1
    mean deviates, stage-1 SSQ chi-squares, stage-2 mean deviates for all
    rows, stage-2 SSQ chi-squares for rows with m >= 2 only.
    """
    d, rule = scenario.design, scenario.rule
    nt = d.n1_stage1
    sig = d.sigma
    rng = _chunk_rng(scenario, _TAG_CHUNK, chunk_index)

    m1 = scenario.true_delta + sig / math.sqrt(nt) * rng.standard_normal(count)
    m2 = sig / math.sqrt(nt) * rng.standard_normal(count)
    w1 = sig * sig * rng.chisquare(nt - 1, count)
    w2 = sig * sig * rng.chisquare(nt - 1, count)
    diff1 = m1 - m2
    sigma_t2 = (w1 + w2 + 0.5 * nt * diff1 * diff1) / (2 * nt - 1)

    factor = planning_factor(d.alpha, d.beta)
    denom = (d.delta_up - d.assumed_diff_d) ** 2
    n_hat = np.ceil(factor * sigma_t2 / denom) if math.isfinite(denom) \
        else np.zeros(count)
    if rule.unbounded:
        n_final = np.maximum(n_hat, rule.n_min)
    else:
        n_final = np.where(n_hat <= rule.n_min, float(rule.n_min),
                           np.minimum(n_hat, rule.n_max))
    n_final = n_final.astype(np.int64)
    m = n_final - nt

    z3 = rng.standard_normal(count)
    z4 = rng.standard_normal(count)
    extended = m > 0
    m_safe = np.where(extended, m, 1).astype(float)
    m1b = scenario.true_delta + sig / np.sqrt(m_safe) * z3
    m2b = sig / np.sqrt(m_safe) * z4
    wb1 = np.zeros(count)
    wb2 = np.zeros(count)
    need_ssq = m >= 2
    if np.any(need_ssq):
        df2 = (m[need_ssq] - 1).astype(float)
        wb1[need_ssq] = sig * sig * rng.chisquare(df2)
        wb2[need_ssq] = sig * sig * rng.chisquare(df2)

    n_tot = nt + m
    # parallel-axis combination of per-stage within-group sums of squares
    stage_wt = nt * m / n_tot
    mean1 = np.where(extended, (nt * m1 + m * m1b) / n_tot, m1)
    mean2 = np.where(extended, (nt * m2 + m * m2b) / n_tot, m2)
    ssw = w1 + w2 + np.where(
        extended,
        wb1 + wb2 + stage_wt * ((m1 - m1b) ** 2 + (m2 - m2b) ** 2),
        0.0)
    dof = 2 * n_tot - 2
    se = np.sqrt(ssw / dof * 2.0 / n_tot)
    q = _t_crit_array(1.0 - d.alpha, dof)
    diff = mean1 - mean2
    rej1 = (diff - d.delta_low) / se > q if math.isfinite(d.delta_low) \
        else np.ones(count, dtype=bool)
    rej2 = (diff - d.delta_up) / se < -q if math.isfinite(d.delta_up) \
        else np.ones(count, dtype=bool)

    counts = (
        int(np.sum(rej1 & rej2)),
        int(np.sum(~rej1 & rej2)),
        int(np.sum(rej1 & ~rej2)),
        int(np.sum(~rej1 & ~rej2)),
    )
    partial = (counts, int(n_tot.sum()), int((n_tot * n_tot).sum()),
               float(np.sum(sigma_t2)))
    if not collect:
        return partial
    # fixed-design comparison on the same stage-1 draws
    se_fixed = np.sqrt((w1 + w2) / (2 * nt - 2) * 2.0 / nt)
    q_fixed = _t_crit(1.0 - d.alpha, 2 * nt - 2)
    rej2_fixed = (diff1 - d.delta_up) / se_fixed < -q_fixed
    return partial, sigma_t2, rej2, rej2_fixed


def _chunk_plan(replications: int) -> list[tuple[int, int]]:
    chunks = []
    start = 0
    index = 0
    while start < replications:
        size = min(CHUNK_SIZE, replications - start)
        chunks.append((index, size))
        start += size
        index += 1
    return chunks


def _ssr_task(args):
    scenario, chunk_index, count = args
    return _ssr_chunk(scenario, chunk_index, count, collect=False)


def _reduce_partials(scenario: Scenario, partials) -> ScenarioResult:
    counts = [0, 0, 0, 0]
    sum_n = 0
    sum_n2 = 0
    sum_tv = 0.0
    for (c, n, n2, tv) in partials:
        for i in range(4):
            counts[i] += c[i]
        sum_n += n
        sum_n2 += n2
        sum_tv += tv
    return ScenarioResult(
        scenario=scenario,
        count_case1=counts[0], count_case2=counts[1],
        count_case3=counts[2], count_case4=counts[3],
        sum_realized_n=sum_n, sum_realized_n_sq=sum_n2, sum_sigma_t2=sum_tv)


def run_scenarios(scenarios: Sequence[Scenario], workers: int = 1,
                  ) -> list[ScenarioResult]:
    """Run many scenarios over a shared worker pool.

    Output order matches input order, and every value is bit-identical
    for any ``workers`` because chunks are reduced in index order.
    """
    tasks = []
    owners = []
    for si, sc in enumerate(scenarios):
        for (ci, size) in _chunk_plan(sc.replications):
            tasks.append((sc, ci, size))
            owners.append(si)
    if workers > 1 and len(tasks) > 1:
        chunksize = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_ssr_task, tasks, chunksize=chunksize))
    else:
        partials = [_ssr_task(t) for t in tasks]
    grouped: list[list] = [[] for _ in scenarios]
    for owner, partial in zip(owners, partials):
        grouped[owner].append(partial)
    # chunk order within a scenario is already task order
    return [_reduce_partials(sc, parts) for sc, parts in zip(scenarios, grouped)]


def run_scenario(scenario: Scenario, workers: int = 1) -> ScenarioResult:
    return run_scenarios([scenario], workers=workers)[0]


def run_grid(grid: GridSpec, workers: int = 1) -> list[ScenarioResult]:
    """One ScenarioResult per grid cell, in the grid's nested order."""
    return run_scenarios(grid.scenarios(), workers=workers)


def binned_rejection_analysis(n_stage1: int, delta0: float, reps: int,
                              master_seed: int, sigma: float = 1.0,
                              alpha: float = 0.05, beta: float = 0.10,
                              workers: int = 1) -> BinnedRejectionReport:
    """Paired fixed-vs-two-stage rejection rates by blinded-variance bin.

    Runs the unbounded rule (n_min equal to the stage-1 size) at the upper
    margin and splits replicates by their stage-1 total variance: the
    first bin is exactly the no-extension region, the rest are nine
    equal-count bins.  Both designs are tested on the same stage-1 draws.
    """
    design = TrialDesign(delta_low=-delta0, delta_up=delta0, sigma=sigma,
                         n1_stage1=n_stage1, n2_stage1=n_stage1,
                         alpha=alpha, beta=beta)
    scenario = Scenario(design=design, rule=SsrRule(n_min=n_stage1),
                        true_delta=delta0, replications=reps,
                        master_seed=master_seed)
    chunks = _chunk_plan(reps)
    outs = [_ssr_chunk(scenario, ci, size, collect=True) for ci, size in chunks]
    sigma_t2 = np.concatenate([o[1] for o in outs])
    rej_two = np.concatenate([o[2] for o in outs])
    rej_fixed = np.concatenate([o[3] for o in outs])

    threshold = n_stage1 * delta0 ** 2 / planning_factor(alpha, beta)
    in_first = sigma_t2 <= threshold
    rest = np.flatnonzero(~in_first)
    rest_sorted = rest[np.argsort(sigma_t2[rest], kind="stable")]
    groups = [np.flatnonzero(in_first)] + [
        g for g in np.array_split(rest_sorted, 9)]

    edges = [0.0, threshold]
    counts = []
    pct_fixed = []
    pct_two = []
    for g in groups:
        counts.append(len(g))
        pct_fixed.append(100.0 * float(np.mean(rej_fixed[g])) if len(g) else 0.0)
        pct_two.append(100.0 * float(np.mean(rej_two[g])) if len(g) else 0.0)
    for g in groups[1:]:
        edges.append(float(sigma_t2[g].max()) if len(g) else edges[-1])

    return BinnedRejectionReport(
        threshold_sigma_t2=threshold,
        bin_edges=tuple(edges),
        bin_counts=tuple(counts),
        reject_pct_fixed=tuple(pct_fixed),
        reject_pct_two_stage=tuple(pct_two),
        first_bin_mass_pct=100.0 * float(np.mean(in_first)),
        overall_reject_pct_fixed=100.0 * float(np.mean(rej_fixed)),
        overall_reject_pct_two_stage=100.0 * float(np.mean(rej_two)),
        replications=reps)


def peak_alpha_scan(n_stage1: int, delta0_grid: Iterable[float], reps: int,
                    master_seed: int, sigma: float = 1.0, alpha: float = 0.05,
                    beta: float = 0.10, workers: int = 1) -> PeakScanResult:
    """Scan %Case1 over margins under the unbounded rule; report the peak.

    Ties resolve to the smallest margin, which makes the argmax
    deterministic.
    """
    grid = tuple(float(v) for v in delta0_grid)
    if not grid:
        raise ValueError("delta0_grid must be non-empty")
    scenarios = []
    for d0 in grid:
        design = TrialDesign(delta_low=-d0, delta_up=d0, sigma=sigma,
                             n1_stage1=n_stage1, n2_stage1=n_stage1,
                             alpha=alpha, beta=beta)
        scenarios.append(Scenario(
            design=design, rule=SsrRule(n_min=n_stage1), true_delta=d0,
            replications=reps, master_seed=master_seed))
    results = run_scenarios(scenarios, workers=workers)
    pcts = tuple(r.pct_case1 for r in results)
    best = max(range(len(grid)), key=lambda i: (pcts[i], -grid[i]))
    return PeakScanResult(
        n_stage1=n_stage1, delta0_grid=grid, pct_case1=pcts,
        peak_pct_case1=pcts[best], argmax_delta0=grid[best],
        results=tuple(results))


def _threshold_words(n1, delta, delta_up, delta_low, c, alpha, sigma):
    key = ("threshold-rule-v1", n1, delta, delta_up, delta_low, c, alpha, sigma)
    digest = hashlib.blake2b(repr(key).encode(), digest_size=16).digest()
    return tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))


def _threshold_chunk(args):
    (n1, delta, delta_up, delta_low, c, alpha, sigma, m_continue,
     master_seed, chunk_index, count) = args
    words = _threshold_words(n1, delta, delta_up, delta_low, c, alpha, sigma)
    seq = np.random.SeedSequence(entropy=master_seed,
                                 spawn_key=words + (_TAG_THRESHOLD, chunk_index))
    rng = np.random.Generator(np.random.Philox(seq))

    n = 2 * n1
    m1 = delta + sigma / math.sqrt(n1) * rng.standard_normal(count)
    m2 = sigma / math.sqrt(n1) * rng.standard_normal(count)
    w1 = sigma * sigma * rng.chisquare(n1 - 1, count)
    w2 = sigma * sigma * rng.chisquare(n1 - 1, count)
    q1 = w1 + w2
    diff1 = m1 - m2
    q_between = 0.5 * n1 * diff1 * diff1
    small = q1 + q_between <= c

    # stopped trials: test on stage 1 alone
    q_stop = _t_crit(1.0 - alpha, n - 2)
    se_stop = np.sqrt(q1 / (n - 2) * 2.0 / n1)
    t_up_stop = (diff1 - delta_up) / se_stop
    t_low_stop = (diff1 - delta_low) / se_stop
    rej_up_stop = small & (t_up_stop < -q_stop)
    rej_eq_stop = rej_up_stop & (t_low_stop > q_stop)

    # continued trials: a large fixed second stage per group
    z3 = rng.standard_normal(count)
    z4 = rng.standard_normal(count)
    wb1 = sigma * sigma * rng.chisquare(m_continue - 1, count)
    wb2 = sigma * sigma * rng.chisquare(m_continue - 1, count)
    mc = m_continue
    n_tot = n1 + mc
    m1b = delta + sigma / math.sqrt(mc) * z3
    m2b = sigma / math.sqrt(mc) * z4
    mean1 = (n1 * m1 + mc * m1b) / n_tot
    mean2 = (n1 * m2 + mc * m2b) / n_tot
    stage_wt = n1 * mc / n_tot
    ssw = (q1 + wb1 + wb2
           + stage_wt * ((m1 - m1b) ** 2 + (m2 - m2b) ** 2))
    dof = 2 * n_tot - 2
    q_cont = _t_crit(1.0 - alpha, dof)
    se_cont = np.sqrt(ssw / dof * 2.0 / n_tot)
    diff = mean1 - mean2
    rej_up_cont = ~small & ((diff - delta_up) / se_cont < -q_cont)
    rej_eq_cont = rej_up_cont & ((diff - delta_low) / se_cont > q_cont)

    return (int(small.sum()), int(rej_up_stop.sum()), int(rej_eq_stop.sum()),
            int((rej_up_stop | rej_up_cont).sum()),
            int((rej_eq_stop | rej_eq_cont).sum()))


def simulate_threshold_rule(n1: int, delta: float, delta_up: float,
                            delta_low: float, c: float, reps: int,
                            master_seed: int, alpha: float = 0.05,
                            sigma: float = 1.0, m_continue: int | None = None,
                            workers: int = 1) -> ThresholdRuleResult:
    """Monte Carlo for the stop-if-small-blinded-variance rule.

    Stage 1 has n1 per group.  If the pooled sum of squares is at or
    below ``c`` the trial stops and tests immediately; otherwise a large
    second stage of ``m_continue`` per group (default 100*n1) approximates
    a continuation in which stage 1 no longer matters.  Used to
    cross-validate the quadrature path.
    """
    if n1 < 2:
        raise ValueError("n1 must be >= 2")
    if m_continue is None:
        m_continue = 100 * n1
    tasks = [(n1, delta, delta_up, delta_low, c, alpha, sigma, m_continue,
              master_seed, ci, size) for ci, size in _chunk_plan(reps)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_threshold_chunk, tasks))
    else:
        parts = [_threshold_chunk(t) for t in tasks]
    sums = [sum(p[i] for p in parts) for i in range(5)]
    return ThresholdRuleResult(
        prob_small=sums[0] / reps,
        ni_joint_small=sums[1] / reps,
        eq_joint_small=sums[2] / reps,
        ni_unconditional=sums[3] / reps,
        eq_unconditional=sums[4] / reps,
        replications=reps)
