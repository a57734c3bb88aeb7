"""TOST decisions, case classification, CI duality."""

import math

import numpy as np
import pytest

from blindssr.tost import (
    Case,
    classify_case,
    ni_reject_h02,
    pooled_variance,
    tost_decide,
    tost_decide_from_stats,
)
from blindssr.trial import InsufficientDataError, TrialDesign


def make_design(**kw):
    base = dict(delta_low=-1.0, delta_up=1.0, sigma=1.0,
                n1_stage1=15, n2_stage1=15)
    base.update(kw)
    return TrialDesign(**base)


class TestPooledVariance:
    def test_constant_groups(self):
        assert pooled_variance([0.0, 0.0], [0.0, 0.0]) == 0.0

    def test_hand_value(self):
        assert pooled_variance([0.0, 2.0], [1.0, 3.0]) == pytest.approx(2.0)

    def test_matches_within_group_sum_of_squares(self):
        rng = np.random.default_rng(17)
        g1, g2 = rng.normal(0, 1, 9), rng.normal(2, 1, 14)
        ss = (np.sum((g1 - g1.mean()) ** 2) + np.sum((g2 - g2.mean()) ** 2))
        assert pooled_variance(g1, g2) == pytest.approx(ss / 21, rel=1e-12)

    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError):
            pooled_variance([1.0], [1.0, 2.0])


class TestClassifyCase:
    def test_exhaustive_mapping(self):
        assert classify_case(True, True) is Case.CASE1
        assert classify_case(False, True) is Case.CASE2
        assert classify_case(True, False) is Case.CASE3
        assert classify_case(False, False) is Case.CASE4

    def test_partition(self):
        labels = {classify_case(a, b) for a in (True, False) for b in (True, False)}
        assert labels == set(Case)


class TestTostDecide:
    def test_overwhelming_equivalence(self):
        rng = np.random.default_rng(4)
        d = make_design(delta_low=-10.0, delta_up=10.0)
        out = tost_decide(rng.normal(0, 0.01, 15), rng.normal(0, 0.01, 15), d)
        assert out.case_label is Case.CASE1
        assert out.reject_h01 and out.reject_h02

    def test_huge_negative_difference_is_case2(self):
        rng = np.random.default_rng(4)
        d = make_design()
        out = tost_decide(rng.normal(-50, 0.1, 15), rng.normal(0, 0.1, 15), d)
        assert out.reject_h02 and not out.reject_h01
        assert out.case_label is Case.CASE2

    def test_ci_duality_on_random_datasets(self):
        """Two-test decision equals CI-containment on 1e4 random instances."""
        rng = np.random.default_rng(1234)
        for _ in range(10_000):
            n1 = int(rng.integers(2, 12))
            n2 = int(rng.integers(2, 12))
            margin = float(rng.uniform(0.2, 2.5))
            d = make_design(delta_low=-margin, delta_up=margin,
                            n1_stage1=n1, n2_stage1=n2)
            g1 = rng.normal(rng.uniform(-2, 2), rng.uniform(0.2, 2.0), n1)
            g2 = rng.normal(0, rng.uniform(0.2, 2.0), n2)
            out = tost_decide(g1, g2, d)
            contained = d.delta_low < out.ci_low and out.ci_high < d.delta_up
            assert (out.case_label is Case.CASE1) == contained
            assert out.ci_low <= out.ci_high

    def test_symmetry_under_negation(self):
        rng = np.random.default_rng(8)
        d = make_design(delta_low=-0.4, delta_up=1.3)
        d_swapped = make_design(delta_low=-1.3, delta_up=0.4)
        for _ in range(300):
            g1 = rng.normal(0.4, 1.0, 10)
            g2 = rng.normal(0.0, 1.0, 10)
            a = tost_decide(g1, g2, d)
            b = tost_decide(-g1, -g2, d_swapped)
            assert a.reject_h01 == b.reject_h02
            assert a.reject_h02 == b.reject_h01
            swap = {Case.CASE2: Case.CASE3, Case.CASE3: Case.CASE2}
            assert b.case_label is swap.get(a.case_label, a.case_label)

    def test_larger_s_never_creates_case1(self):
        d = make_design()
        for diff in (-0.9, -0.3, 0.0, 0.5, 0.95):
            prev_case1 = True
            for s in np.linspace(0.01, 5.0, 60):
                out = tost_decide_from_stats(diff, float(s), 15, 15, d)
                is_case1 = out.case_label is Case.CASE1
                # once equivalence is lost as s grows it never comes back
                assert not (is_case1 and not prev_case1)
                prev_case1 = is_case1

    def test_degenerate_variance_uses_margin_comparison(self):
        d = make_design()
        inside = tost_decide([0.2] * 5, [0.0] * 5, d)
        assert inside.case_label is Case.CASE1
        outside = tost_decide([-3.0] * 5, [0.0] * 5, d)
        assert outside.case_label is Case.CASE2
        boundary = tost_decide([1.0] * 5, [0.0] * 5, d)
        assert not boundary.reject_h02    # strict comparison at the margin

    def test_infinite_lower_margin_gives_pure_ni(self):
        rng = np.random.default_rng(10)
        d = make_design(delta_low=-math.inf, delta_up=1.0)
        out = tost_decide(rng.normal(0, 1, 15), rng.normal(0, 1, 15), d)
        assert out.reject_h01    # lower test always rejects
        assert out.t_low == math.inf

    def test_ni_reject_is_upper_rejection(self):
        d = make_design()
        rng = np.random.default_rng(2)
        for _ in range(200):
            out = tost_decide(rng.normal(0.5, 1, 8), rng.normal(0, 1, 8), d)
            assert ni_reject_h02(out) == out.reject_h02
            assert ni_reject_h02(out) == (out.case_label in (Case.CASE1, Case.CASE2))

    def test_matches_reference_t_test(self):
        """One-sided p-values from scipy agree with the decisions."""
        from scipy import stats as sps
        rng = np.random.default_rng(33)
        d = make_design(delta_low=-0.8, delta_up=0.8, alpha=0.05)
        for _ in range(300):
            g1 = rng.normal(0.2, 1.0, 12)
            g2 = rng.normal(0.0, 1.0, 12)
            out = tost_decide(g1, g2, d)
            t_up_ref = sps.ttest_ind(g1 - d.delta_up, g2, equal_var=True).statistic
            assert out.t_up == pytest.approx(t_up_ref, rel=1e-10)
            p_up = sps.t.cdf(t_up_ref, 22)
            assert out.reject_h02 == (p_up < 0.05)
