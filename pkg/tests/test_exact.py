"""Tests for the exact threshold-rule analytics.

Reference values were frozen from an independent quadrature oracle
(scipy.stats distributions, brentq-located positivity boundaries,
epsabs 1e-12) and cross-checked against large Monte Carlo runs of the
same stopping rule; package and oracle agree to below 1e-9 everywhere.
"""

import math

import pytest
from scipy import stats

from blindssr.distributions import central_chi2_cdf, central_chi2_pdf, std_normal_cdf
from blindssr.engine import simulate_threshold_rule
from blindssr.exact import (
    ExactSetting,
    IntegrationLimits,
    eq_type1_exact,
    ni_type1_exact,
    prob_reject_and_small_variance,
    prob_small_variance,
    solve_integration_limits,
)

# frozen oracle chain for alpha=.05, sigma=1, delta=delta_up=.5,
# delta_low=-.5, c = n-1+(n1/2)*delta^2, keyed by n1
ORACLE = {
    12: dict(c=24.5, cstar_ni=24.1692962239, cstar_eq=11.1918097022,
             a1=0.0400725700, a2=0.0009065091, p=0.5390388911,
             ni_cond=0.0743407769, ni_unc=0.0631206254,
             eq_cond=0.0016817138, eq_unc=0.0239545646),
    24: dict(c=50.0, cstar_ni=49.9996735495, cstar_eq=48.9726255734,
             a1=0.0395476384, a2=0.0192687747, p=0.5273051596,
             ni_cond=0.0749995286, ni_unc=0.0631823804,
             eq_cond=0.0365419802, eq_unc=0.0429035167),
    40: dict(c=84.0, cstar_ni=84.0, cstar_eq=84.0,
             a1=0.0392590944, a2=0.0378773724, p=0.5210594980,
             ni_cond=0.0753447439, ni_unc=0.0632061195,
             eq_cond=0.0726929892, eq_unc=0.0618243975),
}


def benchmark_setting(n1):
    return ExactSetting(n1=n1, delta=0.5, delta_up=0.5)


class TestSetting:

    def test_default_threshold_is_expected_blinded_ssq(self):
        s = benchmark_setting(12)
        assert s.c == pytest.approx(24.5)
        assert s.n == 24
        assert s.delta_low == -0.5

    def test_default_threshold_scales_with_sigma(self):
        s = ExactSetting(n1=10, delta=0.4, delta_up=0.5, sigma=2.0)
        assert s.c == pytest.approx(19 * 4.0 + 5 * 0.16)

    def test_validation(self):
        with pytest.raises(ValueError):
            ExactSetting(n1=1, delta=0.5, delta_up=0.5)
        with pytest.raises(ValueError):
            ExactSetting(n1=12, delta=0.5, delta_up=0.5, delta_low=0.5)
        with pytest.raises(ValueError):
            ExactSetting(n1=12, delta=0.5, delta_up=0.5, sigma=0.0)
        with pytest.raises(ValueError):
            ExactSetting(n1=12, delta=0.5, delta_up=0.5, c=-1.0)
        with pytest.raises(ValueError):
            ExactSetting(n1=12, delta=0.5, delta_up=0.5, alpha=0.6)


class TestIntegrationLimits:

    @pytest.mark.parametrize("n1", [12, 24, 40])
    def test_ni_limits_match_oracle(self, n1):
        lim = solve_integration_limits(benchmark_setting(n1), "NI")
        assert lim.l_star == 0.0
        assert lim.c_star == pytest.approx(ORACLE[n1]["cstar_ni"], abs=1e-8)

    @pytest.mark.parametrize("n1", [12, 24, 40])
    def test_eq_limits_match_oracle(self, n1):
        lim = solve_integration_limits(benchmark_setting(n1), "EQ")
        assert lim.l_star == 0.0
        assert lim.c_star == pytest.approx(ORACLE[n1]["cstar_eq"], abs=1e-8)

    @pytest.mark.parametrize("n1", [12, 24])
    def test_interior_limit_satisfies_defining_equation(self, n1):
        # the NI upper limit solves q*sqrt(x/(n-2)) = -sqrt(c-x) - k*delta_up
        s = benchmark_setting(n1)
        lim = solve_integration_limits(s, "NI")
        assert lim.c_star < s.c
        n = s.n
        q = stats.t.ppf(s.alpha, n - 2)
        x = lim.c_star
        residual = (q * math.sqrt(x / (n - 2)) + math.sqrt(s.c - x)
                    + math.sqrt(s.n1 / 2) * s.delta_up)
        assert abs(residual) < 1e-10

    def test_no_interior_crossing_returns_full_range(self):
        # n1=40: the vanishing boundary sits beyond c, so c* = c
        s = benchmark_setting(40)
        assert solve_integration_limits(s, "NI").c_star == s.c

    def test_large_margin_gives_zero_to_c(self):
        s = ExactSetting(n1=12, delta=0.0, delta_up=30.0, delta_low=-30.0, c=23.0)
        for mode in ("NI", "EQ"):
            lim = solve_integration_limits(s, mode)
            assert (lim.l_star, lim.c_star) == (0.0, 23.0)

    def test_invalid_mode_rejected(self):
        with pytest.raises(ValueError):
            solve_integration_limits(benchmark_setting(12), "ni")

    def test_degenerate_limits_rejected(self):
        with pytest.raises(ValueError):
            IntegrationLimits(l_star=2.0, c_star=2.0)

    @pytest.mark.parametrize("n1,delta,delta_up,delta_low,c,mode", [
        (12, 0.5, 0.5, -0.5, None, "NI"),
        (12, 0.5, 0.5, -0.5, None, "EQ"),
        (24, 0.3, 0.5, -0.2, 40.0, "EQ"),
        (40, 0.5, 0.5, -0.5, None, "EQ"),
        (10, 0.8, 0.6, -0.6, 15.0, "NI"),
    ])
    def test_positivity_against_dense_scan(self, n1, delta, delta_up,
                                           delta_low, c, mode):
        # the unclamped integrand must be positive strictly inside the
        # limits and nonpositive just outside any interior boundary
        s = ExactSetting(n1=n1, delta=delta, delta_up=delta_up,
                         delta_low=delta_low, c=c)
        lim = solve_integration_limits(s, mode)
        n = s.n
        q = stats.t.ppf(s.alpha, n - 2)
        a = q / math.sqrt(n - 2)
        k = math.sqrt(s.n1 / 2)

        def height(x):
            upper = min(a * math.sqrt(x) - k * (s.delta - s.delta_up),
                        math.sqrt(s.c - x) - k * s.delta)
            lower = -math.sqrt(s.c - x) - k * s.delta
            if mode == "EQ":
                lower = max(lower,
                            -a * math.sqrt(x) - k * (s.delta - s.delta_low))
            return upper - lower

        eps = 1e-6 * s.c
        assert height(lim.l_star + eps) > 0
        assert height(lim.c_star - eps) > 0
        if lim.c_star < s.c:
            assert height(lim.c_star + eps) <= 0
        # dense scan: no positive point outside the returned interval
        for i in range(2001):
            x = s.c * i / 2001.0
            if height(x) > 0:
                assert lim.l_star <= x <= lim.c_star

    def test_empty_range_raises(self):
        # margin far below any plausible difference: never rejectable
        s = ExactSetting(n1=12, delta=0.0, delta_up=-3.0, delta_low=-4.0, c=23.0)
        with pytest.raises(ValueError, match="nowhere positive"):
            solve_integration_limits(s, "NI")


class TestJointProbabilities:

    @pytest.mark.parametrize("n1", [12, 24, 40])
    def test_a1_matches_oracle(self, n1):
        a1 = prob_reject_and_small_variance(benchmark_setting(n1))
        assert a1 == pytest.approx(ORACLE[n1]["a1"], abs=1e-8)

    @pytest.mark.parametrize("n1,published", [(12, 0.0401), (24, 0.0396),
                                              (40, 0.0393)])
    def test_a1_matches_published_rounding(self, n1, published):
        a1 = prob_reject_and_small_variance(benchmark_setting(n1))
        assert a1 == pytest.approx(published, abs=5e-4)

    @pytest.mark.parametrize("n1,published", [(12, 0.0009), (24, 0.0193),
                                              (40, 0.0379)])
    def test_eq_joint_matches_published_rounding(self, n1, published):
        joint, _, _ = eq_type1_exact(benchmark_setting(n1))
        assert joint == pytest.approx(published, abs=5e-4)

    def test_tolerance_halving_invariance(self):
        s = benchmark_setting(12)
        full = prob_reject_and_small_variance(s, abs_tol=1e-8)
        half = prob_reject_and_small_variance(s, abs_tol=5e-9)
        assert full == pytest.approx(half, abs=1e-8)

    def test_sigma_scaling_invariance(self):
        # scaling data by sigma leaves every probability unchanged
        base = ExactSetting(n1=12, delta=0.25, delta_up=0.25, c=24.5)
        scaled = ExactSetting(n1=12, delta=0.5, delta_up=0.5, sigma=2.0,
                              c=24.5 * 4.0)
        assert prob_reject_and_small_variance(scaled) == pytest.approx(
            prob_reject_and_small_variance(base), abs=1e-10)
        assert prob_small_variance(scaled) == pytest.approx(
            prob_small_variance(base), abs=1e-12)

    def test_empty_range_gives_zero_joint(self):
        s = ExactSetting(n1=12, delta=0.0, delta_up=-3.0, delta_low=-4.0, c=23.0)
        assert prob_reject_and_small_variance(s) == 0.0
        joint, _, _ = eq_type1_exact(s)
        assert joint == 0.0


class TestSmallVarianceProbability:

    @pytest.mark.parametrize("n1", [12, 24, 40])
    def test_matches_oracle(self, n1):
        p = prob_small_variance(benchmark_setting(n1))
        assert p == pytest.approx(ORACLE[n1]["p"], abs=1e-9)

    def test_delta_zero_reduces_to_central(self):
        s = ExactSetting(n1=12, delta=0.0, delta_up=0.5, c=23.0)
        assert prob_small_variance(s) == pytest.approx(
            central_chi2_cdf(23.0, 23), abs=1e-12)


class TestAssembledChains:

    @pytest.mark.parametrize("n1", [12, 24, 40])
    def test_ni_chain_matches_oracle(self, n1):
        cond, unc = ni_type1_exact(benchmark_setting(n1))
        assert cond == pytest.approx(ORACLE[n1]["ni_cond"], abs=1e-8)
        assert unc == pytest.approx(ORACLE[n1]["ni_unc"], abs=1e-8)

    @pytest.mark.parametrize("n1", [12, 24, 40])
    def test_eq_chain_matches_oracle(self, n1):
        joint, cond, unc = eq_type1_exact(benchmark_setting(n1))
        assert joint == pytest.approx(ORACLE[n1]["a2"], abs=1e-8)
        assert cond == pytest.approx(ORACLE[n1]["eq_cond"], abs=1e-8)
        assert unc == pytest.approx(ORACLE[n1]["eq_unc"], abs=1e-8)

    @pytest.mark.parametrize("n1", [12, 24, 40])
    def test_conditional_level_inflated(self, n1):
        cond, _ = ni_type1_exact(benchmark_setting(n1))
        assert cond >= 0.05

    def test_ni_unconditional_nondecreasing_in_n1(self):
        uncs = [ni_type1_exact(benchmark_setting(n1))[1] for n1 in (12, 24, 40)]
        assert uncs[0] <= uncs[1] <= uncs[2]

    @pytest.mark.parametrize("n1", [12, 24, 40])
    def test_eq_below_ni(self, n1):
        _, ni_unc = ni_type1_exact(benchmark_setting(n1))
        _, _, eq_unc = eq_type1_exact(benchmark_setting(n1))
        assert eq_unc <= ni_unc

    def test_no_stopping_limit_recovers_alpha(self):
        # with an unreachable threshold the rule never stops and the
        # unconditional level is exactly the idealized alpha
        s = ExactSetting(n1=12, delta=0.5, delta_up=0.5, c=1e8)
        _, unc = ni_type1_exact(s)
        assert unc == pytest.approx(0.05, abs=1e-9)
        assert prob_small_variance(s) == pytest.approx(1.0, abs=1e-12)


class TestMonteCarloCrossValidation:
    """The quadrature path against a simulation of the same stopping rule."""

    REPS = 1_000_000

    @staticmethod
    def three_se(p):
        return 3.0 * math.sqrt(p * (1.0 - p) / TestMonteCarloCrossValidation.REPS)

    @pytest.mark.parametrize("n1", [12, 24, 40])
    def test_stop_branch_quantities(self, n1):
        s = benchmark_setting(n1)
        mc = simulate_threshold_rule(
            n1=n1, delta=0.5, delta_up=0.5, delta_low=-0.5, c=s.c,
            reps=self.REPS, master_seed=1804289383)
        p = prob_small_variance(s)
        a1 = prob_reject_and_small_variance(s)
        a2 = eq_type1_exact(s)[0]
        assert abs(mc.prob_small - p) <= self.three_se(p)
        assert abs(mc.ni_joint_small - a1) <= self.three_se(a1)
        assert abs(mc.eq_joint_small - a2) <= self.three_se(a2)

    @pytest.mark.parametrize("n1", [12, 24, 40])
    def test_unconditional_with_dominant_second_stage(self, n1):
        # the unconditional value idealizes the continue branch as a
        # fresh level-alpha test; a second stage of 10^4 * n1 per group
        # makes the idealization error negligible next to 3 SEs
        s = benchmark_setting(n1)
        _, ni_unc = ni_type1_exact(s)
        _, _, eq_unc = eq_type1_exact(s)
        mc = simulate_threshold_rule(
            n1=n1, delta=0.5, delta_up=0.5, delta_low=-0.5, c=s.c,
            reps=self.REPS, master_seed=846930886, m_continue=10_000 * n1)
        assert abs(mc.ni_unconditional - ni_unc) <= self.three_se(ni_unc)
        assert abs(mc.eq_unconditional - eq_unc) <= self.three_se(eq_unc)


class TestInternals:

    def test_integrand_uses_own_distributions(self):
        # spot-agreement of the hand-built pieces against scipy on the
        # integrand scale, guarding the quadrature's ingredients
        for x in (0.5, 5.0, 20.0, 24.0):
            assert central_chi2_pdf(x, 22) == pytest.approx(
                stats.chi2.pdf(x, 22), abs=1e-12)
        for z in (-3.0, -0.5, 0.0, 1.5):
            assert std_normal_cdf(z) == pytest.approx(
                stats.norm.cdf(z), abs=1e-12)
