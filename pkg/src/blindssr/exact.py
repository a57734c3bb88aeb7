"""Exact rejection probabilities for a variance-threshold stopping rule.

The rule: after a balanced stage 1 of n1 per group, stop and test
immediately when the blinded pooled sum of squares Q1 + Q2 is at or
below a threshold c; otherwise extend so heavily that the final test is
effectively a fresh level-alpha test.  Conditional on Q1 = x, the
standardized mean difference is normal and the stopping event confines
it to an interval, so the joint probability of stopping and rejecting is
a one-dimensional integral over the central chi-square density of Q1.

Everything here is standardized internally: x, c and Q live in units of
sigma^2, mean differences in units of sigma.  Rejection geometry, with
W the standardized mean-difference pivot and a = q/sqrt(n-2) < 0 for
q the lower-alpha t quantile:

    reject upper null   W <= u(x)   u(x) = a*sqrt(x) - k*(delta - delta_up)
    reject lower null   W >= l(x)   l(x) = -a*sqrt(x) - k*(delta - delta_low)
    stop (small Q)      s_minus(x) <= W <= s_plus(x),
                        s_pm(x) = pm sqrt(c - x) - k*delta

with k = sqrt(n1/2).  Upper envelopes (u, s_plus) decrease in x and
lower envelopes (l, s_minus) increase, so the region where the integrand
is positive is a single interval [l*, c*) with l* = 0 whenever it is
non-empty; c* is the smallest verified crossing of an upper envelope
with a lower one.  The crossing equations a*sqrt(x) + b = ±sqrt(c-x)
square to quadratics in sqrt(x), and every quadratic root is checked
against the original equation before use, since squaring invents
solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from scipy.integrate import quad

from .distributions import (
    central_chi2_cdf,
    central_chi2_pdf,
    noncentral_chi2_cdf,
    std_normal_cdf,
    student_t_quantile,
)

__all__ = [
    "ExactSetting",
    "IntegrationLimits",
    "QuadratureError",
    "solve_integration_limits",
    "prob_reject_and_small_variance",
    "prob_small_variance",
    "ni_type1_exact",
    "eq_type1_exact",
]

_MODES = ("NI", "EQ")


class QuadratureError(ArithmeticError):
    """Adaptive quadrature could not reach the requested accuracy."""


@dataclass(frozen=True)
class ExactSetting:
    """Parameters of the threshold rule: sizes, margins, truth, threshold.

    ``c`` bounds Q1 + Q2 in data units; by default it equals the
    expectation of Q1 + Q2 at the stated truth, (n-1)*sigma^2 +
    (n1/2)*delta^2, i.e. the rule stops when the blinded sum of squares
    does not exceed its anticipated value.  ``delta_low`` defaults to
    the mirror of ``delta_up``.
    """

    n1: int
    delta: float
    delta_up: float
    delta_low: Optional[float] = None
    alpha: float = 0.05
    sigma: float = 1.0
    c: Optional[float] = None

    def __post_init__(self):
        if self.n1 < 2:
            raise ValueError("n1 must be >= 2")
        if not 0.0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 0.5)")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError("sigma must be positive and finite")
        if self.delta_low is None:
            object.__setattr__(self, "delta_low", -self.delta_up)
        if not self.delta_low < self.delta_up:
            raise ValueError("delta_low must be below delta_up")
        if self.c is None:
            object.__setattr__(
                self, "c",
                (self.n - 1) * self.sigma ** 2 + (self.n1 / 2) * self.delta ** 2)
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError("threshold c must be positive and finite")

    @property
    def n(self) -> int:
        return 2 * self.n1


@dataclass(frozen=True)
class IntegrationLimits:
    """Positivity interval of the quadrature integrand, within [0, c]."""

    l_star: float
    c_star: float
    interior_points: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not 0.0 <= self.l_star < self.c_star:
            raise ValueError("limits must satisfy 0 <= l_star < c_star")


@dataclass(frozen=True)
class _Geometry:
    """Standardized envelope coefficients for one setting."""

    a: float        # q / sqrt(n-2), negative
    k: float        # sqrt(n1/2)
    c: float        # threshold in sigma^2 units
    du: float       # delta_up / sigma
    dl: float       # delta_low / sigma
    dd: float       # delta / sigma
    df1: int        # n - 2


def _geometry(s: ExactSetting) -> _Geometry:
    q = student_t_quantile(s.alpha, s.n - 2)
    return _Geometry(
        a=q / math.sqrt(s.n - 2),
        k=math.sqrt(s.n1 / 2),
        c=s.c / s.sigma ** 2,
        du=s.delta_up / s.sigma,
        dl=s.delta_low / s.sigma,
        dd=s.delta / s.sigma,
        df1=s.n - 2)


def _upper_env(g: _Geometry, x: float) -> float:
    r = math.sqrt(x)
    u = g.a * r - g.k * (g.dd - g.du)
    return min(u, math.sqrt(g.c - x) - g.k * g.dd)


def _lower_env(g: _Geometry, x: float, eq_mode: bool) -> float:
    s_minus = -math.sqrt(g.c - x) - g.k * g.dd
    if not eq_mode:
        return s_minus
    low = -g.a * math.sqrt(x) - g.k * (g.dd - g.dl)
    return max(low, s_minus)


def _solve_sqrt_crossing(a: float, b: float, c: float, sign: float,
                         tol: float = 1e-12) -> list[float]:
    """Verified solutions x in [0, c] of a*sqrt(x) + b = sign*sqrt(c-x).

    Substituting t = sqrt(x) yields (a^2+1)t^2 + 2abt + (b^2-c) = 0.
    Squaring can invent roots, so every candidate is checked against the
    original equation; a numerically degenerate discriminant falls back
    to bisection on the original equation.
    """
    lead = a * a + 1.0
    disc = lead * c - b * b
    scale = 1.0 + abs(a) * math.sqrt(c) + abs(b)

    def residual(x: float) -> float:
        return a * math.sqrt(x) + b - sign * math.sqrt(max(c - x, 0.0))

    candidates: list[float] = []
    if disc > tol * scale * scale:
        root = math.sqrt(disc)
        for t in ((-a * b + root) / lead, (-a * b - root) / lead):
            if t < -tol:
                continue
            x = min(max(t, 0.0) ** 2, c)
            if abs(residual(x)) <= 1e-9 * scale:
                candidates.append(x)
    elif disc > -tol * scale * scale:
        # barely-touching parabola: bisect the original equation instead
        lo, hi = 0.0, c
        flo, fhi = residual(lo), residual(hi)
        if flo == 0.0:
            candidates.append(lo)
        elif fhi == 0.0:
            candidates.append(hi)
        elif flo * fhi < 0:
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if residual(mid) * flo <= 0:
                    hi = mid
                else:
                    lo = mid
            candidates.append(0.5 * (lo + hi))
    out: list[float] = []
    for x in sorted(candidates):
        if not any(abs(x - y) <= tol * (1.0 + x) for y in out):
            out.append(x)
    return out


def _crossing_candidates(g: _Geometry, eq_mode: bool) -> list[float]:
    """All verified envelope crossings in [0, c], sorted."""
    pts: list[float] = []
    # upper-null bound u against the stop interval ends
    pts += _solve_sqrt_crossing(g.a, g.k * g.du, g.c, -1.0)
    pts += _solve_sqrt_crossing(g.a, g.k * g.du, g.c, +1.0)
    if eq_mode:
        # lower-null bound l against the stop interval ends
        pts += _solve_sqrt_crossing(-g.a, g.k * g.dl, g.c, +1.0)
        pts += _solve_sqrt_crossing(-g.a, g.k * g.dl, g.c, -1.0)
        # u = l has the closed form sqrt(x) = -k(du-dl)/(2a)
        t = -g.k * (g.du - g.dl) / (2.0 * g.a)
        if 0.0 <= t and t * t <= g.c:
            pts.append(t * t)
    uniq: list[float] = []
    for x in sorted(pts):
        if not any(abs(x - y) <= 1e-12 * (1.0 + x) for y in uniq):
            uniq.append(x)
    return uniq


def _positivity_interval(s: ExactSetting, eq_mode: bool,
                         ) -> Optional[IntegrationLimits]:
    """Interval where the integrand is positive, or None if empty.

    Candidate breakpoints are the envelope crossings; the integrand's
    sign is constant between consecutive breakpoints, so midpoint signs
    identify the positive span.
    """
    g = _geometry(s)
    crossings = _crossing_candidates(g, eq_mode)
    breaks = sorted({0.0, g.c, *crossings})
    spans = []
    for lo, hi in zip(breaks, breaks[1:]):
        mid = 0.5 * (lo + hi)
        if _upper_env(g, mid) > _lower_env(g, mid, eq_mode):
            spans.append((lo, hi))
    if not spans:
        return None
    l_star, c_star = spans[0][0], spans[-1][1]
    for (_, prev_hi), (next_lo, _) in zip(spans, spans[1:]):
        if next_lo != prev_hi:
            raise ArithmeticError(
                "positivity region is not a single interval; "
                f"spans={spans}, setting={s}")
    interior = tuple(x for x in crossings if l_star < x < c_star)
    scaled = s.sigma ** 2
    return IntegrationLimits(
        l_star=l_star * scaled, c_star=c_star * scaled,
        interior_points=tuple(x * scaled for x in interior))


def solve_integration_limits(setting: ExactSetting,
                             mode: str) -> IntegrationLimits:
    """Quadrature range for the given mode ("NI" or "EQ"), in data units.

    Raises ValueError when the integrand is nowhere positive (the joint
    probability is then exactly zero).
    """
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}, got {mode!r}")
    limits = _positivity_interval(setting, eq_mode=(mode == "EQ"))
    if limits is None:
        raise ValueError("integrand is nowhere positive for this setting")
    return limits


def _chi2_tail_cap(df: int) -> float:
    """An x beyond which the chi-square(df) survival is negligible (<1e-14)."""
    x = df + 10.0 * math.sqrt(2.0 * df) + 50.0
    while 1.0 - central_chi2_cdf(x, df) > 1e-14:
        x *= 2.0
    return x


def _joint_quadrature(s: ExactSetting, eq_mode: bool, abs_tol: float) -> float:
    limits = _positivity_interval(s, eq_mode)
    if limits is None:
        return 0.0
    g = _geometry(s)
    scaled = s.sigma ** 2
    lo = limits.l_star / scaled
    hi = min(limits.c_star / scaled, _chi2_tail_cap(g.df1))
    if hi <= lo:
        return 0.0

    def integrand(x: float) -> float:
        p = std_normal_cdf(_upper_env(g, x)) - std_normal_cdf(
            _lower_env(g, x, eq_mode))
        return max(p, 0.0) * central_chi2_pdf(x, g.df1)

    pts = [x for x in limits.interior_points
           if lo < x / scaled < hi]
    value, err = quad(integrand, lo, hi,
                      points=[x / scaled for x in pts] or None,
                      epsabs=abs_tol, epsrel=1e-10, limit=200)
    if err > 1e-6:
        raise QuadratureError(
            f"quadrature error estimate {err:.3e} exceeds 1e-6 over "
            f"[{lo:.6g}, {hi:.6g}] (eq_mode={eq_mode}, setting={s})")
    return value


def prob_reject_and_small_variance(setting: ExactSetting,
                                   abs_tol: float = 1e-8) -> float:
    """P(reject the upper null AND stop with a small blinded variance)."""
    return _joint_quadrature(setting, eq_mode=False, abs_tol=abs_tol)


def prob_small_variance(setting: ExactSetting) -> float:
    """P(Q1 + Q2 <= c): a noncentral chi-square probability.

    Q1 + Q2 in sigma^2 units is chi-square with n-1 degrees of freedom
    and noncentrality (n1/2)*(delta/sigma)^2.
    """
    s = setting
    return noncentral_chi2_cdf(
        s.c / s.sigma ** 2, s.n - 1, (s.n1 / 2) * (s.delta / s.sigma) ** 2)


def ni_type1_exact(setting: ExactSetting,
                   abs_tol: float = 1e-8) -> tuple[float, float]:
    """(conditional, unconditional) upper-null rejection probabilities.

    Conditional is relative to stopping.  The unconditional value treats
    the continue branch as an exact level-alpha test, the idealization
    of an overwhelming second stage; the Monte Carlo cross-check in the
    test suite simulates that branch with a large finite extension.
    """
    a1 = prob_reject_and_small_variance(setting, abs_tol=abs_tol)
    p_small = prob_small_variance(setting)
    conditional = a1 / p_small
    return conditional, a1 + (1.0 - p_small) * setting.alpha


def eq_type1_exact(setting: ExactSetting,
                   abs_tol: float = 1e-8) -> tuple[float, float, float]:
    """(joint_small, conditional, unconditional) for rejecting both nulls.

    joint_small is the probability of stopping and rejecting both; the
    unconditional value adds a full alpha for the continue branch, which
    makes it an upper-null-style bound under the same idealization as
    the one-sided path.
    """
    joint = _joint_quadrature(setting, eq_mode=True, abs_tol=abs_tol)
    p_small = prob_small_variance(setting)
    conditional = joint / p_small
    return joint, conditional, joint + (1.0 - p_small) * setting.alpha
