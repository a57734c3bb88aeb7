"""Command-line front end.

Subcommands map onto the library layers: ``grid`` sweeps a configured
parameter grid, ``scenario`` runs one cell, ``binned`` and ``peaks``
reproduce the diagnostic analyses, ``exact`` evaluates the quadrature
path with no simulation, and ``validate`` runs a quick in-process
invariant suite.  Every simulation command takes an explicit
``--seed``; there is no wall-clock fallback, so identical invocations
produce identical files.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Optional, Sequence

from .config import ConfigError, parse_config, parse_number_list
from .engine import (
    Scenario,
    binned_rejection_analysis,
    peak_alpha_scan,
    run_grid,
    run_scenario,
    simulate_threshold_rule,
)
from .exact import (
    ExactSetting,
    eq_type1_exact,
    ni_type1_exact,
    prob_reject_and_small_variance,
    prob_small_variance,
)
from .report import (
    ensure_out_dir,
    svg_curves,
    svg_heatmap,
    write_results_csv,
)
from .ssr import SsrRule
from .trial import TrialDesign

__all__ = ["main"]

VALIDATE_SEED = 20240817    # fixed default so `validate` is deterministic


def _parse_n_max(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(int(text))


def _int_list(text: str) -> list[int]:
    try:
        return [int(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}")


def _add_sim_flags(sub, seed_required=True):
    sub.add_argument("--reps", type=int, default=None,
                     help="replications per cell")
    sub.add_argument("--seed", type=int, default=None, required=seed_required,
                     help="master seed (required; runs are reproducible)")
    sub.add_argument("--workers", type=int, default=None,
                     help="worker processes (default 1)")
    sub.add_argument("--out", default=None, metavar="DIR",
                     help="output directory for result files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blindssr",
        description="Blinded sample-size re-estimation: type I error "
                    "simulation and exact evaluation for equivalence and "
                    "non-inferiority trials.")
    subs = parser.add_subparsers(dest="command", required=True)

    grid = subs.add_parser(
        "grid", help="sweep a parameter grid from a config file")
    grid.add_argument("--config", default=None, metavar="FILE",
                      help="key = value config file defining the grid")
    grid.add_argument("--curves", action="store_true",
                      help="also emit per-family curve panels")
    _add_sim_flags(grid, seed_required=False)
    grid.set_defaults(func=cmd_grid)

    scenario = subs.add_parser("scenario", help="simulate a single grid cell")
    scenario.add_argument("--n-stage1", type=int, required=True,
                          help="per-group stage-1 size")
    scenario.add_argument("--n-min", type=int, required=True,
                          help="per-group lower bound for the final size")
    scenario.add_argument("--n-max", type=_parse_n_max, default=math.inf,
                          help='per-group upper bound, or "inf" (default)')
    scenario.add_argument("--delta0", type=float, required=True,
                          help="equivalence margin (also the planning margin)")
    scenario.add_argument("--true-delta", type=float, default=None,
                          help="true mean difference (default: the margin)")
    scenario.add_argument("--sigma", type=float, default=1.0)
    scenario.add_argument("--alpha", type=float, default=0.05)
    scenario.add_argument("--beta", type=float, default=0.10)
    _add_sim_flags(scenario)
    scenario.set_defaults(func=cmd_scenario)

    binned = subs.add_parser(
        "binned", help="reject rates by blinded-variance bin, fixed vs "
                       "two-stage, unbounded rule")
    binned.add_argument("--n-stage1", type=int, default=15)
    binned.add_argument("--delta0", type=float, default=1.0)
    binned.add_argument("--sigma", type=float, default=1.0)
    _add_sim_flags(binned)
    binned.set_defaults(func=cmd_binned)

    peaks = subs.add_parser(
        "peaks", help="scan margins for the worst-case percent Case 1 per "
                      "stage-1 size, unbounded rule")
    peaks.add_argument("--n-stage1", type=_int_list, default=[10],
                       metavar="N[,N...]")
    peaks.add_argument("--delta0-grid", default="0.05:1.5:0.05",
                       help="margin grid, list or start:stop:step "
                            "(default 0.05:1.5:0.05)")
    _add_sim_flags(peaks)
    peaks.set_defaults(func=cmd_peaks)

    exact = subs.add_parser(
        "exact", help="exact stop-and-reject probabilities by quadrature")
    exact.add_argument("--n1", type=_int_list, required=True,
                       metavar="N[,N...]", help="per-group stage-1 size(s)")
    exact.add_argument("--alpha", type=float, default=0.05)
    exact.add_argument("--sigma", type=float, default=1.0)
    exact.add_argument("--delta-up", type=float, required=True,
                       help="upper equivalence margin")
    exact.add_argument("--delta-low", type=float, default=None,
                       help="lower margin (default: -delta_up)")
    exact.add_argument("--delta", type=float, default=None,
                       help="true mean difference (default: delta_up)")
    exact.add_argument("--c", type=float, default=None,
                       help="variance-threshold constant (default: the "
                            "calibrated value for the setting)")
    exact.set_defaults(func=cmd_exact)

    validate = subs.add_parser(
        "validate", help="run the in-process invariant checks")
    validate.add_argument("--reps", type=int, default=200_000)
    validate.add_argument("--seed", type=int, default=VALIDATE_SEED)
    validate.add_argument("--workers", type=int, default=1)
    validate.set_defaults(func=cmd_validate)

    return parser


def _result_lines(result) -> list[str]:
    sc = result.scenario
    n_max = "inf" if math.isinf(sc.rule.n_max) else str(int(sc.rule.n_max))
    return [
        f"n_stage1={sc.design.n1_stage1} bounds=[{sc.rule.n_min}, {n_max}] "
        f"delta0={sc.design.delta_up:g} true_delta={sc.true_delta:g} "
        f"reps={sc.replications} seed={sc.master_seed}",
        f"  case1={result.pct_case1:.4f}%  case2={result.pct_case2:.4f}%  "
        f"case3={result.pct_case3:.4f}%  case4={result.pct_case4:.4f}%",
        f"  ni_rejection={result.ni_rejection_pct:.4f}%  "
        f"mean_n={result.mean_realized_n:.4f}  "
        f"sd_n={result.sd_realized_n:.4f}  "
        f"mean_sigma_t2={result.mean_sigma_t2:.6f}",
    ]


def cmd_grid(args) -> int:
    config = parse_config(args.config, overrides={
        "replications": args.reps, "master_seed": args.seed,
        "workers": args.workers, "out_dir": args.out})
    grid = config.grid_spec()
    results = run_grid(grid, workers=config.workers)
    out = ensure_out_dir(config.out_dir)
    csv_path = os.path.join(out, "results.csv")
    heat_path = os.path.join(out, "heatmap.svg")
    write_results_csv(results, csv_path)
    svg_heatmap(results, heat_path)
    written = [csv_path, heat_path]
    if args.curves:
        families: dict[tuple, list] = {}
        for result in results:
            sc = result.scenario
            key = (sc.design.n1_stage1, sc.rule.n_min, sc.rule.n_max)
            families.setdefault(key, []).append(result)
        for (n1, n_min, n_max), family in sorted(families.items()):
            if len(family) < 2:
                continue
            tag = "inf" if math.isinf(n_max) else str(int(n_max))
            path = os.path.join(out, f"curves_n{n1}_min{n_min}_max{tag}.svg")
            svg_curves(family, path)
            written.append(path)
    print(f"simulated {len(results)} cells x {grid.replications} replications")
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_scenario(args) -> int:
    if args.reps is None:
        raise ConfigError("scenario needs --reps")
    delta0 = args.delta0
    design = TrialDesign(delta_low=-delta0, delta_up=delta0, sigma=args.sigma,
                         n1_stage1=args.n_stage1, n2_stage1=args.n_stage1,
                         alpha=args.alpha, beta=args.beta)
    rule = SsrRule(n_min=args.n_min, n_max=args.n_max)
    true_delta = delta0 if args.true_delta is None else args.true_delta
    scenario = Scenario(design=design, rule=rule, true_delta=true_delta,
                        replications=args.reps, master_seed=args.seed)
    result = run_scenario(scenario, workers=args.workers or 1)
    for line in _result_lines(result):
        print(line)
    if args.out is not None:
        out = ensure_out_dir(args.out)
        csv_path = os.path.join(out, "results.csv")
        write_results_csv([result], csv_path)
        print(f"wrote {csv_path}")
    return 0


def cmd_binned(args) -> int:
    if args.reps is None:
        raise ConfigError("binned needs --reps")
    report = binned_rejection_analysis(
        args.n_stage1, args.delta0, args.reps, args.seed, sigma=args.sigma,
        workers=args.workers or 1)
    print(f"n_stage1={args.n_stage1} delta0={args.delta0:g} "
          f"reps={report.replications} seed={args.seed}")
    print(f"no-extension threshold: blinded variance <= "
          f"{report.threshold_sigma_t2:.4f}")
    print(f"first-bin mass: {report.first_bin_mass_pct:.4f}% of trials")
    print(f"{'bin':>3} {'upper_edge':>10} {'count':>9} "
          f"{'fixed_pct':>9} {'two_stage_pct':>13}")
    for i, count in enumerate(report.bin_counts):
        print(f"{i:>3} {report.bin_edges[i + 1]:>10.4f} {count:>9} "
              f"{report.reject_pct_fixed[i]:>9.4f} "
              f"{report.reject_pct_two_stage[i]:>13.4f}")
    print(f"overall: fixed={report.overall_reject_pct_fixed:.4f}% "
          f"two_stage={report.overall_reject_pct_two_stage:.4f}%")
    if args.out is not None:
        out = ensure_out_dir(args.out)
        path = os.path.join(out, "binned.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("# schema_version=1\n")
            fh.write("bin,upper_edge,count,reject_pct_fixed,"
                     "reject_pct_two_stage\n")
            for i, count in enumerate(report.bin_counts):
                fh.write(f"{i},{report.bin_edges[i + 1]!r},{count},"
                         f"{report.reject_pct_fixed[i]:.4f},"
                         f"{report.reject_pct_two_stage[i]:.4f}\n")
        print(f"wrote {path}")
    return 0


def cmd_peaks(args) -> int:
    if args.reps is None:
        raise ConfigError("peaks needs --reps")
    grid = parse_number_list(args.delta0_grid)
    all_results = []
    for n_stage1 in args.n_stage1:
        scan = peak_alpha_scan(n_stage1, grid, args.reps, args.seed,
                               workers=args.workers or 1)
        print(f"n_stage1={n_stage1}: peak case1 = "
              f"{scan.peak_pct_case1:.4f}% at delta0 = "
              f"{scan.argmax_delta0:g}")
        all_results.extend(scan.results)
    if args.out is not None:
        out = ensure_out_dir(args.out)
        csv_path = os.path.join(out, "results.csv")
        write_results_csv(all_results, csv_path)
        print(f"wrote {csv_path}")
    return 0


def cmd_exact(args) -> int:
    print(f"{'n1':>4} {'p_small':>8} {'ni_joint':>9} {'ni_cond':>8} "
          f"{'ni_unc':>8} {'eq_joint':>9} {'eq_cond':>8} {'eq_unc':>8}")
    delta = args.delta_up if args.delta is None else args.delta
    for n1 in args.n1:
        setting = ExactSetting(
            n1=n1, delta=delta, delta_up=args.delta_up,
            delta_low=args.delta_low, alpha=args.alpha, sigma=args.sigma,
            c=args.c)
        p_small = prob_small_variance(setting)
        ni_joint = prob_reject_and_small_variance(setting)
        ni_cond, ni_unc = ni_type1_exact(setting)
        eq_joint, eq_cond, eq_unc = eq_type1_exact(setting)
        print(f"{n1:>4} {p_small:>8.4f} {ni_joint:>9.4f} {ni_cond:>8.4f} "
              f"{ni_unc:>8.4f} {eq_joint:>9.4f} {eq_cond:>8.4f} "
              f"{eq_unc:>8.4f}")
    return 0


def _check_partition(reps, seed, workers):
    scenario = Scenario(
        design=TrialDesign(delta_low=-0.95, delta_up=0.95, sigma=1.0,
                           n1_stage1=15, n2_stage1=15),
        rule=SsrRule(n_min=18, n_max=30), true_delta=0.95,
        replications=reps, master_seed=seed)
    result = run_scenario(scenario, workers=workers)
    total = (result.count_case1 + result.count_case2 + result.count_case3
             + result.count_case4)
    return total == reps, f"cases sum to {total} of {reps}"


def _check_worker_determinism(reps, seed, workers):
    scenario = Scenario(
        design=TrialDesign(delta_low=-0.95, delta_up=0.95, sigma=1.0,
                           n1_stage1=15, n2_stage1=15),
        rule=SsrRule(n_min=18, n_max=30), true_delta=0.95,
        replications=min(reps, 150_000), master_seed=seed)
    serial = run_scenario(scenario, workers=1)
    pooled = run_scenario(scenario, workers=max(2, workers))
    same = (serial.count_case1, serial.count_case2, serial.sum_realized_n) == \
           (pooled.count_case1, pooled.count_case2, pooled.sum_realized_n)
    return same, "1-worker and multi-worker counts identical" if same else \
        "worker count changed the results"


def _check_fixed_design_level(reps, seed, workers):
    scenario = Scenario(
        design=TrialDesign(delta_low=-0.95, delta_up=0.95, sigma=1.0,
                           n1_stage1=15, n2_stage1=15),
        rule=SsrRule(n_min=15, n_max=15), true_delta=0.95,
        replications=reps, master_seed=seed)
    result = run_scenario(scenario, workers=workers)
    se = 100.0 * math.sqrt(0.05 * 0.95 / reps)
    dev = abs(result.ni_rejection_pct - 5.0)
    return dev <= 3 * se, (f"fixed-design rejection "
                           f"{result.ni_rejection_pct:.4f}% vs 5% "
                           f"(|dev| = {dev:.4f}, 3 SE = {3 * se:.4f})")


def _check_exact_vs_mc(reps, seed, workers):
    setting = ExactSetting(n1=12, delta=0.5, delta_up=0.5)
    p_small = prob_small_variance(setting)
    joint = prob_reject_and_small_variance(setting)
    mc = simulate_threshold_rule(
        n1=12, delta=0.5, delta_up=0.5, delta_low=-0.5, c=setting.c,
        reps=reps, master_seed=seed, workers=workers)
    ok = True
    details = []
    for name, exact_p, mc_p in (("p_small", p_small, mc.prob_small),
                                ("ni_joint", joint, mc.ni_joint_small)):
        se = math.sqrt(exact_p * (1 - exact_p) / reps)
        dev = abs(mc_p - exact_p)
        ok = ok and dev <= 4 * se
        details.append(f"{name} dev {dev / se:.2f} SE")
    return ok, "; ".join(details)


def _check_quadrature_tolerance(reps, seed, workers):
    setting = ExactSetting(n1=24, delta=0.5, delta_up=0.5)
    coarse = prob_reject_and_small_variance(setting, abs_tol=1e-8)
    fine = prob_reject_and_small_variance(setting, abs_tol=5e-9)
    dev = abs(coarse - fine)
    return dev <= 1e-8, f"tolerance halving moved the value by {dev:.2e}"


def cmd_validate(args) -> int:
    checks = [
        ("case-partition", _check_partition),
        ("worker-determinism", _check_worker_determinism),
        ("fixed-design-level", _check_fixed_design_level),
        ("exact-vs-simulation", _check_exact_vs_mc),
        ("quadrature-tolerance", _check_quadrature_tolerance),
    ]
    failures = 0
    for name, check in checks:
        ok, detail = check(args.reps, args.seed, args.workers)
        status = "PASS" if ok else "FAIL"
        failures += 0 if ok else 1
        print(f"{status} {name}: {detail}")
    if failures:
        print(f"{failures} of {len(checks)} checks failed")
        return 1
    print(f"all {len(checks)} checks passed")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
