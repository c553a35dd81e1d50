"""Command line front end.

Subcommands: eos-check (quick EOS validation), solve (single run at the
heaviest schedule level), experiment (full vanishing-dissipation sweep),
kato (no-slip wall-layer sweep).  Exit codes: 0 pass, 2 a convergence
verdict failed, 3 a solver run failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .harness import (
    ExperimentConfig,
    InvalidSchedule,
    consistency_decreasing,
    convergence_assert,
    corrector_checks,
    kato_verdict,
    persist,
    run_experiment,
)
from .thermodynamics import build_gas_model, gibbs_residual, stability_check

_EXIT_PASS = 0
_EXIT_VERDICT = 2
_EXIT_SOLVER = 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gamma", type=float, default=1.4)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--mu0", type=float, default=0.1)
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--grid", nargs=2, type=int, metavar=("NX", "NY"), default=(128, 64))
    p.add_argument("--bc", choices=("slip", "noslip"), default="slip")
    p.add_argument("--family", choices=("stationary", "traveling"), default="stationary")
    p.add_argument("--speed", type=float, default=0.25)
    p.add_argument("--p0", type=float, default=1.0)
    p.add_argument("--tfinal", type=float, default=0.5)
    p.add_argument("--out", default=None, help="directory for summary.csv / series.csv / summary.json")
    p.add_argument("--config", default=None, help="JSON file whose entries override the flags")
    p.add_argument("--deterministic", action="store_true")


def _config_from(args) -> ExperimentConfig:
    data = {
        "gamma": args.gamma,
        "alpha": args.alpha,
        "mu0": args.mu0,
        "levels": args.levels,
        "nx": args.grid[0],
        "ny": args.grid[1],
        "bc": args.bc,
        "family": args.family,
        "speed": args.speed,
        "p0": args.p0,
        "t_final": args.tfinal,
        "deterministic": args.deterministic,
    }
    if args.config:
        with open(args.config) as fh:
            data.update(json.load(fh))
    return ExperimentConfig.from_config(data)


def _print_levels(report) -> None:
    for lv in report.levels:
        if not lv.ok:
            print(f"n={lv.n} FAILED: {lv.error}")
            continue
        print(
            f"n={lv.n} mu={lv.mu:.4e} a={lv.a:.4e} kappa={lv.kappa:.4e} "
            f"sup_Ea={lv.sup_rel_energy:.6e} final_Ea={lv.final_rel_energy:.6e} "
            f"drift={lv.energy_drift:.2e} wall={lv.wall_seconds:.1f}s"
        )


def _branch_states(gas, side, count, rng, lo=0.5, hi=2.0, band_frac=0.02):
    """Rejection-sample `count` states whose Z lies strictly on one side of
    the threshold, outside a relative seam band (second derivatives of the
    structure functions jump there and would pollute finite differences)."""
    band = band_frac * gas.z_threshold
    rho_out: list[np.ndarray] = []
    theta_out: list[np.ndarray] = []
    have = 0
    while have < count:
        rho = rng.uniform(lo, hi, size=4 * count)
        theta = rng.uniform(lo, hi, size=4 * count)
        z = gas.z_of(rho, theta)
        keep = z < gas.z_threshold - band if side < 0 else z > gas.z_threshold + band
        rho_out.append(rho[keep])
        theta_out.append(theta[keep])
        have += int(np.count_nonzero(keep))
    return np.concatenate(rho_out)[:count], np.concatenate(theta_out)[:count]


def eos_suite(gamma, n_per_branch=10_000, seed=0, fd_step=1e-4):
    """Gibbs, identity, and stability sweep for one adiabatic exponent.

    Returns a dict with the worst Gibbs residual per branch at fd_step,
    the fitted decay order at the worst state, the pressure-identity
    defect, the stability report, and an overall `passed` flag.
    """
    gas = build_gas_model(gamma, 2.0)
    rng = np.random.default_rng(seed)
    out = {"gamma": gamma, "branches": {}}
    worst = 0.0
    orders = []
    for name, side in (("ideal", -1), ("degenerate", +1)):
        rho, theta = _branch_states(gas, side, n_per_branch, rng)
        r1, r2 = gibbs_residual(gas, rho, theta, fd_step=fd_step)
        res = np.maximum(np.abs(r1), np.abs(r2))
        i = int(np.argmax(res))
        fine = float(res[i])
        c1, c2 = gibbs_residual(gas, rho[i : i + 1], theta[i : i + 1], fd_step=10.0 * fd_step)
        coarse = float(max(abs(c1[0]), abs(c2[0])))
        # an argmax already at roundoff means the decay has bottomed out
        order = np.log10(coarse / fine) if fine > 1e-11 else 2.0
        p = gas.pressure(rho, theta)
        ident = float(np.max(np.abs(p - (gamma - 1.0) * rho * gas.internal_energy(rho, theta)) / p))
        out["branches"][name] = {"worst_gibbs": fine, "order": float(order), "identity": ident}
        worst = max(worst, fine)
        orders.append(float(order))
    out["stability"] = stability_check(gas, np.geomspace(1e-3, 1e3, 4001))
    out["worst_gibbs"] = worst
    out["identity"] = max(b["identity"] for b in out["branches"].values())
    out["passed"] = (
        worst < 1e-6
        and all(1.7 < o < 2.3 for o in orders)
        and out["identity"] < 1e-13
        and out["stability"].passed
    )
    return out


def cmd_eos_check(args) -> int:
    suite = eos_suite(args.gamma)
    for name, b in suite["branches"].items():
        print(f"{name}: worst gibbs {b['worst_gibbs']:.3e} (fd decay order {b['order']:.2f})")
    print(f"pressure identity p=(gamma-1) rho e: {suite['identity']:.3e}")
    rep = suite["stability"]
    print(f"structure bounds: P'>0 and gamma P - P'Z > 0 on {rep.n_samples} samples: {rep.passed}")
    print("eos-check:", "PASS" if suite["passed"] else "FAIL")
    return _EXIT_PASS if suite["passed"] else _EXIT_VERDICT


def cmd_solve(args) -> int:
    config = dataclasses.replace(_config_from(args), levels=1)
    report = run_experiment(config)
    _print_levels(report)
    if args.out:
        persist(report, args.out)
    return _EXIT_PASS if report.levels[0].ok else _EXIT_SOLVER


def cmd_experiment(args) -> int:
    config = _config_from(args)
    report = run_experiment(config)
    _print_levels(report)
    extra = {}
    if config.bc == "slip":
        verdict = convergence_assert(report)
        cons = consistency_decreasing(report)
        extra["convergence"] = {"passed": verdict.passed, "ratio": verdict.ratio, "messages": verdict.messages}
        extra["consistency"] = {"passed": cons.passed, "ratio": cons.ratio, "messages": cons.messages}
        print(f"convergence: {'PASS' if verdict.passed else 'FAIL'} ratio={verdict.ratio:.3g}")
        for m in verdict.messages + cons.messages:
            print("  -", m)
        passed = verdict.passed and cons.passed
    else:
        kv = kato_verdict(report)
        cc = corrector_checks(config)
        extra["kato"] = kv
        extra["corrector"] = cc
        state = "PASS" if kv["passed"] and cc["passed"] else "FAIL"
        print(f"wall-layer verdict: {state} hypothesis_met={kv['hypothesis_met']}")
        for m in list(kv["messages"]) + list(cc["messages"]):
            print("  -", m)
        passed = kv["passed"] and cc["passed"]
    if args.out:
        persist(report, args.out, extra=extra)
    if any(not lv.ok for lv in report.levels):
        return _EXIT_SOLVER
    return _EXIT_PASS if passed else _EXIT_VERDICT


def cmd_kato(args) -> int:
    args.bc = "noslip"
    args.family = "traveling"
    config = _config_from(args)
    report = run_experiment(config)
    _print_levels(report)
    kv = kato_verdict(report)
    cc = corrector_checks(config)
    print("resolved levels:", kv["resolved_levels"])
    for name in ("mu_over_delta", "theta_sq", "normal_momentum"):
        print(f"{name}: " + " ".join(f"{v:.4e}" for v in kv[name]))
    print(f"hypothesis_met={kv['hypothesis_met']} energy_ratio={kv['energy_ratio']}")
    print(f"corrector scalings: {'PASS' if cc['passed'] else 'FAIL'}")
    if args.out:
        persist(report, args.out, extra={"kato": kv, "corrector": cc})
    if any(not lv.ok for lv in report.levels):
        return _EXIT_SOLVER
    return _EXIT_PASS if kv["passed"] and cc["passed"] else _EXIT_VERDICT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsflab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eos-check", help="random-state EOS validation")
    p.add_argument("--gamma", type=float, default=1.4)
    p.set_defaults(fn=cmd_eos_check)

    for name, fn, hlp in (
        ("solve", cmd_solve, "single run at the heaviest level"),
        ("experiment", cmd_experiment, "full schedule sweep with verdicts"),
        ("kato", cmd_kato, "no-slip wall-layer sweep"),
    ):
        p = sub.add_parser(name, help=hlp)
        _add_common(p)
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InvalidSchedule as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
