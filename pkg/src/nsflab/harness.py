"""Dissipation schedules, experiment orchestration, and persistence.

A schedule couples the shear viscosity mu_n = mu0 2^-n to the radiation
coefficient a_n = mu_n^{4/(1+alpha)}, the heat conductivity
kappa_n = a_n^{3/4} sigma_n with slack sigma_n = mu_n^{1/2}, and the wall
layer width delta_n = mu_n^{1/2}.  run_experiment marches the viscous
channel solver once per level from exact reference initial data and
measures, per sampled time, the augmented relative energy against the
reference trio, the energy-inequality budget, the consistency error
norms, and the wall-layer functionals.  convergence_assert turns the
collected series into a pass/fail verdict; persist writes CSV/JSON whose
floats round-trip exactly through repr.

One grid serves all levels so the coefficient limit is not conflated
with grid refinement; fine_grid_check reruns the last level on a doubled
grid to bound the discretization contribution, and scheme_tolerances
derives the inequality-gap and entropy-defect tolerances from a
half-grid rerun of the heaviest level.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .boundary_layer import (
    KatoTerms,
    apply_corrector,
    build_corrector,
    corrector_estimates,
    gradient_energy_exponent,
    kato_terms,
)
from .euler_reference import (
    EulerSolution,
    sample_trio,
    stationary_family,
    threshold_from_bounds,
    traveling_family,
)
from .grid import BoundarySpec, Grid
from .relative_energy import (
    ConsistencyReport,
    augmented_relative_energy,
    consistency_errors,
    cumulative_trapezoid,
    dissipation_rate,
    fit_consistency_constant,
    inequality_gap_series,
    remainder_terms,
    weighted_dissipation,
)
from .solver import SolverConfig, SolverError, initialize, run, total_entropy_integral
from .thermodynamics import GasModel, build_gas_model
from .transport import TransportModel


class InvalidSchedule(ValueError):
    """Schedule or experiment parameters outside their admissible ranges."""


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class DissipationLevel:
    n: int
    mu: float
    a: float
    kappa: float
    delta: float
    sigma: float

    @property
    def omega(self) -> float:
        """Slack entering the consistency fits: mu + kappa + kappa/a^{3/4}."""
        return self.mu + self.kappa + self.sigma


@dataclass(frozen=True)
class DissipationSchedule:
    alpha: float
    mu0: float
    levels: tuple

    def __len__(self):
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)

    def __getitem__(self, k):
        return self.levels[k]


def build_schedule(mu0: float, alpha: float, levels: int) -> DissipationSchedule:
    if not 0.0 < mu0 <= 1.0:
        raise InvalidSchedule(f"mu0 must lie in (0, 1], got {mu0}")
    if not 1.0 / 3.0 <= alpha <= 1.0:
        raise InvalidSchedule(f"alpha must lie in [1/3, 1], got {alpha}")
    if levels < 2:
        raise InvalidSchedule(f"need at least 2 levels, got {levels}")
    out = []
    expo = 4.0 / (1.0 + alpha)
    for n in range(levels):
        mu = mu0 * 0.5**n
        a = mu**expo
        sigma = mu**0.5
        out.append(DissipationLevel(n=n, mu=mu, a=a, kappa=a**0.75 * sigma, delta=sigma, sigma=sigma))
    return DissipationSchedule(alpha=alpha, mu0=mu0, levels=tuple(out))


# ---------------------------------------------------------------------------
# experiment configuration


_FAMILIES = ("stationary", "traveling")
_BCS = ("slip", "noslip")


@dataclass(frozen=True)
class ExperimentConfig:
    gamma: float = 1.4
    alpha: float = 1.0
    mu0: float = 0.1
    levels: int = 5
    nx: int = 128
    ny: int = 64
    bc: str = "slip"
    family: str = "stationary"
    speed: float = 0.25
    p0: float = 1.0
    amplitude: float = 0.2
    t_final: float = 0.5
    samples: int = 11
    cfl: float = 0.4
    limiter: str = "central"
    perturbation: float = 0.0
    deterministic: bool = False

    def __post_init__(self):
        if self.bc not in _BCS:
            raise InvalidSchedule(f"bc must be one of {_BCS}, got {self.bc!r}")
        if self.family not in _FAMILIES:
            raise InvalidSchedule(f"family must be one of {_FAMILIES}, got {self.family!r}")
        if self.levels < 1:
            raise InvalidSchedule("need at least one level")
        if self.samples < 2:
            raise InvalidSchedule("need at least two sample times")
        if self.t_final <= 0.0:
            raise InvalidSchedule("t_final must be positive")
        if self.bc == "noslip" and self.mu0**0.5 >= 0.5:
            raise InvalidSchedule("mu0 too large: the wall layer delta_0 = mu0^{1/2} must stay below 1/2")

    def to_config(self) -> dict:
        return {
            "gamma": self.gamma,
            "alpha": self.alpha,
            "mu0": self.mu0,
            "levels": self.levels,
            "nx": self.nx,
            "ny": self.ny,
            "bc": self.bc,
            "family": self.family,
            "speed": self.speed,
            "p0": self.p0,
            "amplitude": self.amplitude,
            "t_final": self.t_final,
            "samples": self.samples,
            "cfl": self.cfl,
            "limiter": self.limiter,
            "perturbation": self.perturbation,
            "deterministic": self.deterministic,
        }

    @classmethod
    def from_config(cls, data: dict) -> "ExperimentConfig":
        known = set(cls().to_config())
        unknown = set(data) - known
        if unknown:
            raise InvalidSchedule(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def build_gas_for(config: ExperimentConfig) -> GasModel:
    rho_max = 1.0 + config.amplitude
    e_min = config.p0 / ((config.gamma - 1.0) * rho_max)
    return build_gas_model(config.gamma, threshold_from_bounds(config.gamma, rho_max, e_min))


def build_family(config: ExperimentConfig, grid: Grid, gas: GasModel) -> EulerSolution:
    if config.family == "stationary":
        return stationary_family(gas, config.p0, config.amplitude, length=grid.lx)
    return traveling_family(gas, config.p0, config.amplitude, config.speed, length=grid.lx)


# ---------------------------------------------------------------------------
# per-level run


@dataclass
class LevelReport:
    n: int
    mu: float
    a: float
    kappa: float
    delta: float
    omega: float
    ok: bool = False
    error: str = ""
    times: tuple = ()
    rel_energy: tuple = ()
    dissipation: tuple = ()  # Theta-weighted, as on the inequality left side
    production: tuple = ()  # plain entropy production, integrates to D_n
    remainder: tuple = ()
    gap: tuple = ()
    e_series: tuple = ()  # per sample: the six consistency norms
    e_norms: tuple = ()  # time-integrated
    l1_rho: float = np.nan
    l1_rhoe: float = np.nan
    l1_mom: float = np.nan
    d_n: float = np.nan
    kato: KatoTerms | None = None
    energy_drift: float = np.nan
    entropy_defect: float = np.nan
    sup_rel_energy: float = np.nan
    final_rel_energy: float = np.nan
    wall_seconds: float = 0.0


def _perturbed_initial_data(config, grid, sol, level):
    x, y = grid.cell_centers()
    rho = sol.density(0.0, x, y)
    ux, uy = sol.velocity(0.0, x, y)
    theta = sol.temperature(0.0, x, y)
    if config.perturbation != 0.0:
        # smooth, wall-parity-even bump, one scale per level
        eps = config.perturbation * level.mu**0.5
        bump = np.cos(4.0 * np.pi * x / grid.lx) * np.cos(np.pi * y) ** 2
        rho = rho * (1.0 + eps * bump)
        theta = theta * (1.0 + 0.5 * eps * bump)
    return rho, ux, uy, theta


def run_level(
    config: ExperimentConfig,
    grid: Grid,
    gas: GasModel,
    transport: TransportModel,
    sol: EulerSolution,
    level: DissipationLevel,
) -> LevelReport:
    report = LevelReport(
        n=level.n, mu=level.mu, a=level.a, kappa=level.kappa, delta=level.delta, omega=level.omega
    )
    started = time.perf_counter()
    try:
        solver_cfg = SolverConfig(
            gas=gas,
            transport=transport,
            bc=BoundarySpec(config.bc),
            radiation_coeff=level.a,
            shear_coeff=level.mu,
            heat_coeff=level.kappa,
            cfl=config.cfl,
            limiter=config.limiter,
        )
        rho0, ux0, uy0, th0 = _perturbed_initial_data(config, grid, sol, level)
        fld = initialize(solver_cfg, grid, rho0, ux0, uy0, th0)
        energy0 = grid.integrate(fld.energy)
        entropy0 = total_entropy_integral(solver_cfg, grid, fld.rho, fld.theta)
        stamps = np.linspace(0.0, config.t_final, config.samples)
        snaps = run(solver_cfg, fld, config.t_final, sample_times=stamps)
        if len(snaps) != config.samples:
            raise SolverError(f"collected {len(snaps)} snapshots, expected {config.samples}")

        corrector = build_corrector(sol, level.delta) if config.bc == "noslip" else None
        ea, wdiss, prod, rem, es = [], [], [], [], []
        l1r, l1e, l1m = [], [], []
        for snap in snaps:
            trio = sample_trio(sol, grid, snap.t)
            raw_trio = trio
            if corrector is not None:
                trio = apply_corrector(grid, trio, corrector)
            ea.append(max(augmented_relative_energy(grid, gas, level.a, snap, trio), 0.0))
            wdiss.append(weighted_dissipation(grid, transport, snap, trio, level.mu, level.kappa))
            prod.append(dissipation_rate(grid, transport, snap, level.mu, level.kappa))
            rem.append(
                remainder_terms(grid, gas, transport, level.a, level.mu, level.kappa, snap, trio).total
            )
            es.append(consistency_errors(grid, transport, level.a, level.mu, level.kappa, snap).as_tuple())
            # L1 distances to the raw reference fields, as in the limit statement
            l1r.append(grid.integrate(np.abs(snap.rho - raw_trio.r)))
            l1e.append(
                grid.integrate(
                    np.abs(
                        snap.rho * gas.internal_energy(snap.rho, snap.theta)
                        - raw_trio.r * gas.internal_energy(raw_trio.r, raw_trio.Theta)
                    )
                )
            )
            l1m.append(
                grid.integrate(
                    np.hypot(
                        snap.rho * snap.ux - raw_trio.r * raw_trio.Ux,
                        snap.rho * snap.uy - raw_trio.r * raw_trio.Uy,
                    )
                )
            )

        times = np.array([s.t for s in snaps])
        report.times = tuple(float(t) for t in times)
        report.rel_energy = tuple(ea)
        report.dissipation = tuple(wdiss)
        report.production = tuple(prod)
        report.remainder = tuple(rem)
        report.gap = tuple(
            float(g) for g in inequality_gap_series(times, np.array(ea), np.array(wdiss), np.array(rem))
        )
        report.e_series = tuple(es)
        report.e_norms = tuple(
            float(cumulative_trapezoid(times, np.array([row[i] for row in es]))[-1]) for i in range(6)
        )
        report.l1_rho = float(cumulative_trapezoid(times, np.array(l1r))[-1])
        report.l1_rhoe = float(cumulative_trapezoid(times, np.array(l1e))[-1])
        report.l1_mom = float(cumulative_trapezoid(times, np.array(l1m))[-1])
        report.d_n = float(cumulative_trapezoid(times, np.array(prod))[-1])
        report.kato = kato_terms(grid, snaps, level.delta, level.mu)
        energy1 = grid.integrate(fld.energy)
        report.energy_drift = abs(energy1 - energy0) / energy0
        entropy1 = total_entropy_integral(solver_cfg, grid, fld.rho, fld.theta)
        report.entropy_defect = (entropy1 - entropy0) - report.d_n
        report.sup_rel_energy = float(max(ea))
        report.final_rel_energy = float(ea[-1])
        report.ok = True
    except SolverError as exc:
        report.ok = False
        report.error = str(exc)
    report.wall_seconds = 0.0 if config.deterministic else time.perf_counter() - started
    return report


# ---------------------------------------------------------------------------
# whole experiment


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    schedule: DissipationSchedule
    levels: list

    def successful(self):
        return [lv for lv in self.levels if lv.ok]


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run every schedule level on one grid and collect the diagnostics."""
    grid = Grid(config.nx, config.ny)
    gas = build_gas_for(config)
    transport = TransportModel(alpha=config.alpha)
    sol = build_family(config, grid, gas)
    schedule = build_schedule(config.mu0, config.alpha, max(2, config.levels))
    used = schedule.levels[: config.levels]
    reports = [run_level(config, grid, gas, transport, sol, lv) for lv in used]
    return ExperimentReport(config=config, schedule=schedule, levels=reports)


def consistency_fit(report: ExperimentReport, epsilon: float = 0.5) -> ConsistencyReport:
    """Fit the per-level consistency constants from the collected series."""
    ok = report.successful()
    constants = []
    for lv in ok:
        prod = np.array(lv.production)
        en = np.array(lv.rel_energy)
        row = tuple(
            fit_consistency_constant(
                np.array([row[i] for row in lv.e_series]), prod, en, epsilon, lv.omega
            )
            for i in range(6)
        )
        constants.append(row)
    return ConsistencyReport(
        levels=tuple(lv.n for lv in ok),
        omegas=tuple(lv.omega for lv in ok),
        constants=tuple(constants),
    )


@dataclass(frozen=True)
class Verdict:
    passed: bool
    ratio: float
    messages: tuple


def _decreasing(seq, slack=0.0):
    return all(b < a * (1.0 + slack) + 1e-300 for a, b in zip(seq, seq[1:]))


def convergence_assert(report: ExperimentReport, ratio_threshold: float = 0.25) -> Verdict:
    """Check the vanishing-dissipation conclusion on the measured series.

    Requires the sup-in-time relative energy to decrease strictly across
    levels with last/first below the threshold, and the space-time L1
    distances of (rho, rho e, momentum) to the reference to decrease.
    No rate is asserted.
    """
    ok = report.successful()
    msgs = []
    if len(ok) < 3:
        return Verdict(False, np.nan, (f"only {len(ok)} successful levels, need 3",))
    sup = [lv.sup_rel_energy for lv in ok]
    if not all(b < a for a, b in zip(sup, sup[1:])):
        msgs.append(f"sup relative energy not strictly decreasing: {sup}")
    ratio = sup[-1] / sup[0] if sup[0] > 0.0 else 0.0
    if not ratio < ratio_threshold:
        msgs.append(f"relative-energy ratio {ratio:.3g} >= {ratio_threshold}")
    for name in ("l1_rho", "l1_rhoe", "l1_mom"):
        series = [getattr(lv, name) for lv in ok]
        if not (_decreasing(series, slack=1e-9) and series[-1] < series[0]):
            msgs.append(f"{name} not decreasing: {series}")
    return Verdict(passed=not msgs, ratio=float(ratio), messages=tuple(msgs))


def consistency_decreasing(report: ExperimentReport) -> Verdict:
    """Every consistency norm must shrink strictly along the schedule."""
    ok = report.successful()
    if len(ok) < 2:
        return Verdict(False, np.nan, ("need at least 2 successful levels",))
    msgs = []
    worst = 0.0
    for i in range(6):
        series = [lv.e_norms[i] for lv in ok]
        worst = max(worst, series[-1] / series[0] if series[0] > 0 else 0.0)
        if not all(b < a for a, b in zip(series, series[1:])):
            msgs.append(f"E{i + 1} not strictly decreasing: {series}")
    return Verdict(passed=not msgs, ratio=float(worst), messages=tuple(msgs))


def kato_verdict(report: ExperimentReport, ratio_threshold: float = 0.5) -> dict:
    """Conditional wall-layer verdict.

    Measures the three layer functionals on the resolved levels.  Only if
    the third one (scaled normal momentum) decreases does the conclusion
    get asserted: the sup relative energy against the corrected trio must
    decrease with final/initial ratio below the threshold.
    """
    ok = [lv for lv in report.successful() if lv.kato is not None]
    resolved = [lv for lv in ok if lv.kato.resolved]
    result = {
        "resolved_levels": [lv.n for lv in resolved],
        "mu_over_delta": [lv.kato.mu_over_delta for lv in resolved],
        "theta_sq": [lv.kato.theta_sq for lv in resolved],
        "normal_momentum": [lv.kato.normal_momentum for lv in resolved],
        "hypothesis_met": False,
        "energy_ratio": np.nan,
        "passed": True,
        "messages": [],
    }
    if len(resolved) < 2:
        result["messages"].append("fewer than 2 resolved levels; nothing to conclude")
        return result
    k3 = result["normal_momentum"]
    result["hypothesis_met"] = all(b < a for a, b in zip(k3, k3[1:]))
    if not result["hypothesis_met"]:
        result["messages"].append(f"third layer functional not decreasing: {k3}")
        return result
    sup = [lv.sup_rel_energy for lv in resolved]
    ratio = sup[-1] / sup[0] if sup[0] > 0 else 0.0
    result["energy_ratio"] = float(ratio)
    if not all(b < a for a, b in zip(sup, sup[1:])):
        result["passed"] = False
        result["messages"].append(f"corrected relative energy not decreasing: {sup}")
    if not ratio < ratio_threshold:
        result["passed"] = False
        result["messages"].append(f"energy ratio {ratio:.3g} >= {ratio_threshold}")
    return result


def corrector_checks(config: ExperimentConfig) -> dict:
    """Verify the wall-corrector bounds across the schedule's layer widths.

    Checked: the corrector is divergence-free with zero normal component
    and zero tangential gradient; its sup and time derivative stay bounded
    by the reference speed independently of delta; the normal gradient
    scales like 1/delta with the cutoff's slope constant 15/8; and the
    fitted exponents of the gradient energy (~1/delta) and the L2 mass
    (~delta) sit near -1 and +1.
    """
    grid = Grid(config.nx, config.ny)
    gas = build_gas_for(config)
    sol = build_family(config, grid, gas)
    schedule = build_schedule(config.mu0, config.alpha, max(2, config.levels))
    deltas = [lv.delta for lv in schedule.levels[: config.levels]]
    speed = abs(sol.speed)
    slope_cap = 15.0 / 8.0

    x, y = grid.cell_centers()
    rows, msgs = [], []
    for d in deltas:
        corr = build_corrector(sol, d)
        vx, vy = corr.velocity(0.0, x, y)
        ax, ay = corr.velocity_dt(0.0, x, y)
        gxx, gxy, gyx, gyy = corr.velocity_grad(0.0, x, y)
        row = {
            "delta": d,
            "linf": float(np.max(np.hypot(vx, vy))),
            "linf_dt": float(np.max(np.hypot(ax, ay))),
            "div_max": float(np.max(np.abs(corr.divergence(0.0, x, y)))),
            "normal_max": float(np.max(np.abs(vy))),
            "tangential_grad_max": float(np.max(np.abs([gxx, gyx, gyy]))),
            "normal_grad_scaled": float(d * np.max(np.abs(gxy))),
            "resolved": bool(d >= 2.0 * grid.h),
        }
        rows.append(row)
        if row["div_max"] > 1e-12:
            msgs.append(f"delta={d:g}: corrector not divergence-free")
        if row["linf"] > speed * (1.0 + 1e-12) or row["linf_dt"] > 1e-12:
            msgs.append(f"delta={d:g}: sup bound exceeded")
        if row["normal_max"] > 1e-12 or row["tangential_grad_max"] > 1e-12:
            msgs.append(f"delta={d:g}: normal component or tangential gradient nonzero")
        if row["normal_grad_scaled"] > slope_cap * speed * (1.0 + 1e-12):
            msgs.append(f"delta={d:g}: normal gradient above the 15/8 cutoff slope")
        if speed > 0.0 and row["resolved"] and row["normal_grad_scaled"] < 0.5 * slope_cap * speed:
            msgs.append(f"delta={d:g}: normal gradient fails to reach the 1/delta scale")

    result = {"levels": rows, "passed": not msgs, "messages": msgs}
    if speed > 0.0:
        grad_slope = gradient_energy_exponent(grid, sol, deltas)
        l2 = [corrector_estimates(grid, build_corrector(sol, d))["l2_sq"] for d in deltas]
        l2_slope = float(np.polyfit(np.log(deltas), np.log(l2), 1)[0])
        result["grad_energy_exponent"] = grad_slope
        result["l2_exponent"] = l2_slope
        if not -1.2 < grad_slope < -0.8:
            msgs.append(f"gradient-energy exponent {grad_slope:.3g} outside [-1.2, -0.8]")
        if not 0.8 < l2_slope < 1.2:
            msgs.append(f"L2 exponent {l2_slope:.3g} outside [0.8, 1.2]")
        result["passed"] = not msgs
    return result


# ---------------------------------------------------------------------------
# discretization cross-checks


def fine_grid_check(config: ExperimentConfig, coarse_level: LevelReport | None = None) -> dict:
    """Rerun the last level on a doubled grid; report the sup-energy change."""
    schedule = build_schedule(config.mu0, config.alpha, max(2, config.levels))
    level = schedule.levels[config.levels - 1]

    def _sup(nx, ny):
        grid = Grid(nx, ny)
        gas = build_gas_for(config)
        sol = build_family(config, grid, gas)
        rep = run_level(config, grid, gas, TransportModel(alpha=config.alpha), sol, level)
        if not rep.ok:
            raise SolverError(f"fine-grid check failed: {rep.error}")
        return rep.sup_rel_energy

    coarse = coarse_level.sup_rel_energy if coarse_level is not None else _sup(config.nx, config.ny)
    fine = _sup(2 * config.nx, 2 * config.ny)
    change = abs(fine - coarse) / max(coarse, 1e-300)
    return {"coarse_sup": float(coarse), "fine_sup": float(fine), "rel_change": float(change)}


def scheme_tolerances(
    config: ExperimentConfig, coarse_level0: LevelReport | None = None, safety: float = 4.0
) -> dict:
    """Two-grid tolerances for the inequality gap and the entropy defect.

    The heaviest level carries the largest discretization error, so its
    gap series on the working grid and on a half grid bound the scheme
    contribution; safety covers the unextrapolated remainder.
    """
    if config.nx % 2 or config.ny % 2 or config.ny < 8:
        raise InvalidSchedule("grid too small to halve for the tolerance estimate")
    schedule = build_schedule(config.mu0, config.alpha, max(2, config.levels))
    level = schedule.levels[0]

    def _level_on(nx, ny):
        grid = Grid(nx, ny)
        gas = build_gas_for(config)
        sol = build_family(config, grid, gas)
        rep = run_level(config, grid, gas, TransportModel(alpha=config.alpha), sol, level)
        if not rep.ok:
            raise SolverError(f"tolerance run failed: {rep.error}")
        return rep

    base = coarse_level0 if coarse_level0 is not None else _level_on(config.nx, config.ny)
    half = _level_on(config.nx // 2, config.ny // 2)
    gap_tol = safety * float(np.max(np.abs(np.array(base.gap) - np.array(half.gap)))) + 1e-14
    entropy_tol = safety * abs(base.entropy_defect - half.entropy_defect) + 1e-12
    return {"gap_tol": gap_tol, "entropy_tol": entropy_tol}


# ---------------------------------------------------------------------------
# persistence


_SUMMARY_COLUMNS = (
    "n",
    "mu",
    "kappa",
    "a",
    "delta",
    "sup_rel_energy",
    "final_rel_energy",
    "l1_rho_err",
    "l1_rhoe_err",
    "l1_mom_err",
    "E1",
    "E2",
    "E3",
    "E4",
    "E5",
    "E6",
    "D_n",
    "kato_1",
    "kato_2",
    "kato_3",
    "energy_drift",
    "wall_seconds",
)

_SERIES_COLUMNS = ("n", "t", "rel_energy", "dissipation", "remainder", "gap", "e1", "e2", "e3", "e4", "e5", "e6")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _summary_row(lv: LevelReport):
    e = lv.e_norms if lv.e_norms else (np.nan,) * 6
    k = lv.kato.as_tuple() if lv.kato is not None else (np.nan,) * 3
    return (
        lv.n,
        lv.mu,
        lv.kappa,
        lv.a,
        lv.delta,
        lv.sup_rel_energy,
        lv.final_rel_energy,
        lv.l1_rho,
        lv.l1_rhoe,
        lv.l1_mom,
        *e,
        lv.d_n,
        *k,
        lv.energy_drift,
        lv.wall_seconds,
    )


def summary_csv_text(report: ExperimentReport) -> str:
    lines = [",".join(_SUMMARY_COLUMNS)]
    for lv in report.levels:
        lines.append(",".join(_fmt(v) for v in _summary_row(lv)))
    return "\n".join(lines) + "\n"


def series_csv_text(report: ExperimentReport) -> str:
    lines = [",".join(_SERIES_COLUMNS)]
    for lv in report.levels:
        if not lv.ok:
            continue
        for k, t in enumerate(lv.times):
            row = (
                lv.n,
                t,
                lv.rel_energy[k],
                lv.dissipation[k],
                lv.remainder[k],
                lv.gap[k],
                *lv.e_series[k],
            )
            lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _level_json(lv: LevelReport) -> dict:
    out = {
        "n": lv.n,
        "ok": lv.ok,
        "error": lv.error,
        "mu": lv.mu,
        "a": lv.a,
        "kappa": lv.kappa,
        "delta": lv.delta,
        "omega": lv.omega,
        "sup_rel_energy": lv.sup_rel_energy,
        "final_rel_energy": lv.final_rel_energy,
        "entropy_defect": lv.entropy_defect,
        "energy_drift": lv.energy_drift,
        "min_gap": float(np.min(lv.gap)) if lv.gap else np.nan,
        "wall_seconds": lv.wall_seconds,
    }
    if lv.kato is not None:
        out["kato"] = {
            "mu_over_delta": lv.kato.mu_over_delta,
            "theta_sq": lv.kato.theta_sq,
            "normal_momentum": lv.kato.normal_momentum,
            "resolved": lv.kato.resolved,
        }
    return out


def persist(report: ExperimentReport, out_dir, extra: dict | None = None) -> dict:
    """Write summary.csv, series.csv and summary.json; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = out / "summary.csv"
    series = out / "series.csv"
    meta = out / "summary.json"
    summary.write_text(summary_csv_text(report))
    series.write_text(series_csv_text(report))
    payload = {
        "config": report.config.to_config(),
        "schedule": [
            {"n": lv.n, "mu": lv.mu, "a": lv.a, "kappa": lv.kappa, "delta": lv.delta, "sigma": lv.sigma}
            for lv in report.schedule
        ],
        "levels": [_level_json(lv) for lv in report.levels],
    }
    if extra:
        payload.update(extra)
    meta.write_text(json.dumps(payload, indent=2, default=float) + "\n")
    return {"summary": summary, "series": series, "json": meta}


def load_summary(path) -> list:
    """Parse summary.csv back into dict rows; floats via repr round-trip."""
    text = Path(path).read_text().strip().splitlines()
    header = text[0].split(",")
    if tuple(header) != _SUMMARY_COLUMNS:
        raise InvalidSchedule(f"unexpected summary header: {header}")
    rows = []
    for line in text[1:]:
        cells = line.split(",")
        row = {"n": int(cells[0])}
        for name, cell in zip(header[1:], cells[1:]):
            row[name] = float(cell)
        rows.append(row)
    return rows
