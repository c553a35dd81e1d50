"""Relative-energy functionals, consistency norms, and the energy-inequality budget.

The distance between a dissipative state (rho, u, theta) and a smooth trio
(r, U, Theta) is measured by the relative energy

    E = 1/2 rho |u - U|^2 + H(rho, theta) - dH/drho(r, Theta) (rho - r) - H(r, Theta)

built on the ballistic free energy H(rho, theta) = rho e - Theta rho s.  The
augmented version adds the radiation Bregman gap

    a (theta^4 - Theta^4) + (4a/3) Theta (Theta^3 - theta^3) >= 0

so that E_a >= E with equality only at theta = Theta.  Convexity of H in
(rho, rho e) makes both nonnegative.

The module also provides the consistency error norms E1..E6 that must vanish
along a dissipation schedule, the algebraic chains (Young / Hoelder /
radiation domination) that bound them by eps * dissipation plus a multiple of
the total energy, and the term-by-term budget R1..R8 of the relative-energy
inequality.  Everything here is a pure function of cell-centered arrays; time
stepping and accumulation live in the harness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, StateSnapshot, TrioSnapshot
from .thermodynamics import GasModel, total_entropy, total_pressure
from .transport import TransportModel


# ---------------------------------------------------------------------------
# ballistic free energy and relative energy densities


def ballistic_free_energy(gas: GasModel, a: float, rho, theta, Theta):
    """H(rho, theta) = rho e - Theta rho s, radiation terms included for a > 0.

    Theta is the fixed comparison temperature; the radiation part contributes
    a theta^4 - (4a/3) Theta theta^3 and is independent of rho.
    """
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    h = rho * gas.internal_energy(rho, theta) - Theta * rho * gas.entropy(rho, theta)
    if a != 0.0:
        h = h + a * theta**4 - (4.0 * a / 3.0) * Theta * theta**3
    return h


def ballistic_rho_derivative(gas: GasModel, r, Theta):
    """d/drho of the ballistic free energy at (r, Theta).

    By the Gibbs relation this collapses to e - Theta s + p / rho evaluated at
    the base point; the radiation part drops out because a theta^4 carries no
    rho dependence.
    """
    r = np.asarray(r, dtype=float)
    return (
        gas.internal_energy(r, Theta)
        - Theta * gas.entropy(r, Theta)
        + gas.pressure(r, Theta) / r
    )


def radiation_gap(a: float, theta, Theta):
    """a (theta^4 - Theta^4) + (4a/3) Theta (Theta^3 - theta^3), >= 0."""
    theta = np.asarray(theta, dtype=float)
    Theta = np.asarray(Theta, dtype=float)
    return a * (theta**4 - Theta**4) + (4.0 * a / 3.0) * Theta * (Theta**3 - theta**3)


def relative_energy_density(gas: GasModel, rho, ux, uy, theta, r, Theta, Ux, Uy):
    """Pointwise relative energy for the gas EOS without radiation."""
    rho = np.asarray(rho, dtype=float)
    kinetic = 0.5 * rho * ((ux - Ux) ** 2 + (uy - Uy) ** 2)
    bregman = (
        ballistic_free_energy(gas, 0.0, rho, theta, Theta)
        - ballistic_rho_derivative(gas, r, Theta) * (rho - r)
        - ballistic_free_energy(gas, 0.0, r, Theta, Theta)
    )
    return kinetic + bregman


def augmented_relative_energy_density(gas: GasModel, a: float, rho, ux, uy, theta, r, Theta, Ux, Uy):
    """Relative energy plus the radiation gap; dominates the plain version."""
    base = relative_energy_density(gas, rho, ux, uy, theta, r, Theta, Ux, Uy)
    if a == 0.0:
        return base
    return base + radiation_gap(a, theta, Theta)


def augmented_relative_energy(grid: Grid, gas: GasModel, a: float, snap: StateSnapshot, trio: TrioSnapshot) -> float:
    """Integral of the augmented relative energy density over the channel."""
    dens = augmented_relative_energy_density(
        gas, a, snap.rho, snap.ux, snap.uy, snap.theta, trio.r, trio.Theta, trio.Ux, trio.Uy
    )
    return grid.integrate(dens)


def total_energy(grid: Grid, gas: GasModel, a: float, rho, ux, uy, theta) -> float:
    """Conserved total energy 1/2 rho |u|^2 + rho e + a theta^4, integrated."""
    rho = np.asarray(rho, dtype=float)
    dens = 0.5 * rho * (ux**2 + uy**2) + rho * gas.internal_energy(rho, theta) + a * np.asarray(theta) ** 4
    return grid.integrate(dens)


# ---------------------------------------------------------------------------
# essential / residual splitting


def _quintic_rise(s):
    # smoothstep 6s^5 - 15s^4 + 10s^3 clamped to [0, 1]
    s = np.clip(s, 0.0, 1.0)
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s))


def _plateau(v, lo, hi, margin):
    v = np.asarray(v, dtype=float)
    rise = _quintic_rise((v - lo / margin) / (lo - lo / margin))
    fall = 1.0 - _quintic_rise((v - hi) / (hi * margin - hi))
    return np.where(v < lo, rise, np.where(v > hi, fall, 1.0))


@dataclass(frozen=True)
class EssResCutoff:
    """Smooth indicator of the state box swept by a bounded smooth trio.

    The cutoff equals 1 on [rho_min, rho_max] x [theta_min, theta_max],
    drops to 0 outside the box dilated by `margin` (default: halved lower
    bounds, doubled upper bounds), and is C^1 in between.  States with
    cutoff 1 form the essential set, states with cutoff 0 the residual set.
    """

    rho_bounds: tuple
    theta_bounds: tuple
    margin: float = 2.0

    def __post_init__(self):
        for lo, hi in (self.rho_bounds, self.theta_bounds):
            if not (0.0 < lo < hi and np.isfinite(hi)):
                raise ValueError(f"bounds must satisfy 0 < lo < hi, got ({lo}, {hi})")
        if self.margin <= 1.0:
            raise ValueError(f"margin must exceed 1, got {self.margin}")

    def __call__(self, rho, theta):
        prho = _plateau(rho, self.rho_bounds[0], self.rho_bounds[1], self.margin)
        pth = _plateau(theta, self.theta_bounds[0], self.theta_bounds[1], self.margin)
        return prho * pth

    def essential_mask(self, rho, theta):
        rho = np.asarray(rho)
        theta = np.asarray(theta)
        return (
            (rho >= self.rho_bounds[0])
            & (rho <= self.rho_bounds[1])
            & (theta >= self.theta_bounds[0])
            & (theta <= self.theta_bounds[1])
        )

    def residual_mask(self, rho, theta):
        """True where the cutoff vanishes (outside the dilated box)."""
        rho = np.asarray(rho)
        theta = np.asarray(theta)
        out_rho = (rho <= self.rho_bounds[0] / self.margin) | (rho >= self.rho_bounds[1] * self.margin)
        out_th = (theta <= self.theta_bounds[0] / self.margin) | (theta >= self.theta_bounds[1] * self.margin)
        return out_rho | out_th


@dataclass(frozen=True)
class CoercivityReport:
    n_essential: int
    n_residual: int
    c_quadratic: float
    c_residual: float

    @property
    def passed(self) -> bool:
        return self.c_quadratic > 0.0 and self.c_residual > 0.0


def coercivity_check(
    gas: GasModel,
    a: float,
    cutoff: EssResCutoff,
    rng,
    n_samples: int = 2000,
    speed_scale: float = 1.0,
) -> CoercivityReport:
    """Sampled lower bounds of the relative energy on both regimes.

    Essential regime: base points and states drawn from the cutoff box;
    reports the worst ratio E_a / (drho^2 + dtheta^2 + |du|^2).  Residual
    regime: states drawn well outside the dilated box; reports the worst
    ratio E_a / (1 + rho e + a theta^4).  Both must come out positive for
    the splitting argument to have any force.
    """
    (rlo, rhi), (tlo, thi) = cutoff.rho_bounds, cutoff.theta_bounds

    def draw(lo, hi, n):
        return lo + (hi - lo) * rng.random(n)

    # essential: both points in the box, never identical
    r = draw(rlo, rhi, n_samples)
    Th = draw(tlo, thi, n_samples)
    rho = draw(rlo, rhi, n_samples)
    th = draw(tlo, thi, n_samples)
    du = speed_scale * (2.0 * rng.random((2, n_samples)) - 1.0)
    dist2 = (rho - r) ** 2 + (th - Th) ** 2 + du[0] ** 2 + du[1] ** 2
    keep = dist2 > 1e-12
    e_ess = augmented_relative_energy_density(
        gas, a, rho[keep], du[0][keep], du[1][keep], th[keep], r[keep], Th[keep], 0.0, 0.0
    )
    c_quad = float(np.min(e_ess / dist2[keep])) if np.any(keep) else 0.0

    # residual: base point in the box, state pushed past the dilated box
    m = cutoff.margin
    n4 = n_samples // 4
    rho_res = np.concatenate(
        [
            draw(rlo / (10.0 * m), rlo / m, n4),
            draw(rhi * m, 10.0 * rhi * m, n4),
            draw(rlo, rhi, 2 * n4),
        ]
    )
    th_res = np.concatenate(
        [
            draw(tlo, thi, n4),
            draw(tlo, thi, n4),
            draw(tlo / (10.0 * m), tlo / m, n4),
            draw(thi * m, 10.0 * thi * m, n4),
        ]
    )
    nres = rho_res.size
    r2 = draw(rlo, rhi, nres)
    Th2 = draw(tlo, thi, nres)
    e_res = augmented_relative_energy_density(gas, a, rho_res, 0.0, 0.0, th_res, r2, Th2, 0.0, 0.0)
    weight = 1.0 + rho_res * gas.internal_energy(rho_res, th_res) + a * th_res**4
    c_res = float(np.min(e_res / weight))

    return CoercivityReport(
        n_essential=int(np.count_nonzero(keep)),
        n_residual=nres,
        c_quadratic=c_quad,
        c_residual=c_res,
    )


# ---------------------------------------------------------------------------
# dissipation and consistency error norms


def dissipation_rate(
    grid: Grid,
    transport: TransportModel,
    snap: StateSnapshot,
    mu_n: float,
    kappa_n: float,
    weight=None,
) -> float:
    """Integrated entropy production; optional cell weight (e.g. Theta)."""
    dens = transport.entropy_production(snap.theta, snap.grad_u(), snap.grad_theta(), mu_n, kappa_n)
    if weight is not None:
        dens = dens * weight
    return grid.integrate(dens)


def _dissipation_split(grid, transport, snap, mu_n, kappa_n):
    """(viscous, heat) parts of the entropy production integral."""
    visc = dissipation_rate(grid, transport, snap, mu_n, 0.0)
    heat = dissipation_rate(grid, transport, snap, 0.0, kappa_n)
    return visc, heat


@dataclass(frozen=True)
class ConsistencyErrors:
    """L1 norms of the terms that must vanish along the schedule.

    e1  radiation pressure            a theta^4 / 3
    e2  viscous flux                  mu_n |S|
    e3  radiation entropy             (4a/3) theta^3
    e4  radiation entropy flux        (4a/3) theta^3 |u|
    e5  entropy heat flux             kappa_n kappa(theta) |grad theta| / theta
    e6  radiation energy              a theta^4  (= 3 e1, cross-check)
    """

    e1: float
    e2: float
    e3: float
    e4: float
    e5: float
    e6: float

    def as_tuple(self):
        return (self.e1, self.e2, self.e3, self.e4, self.e5, self.e6)


def stress_frobenius(transport: TransportModel, snap: StateSnapshot):
    """|S(theta, grad u)| pointwise (Frobenius norm of the 2x2 stress)."""
    sxx, sxy, syy = transport.stress_components(
        snap.theta, snap.dux_dx, snap.dux_dy, snap.duy_dx, snap.duy_dy
    )
    return np.sqrt(sxx**2 + 2.0 * sxy**2 + syy**2)


def consistency_errors(
    grid: Grid,
    transport: TransportModel,
    a: float,
    mu_n: float,
    kappa_n: float,
    snap: StateSnapshot,
) -> ConsistencyErrors:
    th = snap.theta
    th3 = th**3
    speed = np.sqrt(snap.ux**2 + snap.uy**2)
    grad_th_mag = np.sqrt(snap.dth_dx**2 + snap.dth_dy**2)
    e1 = grid.integrate(a * th3 * th / 3.0)
    e2 = mu_n * grid.integrate(stress_frobenius(transport, snap))
    e3 = grid.integrate((4.0 * a / 3.0) * th3)
    e4 = grid.integrate((4.0 * a / 3.0) * th3 * speed)
    e5 = kappa_n * grid.integrate(transport.heat_conductivity(th) * grad_th_mag / th)
    e6 = grid.integrate(a * th3 * th)
    return ConsistencyErrors(e1, e2, e3, e4, e5, e6)


def consistency_chain_margins(
    grid: Grid,
    transport: TransportModel,
    a: float,
    mu_n: float,
    kappa_n: float,
    snap: StateSnapshot,
    epsilon: float = 0.5,
) -> dict:
    """Normalized margins (rhs - lhs) / max(1, rhs) of the bounding chains.

    Each entry is a discrete inequality that the continuous argument uses
    verbatim: Young splits against the dissipation, the shear sandwich, the
    domination of theta + theta^(1+alpha) by the radiation energy, and the
    Hoelder steps for the cubic temperature moments.  All margins must be
    nonnegative up to round-off on any state.
    """
    if not 0.0 < a <= 1.0:
        raise ValueError(f"radiation domination chain requires 0 < a <= 1, got {a}")
    alpha = transport.alpha
    th = snap.theta
    err = consistency_errors(grid, transport, a, mu_n, kappa_n, snap)
    visc, heat = _dissipation_split(grid, transport, snap, mu_n, kappa_n)

    mu_t = transport.shear_viscosity(th)
    eta_t = transport.bulk_viscosity(th)
    kap_t = transport.heat_conductivity(th)
    dim = float(transport.dim)

    rad_energy = grid.integrate(a * th**4)
    omega_cells = grid.lx * grid.ly
    margins = {}

    def norm_margin(lhs, rhs):
        return (rhs - lhs) / max(1.0, abs(rhs))

    # viscous Young: mu_n |S| <= eps * visc + mu_n int (mu + dim eta) theta / (2 eps)
    rhs = epsilon * visc + mu_n * grid.integrate((mu_t + dim * eta_t) * th) / (2.0 * epsilon)
    margins["viscous_young"] = norm_margin(err.e2, rhs)

    # shear sandwich, pointwise
    margins["sandwich_upper"] = float(np.min(2.0 * (1.0 + th**alpha) - mu_t))
    margins["sandwich_lower"] = float(np.min(mu_t - 0.5 * (1.0 + th**alpha)))

    # radiation domination: theta + theta^(1+alpha) <= 2 (1 + a theta^4) / a^((1+alpha)/4)
    lhs = th + th ** (1.0 + alpha)
    rhs_pw = 2.0 * (1.0 + a * th**4) / a ** ((1.0 + alpha) / 4.0)
    margins["radiation_domination"] = float(np.min((rhs_pw - lhs) / np.maximum(1.0, rhs_pw)))

    # heat Young: e5 <= eps/2 * heat + kappa_n int kappa(theta) / (2 eps)
    rhs = 0.5 * epsilon * heat + kappa_n * grid.integrate(kap_t) / (2.0 * epsilon)
    margins["heat_young"] = norm_margin(err.e5, rhs)

    # cubic moment Hoelder: kappa_n int theta^3 <= (kappa_n / a^(3/4)) (int a theta^4)^(3/4) |O|^(1/4)
    lhs = kappa_n * grid.integrate(th**3)
    rhs = (kappa_n / a**0.75) * rad_energy**0.75 * omega_cells**0.25
    margins["heat_hoelder"] = norm_margin(lhs, rhs)

    # radiation flux Hoelder: (4a/3) int theta^3 |u| <= (4/3) a^(1/4) (int a theta^4)^(3/4) (int |u|^4)^(1/4)
    u4 = grid.integrate((snap.ux**2 + snap.uy**2) ** 2)
    rhs = (4.0 / 3.0) * a**0.25 * rad_energy**0.75 * u4**0.25
    margins["radiation_hoelder"] = norm_margin(err.e4, rhs)

    # same Hoelder without the velocity, for e3
    rhs = (4.0 / 3.0) * a**0.25 * rad_energy**0.75 * omega_cells**0.25
    margins["e3_hoelder"] = norm_margin(err.e3, rhs)

    margins["e6_triple"] = norm_margin(abs(err.e6 - 3.0 * err.e1), 1e-13 * max(1.0, err.e6))
    return margins


def fit_consistency_constant(error_norms, dissipations, energies, epsilon: float, omega: float) -> float:
    """Smallest c with ||E(t)|| <= eps D(t) + c (energy(t) + omega) for all t."""
    e = np.asarray(error_norms, dtype=float)
    d = np.asarray(dissipations, dtype=float)
    en = np.asarray(energies, dtype=float)
    excess = np.maximum(e - epsilon * d, 0.0)
    return float(np.max(excess / (en + omega)))


@dataclass(frozen=True)
class ConsistencyReport:
    """Fitted consistency constants across schedule levels.

    constants[k] is the 6-tuple (c1..c6) at level k; the verdict is that no
    constant blows up as the dissipation vanishes, operationally c_i(n) not
    exceeding growth_limit times its first-level value.
    """

    levels: tuple
    omegas: tuple
    constants: tuple
    growth_limit: float = 2.0

    def __post_init__(self):
        if len(self.levels) != len(self.constants) or len(self.levels) != len(self.omegas):
            raise ValueError("levels, omegas and constants must align")

    @property
    def bounded(self) -> bool:
        first = self.constants[0]
        for row in self.constants:
            for c, c0 in zip(row, first):
                if c > self.growth_limit * c0 + 1e-12:
                    return False
        return True

    def worst_growth(self) -> float:
        """max over terms of c_i(n) / c_i(0), with 0/0 counted as 1."""
        first = self.constants[0]
        worst = 1.0
        for row in self.constants:
            for c, c0 in zip(row, first):
                if c0 > 0.0:
                    worst = max(worst, c / c0)
                elif c > 1e-12:
                    worst = np.inf
        return worst


# ---------------------------------------------------------------------------
# relative-energy inequality budget


@dataclass(frozen=True)
class InequalityTerms:
    """Spatial integrals of the eight remainder terms at one time."""

    r1: float
    r2: float
    r3: float
    r4: float
    r5: float
    r6: float
    r7: float
    r8: float

    @property
    def total(self) -> float:
        return self.r1 + self.r2 + self.r3 + self.r4 + self.r5 + self.r6 + self.r7 + self.r8

    def as_tuple(self):
        return (self.r1, self.r2, self.r3, self.r4, self.r5, self.r6, self.r7, self.r8)


def weighted_dissipation(
    grid: Grid,
    transport: TransportModel,
    snap: StateSnapshot,
    trio: TrioSnapshot,
    mu_n: float,
    kappa_n: float,
) -> float:
    """Dissipation weighted by the trio temperature, as on the inequality LHS."""
    return dissipation_rate(grid, transport, snap, mu_n, kappa_n, weight=trio.Theta)


def remainder_terms(
    grid: Grid,
    gas: GasModel,
    transport: TransportModel,
    a: float,
    mu_n: float,
    kappa_n: float,
    snap: StateSnapshot,
    trio: TrioSnapshot,
) -> InequalityTerms:
    """The eight remainder integrals R1..R8 at one instant.

    Conventions: w = u - U is the velocity gap and ds the total entropy gap
    s(rho, theta) - s(r, Theta), radiation included.  Trio derivatives are
    the analytic ones carried by the TrioSnapshot; pressure derivatives of
    the trio expand through the chain rule with the EOS partials, so no
    differencing of composite fields enters here.
    """
    rho, th = snap.rho, snap.theta
    wx = snap.ux - trio.Ux
    wy = snap.uy - trio.Uy

    # R1: quadratic convection  rho (w . grad) U . (-w)
    r1 = grid.integrate(
        -rho
        * (
            wx * (wx * trio.dUx_dx + wy * trio.dUx_dy)
            + wy * (wx * trio.dUy_dx + wy * trio.dUy_dy)
        )
    )

    # R2: viscous stress against the trio gradient
    sxx, sxy, syy = transport.stress_components(th, snap.dux_dx, snap.dux_dy, snap.duy_dx, snap.duy_dy)
    r2 = mu_n * grid.integrate(sxx * trio.dUx_dx + sxy * (trio.dUx_dy + trio.dUy_dx) + syy * trio.dUy_dy)

    # R3: heat flux against the trio temperature gradient
    kap_t = transport.heat_conductivity(th)
    r3 = kappa_n * grid.integrate(
        (kap_t / th) * (snap.dth_dx * trio.dTheta_dx + snap.dth_dy * trio.dTheta_dy)
    )

    # entropy gap (total, radiation included)
    ds = total_entropy(gas, a, rho, th) - total_entropy(gas, a, trio.r, trio.Theta)

    # R4: entropy gap transported across the velocity gap
    r4 = grid.integrate(rho * ds * (-wx * trio.dTheta_dx - wy * trio.dTheta_dy))

    # R5: trio acceleration against the velocity gap
    ax = trio.dUx_dt + trio.Ux * trio.dUx_dx + trio.Uy * trio.dUx_dy
    ay = trio.dUy_dt + trio.Ux * trio.dUy_dx + trio.Uy * trio.dUy_dy
    r5 = grid.integrate(rho * (ax * (-wx) + ay * (-wy)))

    # R6: state pressure against the trio divergence
    p_state = total_pressure(gas, a, rho, th)
    r6 = -grid.integrate(p_state * trio.div_U)

    # R7: entropy gap against the trio material temperature derivative
    dTheta_material = trio.dTheta_dt + trio.Ux * trio.dTheta_dx + trio.Uy * trio.dTheta_dy
    r7 = -grid.integrate(rho * ds * dTheta_material)

    # R8: trio pressure transported; chain rule with EOS partials
    dp_dr = gas.dp_drho(trio.r, trio.Theta)
    dp_dTh = gas.dp_dtheta(trio.r, trio.Theta) + (4.0 * a / 3.0) * trio.Theta**3
    dpdt = dp_dr * trio.dr_dt + dp_dTh * trio.dTheta_dt
    dpdx = dp_dr * trio.dr_dx + dp_dTh * trio.dTheta_dx
    dpdy = dp_dr * trio.dr_dy + dp_dTh * trio.dTheta_dy
    r8 = grid.integrate(
        (1.0 - rho / trio.r) * dpdt - (rho / trio.r) * (snap.ux * dpdx + snap.uy * dpdy)
    )

    return InequalityTerms(r1, r2, r3, r4, r5, r6, r7, r8)


def cumulative_trapezoid(times, values):
    """Running trapezoid integral, same length as times, starting at 0."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise ValueError("times and values must be matching 1d arrays")
    out = np.zeros_like(t)
    if t.size > 1:
        out[1:] = np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(t))
    return out


def inequality_gap_series(times, rel_energies, dissipations, remainders):
    """gap(tau) = int_0^tau (sum R) - [E_a]_0^tau - int_0^tau weighted dissipation.

    A nonnegative gap (up to scheme error) at every sample time is the
    discrete form of the relative-energy inequality.  Inputs are sampled at
    the given times; integrals use the trapezoid rule.
    """
    ea = np.asarray(rel_energies, dtype=float)
    lhs = (ea - ea[0]) + cumulative_trapezoid(times, dissipations)
    rhs = cumulative_trapezoid(times, remainders)
    return rhs - lhs
