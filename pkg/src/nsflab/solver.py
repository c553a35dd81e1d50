"""Finite-volume integrator for viscous, heat-conducting channel flow.

Conserved cell averages (rho, rho u, rho v, E) with total energy
E = 1/2 rho |u|^2 + rho e(rho, theta) + a theta^4 are advanced by a
MUSCL / Rusanov convective flux plus compact second-order diffusive
fluxes, in a two-stage strong-stability Runge-Kutta step.  The pressure
in the flux is the total one, p + a theta^4 / 3.

Boundaries: periodic in x, impermeable insulated walls at y = 0, 1 with
slip or no-slip velocity, imposed through ghost-cell reflection (see
grid.pad_primitives).  The reflection parities make the wall fluxes of
mass and energy vanish exactly in floating point, so both are conserved
to round-off regardless of resolution; no-slip walls exchange only
momentum.

Temperature is recovered from the internal energy by a safeguarded
Newton iteration on the strictly increasing map
theta -> rho e(rho, theta) + a theta^4, bracketed by
0 < theta <= (gamma - 1) e; failure to invert raises instead of
clamping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import BoundarySpec, Grid, StateSnapshot, make_snapshot, pad_primitives
from .thermodynamics import GasModel, total_pressure
from .transport import TransportModel


class SolverError(RuntimeError):
    """Base class for integrator failures."""


class TemperatureInversionError(SolverError):
    """Internal energy incompatible with the EOS (cold floor or no convergence)."""


class StateBlowup(SolverError):
    """Non-finite or non-positive state encountered during a step."""


_LIMITERS = ("minmod", "mc", "central")


@dataclass(frozen=True)
class SolverConfig:
    """Physics and scheme parameters for one run."""

    gas: GasModel
    transport: TransportModel
    bc: BoundarySpec
    radiation_coeff: float = 0.0
    shear_coeff: float = 0.0
    heat_coeff: float = 0.0
    cfl: float = 0.4
    limiter: str = "minmod"
    newton_rtol: float = 1e-13
    newton_max_iter: int = 60

    def __post_init__(self):
        for name in ("radiation_coeff", "shear_coeff", "heat_coeff"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0.0):
                raise SolverError(f"{name} must be finite and >= 0, got {v}")
        if not 0.0 < self.cfl <= 1.0:
            raise SolverError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.limiter not in _LIMITERS:
            raise SolverError(f"limiter must be one of {_LIMITERS}, got {self.limiter!r}")
        if self.newton_rtol <= 0.0 or self.newton_max_iter < 4:
            raise SolverError("bad Newton parameters")


@dataclass
class FluidField:
    """Mutable conserved state plus the consistent temperature."""

    grid: Grid
    t: float
    rho: np.ndarray
    mom_x: np.ndarray
    mom_y: np.ndarray
    energy: np.ndarray
    theta: np.ndarray

    def clone(self) -> "FluidField":
        return FluidField(
            self.grid,
            self.t,
            self.rho.copy(),
            self.mom_x.copy(),
            self.mom_y.copy(),
            self.energy.copy(),
            self.theta.copy(),
        )


def total_internal(config: SolverConfig, rho, theta):
    """rho e + a theta^4; the single expression shared by init and inversion."""
    return rho * config.gas.internal_energy(rho, theta) + config.radiation_coeff * theta**4


def initialize(config: SolverConfig, grid: Grid, rho, ux, uy, theta, t: float = 0.0) -> FluidField:
    rho = np.array(rho, dtype=float)
    ux = np.array(ux, dtype=float)
    uy = np.array(uy, dtype=float)
    theta = np.array(theta, dtype=float)
    for name, arr in (("rho", rho), ("ux", ux), ("uy", uy), ("theta", theta)):
        if arr.shape != grid.shape:
            raise SolverError(f"{name} has shape {arr.shape}, expected {grid.shape}")
        if not np.all(np.isfinite(arr)):
            raise SolverError(f"{name} contains non-finite entries")
    if np.any(rho <= 0.0) or np.any(theta <= 0.0):
        raise SolverError("rho and theta must be positive")
    energy = 0.5 * rho * (ux**2 + uy**2) + total_internal(config, rho, theta)
    return FluidField(grid, float(t), rho, rho * ux, rho * uy, energy, theta)


def temperature_from_energy(config: SolverConfig, rho, eint, guess=None):
    """Invert rho e(rho, theta) + a theta^4 = eint for theta, per cell."""
    gas = config.gas
    g = gas.gamma
    rho = np.asarray(rho, dtype=float)
    eint = np.asarray(eint, dtype=float)
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(eint))):
        raise TemperatureInversionError("non-finite inputs")
    if np.any(rho <= 0.0):
        raise TemperatureInversionError("non-positive density")
    floor = rho * gas.zero_temperature_energy(rho)
    if np.any(eint <= floor):
        worst = float(np.min(eint - floor))
        raise TemperatureInversionError(f"internal energy at or below the cold floor (by {-worst:.3g})")

    hi = (g - 1.0) * eint / rho
    lo = np.zeros_like(hi)
    if guess is None:
        theta = 0.5 * hi
    else:
        theta = np.clip(np.asarray(guess, dtype=float), 1e-9 * hi, (1.0 - 1e-12) * hi)

    a = config.radiation_coeff
    conv = np.zeros(theta.shape, dtype=bool)
    for _ in range(config.newton_max_iter):
        f = total_internal(config, rho, theta) - eint
        lo = np.where(f < 0.0, theta, lo)
        hi = np.where(f > 0.0, theta, hi)
        fp = rho * gas.de_dtheta(rho, theta) + 4.0 * a * theta**3
        delta = f / fp
        conv = np.abs(delta) <= config.newton_rtol * theta
        if np.all(conv):
            break
        cand = theta - delta
        bad = ~np.isfinite(cand) | (cand <= lo) | (cand >= hi)
        theta = np.where(conv, theta, np.where(bad, 0.5 * (lo + hi), cand))
    if not np.all(conv):
        raise TemperatureInversionError(
            f"Newton failed to converge in {config.newton_max_iter} iterations "
            f"for {int(np.count_nonzero(~conv))} cells"
        )
    return theta


# ---------------------------------------------------------------------------
# reconstruction


def _slopes(dl, dr, limiter):
    if limiter == "central":
        return 0.5 * (dl + dr)
    agree = 0.5 * (np.sign(dl) + np.sign(dr))
    if limiter == "minmod":
        return agree * np.minimum(np.abs(dl), np.abs(dr))
    # monotonized central
    return agree * np.minimum(
        np.minimum(2.0 * np.abs(dl), 2.0 * np.abs(dr)), 0.5 * np.abs(dl + dr)
    )


def _face_states_x(grid: Grid, padded, limiter):
    nx = grid.nx
    q = padded[2:-2, :]
    d = np.diff(q, axis=1)
    sig = _slopes(d[:, :-1], d[:, 1:], limiter)
    ql = q[:, 1 : nx + 2] + 0.5 * sig[:, 0 : nx + 1]
    qr = q[:, 2 : nx + 3] - 0.5 * sig[:, 1 : nx + 2]
    return ql, qr


def _face_states_y(grid: Grid, padded, limiter):
    ny = grid.ny
    q = padded[:, 2:-2]
    d = np.diff(q, axis=0)
    sig = _slopes(d[:-1, :], d[1:, :], limiter)
    ql = q[1 : ny + 2, :] + 0.5 * sig[0 : ny + 1, :]
    qr = q[2 : ny + 3, :] - 0.5 * sig[1 : ny + 2, :]
    return ql, qr


def _rusanov(config, rho_l, un_l, ut_l, th_l, rho_r, un_r, ut_r, th_r):
    """Local Lax-Friedrichs flux in the face normal direction.

    Returns (mass, normal momentum, tangential momentum, energy) fluxes.
    """
    gas, a = config.gas, config.radiation_coeff
    if not (np.all(rho_l > 0.0) and np.all(rho_r > 0.0) and np.all(th_l > 0.0) and np.all(th_r > 0.0)):
        raise StateBlowup("reconstructed face state left the physical region")
    p_l = total_pressure(gas, a, rho_l, th_l)
    p_r = total_pressure(gas, a, rho_r, th_r)
    e_l = 0.5 * rho_l * (un_l**2 + ut_l**2) + total_internal(config, rho_l, th_l)
    e_r = 0.5 * rho_r * (un_r**2 + ut_r**2) + total_internal(config, rho_r, th_r)
    lam = np.maximum(
        np.abs(un_l) + gas.sound_speed(rho_l, th_l, a),
        np.abs(un_r) + gas.sound_speed(rho_r, th_r, a),
    )
    f_mass = 0.5 * (rho_l * un_l + rho_r * un_r) - 0.5 * lam * (rho_r - rho_l)
    f_mn = 0.5 * (rho_l * un_l**2 + p_l + rho_r * un_r**2 + p_r) - 0.5 * lam * (
        rho_r * un_r - rho_l * un_l
    )
    f_mt = 0.5 * (rho_l * un_l * ut_l + rho_r * un_r * ut_r) - 0.5 * lam * (
        rho_r * ut_r - rho_l * ut_l
    )
    f_e = 0.5 * ((e_l + p_l) * un_l + (e_r + p_r) * un_r) - 0.5 * lam * (e_r - e_l)
    return f_mass, f_mn, f_mt, f_e


# ---------------------------------------------------------------------------
# diffusive fluxes


def _diffusive_x(config, grid, pux, puy, pth):
    h = grid.h
    tr = config.transport
    # compact normal derivatives at the nx+1 faces of each interior row
    dudx = np.diff(pux[2:-2, 1:-1], axis=1) / h
    dvdx = np.diff(puy[2:-2, 1:-1], axis=1) / h
    dthdx = np.diff(pth[2:-2, 1:-1], axis=1) / h
    # tangential derivatives: centered at cells, then averaged onto faces
    dudy_c = (pux[3:-1, 1:-1] - pux[1:-3, 1:-1]) / (2.0 * h)
    dvdy_c = (puy[3:-1, 1:-1] - puy[1:-3, 1:-1]) / (2.0 * h)
    dudy = 0.5 * (dudy_c[:, :-1] + dudy_c[:, 1:])
    dvdy = 0.5 * (dvdy_c[:, :-1] + dvdy_c[:, 1:])

    th_c = pth[2:-2, 1:-1]
    th_f = 0.5 * (th_c[:, :-1] + th_c[:, 1:])
    u_c = pux[2:-2, 1:-1]
    v_c = puy[2:-2, 1:-1]
    u_f = 0.5 * (u_c[:, :-1] + u_c[:, 1:])
    v_f = 0.5 * (v_c[:, :-1] + v_c[:, 1:])

    mu_t = tr.shear_viscosity(th_f)
    eta_t = tr.bulk_viscosity(th_f)
    div = dudx + dvdy
    s_xx = 2.0 * mu_t * (dudx - 0.5 * div) + eta_t * div
    s_xy = mu_t * (dudy + dvdx)

    mu, kap = config.shear_coeff, config.heat_coeff
    fx_mx = -mu * s_xx
    fx_my = -mu * s_xy
    fx_e = -mu * (s_xx * u_f + s_xy * v_f) - kap * tr.heat_conductivity(th_f) * dthdx
    return fx_mx, fx_my, fx_e


def _diffusive_y(config, grid, pux, puy, pth):
    h = grid.h
    tr = config.transport
    dudy = np.diff(pux[1:-1, 2:-2], axis=0) / h
    dvdy = np.diff(puy[1:-1, 2:-2], axis=0) / h
    dthdy = np.diff(pth[1:-1, 2:-2], axis=0) / h
    dudx_c = (pux[1:-1, 3:-1] - pux[1:-1, 1:-3]) / (2.0 * h)
    dvdx_c = (puy[1:-1, 3:-1] - puy[1:-1, 1:-3]) / (2.0 * h)
    dudx = 0.5 * (dudx_c[:-1, :] + dudx_c[1:, :])
    dvdx = 0.5 * (dvdx_c[:-1, :] + dvdx_c[1:, :])

    th_c = pth[1:-1, 2:-2]
    th_f = 0.5 * (th_c[:-1, :] + th_c[1:, :])
    u_c = pux[1:-1, 2:-2]
    v_c = puy[1:-1, 2:-2]
    u_f = 0.5 * (u_c[:-1, :] + u_c[1:, :])
    v_f = 0.5 * (v_c[:-1, :] + v_c[1:, :])

    mu_t = tr.shear_viscosity(th_f)
    eta_t = tr.bulk_viscosity(th_f)
    div = dudx + dvdy
    s_yy = 2.0 * mu_t * (dvdy - 0.5 * div) + eta_t * div
    s_yx = mu_t * (dudy + dvdx)

    mu, kap = config.shear_coeff, config.heat_coeff
    fy_mx = -mu * s_yx
    fy_my = -mu * s_yy
    fy_e = -mu * (s_yx * u_f + s_yy * v_f) - kap * tr.heat_conductivity(th_f) * dthdy
    return fy_mx, fy_my, fy_e


def _rhs(config: SolverConfig, grid: Grid, rho, ux, uy, theta):
    """Conservative time derivatives (d rho, d mom_x, d mom_y, d energy)."""
    prho, pux, puy, pth = pad_primitives(grid, config.bc, rho, ux, uy, theta)
    lim = config.limiter

    rho_l, rho_r = _face_states_x(grid, prho, lim)
    ux_l, ux_r = _face_states_x(grid, pux, lim)
    uy_l, uy_r = _face_states_x(grid, puy, lim)
    th_l, th_r = _face_states_x(grid, pth, lim)
    fx_mass, fx_mx, fx_my, fx_e = _rusanov(config, rho_l, ux_l, uy_l, th_l, rho_r, ux_r, uy_r, th_r)

    rho_l, rho_r = _face_states_y(grid, prho, lim)
    ux_l, ux_r = _face_states_y(grid, pux, lim)
    uy_l, uy_r = _face_states_y(grid, puy, lim)
    th_l, th_r = _face_states_y(grid, pth, lim)
    fy_mass, fy_my, fy_mx, fy_e = _rusanov(config, rho_l, uy_l, ux_l, th_l, rho_r, uy_r, ux_r, th_r)

    if config.shear_coeff > 0.0 or config.heat_coeff > 0.0:
        dx_mx, dx_my, dx_e = _diffusive_x(config, grid, pux, puy, pth)
        fx_mx = fx_mx + dx_mx
        fx_my = fx_my + dx_my
        fx_e = fx_e + dx_e
        dy_mx, dy_my, dy_e = _diffusive_y(config, grid, pux, puy, pth)
        fy_mx = fy_mx + dy_mx
        fy_my = fy_my + dy_my
        fy_e = fy_e + dy_e

    inv_h = 1.0 / grid.h
    d_rho = -(np.diff(fx_mass, axis=1) + np.diff(fy_mass, axis=0)) * inv_h
    d_mx = -(np.diff(fx_mx, axis=1) + np.diff(fy_mx, axis=0)) * inv_h
    d_my = -(np.diff(fx_my, axis=1) + np.diff(fy_my, axis=0)) * inv_h
    d_e = -(np.diff(fx_e, axis=1) + np.diff(fy_e, axis=0)) * inv_h
    return d_rho, d_mx, d_my, d_e


# ---------------------------------------------------------------------------
# time stepping


def stable_dt(config: SolverConfig, grid: Grid, rho, ux, uy, theta) -> float:
    """CFL-limited step: convective h/(|u|+c), diffusive h^2/(4 D)."""
    gas = config.gas
    c = gas.sound_speed(rho, theta, config.radiation_coeff)
    fastest = float(np.max(np.maximum(np.abs(ux), np.abs(uy)) + c))
    dt = grid.h / fastest

    tr = config.transport
    diff_max = 0.0
    if config.shear_coeff > 0.0:
        nu = config.shear_coeff * (2.0 * tr.shear_viscosity(theta) + tr.bulk_viscosity(theta)) / rho
        diff_max = float(np.max(nu))
    if config.heat_coeff > 0.0:
        cv = rho * gas.de_dtheta(rho, theta) + 4.0 * config.radiation_coeff * theta**3
        chi = config.heat_coeff * tr.heat_conductivity(theta) / cv
        diff_max = max(diff_max, float(np.max(chi)))
    if diff_max > 0.0:
        dt = min(dt, grid.h**2 / (4.0 * diff_max))
    return config.cfl * dt


def _check_state(rho, energy, t):
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(energy))):
        raise StateBlowup(f"non-finite state at t = {t:.6g}")
    if np.any(rho <= 0.0):
        raise StateBlowup(f"density lost positivity at t = {t:.6g}")


def step(config: SolverConfig, field: FluidField, dt: float) -> None:
    """Advance the field in place by one two-stage Runge-Kutta step."""
    if not (np.isfinite(dt) and dt > 0.0):
        raise SolverError(f"bad time step {dt}")
    g = field.grid
    rho0, mx0, my0, en0 = field.rho, field.mom_x, field.mom_y, field.energy
    ux0, uy0 = mx0 / rho0, my0 / rho0

    k = _rhs(config, g, rho0, ux0, uy0, field.theta)
    rho1 = rho0 + dt * k[0]
    mx1 = mx0 + dt * k[1]
    my1 = my0 + dt * k[2]
    en1 = en0 + dt * k[3]
    _check_state(rho1, en1, field.t)
    ux1, uy1 = mx1 / rho1, my1 / rho1
    th1 = temperature_from_energy(
        config, rho1, en1 - 0.5 * rho1 * (ux1**2 + uy1**2), guess=field.theta
    )

    k = _rhs(config, g, rho1, ux1, uy1, th1)
    rho2 = 0.5 * (rho0 + rho1 + dt * k[0])
    mx2 = 0.5 * (mx0 + mx1 + dt * k[1])
    my2 = 0.5 * (my0 + my1 + dt * k[2])
    en2 = 0.5 * (en0 + en1 + dt * k[3])
    _check_state(rho2, en2, field.t)
    ux2, uy2 = mx2 / rho2, my2 / rho2
    field.theta = temperature_from_energy(
        config, rho2, en2 - 0.5 * rho2 * (ux2**2 + uy2**2), guess=th1
    )
    field.rho, field.mom_x, field.mom_y, field.energy = rho2, mx2, my2, en2
    field.t += dt


def snapshot(config: SolverConfig, field: FluidField) -> StateSnapshot:
    """Primitive fields plus gradients, respecting the run's wall condition."""
    ux = field.mom_x / field.rho
    uy = field.mom_y / field.rho
    return make_snapshot(field.grid, config.bc, field.t, field.rho, ux, uy, field.theta)


def run(
    config: SolverConfig,
    field: FluidField,
    t_final: float,
    *,
    observer=None,
    diag_stride: int = 1,
    sample_times=(),
    max_steps: int = 2_000_000,
):
    """March the field to t_final, collecting snapshots at the sample times.

    The step is clipped so every requested sample time (and t_final) is hit
    exactly.  The observer, if given, is called with the field every
    diag_stride accepted steps.  Returns the list of snapshots.
    """
    if t_final < field.t:
        raise SolverError("t_final lies in the past")
    pending = sorted(float(s) for s in sample_times)
    snaps = []

    def _near(s, t):
        return abs(s - t) <= 1e-12 * (1.0 + abs(t))

    while pending and (pending[0] < field.t or _near(pending[0], field.t)):
        if _near(pending[0], field.t):
            snaps.append(snapshot(config, field))
        pending.pop(0)

    nsteps = 0
    while field.t < t_final and not _near(field.t, t_final):
        ux = field.mom_x / field.rho
        uy = field.mom_y / field.rho
        dt = stable_dt(config, field.grid, field.rho, ux, uy, field.theta)
        target = min(pending[0], t_final) if pending else t_final
        hit = field.t + dt >= target - 1e-12 * (1.0 + abs(target))
        if hit:
            dt = target - field.t
        step(config, field, dt)
        if hit:
            field.t = target
        nsteps += 1
        if observer is not None and nsteps % diag_stride == 0:
            observer(field)
        if hit and pending and pending[0] == target:
            pending.pop(0)
            snaps.append(snapshot(config, field))
        if nsteps >= max_steps:
            raise SolverError(f"exceeded {max_steps} steps before reaching t_final")
    return snaps


def total_entropy_integral(config: SolverConfig, grid: Grid, rho, theta) -> float:
    """Integral of rho s + (4a/3) theta^3, the quantity entropy balance bounds."""
    return grid.integrate(
        rho * config.gas.entropy(rho, theta) + (4.0 * config.radiation_coeff / 3.0) * theta**3
    )
