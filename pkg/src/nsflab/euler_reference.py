"""Closed-form smooth Euler flows on the channel, used as comparison targets.

The flows keep the pressure constant, p = p0, and transport a smooth density
profile with a constant horizontal velocity (0, or a traveling speed v):

    rho(t, x, y) = profile(x - v t, y),   u = (v, 0),   theta = p0 / rho.

With the structure-function EOS this is an exact solution of the full
compressible Euler system as long as every point stays in the ideal range
Z = rho / theta^(1/(gamma-1)) <= Zbar, where pressure is Boyle-Mariotte
p = rho theta and e = theta / (gamma - 1): the momentum equation sees a
constant pressure, and both rho and the entropy S(Z(rho)) are transported.
Constructors refuse profiles that leave the ideal range; pick the threshold
with threshold_from_bounds.

The density profile has zero wall-normal derivative, so the flow is
slip-compatible; no-slip comparisons subtract a boundary-layer corrector
built elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, TrioSnapshot, pad_field, centered_gradient
from .thermodynamics import GasModel


class ReferenceOutOfRange(ValueError):
    """Raised when a reference flow would leave the ideal EOS range."""


def threshold_from_bounds(gamma: float, rho_max: float, e_min: float, safety: float = 1.5) -> float:
    """Smallest comfortable Zbar for states with rho <= rho_max, e >= e_min.

    Temperature assignment theta = (gamma - 1) e maps such states to
    Z <= rho_max / ((gamma - 1) e_min)^(1/(gamma-1)); the safety factor
    keeps perturbed states inside the ideal range too.
    """
    if gamma <= 1.0 or rho_max <= 0.0 or e_min <= 0.0 or safety < 1.0:
        raise ReferenceOutOfRange(
            f"need gamma > 1, rho_max > 0, e_min > 0, safety >= 1; "
            f"got {gamma}, {rho_max}, {e_min}, {safety}"
        )
    return safety * rho_max / ((gamma - 1.0) * e_min) ** (1.0 / (gamma - 1.0))


def assign_temperature(gas: GasModel, rho, internal_energy):
    """theta = (gamma - 1) e, valid only while the state stays ideal."""
    theta = (gas.gamma - 1.0) * np.asarray(internal_energy, dtype=float)
    z = gas.z_of(rho, theta)
    if np.any(z > gas.z_threshold):
        raise ReferenceOutOfRange(
            f"assigned state reaches Z = {float(np.max(z)):.6g} beyond "
            f"threshold {gas.z_threshold:.6g}"
        )
    return theta


@dataclass(frozen=True)
class CosineDensityProfile:
    """1 + amplitude cos(2 pi x / length) cos^2(pi y), walls untouched.

    Periodic in x with the channel length, and the y factor has zero slope
    at y = 0 and y = 1, so transported copies satisfy the wall conditions.
    """

    amplitude: float
    length: float = 2.0
    base: float = 1.0

    def __post_init__(self):
        if not (0.0 <= abs(self.amplitude) < self.base):
            raise ReferenceOutOfRange(
                f"profile needs |amplitude| < base for positivity, got {self.amplitude} vs {self.base}"
            )
        if self.length <= 0.0:
            raise ReferenceOutOfRange(f"length must be positive, got {self.length}")

    @property
    def kx(self) -> float:
        return 2.0 * np.pi / self.length

    def value(self, x, y):
        return self.base + self.amplitude * np.cos(self.kx * np.asarray(x)) * np.cos(np.pi * np.asarray(y)) ** 2

    def dx(self, x, y):
        return -self.amplitude * self.kx * np.sin(self.kx * np.asarray(x)) * np.cos(np.pi * np.asarray(y)) ** 2

    def dy(self, x, y):
        return -self.amplitude * np.pi * np.cos(self.kx * np.asarray(x)) * np.sin(2.0 * np.pi * np.asarray(y))

    @property
    def rho_min(self) -> float:
        return self.base - abs(self.amplitude)

    @property
    def rho_max(self) -> float:
        return self.base + abs(self.amplitude)


@dataclass(frozen=True)
class EulerSolution:
    """Constant-pressure transported-density Euler flow on the channel."""

    gas: GasModel
    profile: CosineDensityProfile
    p0: float
    speed: float = 0.0

    def __post_init__(self):
        if self.p0 <= 0.0 or not np.isfinite(self.p0):
            raise ReferenceOutOfRange(f"p0 must be positive, got {self.p0}")
        if not np.isfinite(self.speed):
            raise ReferenceOutOfRange("speed must be finite")
        zmax = self.max_z()
        if zmax > self.gas.z_threshold:
            raise ReferenceOutOfRange(
                f"flow reaches Z = {zmax:.6g} beyond threshold {self.gas.z_threshold:.6g}; "
                "raise z_threshold (see threshold_from_bounds)"
            )

    def max_z(self) -> float:
        g = self.gas.gamma
        return self.profile.rho_max ** (g / (g - 1.0)) / self.p0 ** (1.0 / (g - 1.0))

    # --- fields -----------------------------------------------------------

    def density(self, t, x, y):
        return self.profile.value(np.asarray(x) - self.speed * t, y)

    def temperature(self, t, x, y):
        return self.p0 / self.density(t, x, y)

    def velocity(self, t, x, y):
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.full(shape, self.speed), np.zeros(shape)

    def pressure(self, t, x, y):
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.full(shape, self.p0)

    def internal_energy(self, t, x, y):
        return self.p0 / ((self.gas.gamma - 1.0) * self.density(t, x, y))

    def entropy(self, t, x, y):
        return self.gas.entropy(self.density(t, x, y), self.temperature(t, x, y))

    # --- analytic derivatives --------------------------------------------

    def density_dt(self, t, x, y):
        return -self.speed * self.profile.dx(np.asarray(x) - self.speed * t, y)

    def density_dx(self, t, x, y):
        return self.profile.dx(np.asarray(x) - self.speed * t, y)

    def density_dy(self, t, x, y):
        return self.profile.dy(np.asarray(x) - self.speed * t, y)

    def _temperature_factor(self, t, x, y):
        # d theta / d rho = -p0 / rho^2 along the constant-pressure manifold
        return -self.p0 / self.density(t, x, y) ** 2

    def temperature_dt(self, t, x, y):
        return self._temperature_factor(t, x, y) * self.density_dt(t, x, y)

    def temperature_dx(self, t, x, y):
        return self._temperature_factor(t, x, y) * self.density_dx(t, x, y)

    def temperature_dy(self, t, x, y):
        return self._temperature_factor(t, x, y) * self.density_dy(t, x, y)

    def _entropy_factor(self, t, x, y):
        # s = S(Z(rho)) with Z = rho^(gamma/(gamma-1)) / p0^(1/(gamma-1)):
        # ds/drho = S'(Z) (gamma/(gamma-1)) Z / rho
        g = self.gas.gamma
        rho = self.density(t, x, y)
        z = rho ** (g / (g - 1.0)) / self.p0 ** (1.0 / (g - 1.0))
        return self.gas.structure_S_prime(z) * (g / (g - 1.0)) * z / rho

    def entropy_dt(self, t, x, y):
        return self._entropy_factor(t, x, y) * self.density_dt(t, x, y)

    def entropy_dx(self, t, x, y):
        return self._entropy_factor(t, x, y) * self.density_dx(t, x, y)

    def entropy_dy(self, t, x, y):
        return self._entropy_factor(t, x, y) * self.density_dy(t, x, y)


def stationary_family(gas: GasModel, p0: float, amplitude: float, length: float = 2.0) -> EulerSolution:
    return EulerSolution(gas, CosineDensityProfile(amplitude, length), p0, speed=0.0)


def traveling_family(
    gas: GasModel, p0: float, amplitude: float, speed: float, length: float = 2.0
) -> EulerSolution:
    return EulerSolution(gas, CosineDensityProfile(amplitude, length), p0, speed=speed)


def sample_trio(sol: EulerSolution, grid: Grid, t: float) -> TrioSnapshot:
    """Evaluate the flow and its analytic derivatives at cell centers."""
    X, Y = grid.cell_centers()
    ux, uy = sol.velocity(t, X, Y)
    zero = np.zeros(grid.shape)
    return TrioSnapshot(
        t=float(t),
        r=sol.density(t, X, Y),
        Theta=sol.temperature(t, X, Y),
        Ux=ux,
        Uy=uy,
        dr_dt=sol.density_dt(t, X, Y),
        dTheta_dt=sol.temperature_dt(t, X, Y),
        dUx_dt=zero.copy(),
        dUy_dt=zero.copy(),
        dr_dx=sol.density_dx(t, X, Y),
        dr_dy=sol.density_dy(t, X, Y),
        dTheta_dx=sol.temperature_dx(t, X, Y),
        dTheta_dy=sol.temperature_dy(t, X, Y),
        dUx_dx=zero.copy(),
        dUx_dy=zero.copy(),
        dUy_dx=zero.copy(),
        dUy_dy=zero.copy(),
    )


def _fd_div(grid: Grid, fx, fy, fy_parity=-1.0):
    # x-fluxes are even across the walls; y-fluxes carrying one factor of
    # the wall-normal velocity are odd, the pressure flux in the y-momentum
    # equation is even
    dfx_dx, _ = centered_gradient(grid, pad_field(grid, fx, 1.0, 1), 1)
    _, dfy_dy = centered_gradient(grid, pad_field(grid, fy, fy_parity, 1), 1)
    return dfx_dx + dfy_dy


def euler_residual(sol: EulerSolution, grid: Grid, t: float) -> dict:
    """L1 norms of the four conservation-law residuals on the grid.

    Time derivatives are analytic, space derivatives centered differences of
    the sampled fluxes, so the result measures pure discretization error:
    identically zero for the stationary family, O(h^2) for traveling ones.
    """
    X, Y = grid.cell_centers()
    rho = sol.density(t, X, Y)
    ux, uy = sol.velocity(t, X, Y)
    p = sol.pressure(t, X, Y)
    e = sol.internal_energy(t, X, Y)
    etot = 0.5 * rho * (ux**2 + uy**2) + rho * e
    rho_t = sol.density_dt(t, X, Y)

    mass = rho_t + _fd_div(grid, rho * ux, rho * uy)
    # u is constant, so d/dt(rho u) = u rho_t; rho e is constant in time
    momx = ux * rho_t + _fd_div(grid, rho * ux * ux + p, rho * ux * uy)
    momy = uy * rho_t + _fd_div(grid, rho * ux * uy, rho * uy * uy + p, fy_parity=1.0)
    energy = 0.5 * (ux**2 + uy**2) * rho_t + _fd_div(grid, (etot + p) * ux, (etot + p) * uy)

    return {
        "mass": grid.integrate(np.abs(mass)),
        "momentum_x": grid.integrate(np.abs(momx)),
        "momentum_y": grid.integrate(np.abs(momy)),
        "energy": grid.integrate(np.abs(energy)),
    }


def entropy_conservation_residual(sol: EulerSolution, grid: Grid, t: float) -> float:
    """L1 norm of d/dt(rho s) + div(rho s u), discretized like euler_residual."""
    X, Y = grid.cell_centers()
    rho = sol.density(t, X, Y)
    s = sol.entropy(t, X, Y)
    ux, uy = sol.velocity(t, X, Y)
    dt_part = s * sol.density_dt(t, X, Y) + rho * sol.entropy_dt(t, X, Y)
    res = dt_part + _fd_div(grid, rho * s * ux, rho * s * uy)
    return grid.integrate(np.abs(res))


def transport_identity_residuals(sol: EulerSolution, grid: Grid, t: float) -> dict:
    """Max-norm sanity identities the comparison arguments lean on.

    All four are algebraic consequences of the construction and must vanish
    to round-off: constant pressure, the temperature assignment, and the
    material transport of density and entropy.
    """
    X, Y = grid.cell_centers()
    rho = sol.density(t, X, Y)
    th = sol.temperature(t, X, Y)
    ux, uy = sol.velocity(t, X, Y)
    g = sol.gas.gamma

    pressure_dev = np.max(np.abs(sol.gas.pressure(rho, th) - sol.p0))
    energy_dev = np.max(np.abs(sol.gas.internal_energy(rho, th) - sol.p0 / ((g - 1.0) * rho)))
    mat_rho = np.max(
        np.abs(sol.density_dt(t, X, Y) + ux * sol.density_dx(t, X, Y) + uy * sol.density_dy(t, X, Y))
    )
    mat_s = np.max(
        np.abs(sol.entropy_dt(t, X, Y) + ux * sol.entropy_dx(t, X, Y) + uy * sol.entropy_dy(t, X, Y))
    )
    return {
        "pressure_deviation": float(pressure_dev),
        "energy_assignment": float(energy_dev),
        "material_density": float(mat_rho),
        "material_entropy": float(mat_s),
    }


def pressure_entropy_cancellation(gas: GasModel, rho_base, theta_base, rho, theta):
    """The pressure/entropy combination whose linearization cancels.

    F = p_E - p + (gamma - 1) rho_E theta_E (s - s_E) - gamma (1 - rho/rho_E) p_E

    evaluated at base state (rho_E, theta_E) and perturbed state (rho, theta)
    is second order in the perturbation inside the ideal range; this is what
    lets the inequality budget absorb first-order pressure errors.
    """
    g = gas.gamma
    p_base = gas.pressure(rho_base, theta_base)
    s_base = gas.entropy(rho_base, theta_base)
    return (
        p_base
        - gas.pressure(rho, theta)
        + (g - 1.0) * rho_base * theta_base * (gas.entropy(rho, theta) - s_base)
        - g * (1.0 - np.asarray(rho) / rho_base) * p_base
    )
