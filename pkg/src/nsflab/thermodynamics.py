"""Complete equation of state for a polytropic gas with radiation corrections.

The pressure law p = (gamma - 1) rho e alone does not determine the
temperature.  A complete (p, e, s) closure compatible with it is generated
by a pair of one-variable structure functions (P, S) evaluated at the
scaled density

    Z = rho / theta**(1/(gamma - 1)),

through

    p(rho, theta) = theta**(gamma/(gamma - 1)) * P(Z),
    e(rho, theta) = theta**(gamma/(gamma - 1)) * P(Z) / ((gamma - 1) * rho),
    s(rho, theta) = S(Z),

where S is tied to P by

    S'(Z) = -(gamma * P(Z) - P'(Z) * Z) / ((gamma - 1) * Z**2),

which is exactly the condition for Gibbs' relation
theta Ds = De + p D(1/rho) to hold.

This module fixes the explicit C^1 piecewise pair with seam Z* > 0:

    P(Z) = Z                                              for Z <= Z*,
    P(Z) = (gamma - 1)/gamma * Z* + Z**gamma / (gamma * Z***(gamma - 1))
                                                          for Z >  Z*,
    S(Z) = 1 - log(Z / Z*)                                for Z <= Z*,
    S(Z) = Z* / Z                                         for Z >  Z*.

Below the seam the gas obeys the Boyle-Mariotte law p = rho * theta with
e = theta / (gamma - 1); above it the pressure degenerates to the
isentropic hard branch ~ Z**gamma while the entropy decays to zero
(Third law).  Both branches are thermodynamically stable: P' > 0 and
gamma P - P' Z > 0 everywhere.

Radiation corrections enter additively with coefficient a >= 0:

    p_R = a * theta**4 / 3,   e_R = a * theta**4 / rho,
    s_R = 4 * a * theta**3 / (3 * rho),

and satisfy Gibbs' relation on their own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


class InvalidGasParameter(ValueError):
    """Raised when an EOS parameter is outside its admissible range."""


class DegenerateState(ValueError):
    """Raised when a thermodynamic state has nonpositive density or temperature."""


class StabilityViolation(RuntimeError):
    """Raised when a structure-function sample violates a stability bound."""


@dataclass(frozen=True)
class ThermoState:
    """A single (rho, theta) state with positivity validation."""

    rho: float
    theta: float

    def __post_init__(self):
        if not (self.rho > 0.0) or not math.isfinite(self.rho):
            raise DegenerateState(f"density must be positive, got {self.rho}")
        if not (self.theta > 0.0) or not math.isfinite(self.theta):
            raise DegenerateState(f"temperature must be positive, got {self.theta}")


@dataclass(frozen=True)
class GasModel:
    """Structure-function EOS with adiabatic exponent and ideal-branch seam.

    Parameters
    ----------
    gamma : float
        Adiabatic exponent, > 1.
    z_threshold : float
        Seam Z* of the piecewise structure functions; the gas is ideal
        (p = rho * theta) for Z <= Z*.
    radiation_coeff : float
        Default radiation coefficient a >= 0.  Solver and diagnostics take
        the per-run coefficient explicitly; this field is metadata carried
        by configurations.
    """

    gamma: float
    z_threshold: float
    radiation_coeff: float = 0.0

    def __post_init__(self):
        if not (self.gamma > 1.0) or not math.isfinite(self.gamma):
            raise InvalidGasParameter(f"gamma must exceed 1, got {self.gamma}")
        if not (self.z_threshold > 0.0) or not math.isfinite(self.z_threshold):
            raise InvalidGasParameter(
                f"z_threshold must be positive, got {self.z_threshold}"
            )
        if self.radiation_coeff < 0.0 or not math.isfinite(self.radiation_coeff):
            raise InvalidGasParameter(
                f"radiation_coeff must be >= 0, got {self.radiation_coeff}"
            )

    # -- structure functions -------------------------------------------------

    def structure_P(self, z):
        """Pressure structure function P(Z); identity below the seam."""
        g = self.gamma
        zs = self.z_threshold
        zarr = np.asarray(z, dtype=float)
        hi = np.maximum(zarr, zs)
        upper = (g - 1.0) / g * zs + hi**g / (g * zs ** (g - 1.0))
        return np.where(zarr <= zs, zarr, upper)

    def structure_P_prime(self, z):
        g = self.gamma
        w = np.asarray(z, dtype=float) / self.z_threshold
        hi = np.maximum(w, 1.0)
        return np.where(w <= 1.0, 1.0, hi ** (g - 1.0))

    def structure_S(self, z):
        """Entropy structure function S(Z); decays to 0 as Z -> infinity."""
        zs = self.z_threshold
        w = np.asarray(z, dtype=float) / zs
        lo = np.minimum(w, 1.0)
        hi = np.maximum(w, 1.0)
        with np.errstate(divide="ignore"):
            lower = 1.0 - np.log(lo)
        return np.where(w <= 1.0, lower, 1.0 / hi)

    def structure_S_prime(self, z):
        zs = self.z_threshold
        w = np.asarray(z, dtype=float) / zs
        lo = np.minimum(w, 1.0)
        hi = np.maximum(w, 1.0)
        with np.errstate(divide="ignore"):
            lower = -1.0 / lo
        return np.where(w <= 1.0, lower, -1.0 / hi**2) / zs

    # -- state variables -----------------------------------------------------

    def z_of(self, rho, theta):
        """Scaled density Z = rho / theta**(1/(gamma-1))."""
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return rho / theta ** (1.0 / (self.gamma - 1.0))

    def pressure(self, rho, theta):
        """Gas pressure p(rho, theta) = theta**(gamma/(gamma-1)) P(Z)."""
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        tpow = theta ** (1.0 / (self.gamma - 1.0))
        return theta * tpow * self.structure_P(rho / tpow)

    def internal_energy(self, rho, theta):
        """Specific internal energy; equals theta/(gamma-1) on the ideal branch."""
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        tpow = theta ** (1.0 / (self.gamma - 1.0))
        return theta / (self.gamma - 1.0) * (tpow / rho) * self.structure_P(rho / tpow)

    def entropy(self, rho, theta):
        """Specific entropy s(rho, theta) = S(Z)."""
        return self.structure_S(self.z_of(rho, theta))

    # -- analytic partial derivatives ---------------------------------------
    # Used by the sound speed, the relative-energy Hessian and the partial
    # derivative of the ballistic free energy; each is cross-checked against
    # finite differences in the tests.

    def dp_drho(self, rho, theta):
        theta = np.asarray(theta, dtype=float)
        return theta * self.structure_P_prime(self.z_of(rho, theta))

    def dp_dtheta(self, rho, theta):
        g = self.gamma
        theta = np.asarray(theta, dtype=float)
        z = self.z_of(rho, theta)
        gap = g * self.structure_P(z) - self.structure_P_prime(z) * z
        return theta ** (1.0 / (g - 1.0)) * gap / (g - 1.0)

    def de_drho(self, rho, theta):
        g = self.gamma
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        z = self.z_of(rho, theta)
        return (
            theta
            / ((g - 1.0) * rho)
            * (self.structure_P_prime(z) - self.structure_P(z) / z)
        )

    def de_dtheta(self, rho, theta):
        """Heat capacity de/dtheta = (gamma P - P' Z) / ((gamma-1)**2 Z) > 0."""
        g = self.gamma
        z = self.z_of(rho, theta)
        gap = g * self.structure_P(z) - self.structure_P_prime(z) * z
        return gap / ((g - 1.0) ** 2 * z)

    def ds_drho(self, rho, theta):
        theta = np.asarray(theta, dtype=float)
        z = self.z_of(rho, theta)
        return self.structure_S_prime(z) / theta ** (1.0 / (self.gamma - 1.0))

    def ds_dtheta(self, rho, theta):
        g = self.gamma
        theta = np.asarray(theta, dtype=float)
        z = self.z_of(rho, theta)
        return -self.structure_S_prime(z) * z / ((g - 1.0) * theta)

    def sound_speed(self, rho, theta, a=0.0):
        """Isentropic sound speed of the gas, radiation pressure included."""
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        dpdr = self.dp_drho(rho, theta)
        dpdt = self.dp_dtheta(rho, theta) + 4.0 * a * theta**3 / 3.0
        cv = self.de_dtheta(rho, theta) + 4.0 * a * theta**3 / rho
        return np.sqrt(dpdr + theta * dpdt**2 / (rho**2 * cv))

    def zero_temperature_energy(self, rho):
        """Residual specific energy of the hard branch as theta -> 0.

        Internal energy does not vanish with temperature once Z passes the
        seam; temperature inversion from energy is only solvable above
        rho * zero_temperature_energy(rho).
        """
        g = self.gamma
        rho = np.asarray(rho, dtype=float)
        return rho ** (g - 1.0) / (g * (g - 1.0) * self.z_threshold ** (g - 1.0))

    # -- serialization -------------------------------------------------------

    def to_config(self) -> dict:
        return {"gamma": self.gamma, "z_threshold": self.z_threshold}

    @classmethod
    def from_config(cls, cfg: dict) -> "GasModel":
        return cls(gamma=float(cfg["gamma"]), z_threshold=float(cfg["z_threshold"]))

    def with_radiation(self, a: float) -> "GasModel":
        return replace(self, radiation_coeff=float(a))


def build_gas_model(gamma: float, z_threshold: float, radiation_coeff: float = 0.0) -> GasModel:
    """Construct a validated GasModel (raises InvalidGasParameter)."""
    return GasModel(gamma=gamma, z_threshold=z_threshold, radiation_coeff=radiation_coeff)


def radiation_components(a, rho, theta):
    """Radiation pressure, specific energy and specific entropy (p_R, e_R, s_R)."""
    if np.any(np.asarray(a) < 0.0):
        raise InvalidGasParameter(f"radiation coefficient must be >= 0, got {a}")
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    t3 = theta**3
    p_r = a * t3 * theta / 3.0
    e_r = a * t3 * theta / rho
    s_r = 4.0 * a * t3 / (3.0 * rho)
    return p_r, e_r, s_r


def total_pressure(gas: GasModel, a, rho, theta):
    """Gas plus radiation pressure."""
    theta = np.asarray(theta, dtype=float)
    return gas.pressure(rho, theta) + a * theta**4 / 3.0


def total_entropy(gas: GasModel, a, rho, theta):
    """Gas plus radiation specific entropy."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return gas.entropy(rho, theta) + 4.0 * a * theta**3 / (3.0 * rho)


def gibbs_residual(gas: GasModel, rho, theta, fd_step=None):
    """Finite-difference residuals of Gibbs' relation at (rho, theta).

    Returns (r1, r2) with

        r1 = de/dtheta - theta * ds/dtheta,
        r2 = theta * ds/drho - de/drho + p / rho**2,

    where every derivative is a central difference with step
    fd_step * max(1, value) per variable (default fd_step 1e-5).  Both
    residuals vanish identically for the exact EOS; away from the seam the
    finite-difference values decay at second order in fd_step.
    """
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(rho <= 0.0) or np.any(theta <= 0.0):
        raise DegenerateState("gibbs_residual requires positive rho and theta")
    if fd_step is None:
        fd_step = 1e-5
    h_rho = fd_step * np.maximum(1.0, np.abs(rho))
    h_theta = fd_step * np.maximum(1.0, np.abs(theta))
    if np.any(rho <= 2.0 * h_rho) or np.any(theta <= 2.0 * h_theta):
        raise DegenerateState("finite-difference step too large for the state")

    de_dt = (gas.internal_energy(rho, theta + h_theta) - gas.internal_energy(rho, theta - h_theta)) / (2.0 * h_theta)
    ds_dt = (gas.entropy(rho, theta + h_theta) - gas.entropy(rho, theta - h_theta)) / (2.0 * h_theta)
    de_dr = (gas.internal_energy(rho + h_rho, theta) - gas.internal_energy(rho - h_rho, theta)) / (2.0 * h_rho)
    ds_dr = (gas.entropy(rho + h_rho, theta) - gas.entropy(rho - h_rho, theta)) / (2.0 * h_rho)

    r1 = de_dt - theta * ds_dt
    r2 = theta * ds_dr - de_dr + gas.pressure(rho, theta) / rho**2
    return r1, r2


@dataclass(frozen=True)
class StabilityReport:
    """Observed structure-function bounds over a sample of Z values."""

    n_samples: int
    min_p_prime: float
    min_pressure_gap: float
    max_gap_over_z: float
    max_entropy: float
    min_entropy: float

    @property
    def passed(self) -> bool:
        return self.min_p_prime > 0.0 and self.min_pressure_gap > 0.0


def stability_check(gas, z_samples) -> StabilityReport:
    """Verify P' > 0 and gamma P - P' Z > 0 on a sample of Z values.

    Raises StabilityViolation naming the offending Z if either bound
    fails; otherwise returns the observed extrema, including the ratio
    (gamma P - P' Z)/Z whose supremum must stay finite.
    """
    z = np.asarray(z_samples, dtype=float)
    if np.any(z <= 0.0):
        raise InvalidGasParameter("stability_check requires positive Z samples")
    p = np.asarray(gas.structure_P(z), dtype=float)
    pp = np.asarray(gas.structure_P_prime(z), dtype=float)
    s = np.asarray(gas.structure_S(z), dtype=float)
    gap = gas.gamma * p - pp * z
    if np.any(pp <= 0.0):
        bad = z.ravel()[np.argmax((pp <= 0.0).ravel())]
        raise StabilityViolation(f"P' <= 0 at Z = {bad}")
    if np.any(gap <= 0.0):
        bad = z.ravel()[np.argmax((gap <= 0.0).ravel())]
        raise StabilityViolation(f"gamma P - P' Z <= 0 at Z = {bad}")
    return StabilityReport(
        n_samples=int(z.size),
        min_p_prime=float(np.min(pp)),
        min_pressure_gap=float(np.min(gap)),
        max_gap_over_z=float(np.max(gap / z)),
        max_entropy=float(np.max(s)),
        min_entropy=float(np.min(s)),
    )
