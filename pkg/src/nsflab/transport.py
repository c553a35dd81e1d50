"""Temperature-dependent transport coefficients and dissipative fluxes.

The shear viscosity, bulk viscosity and heat conductivity are smooth
functions of temperature alone,

    mu~(theta)  = 1 + (1 + theta**2)**(alpha/2),        alpha in [1/3, 1],
    eta~(theta) = bulk_coeff * (1 + (1 + theta**2)**(alpha/2)),
    kappa~(theta) = 1 + theta**3,

chosen so that the growth sandwiches hold with explicit constants:

    (1/2) (1 + theta**alpha) <= mu~ <= 2 (1 + theta**alpha),
    |mu~'| <= alpha <= 1,
    0 <= eta~ <= 2 bulk_coeff (1 + theta**alpha),
    1 + theta**3 <= kappa~ <= 1 + theta**3.

The viscous stress is the Newton form with the deviatoric projection taken
in the run's spatial dimension d,

    S = 2 mu~ (D - (1/d) div u I) + eta~ div u I,   D = (grad u + grad u^T)/2,

and the heat flux is Fourier's q = -kappa~ grad theta.  The entropy
production rate (1/theta) (mu_n S : grad u - kappa_n q . grad theta / theta)
is pointwise nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InvalidTransportParameter(ValueError):
    """Raised when a transport parameter is outside its admissible range."""


@dataclass(frozen=True)
class TransportModel:
    """Power-law transport coefficients with growth exponent alpha.

    Parameters
    ----------
    alpha : float
        Viscosity growth exponent, in [1/3, 1].
    bulk_coeff : float
        Bulk viscosity amplitude; 0 disables bulk viscosity.
    dim : int
        Spatial dimension used in the deviatoric projection (2 or 3).
    """

    alpha: float
    bulk_coeff: float = 0.0
    dim: int = 2

    def __post_init__(self):
        if not (1.0 / 3.0 <= self.alpha <= 1.0):
            raise InvalidTransportParameter(
                f"alpha must lie in [1/3, 1], got {self.alpha}"
            )
        if self.bulk_coeff < 0.0 or not math.isfinite(self.bulk_coeff):
            raise InvalidTransportParameter(
                f"bulk_coeff must be >= 0, got {self.bulk_coeff}"
            )
        if self.dim not in (2, 3):
            raise InvalidTransportParameter(f"dim must be 2 or 3, got {self.dim}")

    # observed sandwich constants, reported for the record
    shear_lower: float = 0.5
    shear_upper: float = 2.0
    conductivity_lower: float = 1.0
    conductivity_upper: float = 1.0

    @property
    def shear_derivative_bound(self) -> float:
        return self.alpha

    @property
    def bulk_upper(self) -> float:
        return 2.0 * self.bulk_coeff

    def shear_viscosity(self, theta):
        theta = np.asarray(theta, dtype=float)
        return 1.0 + (1.0 + theta**2) ** (0.5 * self.alpha)

    def shear_viscosity_derivative(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.alpha * theta * (1.0 + theta**2) ** (0.5 * self.alpha - 1.0)

    def bulk_viscosity(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.bulk_coeff * (1.0 + (1.0 + theta**2) ** (0.5 * self.alpha))

    def heat_conductivity(self, theta):
        theta = np.asarray(theta, dtype=float)
        return 1.0 + theta**3

    # -- dissipative fluxes --------------------------------------------------

    def stress_components(self, theta, dudx, dudy, dvdx, dvdy):
        """Planar viscous stress (sxx, sxy, syy) from velocity gradients.

        Array-valued; this is the single implementation behind both the
        matrix-valued viscous_stress and the solver's face fluxes.
        """
        mu_t = self.shear_viscosity(theta)
        eta_t = self.bulk_viscosity(theta)
        div = np.asarray(dudx) + np.asarray(dvdy)
        iso = div / self.dim
        sxx = 2.0 * mu_t * (dudx - iso) + eta_t * div
        syy = 2.0 * mu_t * (dvdy - iso) + eta_t * div
        sxy = mu_t * (np.asarray(dudy) + np.asarray(dvdx))
        return sxx, sxy, syy

    def viscous_stress(self, theta, grad_u):
        """Viscous stress tensor for grad_u with shape (..., 2, 2).

        grad_u[..., i, j] = d u_i / d x_j.
        """
        grad_u = np.asarray(grad_u, dtype=float)
        sxx, sxy, syy = self.stress_components(
            theta,
            grad_u[..., 0, 0],
            grad_u[..., 0, 1],
            grad_u[..., 1, 0],
            grad_u[..., 1, 1],
        )
        out = np.empty(np.broadcast(sxx, sxy).shape + (2, 2))
        out[..., 0, 0] = sxx
        out[..., 0, 1] = sxy
        out[..., 1, 0] = sxy
        out[..., 1, 1] = syy
        return out

    def heat_flux(self, theta, grad_theta):
        """Fourier heat flux -kappa~(theta) grad theta, shape of grad_theta."""
        kap = self.heat_conductivity(theta)
        return -kap[..., None] * np.asarray(grad_theta, dtype=float)

    def entropy_production(self, theta, grad_u, grad_theta, mu_n, kappa_n):
        """Pointwise entropy production rate; nonnegative for theta > 0."""
        theta = np.asarray(theta, dtype=float)
        grad_u = np.asarray(grad_u, dtype=float)
        grad_theta = np.asarray(grad_theta, dtype=float)
        s = self.viscous_stress(theta, grad_u)
        visc = mu_n * np.einsum("...ij,...ij->...", s, grad_u)
        kap = self.heat_conductivity(theta)
        heat = kappa_n * kap * np.sum(grad_theta**2, axis=-1) / theta
        return (visc + heat) / theta
