"""Vanishing-dissipation laboratory for compressible channel flow.

Subpackages cover the complete equation of state (thermodynamics),
temperature-dependent transport coefficients (transport), smooth reference
solutions of the inviscid limit system (euler_reference), a finite-volume
viscous solver (solver), relative-energy and consistency diagnostics
(relative_energy), wall-layer correctors and criteria (boundary_layer),
and the dissipation-schedule experiment harness (harness).
"""

from nsflab.thermodynamics import GasModel, build_gas_model, radiation_components

__all__ = ["GasModel", "build_gas_model", "radiation_components"]
