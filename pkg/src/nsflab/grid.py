"""Uniform channel grid, ghost-cell boundary fill, and field snapshots.

The domain is a 2D channel with solid walls at y = 0 and y = 1 and periodic
ends in x.  Cells are uniform squares of side h = 1/ny, so the channel
length is lx = nx * h; square grids give the unit square, a 2:1 grid like
128x64 gives the channel [0, 2] x [0, 1].  Arrays are indexed [j, i] with
j the wall-normal (y) index.

Ghost layers encode the boundary conditions by reflection:

    density, temperature    copied        (no-flux thermal wall),
    normal velocity         negated       (impermeable wall),
    tangential velocity     copied (slip) or negated (no-slip).

These parities make the wall fluxes of mass, energy and heat vanish
exactly in the finite-volume update.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InvalidGrid(ValueError):
    """Raised for unusable grid sizes."""


class InvalidBoundary(ValueError):
    """Raised for unknown boundary-condition names."""


@dataclass(frozen=True)
class Grid:
    """nx-by-ny uniform square-cell channel grid with walls at y = 0, 1."""

    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise InvalidGrid(f"grid must be at least 4x4, got {self.nx}x{self.ny}")

    @property
    def h(self) -> float:
        return 1.0 / self.ny

    @property
    def lx(self) -> float:
        return self.nx * self.h

    @property
    def ly(self) -> float:
        return 1.0

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    @property
    def shape(self) -> tuple:
        return (self.ny, self.nx)

    def cell_centers(self):
        """Cell-center coordinate arrays (X, Y), each of shape (ny, nx)."""
        x = (np.arange(self.nx) + 0.5) * self.h
        y = (np.arange(self.ny) + 0.5) * self.h
        return np.meshgrid(x, y)

    def integrate(self, f) -> float:
        """Cell-sum quadrature of a cell-centered field."""
        return float(np.sum(f) * self.cell_area)


@dataclass(frozen=True)
class BoundarySpec:
    """Wall condition for the velocity; walls are always thermally insulated."""

    kind: str = "slip"

    def __post_init__(self):
        if self.kind not in ("slip", "noslip"):
            raise InvalidBoundary(f"kind must be 'slip' or 'noslip', got {self.kind!r}")


# parity of each primitive under wall reflection: +1 copy, -1 negate
def _wall_parities(bc: BoundarySpec):
    tang = 1.0 if bc.kind == "slip" else -1.0
    return {"rho": 1.0, "ux": tang, "uy": -1.0, "theta": 1.0}


def pad_field(grid: Grid, arr, parity: float, depth: int = 2):
    """Extend a cell-centered field with ghost layers.

    x is wrapped periodically; across each wall the field is reflected with
    the given parity.
    """
    ny, nx = grid.shape
    if arr.shape != (ny, nx):
        raise InvalidGrid(f"field shape {arr.shape} does not match grid {grid.shape}")
    if depth > ny or depth > nx:
        raise InvalidGrid("ghost depth exceeds grid size")
    out = np.empty((ny + 2 * depth, nx + 2 * depth), dtype=float)
    out[depth:-depth, depth:-depth] = arr
    # periodic in x first so the wall reflection also fills the corners
    out[depth:-depth, :depth] = arr[:, -depth:]
    out[depth:-depth, -depth:] = arr[:, :depth]
    for m in range(depth):
        out[depth - 1 - m, :] = parity * out[depth + m, :]
        out[ny + depth + m, :] = parity * out[ny + depth - 1 - m, :]
    return out


def pad_primitives(grid: Grid, bc: BoundarySpec, rho, ux, uy, theta, depth: int = 2):
    """Ghost-extend the four primitive fields with their wall parities."""
    par = _wall_parities(bc)
    return (
        pad_field(grid, rho, par["rho"], depth),
        pad_field(grid, ux, par["ux"], depth),
        pad_field(grid, uy, par["uy"], depth),
        pad_field(grid, theta, par["theta"], depth),
    )


def centered_gradient(grid: Grid, padded, depth: int = 2):
    """Second-order centered (d/dx, d/dy) of a ghost-extended field."""
    d = depth
    ny, nx = grid.shape
    inv2h = 0.5 / grid.h
    dfdx = (padded[d : d + ny, d + 1 : d + 1 + nx] - padded[d : d + ny, d - 1 : d - 1 + nx]) * inv2h
    dfdy = (padded[d + 1 : d + 1 + ny, d : d + nx] - padded[d - 1 : d - 1 + ny, d : d + nx]) * inv2h
    return dfdx, dfdy


@dataclass(frozen=True)
class StateSnapshot:
    """Primitive fields of one solver state plus velocity/temperature gradients.

    All arrays are cell-centered with shape (ny, nx); gradients use the
    ghost-cell reflection of the run's boundary condition.
    """

    t: float
    rho: np.ndarray
    ux: np.ndarray
    uy: np.ndarray
    theta: np.ndarray
    dux_dx: np.ndarray
    dux_dy: np.ndarray
    duy_dx: np.ndarray
    duy_dy: np.ndarray
    dth_dx: np.ndarray
    dth_dy: np.ndarray

    @property
    def div_u(self):
        return self.dux_dx + self.duy_dy

    def grad_u(self):
        """Velocity gradient with shape (ny, nx, 2, 2), [..., i, j] = du_i/dx_j."""
        g = np.empty(self.rho.shape + (2, 2))
        g[..., 0, 0] = self.dux_dx
        g[..., 0, 1] = self.dux_dy
        g[..., 1, 0] = self.duy_dx
        g[..., 1, 1] = self.duy_dy
        return g

    def grad_theta(self):
        return np.stack([self.dth_dx, self.dth_dy], axis=-1)


def make_snapshot(grid: Grid, bc: BoundarySpec, t, rho, ux, uy, theta) -> StateSnapshot:
    """Assemble a StateSnapshot, computing the six gradient fields."""
    par = _wall_parities(bc)
    pux = pad_field(grid, ux, par["ux"], 1)
    puy = pad_field(grid, uy, par["uy"], 1)
    pth = pad_field(grid, theta, par["theta"], 1)
    dux_dx, dux_dy = centered_gradient(grid, pux, 1)
    duy_dx, duy_dy = centered_gradient(grid, puy, 1)
    dth_dx, dth_dy = centered_gradient(grid, pth, 1)
    return StateSnapshot(
        t=float(t),
        rho=np.array(rho, dtype=float, copy=True),
        ux=np.array(ux, dtype=float, copy=True),
        uy=np.array(uy, dtype=float, copy=True),
        theta=np.array(theta, dtype=float, copy=True),
        dux_dx=dux_dx,
        dux_dy=dux_dy,
        duy_dx=duy_dx,
        duy_dy=duy_dy,
        dth_dx=dth_dx,
        dth_dy=dth_dy,
    )


@dataclass(frozen=True)
class TrioSnapshot:
    """Smooth comparison fields (r, Theta, U) with analytic derivatives.

    Every array is cell-centered, shape (ny, nx).  Time and space
    derivatives come from the closed-form reference solution (plus
    corrector, when one is subtracted), never from differencing the grid.
    """

    t: float
    r: np.ndarray
    Theta: np.ndarray
    Ux: np.ndarray
    Uy: np.ndarray
    dr_dt: np.ndarray
    dTheta_dt: np.ndarray
    dUx_dt: np.ndarray
    dUy_dt: np.ndarray
    dr_dx: np.ndarray
    dr_dy: np.ndarray
    dTheta_dx: np.ndarray
    dTheta_dy: np.ndarray
    dUx_dx: np.ndarray
    dUx_dy: np.ndarray
    dUy_dx: np.ndarray
    dUy_dy: np.ndarray

    @property
    def div_U(self):
        return self.dUx_dx + self.dUy_dy
