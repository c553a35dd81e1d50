"""Wall-layer corrections and wall-layer (Kato-type) functionals.

The inviscid references slide along the walls, so they cannot serve as
comparison states for a no-slip run as they stand.  The corrector built
here multiplies the wall trace of the reference velocity by a smooth
cutoff of the scaled wall distance, producing a divergence-free field
that cancels the tangential trace inside a layer of width delta and
vanishes outside it.  Subtracting it from a reference trio yields a
comparison state admissible for no-slip walls.

The Kato-type terms measure how much of the temperature and of the
normal momentum lives inside the layer, time-integrated along a run;
their decay along a dissipation schedule is what the vanishing-layer
argument needs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .euler_reference import EulerSolution
from .grid import Grid, TrioSnapshot
from .relative_energy import cumulative_trapezoid


class InvalidLayer(ValueError):
    """Layer width outside (0, 1/2) or unusable functional inputs."""


# ---------------------------------------------------------------------------
# flat-channel wall geometry


def wall_distance(y):
    y = np.asarray(y, dtype=float)
    return np.minimum(y, 1.0 - y)


def wall_distance_gradient(y):
    """dy-derivative of the wall distance: +1 in the lower half, -1 above."""
    y = np.asarray(y, dtype=float)
    return np.where(y < 0.5, 1.0, -1.0)


def wall_projection(y):
    """y-coordinate of the nearest wall."""
    y = np.asarray(y, dtype=float)
    return np.where(y < 0.5, 0.0, 1.0)


def normal_tangential_split(wx, wy):
    """Split a vector field into wall-normal and wall-parallel parts.

    For the flat channel the wall normal is the y-axis everywhere, so the
    split is (0, wy) + (wx, 0).  Returned as ((nx, ny), (tx, ty)).
    """
    wx = np.asarray(wx, dtype=float)
    wy = np.asarray(wy, dtype=float)
    z = np.zeros(np.broadcast(wx, wy).shape)
    return (z, wy), (wx, z)


# ---------------------------------------------------------------------------
# cutoff profile


def layer_cutoff(s):
    """Quintic ramp from 1 at the wall down to 0 at the layer edge.

    C^1 at both ends (the derivative vanishes at s = 0 and s = 1), with
    the steepest slope 15/8 at s = 1/2.  Clamped outside [0, 1].
    """
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    return 1.0 - s**3 * (10.0 + s * (6.0 * s - 15.0))


def layer_cutoff_derivative(s):
    s = np.asarray(s, dtype=float)
    inside = (s > 0.0) & (s < 1.0)
    sc = np.clip(s, 0.0, 1.0)
    return np.where(inside, -30.0 * sc**2 * (1.0 - sc) ** 2, 0.0)


# ---------------------------------------------------------------------------
# corrector


@dataclass(frozen=True)
class Corrector:
    """Cutoff times the wall trace of the reference velocity.

    The references carry a uniform transport velocity, so the trace is
    wall-parallel and x-independent and the corrector is exactly
    divergence-free.
    """

    sol: EulerSolution
    delta: float

    def __post_init__(self):
        if not (0.0 < self.delta < 0.5):
            raise InvalidLayer(f"delta must lie in (0, 1/2), got {self.delta}")

    def cutoff(self, y):
        return layer_cutoff(wall_distance(y) / self.delta)

    def velocity(self, t, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        vx_w, vy_w = self.sol.velocity(t, x, wall_projection(y))
        xi = self.cutoff(y)
        return xi * vx_w, xi * vy_w

    def velocity_dt(self, t, x, y):
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.zeros(shape), np.zeros(shape)

    def velocity_grad(self, t, x, y):
        """(dvx_dx, dvx_dy, dvy_dx, dvy_dy) at the given points."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        vx_w, _ = self.sol.velocity(t, x, wall_projection(y))
        dxi = layer_cutoff_derivative(wall_distance(y) / self.delta)
        dvx_dy = vx_w * dxi * wall_distance_gradient(y) / self.delta
        z = np.zeros(np.broadcast(x, y).shape)
        return z, dvx_dy, z.copy(), z.copy()

    def divergence(self, t, x, y):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


def build_corrector(sol: EulerSolution, delta: float) -> Corrector:
    return Corrector(sol, float(delta))


def apply_corrector(grid: Grid, trio: TrioSnapshot, corrector: Corrector) -> TrioSnapshot:
    """Subtract the corrector from a reference trio sampled on the grid.

    Returns a new trio whose velocity vanishes at the walls, suitable as
    a no-slip comparison state.  Thermodynamic fields are untouched.
    """
    x, y = grid.cell_centers()
    t = trio.t
    vx, vy = corrector.velocity(t, x, y)
    ax, ay = corrector.velocity_dt(t, x, y)
    gxx, gxy, gyx, gyy = corrector.velocity_grad(t, x, y)
    return replace(
        trio,
        Ux=trio.Ux - vx,
        Uy=trio.Uy - vy,
        dUx_dt=trio.dUx_dt - ax,
        dUy_dt=trio.dUy_dt - ay,
        dUx_dx=trio.dUx_dx - gxx,
        dUx_dy=trio.dUx_dy - gxy,
        dUy_dx=trio.dUy_dx - gyx,
        dUy_dy=trio.dUy_dy - gyy,
    )


def corrector_estimates(grid: Grid, corrector: Corrector, t: float = 0.0) -> dict:
    """Grid measures of the corrector: L2 norm squared, gradient energy, sup."""
    x, y = grid.cell_centers()
    vx, vy = corrector.velocity(t, x, y)
    gxx, gxy, gyx, gyy = corrector.velocity_grad(t, x, y)
    return {
        "l2_sq": grid.integrate(vx**2 + vy**2),
        "grad_sq": grid.integrate(gxx**2 + gxy**2 + gyx**2 + gyy**2),
        "linf": float(np.max(np.hypot(vx, vy))),
    }


def gradient_energy_exponent(grid: Grid, sol: EulerSolution, deltas, t: float = 0.0) -> float:
    """Log-log slope of the corrector gradient energy against delta.

    The exact scaling is 1/delta, so the fitted exponent should sit near
    -1 once the layer is resolved.
    """
    deltas = [float(d) for d in deltas]
    if len(deltas) < 2:
        raise InvalidLayer("need at least two layer widths to fit an exponent")
    energies = [corrector_estimates(grid, build_corrector(sol, d), t)["grad_sq"] for d in deltas]
    slope = np.polyfit(np.log(deltas), np.log(energies), 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# layer integrals and Kato-type terms


def layer_weights(grid: Grid, delta: float):
    """Per-row overlap fraction of each cell with the layer {dist < delta}.

    Exact for the uniform grid, so layer integrals need no sub-cell
    quadrature: the weights of each wall sum to delta / h.
    """
    if not (0.0 < delta < 0.5):
        raise InvalidLayer(f"delta must lie in (0, 1/2), got {delta}")
    h = grid.h
    y = (np.arange(grid.ny) + 0.5) * h
    bottom = np.clip((delta - (y - 0.5 * h)) / h, 0.0, 1.0)
    top = np.clip((delta - ((1.0 - y) - 0.5 * h)) / h, 0.0, 1.0)
    return np.minimum(bottom + top, 1.0)


def layer_integral(grid: Grid, weights, field) -> float:
    return float(np.sum(field * weights[:, None]) * grid.cell_area)


@dataclass(frozen=True)
class KatoTerms:
    """Time-integrated wall-layer functionals for one run."""

    mu_over_delta: float
    theta_sq: float
    normal_momentum: float
    resolved: bool

    def as_tuple(self):
        return (self.mu_over_delta, self.theta_sq, self.normal_momentum)


def kato_terms(grid: Grid, snapshots, delta: float, mu: float) -> KatoTerms:
    """Evaluate the three wall-layer terms from a run's snapshots.

    theta_sq is (1/delta) times the space-time integral of theta^2 over
    the layer; normal_momentum is (1/mu) times that of (rho u_y)^2.  The
    time integral is a trapezoid over the snapshot times.  resolved is
    False when the layer is thinner than two cells, in which case the
    quadrature cannot see the layer profile.
    """
    if mu <= 0.0:
        raise InvalidLayer("mu must be positive")
    snapshots = list(snapshots)
    if len(snapshots) < 2:
        raise InvalidLayer("need at least two snapshots to integrate in time")
    w = layer_weights(grid, delta)
    times = np.array([s.t for s in snapshots])
    th = np.array([layer_integral(grid, w, s.theta**2) for s in snapshots])
    mn = np.array([layer_integral(grid, w, (s.rho * s.uy) ** 2) for s in snapshots])
    theta_sq = cumulative_trapezoid(times, th)[-1] / delta
    normal_momentum = cumulative_trapezoid(times, mn)[-1] / mu
    return KatoTerms(
        mu_over_delta=mu / delta,
        theta_sq=float(theta_sq),
        normal_momentum=float(normal_momentum),
        resolved=bool(delta >= 2.0 * grid.h),
    )


def conditional_exponents(alpha: float):
    """Integrability exponents the conditional wall-layer argument needs.

    Returns (q_theta, q_velocity); the velocity exponent degenerates to
    infinity at alpha = 1, where the quadratic form above suffices.
    """
    if not 0.0 < alpha <= 1.0:
        raise InvalidLayer(f"alpha must lie in (0, 1], got {alpha}")
    q_theta = 24.0 / (17.0 + 3.0 * alpha)
    q_velocity = np.inf if alpha == 1.0 else 8.0 / (1.0 - alpha)
    return q_theta, q_velocity
