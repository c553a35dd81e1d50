import numpy as np
import pytest

from nsflab.boundary_layer import (
    InvalidLayer,
    KatoTerms,
    apply_corrector,
    build_corrector,
    conditional_exponents,
    corrector_estimates,
    gradient_energy_exponent,
    kato_terms,
    layer_cutoff,
    layer_cutoff_derivative,
    layer_integral,
    layer_weights,
    normal_tangential_split,
    wall_distance,
    wall_distance_gradient,
    wall_projection,
)
from nsflab.euler_reference import (
    sample_trio,
    stationary_family,
    threshold_from_bounds,
    traveling_family,
)
from nsflab.grid import BoundarySpec, Grid, make_snapshot
from nsflab.thermodynamics import build_gas_model


def _family_gas(gamma=1.4, p0=1.0, amplitude=0.2):
    rho_max = 1.0 + amplitude
    e_min = p0 / ((gamma - 1.0) * rho_max)
    return build_gas_model(gamma, threshold_from_bounds(gamma, rho_max, e_min))


# ---------------------------------------------------------------------------
# geometry and cutoff


def test_wall_geometry():
    y = np.array([0.0, 0.3, 0.5, 0.7, 1.0])
    np.testing.assert_allclose(wall_distance(y), [0.0, 0.3, 0.5, 0.3, 0.0])
    np.testing.assert_array_equal(wall_distance_gradient(y), [1.0, 1.0, -1.0, -1.0, -1.0])
    np.testing.assert_array_equal(wall_projection(y), [0.0, 0.0, 1.0, 1.0, 1.0])


def test_split_reconstructs_and_separates():
    rng = np.random.default_rng(3)
    wx, wy = rng.normal(size=(2, 5, 7))
    (nx, ny), (tx, ty) = normal_tangential_split(wx, wy)
    np.testing.assert_array_equal(nx + tx, wx)
    np.testing.assert_array_equal(ny + ty, wy)
    assert np.all(nx == 0.0) and np.all(ty == 0.0)


def test_cutoff_shape():
    assert layer_cutoff(0.0) == 1.0
    assert layer_cutoff(1.0) == 0.0
    assert layer_cutoff(0.5) == pytest.approx(0.5)
    # clamped outside the layer coordinates
    assert layer_cutoff(-3.0) == 1.0
    assert layer_cutoff(7.0) == 0.0
    s = np.linspace(0.0, 1.0, 2001)
    xi = layer_cutoff(s)
    assert np.all(np.diff(xi) <= 0.0)


def test_cutoff_derivative():
    # steepest descent 15/8 in the middle, flat at the ends
    assert layer_cutoff_derivative(0.5) == -15.0 / 8.0
    assert layer_cutoff_derivative(0.0) == 0.0
    assert layer_cutoff_derivative(1.0) == 0.0
    assert layer_cutoff_derivative(-1.0) == 0.0
    s = np.linspace(0.02, 0.98, 49)
    fd = (layer_cutoff(s + 1e-6) - layer_cutoff(s - 1e-6)) / 2e-6
    np.testing.assert_allclose(layer_cutoff_derivative(s), fd, atol=1e-8)
    assert np.max(np.abs(layer_cutoff_derivative(s))) <= 15.0 / 8.0


# ---------------------------------------------------------------------------
# corrector


def test_build_corrector_validates_width():
    sol = stationary_family(_family_gas(), 1.0, 0.2)
    for bad in (0.0, -0.1, 0.5, 0.7):
        with pytest.raises(InvalidLayer):
            build_corrector(sol, bad)


def test_corrector_fields():
    sol = traveling_family(_family_gas(), 1.0, 0.2, speed=0.25)
    corr = build_corrector(sol, 0.1)
    x = np.array([0.3, 1.1])
    y_wall = np.array([1e-12, 1.0 - 1e-12])
    vx, vy = corr.velocity(0.2, x, y_wall)
    np.testing.assert_allclose(vx, 0.25, rtol=1e-9)
    assert np.all(vy == 0.0)
    # dead outside the layer
    vx_mid, _ = corr.velocity(0.2, x, np.array([0.3, 0.6]))
    assert np.all(vx_mid == 0.0)
    ax, ay = corr.velocity_dt(0.2, x, y_wall)
    assert np.all(ax == 0.0) and np.all(ay == 0.0)
    assert np.all(corr.divergence(0.2, x, y_wall) == 0.0)


def test_corrector_gradient_matches_fd():
    sol = traveling_family(_family_gas(), 1.0, 0.2, speed=0.4)
    corr = build_corrector(sol, 0.15)
    y = np.linspace(0.01, 0.99, 37)
    x = np.zeros_like(y)
    _, gxy, _, _ = corr.velocity_grad(0.0, x, y)
    eps = 1e-7
    fd = (corr.velocity(0.0, x, y + eps)[0] - corr.velocity(0.0, x, y - eps)[0]) / (2.0 * eps)
    np.testing.assert_allclose(gxy, fd, atol=1e-6)
    gxx, _, gyx, gyy = corr.velocity_grad(0.0, x, y)
    assert np.all(gxx == 0.0) and np.all(gyx == 0.0) and np.all(gyy == 0.0)


def test_apply_corrector_cancels_wall_trace():
    gas = _family_gas()
    sol = traveling_family(gas, 1.0, 0.2, speed=0.25)
    grid = Grid(32, 16)
    trio = sample_trio(sol, grid, 0.2)
    corr = build_corrector(sol, 0.2)
    mod = apply_corrector(grid, trio, corr)
    _, y = grid.cell_centers()
    expected = 0.25 * (1.0 - corr.cutoff(y))
    np.testing.assert_allclose(mod.Ux, expected, rtol=0, atol=1e-15)
    # first interior row sits deep in the layer, mid-channel is untouched
    assert np.all(mod.Ux[0] < 0.02)
    assert np.all(mod.Ux[8] == 0.25)
    np.testing.assert_allclose(
        mod.dUx_dy, -corr.velocity_grad(0.2, *grid.cell_centers())[1], atol=1e-15
    )
    # thermodynamic side is shared, not copied
    assert mod.r is trio.r and mod.Theta is trio.Theta
    assert np.array_equal(mod.dr_dx, trio.dr_dx)
    assert mod.t == trio.t
    assert np.all(mod.div_U == 0.0)


def test_corrector_estimates_and_sweep():
    sol = traveling_family(_family_gas(), 1.0, 0.2, speed=0.25)
    grid = Grid(128, 64)
    est = corrector_estimates(grid, build_corrector(sol, 0.2), 0.0)
    assert est["l2_sq"] > 0.0
    assert 0.2 < est["linf"] <= 0.25 * (1.0 + 1e-12)
    slope = gradient_energy_exponent(grid, sol, (0.2, 0.1, 0.05))
    assert -1.2 < slope < -0.8


# ---------------------------------------------------------------------------
# layer weights and Kato terms


def test_layer_weights_exact_overlap():
    grid = Grid(16, 8)
    w = layer_weights(grid, 0.25)
    np.testing.assert_array_equal(w, [1, 1, 0, 0, 0, 0, 1, 1])
    w2 = layer_weights(grid, 0.3)
    np.testing.assert_allclose(w2, [1, 1, 0.4, 0, 0, 0.4, 1, 1], atol=1e-14)
    assert float(np.sum(w2)) * grid.h == pytest.approx(0.6, rel=1e-12)
    with pytest.raises(InvalidLayer):
        layer_weights(grid, 0.5)
    with pytest.raises(InvalidLayer):
        layer_weights(grid, 0.0)


def test_layer_integral_uniform():
    grid = Grid(16, 8)
    w = layer_weights(grid, 0.25)
    # integral of 1 over both layers: 2 * delta * Lx = 2 * 0.25 * 2
    assert layer_integral(grid, w, np.ones(grid.shape)) == pytest.approx(1.0, rel=1e-12)


def _uniform_snapshot(grid, t, rho=1.0, uy=0.2, theta=1.0):
    shape = grid.shape
    return make_snapshot(
        grid,
        BoundarySpec("noslip"),
        t,
        np.full(shape, rho),
        np.zeros(shape),
        np.full(shape, uy),
        np.full(shape, theta),
    )


def test_kato_terms_uniform_oracle():
    grid = Grid(16, 8)
    snaps = [_uniform_snapshot(grid, 0.0), _uniform_snapshot(grid, 0.4)]
    terms = kato_terms(grid, snaps, delta=0.25, mu=0.01)
    assert isinstance(terms, KatoTerms)
    assert terms.mu_over_delta == pytest.approx(0.04)
    # (1/delta) * T * theta^2 * (2 delta Lx) = 2 T Lx
    assert terms.theta_sq == pytest.approx(2.0 * 0.4 * grid.lx, rel=1e-12)
    # (1/mu) * T * (rho uy)^2 * (2 delta Lx)
    assert terms.normal_momentum == pytest.approx(0.4 * 0.04 / 0.01, rel=1e-12)
    assert terms.resolved
    thin = kato_terms(grid, snaps, delta=0.1, mu=0.01)
    assert not thin.resolved


def test_kato_terms_validation():
    grid = Grid(16, 8)
    snaps = [_uniform_snapshot(grid, 0.0)]
    with pytest.raises(InvalidLayer):
        kato_terms(grid, snaps, delta=0.25, mu=0.01)
    with pytest.raises(InvalidLayer):
        kato_terms(grid, snaps * 2, delta=0.25, mu=0.0)


def test_conditional_exponents():
    q_theta, q_vel = conditional_exponents(1.0 / 3.0)
    assert q_theta == pytest.approx(4.0 / 3.0)
    assert q_vel == pytest.approx(12.0)
    _, q_vel1 = conditional_exponents(1.0)
    assert q_vel1 == np.inf
    with pytest.raises(InvalidLayer):
        conditional_exponents(0.0)
