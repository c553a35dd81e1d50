import numpy as np
import pytest

from nsflab.euler_reference import (
    CosineDensityProfile,
    EulerSolution,
    ReferenceOutOfRange,
    assign_temperature,
    entropy_conservation_residual,
    euler_residual,
    pressure_entropy_cancellation,
    sample_trio,
    stationary_family,
    threshold_from_bounds,
    transport_identity_residuals,
    traveling_family,
)
from nsflab.grid import Grid
from nsflab.thermodynamics import build_gas_model


def test_profile_values():
    prof = CosineDensityProfile(0.2, length=2.0)
    assert prof.value(0.0, 0.0) == pytest.approx(1.2)
    assert prof.value(1.0, 0.0) == pytest.approx(0.8)
    assert prof.value(0.5, 0.25) == pytest.approx(1.0, abs=1e-15)
    assert prof.rho_min == pytest.approx(0.8)
    assert prof.rho_max == pytest.approx(1.2)


def test_profile_wall_derivative_vanishes():
    prof = CosineDensityProfile(0.3, length=2.0)
    x = np.linspace(0.0, 2.0, 17)
    assert np.max(np.abs(prof.dy(x, 0.0))) < 1e-14
    assert np.max(np.abs(prof.dy(x, 1.0))) < 1e-14


def test_profile_derivatives_match_fd():
    prof = CosineDensityProfile(0.25, length=2.0)
    x = np.array([0.1, 0.7, 1.3])
    y = np.array([0.2, 0.5, 0.9])
    h = 1e-6
    fd_x = (prof.value(x + h, y) - prof.value(x - h, y)) / (2.0 * h)
    fd_y = (prof.value(x, y + h) - prof.value(x, y - h)) / (2.0 * h)
    assert np.allclose(prof.dx(x, y), fd_x, atol=1e-8)
    assert np.allclose(prof.dy(x, y), fd_y, atol=1e-8)


def test_profile_validation():
    with pytest.raises(ReferenceOutOfRange):
        CosineDensityProfile(1.0)
    with pytest.raises(ReferenceOutOfRange):
        CosineDensityProfile(0.2, length=-1.0)


def test_threshold_from_bounds_example():
    # gamma = 2: Z <= rho_max / ((gamma-1) e_min) = 2 / 0.5 = 4, times safety 1.5
    assert threshold_from_bounds(2.0, 2.0, 0.5) == pytest.approx(6.0)
    with pytest.raises(ReferenceOutOfRange):
        threshold_from_bounds(1.0, 2.0, 0.5)


def test_assign_temperature_ideal_and_rejection():
    gas = build_gas_model(2.0, 1.0)
    th = assign_temperature(gas, 0.5, 1.2)
    assert float(th) == pytest.approx(1.2)
    # Z = 2 / 0.1 = 20 blows past the threshold
    with pytest.raises(ReferenceOutOfRange):
        assign_temperature(gas, 2.0, 0.1)


def _default_gas(gamma=1.4, p0=1.0, amplitude=0.2):
    rho_max = 1.0 + amplitude
    e_min = p0 / ((gamma - 1.0) * rho_max)
    return build_gas_model(gamma, threshold_from_bounds(gamma, rho_max, e_min))


def test_solution_threshold_guard():
    gas = build_gas_model(1.4, 0.5)  # far too small for the profile
    with pytest.raises(ReferenceOutOfRange):
        stationary_family(gas, 1.0, 0.2)


def test_solution_field_identities():
    gas = _default_gas()
    sol = traveling_family(gas, 1.0, 0.2, 0.25)
    g = Grid(32, 16)
    X, Y = g.cell_centers()
    for t in (0.0, 0.37):
        rho = sol.density(t, X, Y)
        th = sol.temperature(t, X, Y)
        assert np.max(np.abs(rho * th - 1.0)) < 1e-14
        ids = transport_identity_residuals(sol, g, t)
        for name, val in ids.items():
            assert val < 1e-12, name
    assert sol.max_z() <= gas.z_threshold


def test_stationary_residuals_vanish_exactly():
    gas = _default_gas()
    sol = stationary_family(gas, 1.0, 0.2)
    g = Grid(32, 16)
    res = euler_residual(sol, g, 0.1)
    assert all(v == 0.0 for v in res.values())
    assert entropy_conservation_residual(sol, g, 0.1) == 0.0


def _traveling_residual_scale(ny):
    gas = _default_gas()
    sol = traveling_family(gas, 1.0, 0.2, 0.25)
    g = Grid(2 * ny, ny)
    res = euler_residual(sol, g, 0.2)
    return max(res.values()) + entropy_conservation_residual(sol, g, 0.2)


def test_traveling_residuals_second_order():
    r16 = _traveling_residual_scale(16)
    r32 = _traveling_residual_scale(32)
    assert r16 < 0.05
    assert r16 / r32 == pytest.approx(4.0, abs=0.6)


def test_traveling_momentum_y_residual_zero():
    # uy = 0 and p is constant, so the y-momentum balance is exact
    gas = _default_gas()
    sol = traveling_family(gas, 1.0, 0.2, 0.25)
    g = Grid(16, 8)
    assert euler_residual(sol, g, 0.3)["momentum_y"] == 0.0


def test_solution_derivatives_match_fd_in_time():
    gas = _default_gas()
    sol = traveling_family(gas, 1.0, 0.2, 0.4)
    x = np.array([0.3, 1.1])
    y = np.array([0.4, 0.6])
    t, h = 0.21, 1e-6
    fd = (sol.density(t + h, x, y) - sol.density(t - h, x, y)) / (2.0 * h)
    assert np.allclose(sol.density_dt(t, x, y), fd, atol=1e-8)
    fd = (sol.temperature(t + h, x, y) - sol.temperature(t - h, x, y)) / (2.0 * h)
    assert np.allclose(sol.temperature_dt(t, x, y), fd, atol=1e-8)
    fd = (sol.entropy(t + h, x, y) - sol.entropy(t - h, x, y)) / (2.0 * h)
    assert np.allclose(sol.entropy_dt(t, x, y), fd, atol=1e-8)


def test_sample_trio_layout():
    gas = _default_gas()
    sol = traveling_family(gas, 1.0, 0.2, 0.25)
    g = Grid(16, 8)
    trio = sample_trio(sol, g, 0.5)
    assert trio.t == 0.5
    assert trio.r.shape == g.shape
    assert np.all(trio.Ux == 0.25)
    assert np.all(trio.Uy == 0.0)
    assert np.all(trio.div_U == 0.0)
    assert np.all(trio.dUx_dt == 0.0)
    X, Y = g.cell_centers()
    assert np.array_equal(trio.r, sol.density(0.5, X, Y))
    # spatial gradient fields agree with a finite-difference probe
    h = 1e-6
    fd = (sol.temperature(0.5, X + h, Y) - sol.temperature(0.5, X - h, Y)) / (2.0 * h)
    assert np.allclose(trio.dTheta_dx, fd, atol=1e-8)


def test_pressure_entropy_cancellation_is_second_order():
    gas = build_gas_model(1.4, 3.0)
    rho0, th0 = 1.1, 0.8
    drho, dth = 0.7, -0.4

    def probe(eps):
        return float(pressure_entropy_cancellation(gas, rho0, th0, rho0 + eps * drho, th0 + eps * dth))

    eps = 1e-4
    first_order = (probe(eps) - probe(-eps)) / (2.0 * eps)
    assert abs(first_order) < 1e-6
    assert probe(eps) / probe(eps / 2.0) == pytest.approx(4.0, abs=0.1)

    # dropping the gamma correction leaves a genuine first-order term
    def lopsided(eps):
        rho, th = rho0 + eps * drho, th0 + eps * dth
        return float(
            gas.pressure(rho0, th0)
            - gas.pressure(rho, th)
            + (gas.gamma - 1.0)
            * rho0
            * th0
            * (gas.entropy(rho, th) - gas.entropy(rho0, th0))
        )

    assert abs((lopsided(eps) - lopsided(-eps)) / (2.0 * eps)) > 1e-3
