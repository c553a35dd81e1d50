import numpy as np
import pytest

from nsflab.grid import BoundarySpec, Grid, TrioSnapshot, make_snapshot
from nsflab.relative_energy import (
    ConsistencyReport,
    EssResCutoff,
    augmented_relative_energy,
    augmented_relative_energy_density,
    ballistic_free_energy,
    ballistic_rho_derivative,
    coercivity_check,
    consistency_chain_margins,
    consistency_errors,
    cumulative_trapezoid,
    dissipation_rate,
    fit_consistency_constant,
    inequality_gap_series,
    radiation_gap,
    relative_energy_density,
    remainder_terms,
    total_energy,
    weighted_dissipation,
)
from nsflab.thermodynamics import build_gas_model
from nsflab.transport import TransportModel

GAS21 = build_gas_model(2.0, 1.0)


def test_ballistic_free_energy_hand_value():
    # gamma = 2, Zbar = 1, rho = 0.5, theta = 1: e = 1, s = 1 - log 0.5,
    # H = 0.5 * 1 - 1 * 0.5 * (1 - log 0.5) = 0.5 log 0.5
    h = ballistic_free_energy(GAS21, 0.0, 0.5, 1.0, 1.0)
    assert float(h) == pytest.approx(-0.34657359027997264, rel=1e-14)


def test_ballistic_rho_derivative_hand_value():
    # at (1, 1): e = 1, s = S(1) = 1, p = 1, so e - s + p/rho = 1
    assert float(ballistic_rho_derivative(GAS21, 1.0, 1.0)) == pytest.approx(1.0, rel=1e-14)


def test_relative_energy_density_hand_value():
    # E = H(0.5, 1) - 1 * (0.5 - 1) - H(1, 1) = 0.5 log 0.5 + 0.5
    e = relative_energy_density(GAS21, 0.5, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0)
    assert float(e) == pytest.approx(0.15342640972002736, rel=1e-13)


def test_radiation_gap_values():
    assert float(radiation_gap(1.0, 2.0, 1.0)) == pytest.approx(17.0 / 3.0, rel=1e-14)
    assert float(radiation_gap(0.7, 1.3, 1.3)) == 0.0
    rng = np.random.default_rng(7)
    th = 0.05 + 5.0 * rng.random(4000)
    Th = 0.05 + 5.0 * rng.random(4000)
    g = radiation_gap(0.4, th, Th)
    assert np.min(g) >= -1e-12 * np.max(np.abs(g))


def test_augmented_density_hand_value():
    # state (rho, u, theta) = (0.5, (1, -1), 2), trio (1, 1, 0), a = 1:
    # kinetic 1/2 * 0.5 * 2 = 0.5; gas Bregman 1 - log 2; radiation gap 17/3
    ea = augmented_relative_energy_density(GAS21, 1.0, 0.5, 1.0, -1.0, 2.0, 1.0, 1.0, 0.0, 0.0)
    assert float(ea) == pytest.approx(1.5 - np.log(2.0) + 17.0 / 3.0, rel=1e-13)
    e = relative_energy_density(GAS21, 0.5, 1.0, -1.0, 2.0, 1.0, 1.0, 0.0, 0.0)
    assert float(ea - e) == pytest.approx(17.0 / 3.0, rel=1e-13)


@pytest.mark.parametrize("gamma", [1.4, 5.0 / 3.0, 2.0])
@pytest.mark.parametrize("zbar", [0.5, 2.0])
def test_bregman_positivity(gamma, zbar):
    gas = build_gas_model(gamma, zbar)
    rng = np.random.default_rng(11)
    n = 10000

    def logu(lo, hi):
        return np.exp(np.log(lo) + (np.log(hi) - np.log(lo)) * rng.random(n))

    rho, r = logu(0.05, 20.0), logu(0.05, 20.0)
    th, Th = logu(0.05, 10.0), logu(0.05, 10.0)
    for a in (0.0, 0.5):
        e = augmented_relative_energy_density(gas, a, rho, 0.0, 0.0, th, r, Th, 0.0, 0.0)
        assert np.min(e) >= -1e-11
        far = (np.abs(rho - r) + np.abs(th - Th)) > 0.01
        assert np.min(e[far]) > 0.0


def test_augmented_dominates_base():
    gas = build_gas_model(1.4, 0.8)
    rng = np.random.default_rng(3)
    rho = 0.2 + 3.0 * rng.random(2000)
    th = 0.2 + 3.0 * rng.random(2000)
    base = relative_energy_density(gas, rho, 0.1, -0.2, th, 1.0, 1.0, 0.0, 0.0)
    aug = augmented_relative_energy_density(gas, 0.6, rho, 0.1, -0.2, th, 1.0, 1.0, 0.0, 0.0)
    assert np.all(aug - base >= -1e-12)
    same = augmented_relative_energy_density(gas, 0.0, rho, 0.1, -0.2, th, 1.0, 1.0, 0.0, 0.0)
    assert np.array_equal(same, base)


def _fd_hessian(f, x, y, h=1e-4):
    fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / h**2
    fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / h**2
    fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h**2)
    return fxx, fxy, fyy


def test_quadratic_expansion_at_base_point():
    # E_a / eps^2 tends to the half Hessian form of the ballistic potential
    # plus the kinetic block (1/2) r |du|^2
    gas = build_gas_model(1.4, 0.7)
    a, r, Th = 0.3, 1.2, 0.9

    def h_of(rho, th):
        return float(ballistic_free_energy(gas, a, rho, th, Th))

    hrr, hrt, htt = _fd_hessian(h_of, r, Th)
    drho, dth, dux, duy = 0.3, -0.2, 0.4, 0.1
    quad = 0.5 * (hrr * drho**2 + 2.0 * hrt * drho * dth + htt * dth**2)
    quad += 0.5 * r * (dux**2 + duy**2)

    eps = 1e-4
    ea = augmented_relative_energy_density(
        gas, a, r + eps * drho, 0.7 + eps * dux, -0.3 + eps * duy, Th + eps * dth, r, Th, 0.7, -0.3
    )
    assert float(ea) / eps**2 == pytest.approx(quad, rel=5e-3)


def test_total_energy_uniform_oracle():
    # gamma = 2, Zbar = 1, rho = theta = 1, u = 0, a = 1 on the unit square:
    # rho e = 1 and a theta^4 = 1, total 2
    g = Grid(8, 8)
    ones = np.ones(g.shape)
    e = total_energy(g, GAS21, 1.0, ones, 0.0 * ones, 0.0 * ones, ones)
    assert e == pytest.approx(2.0, rel=1e-14)


def test_total_energy_with_kinetic():
    # rho = 2, u = (3, 4), theta = 1, a = 0: 1/2 * 2 * 25 + 2 * 1.25 = 27.5
    g = Grid(8, 8)
    ones = np.ones(g.shape)
    e = total_energy(g, GAS21, 0.0, 2.0 * ones, 3.0 * ones, 4.0 * ones, ones)
    assert e == pytest.approx(27.5, rel=1e-14)


def test_cutoff_plateau_and_support():
    cut = EssResCutoff((1.0, 2.0), (0.5, 1.5))
    assert cut(1.5, 1.0) == 1.0
    assert cut(1.0, 0.5) == 1.0
    assert cut(0.4, 1.0) == 0.0
    assert cut(5.0, 1.0) == 0.0
    mid = float(cut(0.75, 1.0))
    assert 0.0 < mid < 1.0
    # tensor product: either factor kills it
    assert cut(0.75, 0.1) == 0.0
    # C^1 flatness at the plateau edge
    assert abs(float(cut(1.0 - 1e-4, 1.0)) - 1.0) < 1e-9


def test_cutoff_masks():
    cut = EssResCutoff((1.0, 2.0), (0.5, 1.5))
    rho = np.array([1.5, 0.4, 4.5, 0.75])
    th = np.array([1.0, 1.0, 1.0, 1.0])
    ess = cut.essential_mask(rho, th)
    res = cut.residual_mask(rho, th)
    assert ess.tolist() == [True, False, False, False]
    assert res.tolist() == [False, True, True, False]
    assert not np.any(ess & res)


def test_cutoff_validation():
    with pytest.raises(ValueError):
        EssResCutoff((2.0, 1.0), (0.5, 1.5))
    with pytest.raises(ValueError):
        EssResCutoff((1.0, 2.0), (0.5, 1.5), margin=1.0)


def test_coercivity_check_positive_constants():
    gas = build_gas_model(1.4, 1.0)
    cut = EssResCutoff((0.8, 1.6), (0.7, 1.4))
    rep = coercivity_check(gas, 0.2, cut, np.random.default_rng(5), n_samples=4000)
    assert rep.passed
    assert rep.c_quadratic > 1e-3
    assert rep.c_residual > 1e-3
    assert rep.n_essential > 3900
    assert rep.n_residual == 4000


def _smooth_state(g, amp=0.15):
    X, Y = g.cell_centers()
    kx = 2.0 * np.pi / g.lx
    rho = 1.0 + amp * np.cos(kx * X) * np.cos(np.pi * Y)
    ux = 0.3 * np.cos(kx * X) * np.cos(np.pi * Y)
    uy = 0.25 * np.sin(kx * X) * np.sin(np.pi * Y)
    theta = 1.0 + amp * np.sin(kx * X) * np.cos(np.pi * Y)
    return rho, ux, uy, theta


def test_dissipation_rate_zero_for_uniform():
    g = Grid(8, 8)
    tr = TransportModel(alpha=1.0)
    ones = np.ones(g.shape)
    snap = make_snapshot(g, BoundarySpec("slip"), 0.0, ones, 0.0 * ones, 0.0 * ones, ones)
    assert dissipation_rate(g, tr, snap, 0.1, 0.1) == 0.0


def test_dissipation_rate_weight_scaling():
    g = Grid(16, 8)
    tr = TransportModel(alpha=0.5)
    rho, ux, uy, theta = _smooth_state(g)
    snap = make_snapshot(g, BoundarySpec("slip"), 0.0, rho, ux, uy, theta)
    base = dissipation_rate(g, tr, snap, 0.1, 0.05)
    assert base > 0.0
    doubled = dissipation_rate(g, tr, snap, 0.1, 0.05, weight=2.0 * np.ones(g.shape))
    assert doubled == pytest.approx(2.0 * base, rel=1e-13)


def test_consistency_errors_uniform_state():
    g = Grid(16, 8)  # channel of length 2
    tr = TransportModel(alpha=1.0)
    ones = np.ones(g.shape)
    snap = make_snapshot(g, BoundarySpec("slip"), 0.0, ones, 0.0 * ones, 0.0 * ones, ones)
    a = 0.09
    err = consistency_errors(g, tr, a, 0.1, 0.05, snap)
    assert err.e1 == pytest.approx(a * 2.0 / 3.0, rel=1e-13)
    assert err.e2 == 0.0
    assert err.e3 == pytest.approx(4.0 * a * 2.0 / 3.0, rel=1e-13)
    assert err.e4 == 0.0
    assert err.e5 == 0.0
    assert err.e6 == pytest.approx(3.0 * err.e1, rel=1e-14)


def test_consistency_error_triple_identity_nonuniform():
    g = Grid(16, 8)
    tr = TransportModel(alpha=1.0)
    rho, ux, uy, theta = _smooth_state(g)
    snap = make_snapshot(g, BoundarySpec("slip"), 0.0, rho, ux, uy, theta)
    err = consistency_errors(g, tr, 0.3, 0.1, 0.05, snap)
    assert err.e6 == pytest.approx(3.0 * err.e1, rel=1e-13)
    assert min(err.as_tuple()) > 0.0


@pytest.mark.parametrize("alpha", [1.0 / 3.0, 1.0])
@pytest.mark.parametrize("a", [1e-6, 0.01, 1.0])
def test_consistency_chain_margins_nonnegative(alpha, a):
    g = Grid(16, 8)
    tr = TransportModel(alpha=alpha)
    rho, ux, uy, theta = _smooth_state(g)
    snap = make_snapshot(g, BoundarySpec("slip"), 0.0, rho, ux, uy, theta)
    mu = a ** ((1.0 + alpha) / 4.0)
    margins = consistency_chain_margins(g, tr, a, mu, mu**0.5, snap)
    for name, m in margins.items():
        assert m >= -1e-12, name


def test_consistency_chain_rejects_large_radiation():
    g = Grid(16, 8)
    tr = TransportModel(alpha=1.0)
    rho, ux, uy, theta = _smooth_state(g)
    snap = make_snapshot(g, BoundarySpec("slip"), 0.0, rho, ux, uy, theta)
    with pytest.raises(ValueError):
        consistency_chain_margins(g, tr, 1.5, 0.1, 0.1, snap)


def test_fit_consistency_constant_hand_values():
    c = fit_consistency_constant([1.0, 2.0], [1.0, 1.0], [1.0, 1.0], 0.5, 0.5)
    assert c == pytest.approx(1.0)
    assert fit_consistency_constant([0.1], [1.0], [1.0], 0.5, 0.5) == 0.0


def test_consistency_report_verdict():
    shrinking = ConsistencyReport(
        levels=(0, 1, 2),
        omegas=(0.2, 0.1, 0.05),
        constants=((1.0, 2.0), (0.6, 1.1), (0.3, 0.5)),
    )
    assert shrinking.bounded
    assert shrinking.worst_growth() == pytest.approx(1.0)

    blowing = ConsistencyReport(
        levels=(0, 1),
        omegas=(0.2, 0.1),
        constants=((1.0, 1.0), (1.0, 3.0)),
    )
    assert not blowing.bounded
    assert blowing.worst_growth() == pytest.approx(3.0)

    with pytest.raises(ValueError):
        ConsistencyReport(levels=(0,), omegas=(0.1, 0.2), constants=((1.0,),))


def _trio_like_snapshot(snap, dr_dx=None, dr_dy=None):
    z = np.zeros_like(snap.rho)
    return TrioSnapshot(
        t=snap.t,
        r=snap.rho.copy(),
        Theta=snap.theta.copy(),
        Ux=snap.ux.copy(),
        Uy=snap.uy.copy(),
        dr_dt=z,
        dTheta_dt=z,
        dUx_dt=z,
        dUy_dt=z,
        dr_dx=z if dr_dx is None else dr_dx,
        dr_dy=z if dr_dy is None else dr_dy,
        dTheta_dx=snap.dth_dx.copy(),
        dTheta_dy=snap.dth_dy.copy(),
        dUx_dx=snap.dux_dx.copy(),
        dUx_dy=snap.dux_dy.copy(),
        dUy_dx=snap.duy_dx.copy(),
        dUy_dy=snap.duy_dy.copy(),
    )


def test_remainder_collapses_for_identical_trio_uniform_thermo():
    # rho and theta constant, velocity arbitrary: every remainder term either
    # vanishes or cancels against the weighted dissipation to round-off
    g = Grid(16, 8)
    gas = build_gas_model(1.4, 3.0)
    tr = TransportModel(alpha=1.0)
    X, Y = g.cell_centers()
    kx = 2.0 * np.pi / g.lx
    rho = 1.3 * np.ones(g.shape)
    theta = 0.9 * np.ones(g.shape)
    ux = 0.4 * np.sin(kx * X) * np.cos(np.pi * Y)
    uy = 0.3 * np.cos(kx * X) * np.sin(np.pi * Y)
    snap = make_snapshot(g, BoundarySpec("slip"), 0.0, rho, ux, uy, theta)
    trio = _trio_like_snapshot(snap)

    a, mu, kappa = 0.3, 0.05, 0.02
    assert augmented_relative_energy(g, gas, a, snap, trio) == 0.0
    terms = remainder_terms(g, gas, tr, a, mu, kappa, snap, trio)
    wd = weighted_dissipation(g, tr, snap, trio, mu, kappa)
    assert terms.r1 == 0.0
    assert terms.r4 == 0.0
    assert terms.r5 == 0.0
    assert terms.r7 == 0.0
    assert terms.r8 == 0.0
    assert abs(terms.total - wd) < 1e-12


def _collapse_gap(ny, gas, tr, a, mu, kappa):
    g = Grid(2 * ny, ny)
    X, Y = g.cell_centers()
    kx = np.pi  # one period over the length-2 channel
    rho = 1.0 + 0.2 * np.cos(kx * X) * np.cos(np.pi * Y)
    theta = 1.0 + 0.15 * np.sin(kx * X) * np.cos(np.pi * Y)
    ux = 0.3 * np.cos(kx * X) * np.cos(np.pi * Y)
    uy = 0.25 * np.sin(kx * X) * np.sin(np.pi * Y)
    snap = make_snapshot(g, BoundarySpec("slip"), 0.0, rho, ux, uy, theta)

    z = np.zeros(g.shape)
    trio = TrioSnapshot(
        t=0.0,
        r=rho,
        Theta=theta,
        Ux=ux,
        Uy=uy,
        dr_dt=z,
        dTheta_dt=z,
        dUx_dt=z,
        dUy_dt=z,
        dr_dx=-0.2 * kx * np.sin(kx * X) * np.cos(np.pi * Y),
        dr_dy=-0.2 * np.pi * np.cos(kx * X) * np.sin(np.pi * Y),
        dTheta_dx=0.15 * kx * np.cos(kx * X) * np.cos(np.pi * Y),
        dTheta_dy=-0.15 * np.pi * np.sin(kx * X) * np.sin(np.pi * Y),
        dUx_dx=-0.3 * kx * np.sin(kx * X) * np.cos(np.pi * Y),
        dUx_dy=-0.3 * np.pi * np.cos(kx * X) * np.sin(np.pi * Y),
        dUy_dx=0.25 * kx * np.cos(kx * X) * np.sin(np.pi * Y),
        dUy_dy=0.25 * np.pi * np.sin(kx * X) * np.cos(np.pi * Y),
    )
    terms = remainder_terms(g, gas, tr, a, mu, kappa, snap, trio)
    wd = weighted_dissipation(g, tr, snap, trio, mu, kappa)
    return abs(terms.total - wd)


def test_remainder_collapse_is_second_order():
    # trio = state with analytic gradients: the residual budget is pure
    # discretization error and shrinks like h^2
    gas = build_gas_model(1.4, 3.0)
    tr = TransportModel(alpha=1.0)
    gap16 = _collapse_gap(16, gas, tr, 0.3, 0.05, 0.02)
    gap32 = _collapse_gap(32, gas, tr, 0.3, 0.05, 0.02)
    assert gap16 / gap32 == pytest.approx(4.0, abs=1.2)


def test_cumulative_trapezoid_hand_values():
    out = cumulative_trapezoid([0.0, 1.0, 2.0], [0.0, 2.0, 4.0])
    assert np.allclose(out, [0.0, 1.0, 4.0])
    with pytest.raises(ValueError):
        cumulative_trapezoid([0.0, 1.0], [1.0])


def test_inequality_gap_series_hand_values():
    times = np.array([0.0, 0.5, 1.0])
    ea = np.array([0.0, 0.0, 0.0])
    diss = np.array([1.0, 1.0, 1.0])
    rem = np.array([2.0, 2.0, 2.0])
    gap = inequality_gap_series(times, ea, diss, rem)
    assert np.allclose(gap, [0.0, 0.5, 1.0])
    # growing relative energy eats into the gap
    ea2 = np.array([0.0, 0.25, 0.5])
    gap2 = inequality_gap_series(times, ea2, diss, rem)
    assert np.allclose(gap2, [0.0, 0.25, 0.5])
