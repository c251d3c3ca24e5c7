import warnings

import numpy as np
import pytest

from hokdv.coeffs import ModelParameters, abcd, compute_equation_coefficients
from hokdv.errors import BlowUpError, InadmissibleCoefficientsError
from hokdv.spectral import (
    PeriodicGrid,
    WaveField,
    denominator,
    derivative_symbol,
    multiplier_eval,
    psi_symbol,
    random_band_limited,
    semigroup_apply,
    sobolev_norm,
)
from hokdv.solver import (
    InvariantDriftWarning,
    SolverConfig,
    SplitConfig,
    cutoff_profile,
    energy,
    energy_rate,
    g_coupling,
    h3_rate_check,
    invariants,
    local_existence_estimate,
    nonlinear_rhs,
    solve,
    solve_split,
    split_data,
    step,
    time_derivative,
    velocity_ansatz,
)

from conftest import gaussian


def test_nonlinear_rhs_trivial(ham_ec, grid64):
    assert np.all(nonlinear_rhs(WaveField(grid64, np.zeros(256)), ham_ec).values == 0)
    assert np.allclose(nonlinear_rhs(WaveField(grid64, np.full(256, 0.3)), ham_ec).values, 0,
                       atol=1e-16)


def test_nonlinear_rhs_cosine(ham_ec):
    # eta^2 = 1/2 + cos2x/2, eta_x^2 = 1/2 - cos2x/2, eta^3 = 3cosx/4 + cos3x/4,
    # and -i m(D) cos(jx) = m(j) sin(jx) for odd m
    g = PeriodicGrid(16, 2 * np.pi)
    out = nonlinear_rhs(WaveField.from_function(g, np.cos), ham_ec).values
    psi = lambda j: multiplier_eval("psi", ham_ec, j)  # noqa: E731
    tau2 = multiplier_eval("tau", ham_ec, 2.0)
    x = g.x
    expected = (-(3 / 32) * psi(1) * np.sin(x)
                + (tau2 / 2 + 7 / 96 * psi(2)) * np.sin(2 * x)
                - psi(3) / 32 * np.sin(3 * x))
    assert np.allclose(out, expected, atol=1e-15)


def test_step_zero_and_linear_limit(ham_ec, grid64):
    zero = WaveField(grid64, np.zeros(256))
    assert np.all(step(zero, 0.1, ham_ec).values == 0)
    eta = gaussian(grid64, 0.5, 2.0)
    lin = step(eta, 0.3, ham_ec, nonlinear=False)
    assert np.max(np.abs(lin.values - semigroup_apply(eta, 0.3, ham_ec).values)) < 1e-12


def test_step_local_order(ham_ec, grid64):
    eta = gaussian(grid64, 0.5, 2.0)
    diffs = []
    for dt in (0.4, 0.2):
        one = step(eta, dt, ham_ec)
        two = step(step(eta, dt / 2, ham_ec), dt / 2, ham_ec)
        diffs.append(np.linalg.norm(one.values - two.values))
    assert 24 < diffs[0] / diffs[1] < 40


def test_step_rejects_bad_dt(ham_ec, grid64):
    with pytest.raises(ValueError):
        step(gaussian(grid64), 0.0, ham_ec)


def test_blow_up_reports_time(ham_ec, grid64):
    huge = gaussian(grid64, 1e120, 2.0)
    with pytest.raises(BlowUpError) as info:
        with np.errstate(all="ignore"):
            step(huge, 0.1, ham_ec, t=2.5)
    assert info.value.t == 2.5


def test_solver_config_validation(ham_ec, grid64):
    with pytest.raises(ValueError):
        SolverConfig(grid64, -1.0, 1.0, ham_ec)
    with pytest.raises(ValueError):
        SolverConfig(grid64, 0.1, 1.0, ham_ec, record_every=0)
    with pytest.raises(InadmissibleCoefficientsError):
        SolverConfig(grid64, 0.1, 1.0, ham_ec.replace(delta1=0.0))


def test_cosine_initial_energy(ham_ec):
    L, A = 20.0, 0.3
    g = PeriodicGrid(64, L)
    k0 = 2 * np.pi / L
    eta = WaveField.from_function(g, lambda x: A * np.cos(k0 * x))
    expected = A**2 * L / 4 * (1 + ham_ec.gamma1 * k0**2 + ham_ec.delta1 * k0**4)
    assert energy(eta, ham_ec) == pytest.approx(expected, rel=1e-14)
    traj = solve(SolverConfig(g, 0.05, 0.2, ham_ec), eta)
    assert traj.invariants[0].E == pytest.approx(expected, rel=1e-14)


def test_invariants_of_zero(ham_ec, grid64):
    rec = invariants(WaveField(grid64, np.zeros(256)), ham_ec)
    assert rec.E == 0 and rec.Theta == 0 and rec.mean == 0


def test_solve_records_and_mean(ham_ec, grid64):
    eta = gaussian(grid64, 0.2, 2.0)
    traj = solve(SolverConfig(grid64, 0.03, 1.0, ham_ec, record_every=7), eta)
    # 34 steps of size 1/34; records at 0, 7, 14, 21, 28 and the final step
    assert len(traj.times) == 6
    assert traj.times[-1] == pytest.approx(1.0, abs=1e-14)
    assert np.max(np.abs(traj.column("mean") - traj.column("mean")[0])) < 1e-12
    assert traj.relative_drift("E") < 1e-8 and not traj.alarm


def test_drift_alarm_is_a_warning(ham_ec, grid64):
    eta = gaussian(grid64, 0.5, 1.0)
    with pytest.warns(InvariantDriftWarning):
        traj = solve(SolverConfig(grid64, 0.2, 2.0, ham_ec, tolerance=1e-14), eta)
    assert traj.alarm and traj.messages


def test_solve_is_deterministic(ham_ec, grid64):
    eta = gaussian(grid64, 0.3, 1.5)
    cfg = SolverConfig(grid64, 0.05, 1.0, ham_ec, record_every=5)
    a, b = solve(cfg, eta), solve(cfg, eta)
    assert np.array_equal(a.values, b.values)


def test_solve_grid_mismatch(ham_ec, grid64):
    with pytest.raises(ValueError):
        solve(SolverConfig(PeriodicGrid(128, 64.0), 0.1, 1.0, ham_ec), gaussian(grid64))


def test_energy_rate_zero_for_symmetric_start(ham_ec, grid64):
    ec = ham_ec.replace(gamma=ham_ec.gamma + 0.01)
    eta = WaveField.from_function(grid64, lambda x: 0.2 * np.cos(2 * np.pi * x / 64))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        traj = solve(SolverConfig(grid64, 0.01, 0.2, ec, record_every=2), eta)
    assert abs(energy_rate(traj, ec)[0]) < 1e-10


def test_h3_rate_check(ham_ec):
    g = PeriodicGrid(512, 64.0)
    zero = solve(SolverConfig(g, 0.1, 0.3, ham_ec), WaveField(g, np.zeros(512)))
    assert np.all(h3_rate_check(zero, ham_ec) == 0)
    eta = gaussian(g, 0.5, 2.0)
    coarse = solve(SolverConfig(g, 1e-3, 1.0, ham_ec, record_every=40), eta)
    fine = solve(SolverConfig(g, 1e-3, 1.0, ham_ec, record_every=20), eta)
    r_coarse, r_fine = h3_rate_check(coarse, ham_ec).max(), h3_rate_check(fine, ham_ec).max()
    assert r_fine <= 1e-6
    assert 3.0 < r_coarse / r_fine < 5.0


# ---------------------------------------------------------------------------
# splitting


def test_cutoff_profile():
    xi = np.linspace(-3, 3, 601)
    z = cutoff_profile(xi, "smooth")
    assert np.allclose(z, z[::-1])
    assert np.all((z >= 0) & (z <= 1))
    assert np.all(z[np.abs(xi) <= 1] == 1) and np.all(z[np.abs(xi) >= 2] == 0)
    s = cutoff_profile(xi, "sharp", 0.1)
    assert np.all(s[np.abs(xi) <= 1] == 1) and np.all(s[np.abs(xi) >= 1.1] == 0)
    with pytest.raises(ValueError):
        cutoff_profile(xi, "box")


def test_split_config_validation():
    with pytest.raises(ValueError):
        SplitConfig(0.0)
    with pytest.raises(ValueError):
        SplitConfig(0.5, "box")


def test_split_data_reconstructs(grid64):
    eta = gaussian(grid64, 0.3, 0.8)
    v, w = split_data(eta, SplitConfig(0.5, "sharp"))
    assert np.allclose(v.values + w.values, eta.values, atol=1e-16)
    v, w = split_data(eta, SplitConfig(1e-3))
    assert np.max(np.abs(v.values)) < 1e-16


def _spectral_field(grid, modes):
    return WaveField(grid, np.fft.irfft(modes * grid.n, n=grid.n))


def test_split_norm_scalings():
    # eta_hat(k) = exp(-k^2); sharp cutoff, s = 3/2, r = 1/2
    g = PeriodicGrid(1024, 64.0)
    eta = _spectral_field(g, np.exp(-g.kr**2))
    eps = [1.0, 0.5, 0.25]
    v_scaled, w_scaled = [], []
    for e in eps:
        v, w = split_data(eta, SplitConfig(e, "sharp", 1.5))
        v_scaled.append(sobolev_norm(v, 1.0) * e**-0.5)
        w_scaled.append(sobolev_norm(w, 2.5) * e)
    assert v_scaled[0] > v_scaled[1] > v_scaled[2]
    # eps * |w0|_{s+1} <= (4 + eps^2)^(1/2) |eta0|_s for a cutoff supported in |eps k| <= 2
    bound = [np.sqrt(4 + e * e) * sobolev_norm(eta, 1.5) for e in eps]
    assert all(ws <= b for ws, b in zip(w_scaled, bound))


def test_split_norm_scaling_rough_data():
    # power-law spectrum barely inside H^{3/2}: eps |w0|_{5/2} stays under its
    # uniform bound and, unlike for Gaussian data, decays only slowly
    g = PeriodicGrid(2048, 64.0)
    modes = (1 + g.kr**2) ** -1.01
    modes[-1] = 0
    eta = _spectral_field(g, modes)
    eps = [1.0, 0.5, 0.25, 0.125]
    w_scaled = [sobolev_norm(split_data(eta, SplitConfig(e, "smooth", 1.5))[1], 2.5) * e
                for e in eps]
    bound = np.sqrt(5.0) * sobolev_norm(eta, 1.5)
    assert max(w_scaled) <= bound
    assert w_scaled[-1] / w_scaled[0] > 0.5


def test_g_coupling_algebra(ham_ec, grid64):
    rng = np.random.default_rng(7)
    v = random_band_limited(grid64, rng, band=20)
    w = random_band_limited(grid64, rng, band=20)
    zero = WaveField(grid64, np.zeros(256))
    assert np.all(g_coupling(v, zero, ham_ec).values == 0)

    # G(0, w) is the flux nonlinearity of w; nonlinear_rhs(w) = -(1/D) G(0, w)
    g0 = np.fft.rfft(g_coupling(zero, w, ham_ec).values)
    lhs = -np.fft.irfft(g0 / denominator(grid64.kr, ham_ec), n=256)
    rhs = nonlinear_rhs(w, ham_ec, dealias=False).values
    assert np.allclose(lhs, rhs, atol=1e-12 * np.max(np.abs(rhs)))

    # quadratic in v: second difference in v isolates -3/4 (v^2 w)_x
    second = (g_coupling(WaveField(grid64, 2 * v.values), w, ham_ec).values
              - 2 * g_coupling(v, w, ham_ec).values + g_coupling(zero, w, ham_ec).values)
    vvw = np.fft.irfft(derivative_symbol(grid64, 1) * np.fft.rfft(v.values**2 * w.values), n=256)
    assert np.allclose(second, -0.75 * vvw, atol=1e-10 * np.max(np.abs(vvw)))


def test_g_coupling_is_flux_difference(ham_ec, grid64):
    # G(v, w) = N(v + w) - N(v)
    rng = np.random.default_rng(11)
    v = random_band_limited(grid64, rng, band=10)
    w = random_band_limited(grid64, rng, band=10)
    zero = WaveField(grid64, np.zeros(256))
    total = g_coupling(zero, WaveField(grid64, v.values + w.values), ham_ec).values
    part = g_coupling(zero, v, ham_ec).values
    assert np.allclose(g_coupling(v, w, ham_ec).values, total - part,
                       atol=1e-11 * np.max(np.abs(total)))


def test_solve_split_passes_everything(ham_ec, grid64):
    eta = gaussian(grid64, 0.1, 2.0)
    cfg = SolverConfig(grid64, 0.05, 2.0, ham_ec, record_every=4)
    direct = solve(cfg, eta)
    tv, tw = solve_split(cfg, eta, SplitConfig(1e-3))
    assert np.max(np.abs(tw.values - direct.values)) < 1e-10
    assert np.all(np.isfinite(tw.column("X")))


def test_solve_split_requires_hamiltonian(ham_ec, grid64):
    cfg = SolverConfig(grid64, 0.05, 0.2, ham_ec.replace(gamma=0.2))
    with pytest.raises(ValueError):
        solve_split(cfg, gaussian(grid64), SplitConfig(0.5))


# ---------------------------------------------------------------------------
# velocity and existence time


def test_velocity_trivial_and_constant(ham_ec, ham_params, grid64):
    zero = WaveField(grid64, np.zeros(256))
    assert np.all(velocity_ansatz(zero, ham_ec, ham_params).values == 0)
    c = 0.4
    w = velocity_ansatz(WaveField(grid64, np.full(256, c)), ham_ec, ham_params)
    assert np.allclose(w.values, c - c * c / 4 + c**3 / 8, atol=1e-15)


def test_velocity_first_order(ham_ec, grid64):
    p = ModelParameters.with_hamiltonian_rho(0.8, 0.3, -0.2, 3.0, 0.1)
    ec = compute_equation_coefficients(p)
    eta = gaussian(grid64, 0.2, 3.0)
    eta_t = time_derivative(eta, ec)
    k = grid64.kr
    a, b, c, d = abcd(p.theta_sq, p.lam, p.mu)
    u = eta.values
    uxx = np.fft.irfft(-k**2 * np.fft.rfft(u), n=256)
    uxt = np.fft.irfft(derivative_symbol(grid64, 1) * np.fft.rfft(eta_t.values), n=256)
    expected = u - u**2 / 4 + (c - a) / 2 * uxx + (b - d) / 2 * uxt
    got = velocity_ansatz(eta, ec, p, terms="first_order").values
    assert np.allclose(got, expected, atol=1e-15)
    with pytest.raises(ValueError):
        velocity_ansatz(eta, ec, p, terms="second")


def test_velocity_with_supplied_eta_t(ham_ec, ham_params, grid64):
    eta = gaussian(grid64, 0.2, 3.0)
    a = velocity_ansatz(eta, ham_ec, ham_params)
    b = velocity_ansatz(eta, ham_ec, ham_params, eta_t=time_derivative(eta, ham_ec))
    assert np.array_equal(a.values, b.values)


def test_local_existence_estimate(grid64):
    eta = gaussian(grid64, 1.0, 2.0)
    unit = WaveField(grid64, eta.values / sobolev_norm(eta, 1.5))
    est = local_existence_estimate(unit, 1.5, C_s=1.0)
    assert est.T_bar == pytest.approx(1 / 16, rel=1e-14)
    assert est.r == pytest.approx(2.0, rel=1e-14)
    zero = local_existence_estimate(WaveField(grid64, np.zeros(256)), 1.5)
    assert zero.T_bar == np.inf and zero.r == 0
    with pytest.raises(ValueError):
        local_existence_estimate(eta, 1.5, C_s=0.0)


def test_psi_symbol_matches_grid(ham_ec, grid64):
    assert np.allclose(psi_symbol(grid64.kr, ham_ec), multiplier_eval("psi", ham_ec, grid64.kr))
