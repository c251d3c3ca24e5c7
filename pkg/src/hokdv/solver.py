"""Periodic pseudospectral solver for the fifth-order KdV-BBM model.

The equation is advanced in the form

    eta_t = -i phi(D) eta - i [ tau(D) eta^2 - 1/8 psi(D) eta^3 - 7/48 psi(D) eta_x^2 ]

with an integrating-factor (Lawson) fourth-order Runge-Kutta scheme: RK4
is applied to v(t) = S(-t) eta(t), so the linear group S(t) is treated
exactly and only the Duhamel integrand is discretized.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .coeffs import EquationCoefficients, ModelParameters, abcd, higher_abcd
from .errors import BlowUpError, InadmissibleCoefficientsError
from .spectral import (
    MultiplierKind,
    PeriodicGrid,
    WaveField,
    derivative_symbol,
    sobolev_norm,
    symbol_on_grid,
)

SEVEN_48 = 7.0 / 48.0


class InvariantDriftWarning(UserWarning):
    """Relative drift of E exceeded the configured tolerance."""


@dataclass
class SolverConfig:
    grid: PeriodicGrid
    dt: float
    t_end: float
    ec: EquationCoefficients
    dealias: bool = True
    record_every: int = 1
    tolerance: float = 1e-8

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end!r}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be a positive integer, got {self.record_every!r}")
        if self.ec.delta1 == 0:
            raise InadmissibleCoefficientsError("delta1 = 0 is not supported")
        if not (self.ec.gamma1 >= 0 and self.ec.delta1 > 0):
            raise InadmissibleCoefficientsError(
                f"need gamma1 >= 0 and delta1 > 0, got {self.ec.gamma1!r}, {self.ec.delta1!r}")

    @property
    def n_steps(self):
        return max(1, math.ceil(self.t_end / self.dt - 1e-9))

    @property
    def step_size(self):
        """dt shrunk (if needed) so that n_steps steps land exactly on t_end."""
        return self.t_end / self.n_steps


@dataclass
class InvariantRecord:
    t: float
    E: float
    Theta: float
    mean: float
    energy_rate_residual: float = float("nan")
    X: float = float("nan")


@dataclass
class Trajectory:
    times: np.ndarray
    snapshots: list
    invariants: list
    alarm: bool = False
    messages: list = field(default_factory=list)

    @property
    def values(self):
        """Snapshots stacked into a (len(times), n) array."""
        return np.array([s.values for s in self.snapshots])

    @property
    def grid(self):
        return self.snapshots[0].grid

    def column(self, name):
        return np.array([getattr(r, name) for r in self.invariants])

    def relative_drift(self, name):
        vals = self.column(name)
        ref = abs(vals[0])
        if ref == 0.0:
            return float(np.max(np.abs(vals - vals[0])))
        return float(np.max(np.abs(vals - vals[0])) / ref)


@dataclass
class SplitConfig:
    epsilon: float
    cutoff: Literal["sharp", "smooth"] = "smooth"
    s: float = 1.5

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon!r}")
        if self.cutoff not in ("sharp", "smooth"):
            raise ValueError(f"cutoff must be 'sharp' or 'smooth', got {self.cutoff!r}")


@dataclass
class LocalExistenceEstimate:
    r: float
    T_bar: float
    C_s: float
    norm: float
    s: float


# ---------------------------------------------------------------------------
# spectral operators


class _Operators:
    """Symbols of one (grid, coefficients) pair on the rfft half spectrum."""

    def __init__(self, grid: PeriodicGrid, ec: EquationCoefficients, dealias: bool = True):
        self.grid = grid
        self.ec = ec
        self.n = grid.n
        self.ik = derivative_symbol(grid, 1)
        self.phi = symbol_on_grid(MultiplierKind.PHI, ec, grid)
        self.psi = symbol_on_grid(MultiplierKind.PSI, ec, grid)
        self.tau = symbol_on_grid(MultiplierKind.TAU, ec, grid)
        self.mask = grid.dealias_mask() if dealias else np.ones(grid.n // 2 + 1, bool)
        self._propagators = {}

    def propagator(self, h):
        if h not in self._propagators:
            self._propagators[h] = np.exp(-1j * self.phi * h)
        return self._propagators[h]

    def to_phys(self, uh):
        return np.fft.irfft(uh, n=self.n)

    def rhs(self, uh):
        """Nonlinear part of eta_t (hat space), x^2 weight fixed at 7/48."""
        u = self.to_phys(uh)
        ux = self.to_phys(self.ik * uh)
        q2 = np.fft.rfft(u * u)
        q3 = np.fft.rfft(u * u * u)
        qx = np.fft.rfft(ux * ux)
        out = -1j * (self.tau * q2 - 0.125 * self.psi * q3 - SEVEN_48 * self.psi * qx)
        out[~self.mask] = 0.0
        return out

    def rhs_w(self, vh, wh):
        """Nonlinear part of w_t when eta = v + w and v solves the full equation."""
        g = self.ec.gamma
        v, w = self.to_phys(vh), self.to_phys(wh)
        vx, wx = self.to_phys(self.ik * vh), self.to_phys(self.ik * wh)
        q2 = np.fft.rfft(2 * v * w + w * w)
        q3 = np.fft.rfft(w * w * w + 3 * v * v * w + 3 * v * w * w)
        qx = np.fft.rfft(wx * wx + 2 * vx * wx)
        out = -1j * (self.tau * q2 - 0.125 * self.psi * q3 - g * self.psi * qx)
        out[~self.mask] = 0.0
        return out

    def linear_rate(self, uh):
        return -1j * self.phi * uh


def _ifrk4(ops, uh, h, rhs):
    """One integrating-factor RK4 step for u_t = -i phi u + rhs(u)."""
    e_half = ops.propagator(h / 2)
    e_full = ops.propagator(h)
    k1 = rhs(uh)
    k2 = rhs(e_half * (uh + 0.5 * h * k1))
    k3 = rhs(e_half * uh + 0.5 * h * k2)
    k4 = rhs(e_full * uh + h * e_half * k3)
    return e_full * uh + (h / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)


def _ifrk4_pair(ops, vh, wh, h):
    """IF-RK4 for the (v, w) system; v is advanced exactly as in a direct solve."""
    e_half = ops.propagator(h / 2)
    e_full = ops.propagator(h)
    kv1, kw1 = ops.rhs(vh), ops.rhs_w(vh, wh)
    v2, w2 = e_half * (vh + 0.5 * h * kv1), e_half * (wh + 0.5 * h * kw1)
    kv2, kw2 = ops.rhs(v2), ops.rhs_w(v2, w2)
    v3, w3 = e_half * vh + 0.5 * h * kv2, e_half * wh + 0.5 * h * kw2
    kv3, kw3 = ops.rhs(v3), ops.rhs_w(v3, w3)
    v4, w4 = e_full * vh + h * e_half * kv3, e_full * wh + h * e_half * kw3
    kv4, kw4 = ops.rhs(v4), ops.rhs_w(v4, w4)
    vn = e_full * vh + (h / 6.0) * (e_full * kv1 + 2.0 * e_half * (kv2 + kv3) + kv4)
    wn = e_full * wh + (h / 6.0) * (e_full * kw1 + 2.0 * e_half * (kw2 + kw3) + kw4)
    return vn, wn


def _check_finite(uh, t):
    if not np.all(np.isfinite(uh)):
        raise BlowUpError(f"solution became non-finite after t = {t:.17g}", t)


# ---------------------------------------------------------------------------
# public operations


def nonlinear_rhs(eta: WaveField, ec: EquationCoefficients, dealias: bool = True) -> WaveField:
    """Real field whose transform is -i[tau eta^2 - psi eta^3/8 - 7/48 psi eta_x^2]."""
    ops = _Operators(eta.grid, ec, dealias)
    return WaveField(eta.grid, ops.to_phys(ops.rhs(np.fft.rfft(eta.values))))


def time_derivative(eta: WaveField, ec: EquationCoefficients, dealias: bool = True) -> WaveField:
    """eta_t obtained from the evolution equation (linear + nonlinear parts)."""
    ops = _Operators(eta.grid, ec, dealias)
    uh = np.fft.rfft(eta.values)
    return WaveField(eta.grid, ops.to_phys(ops.linear_rate(uh) + ops.rhs(uh)))


def step(eta: WaveField, dt: float, ec: EquationCoefficients, *, dealias: bool = True,
         nonlinear: bool = True, t: float = 0.0) -> WaveField:
    """Advance ``eta`` by one IF-RK4 step of size ``dt``.

    ``nonlinear=False`` drops the Duhamel integrand, leaving S(dt) eta.
    ``t`` only labels a :class:`BlowUpError`.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    ops = _Operators(eta.grid, ec, dealias)
    uh = np.fft.rfft(eta.values)
    if nonlinear:
        out = _ifrk4(ops, uh, dt, ops.rhs)
    else:
        out = ops.propagator(dt) * uh
    _check_finite(out, t)
    return WaveField(eta.grid, ops.to_phys(out))


def _integral(values, grid):
    # trapezoid rule; exact for trigonometric polynomials of degree < n
    return float(np.sum(values) * grid.dx)


def _derivatives(uh, grid, count):
    ik = derivative_symbol(grid, 1)
    out = []
    d = uh
    for _ in range(count):
        d = ik * d
        out.append(np.fft.irfft(d, n=grid.n))
    return out


def energy(eta: WaveField, ec: EquationCoefficients) -> float:
    uh = np.fft.rfft(eta.values)
    ux, uxx = _derivatives(uh, eta.grid, 2)
    u = eta.values
    return 0.5 * _integral(u * u + ec.gamma1 * ux * ux + ec.delta1 * uxx * uxx, eta.grid)


def theta_functional(eta: WaveField, ec: EquationCoefficients) -> float:
    uh = np.fft.rfft(eta.values)
    ux, uxx = _derivatives(uh, eta.grid, 2)
    u = eta.values
    dens = (-u * u - 0.5 * u ** 3 + u ** 4 / 16 + (7.0 / 24.0) * u * ux * ux
            + ec.gamma2 * ux * ux - ec.delta2 * uxx * uxx)
    return 0.5 * _integral(dens, eta.grid)


def x_functional(w: WaveField, ec: EquationCoefficients) -> float:
    """int (w^2 + gamma1 w_x^2 + delta1 w_xx^2) dx, equivalent to ||w||_{H^2}^2."""
    return 2.0 * energy(w, ec)


def cubic_slope_integral(eta: WaveField) -> float:
    """int eta_x^3 dx."""
    (ux,) = _derivatives(np.fft.rfft(eta.values), eta.grid, 1)
    return _integral(ux ** 3, eta.grid)


def invariants(eta: WaveField, ec: EquationCoefficients) -> InvariantRecord:
    """E, Theta and the mean of one snapshot (t is left at 0)."""
    return InvariantRecord(t=0.0, E=energy(eta, ec), Theta=theta_functional(eta, ec),
                           mean=eta.mean())


def _time_derivative_series(values, times):
    """Second-order finite differences: centred inside, one-sided at the ends."""
    return np.gradient(np.asarray(values, dtype=float), np.asarray(times, dtype=float),
                       edge_order=2)


def energy_rate_check(traj: Trajectory, ec: EquationCoefficients) -> np.ndarray:
    """|dE/dt - (gamma - 7/48) int eta_x^3 dx| at each recorded time."""
    if len(traj.times) < 3:
        raise ValueError("need at least 3 snapshots")
    E = np.array([energy(s, ec) for s in traj.snapshots])
    dE = _time_derivative_series(E, traj.times)
    predicted = np.array([(ec.gamma - SEVEN_48) * cubic_slope_integral(s)
                          for s in traj.snapshots])
    return np.abs(dE - predicted)


def energy_rate(traj: Trajectory, ec: EquationCoefficients) -> np.ndarray:
    """Finite-difference dE/dt along a trajectory."""
    E = np.array([energy(s, ec) for s in traj.snapshots])
    return _time_derivative_series(E, traj.times)


def h3_rate_check(traj: Trajectory, ec: EquationCoefficients) -> np.ndarray:
    """Residual of the H^3-level balance law obeyed when gamma = 7/48.

    |1/2 d/dt int(eta_x^2 + gamma1 eta_xx^2 + delta1 eta_xxx^2)
     + 3/4 int eta_x^3 - 3 gamma int eta_xx^2 eta_x - 3/8 int eta_x^3 eta|
    """
    if len(traj.times) < 3:
        raise ValueError("need at least 3 snapshots")
    grid = traj.grid
    level, source = [], []
    for snap in traj.snapshots:
        u = snap.values
        ux, uxx, uxxx = _derivatives(np.fft.rfft(u), grid, 3)
        level.append(0.5 * _integral(ux * ux + ec.gamma1 * uxx * uxx + ec.delta1 * uxxx * uxxx, grid))
        source.append(_integral(0.75 * ux ** 3 - 3 * ec.gamma * uxx * uxx * ux
                                - 0.375 * ux ** 3 * u, grid))
    rate = _time_derivative_series(level, traj.times)
    return np.abs(rate + np.array(source))


def _record(uh, grid, ec, t, X=float("nan")):
    snap = WaveField(grid, np.fft.irfft(uh, n=grid.n))
    rec = invariants(snap, ec)
    rec.t = t
    rec.X = X
    return snap, rec


def _fill_energy_rate(traj, ec):
    if len(traj.times) >= 3:
        for rec, r in zip(traj.invariants, energy_rate_check(traj, ec)):
            rec.energy_rate_residual = float(r)


def _drift_alarm(traj, cfg):
    drift = traj.relative_drift("E")
    if cfg.ec.is_hamiltonian and drift > cfg.tolerance:
        msg = (f"relative drift of E is {drift:.3e} > tolerance {cfg.tolerance:.3e} "
               f"although gamma = 7/48")
        traj.alarm = True
        traj.messages.append(msg)
        warnings.warn(msg, InvariantDriftWarning, stacklevel=3)


def solve(cfg: SolverConfig, eta0: WaveField) -> Trajectory:
    """Integrate from eta0 to cfg.t_end, recording every cfg.record_every steps.

    The final time is always recorded.  A drift of E beyond cfg.tolerance on a
    Hamiltonian run (gamma = 7/48) sets ``alarm`` and issues an
    :class:`InvariantDriftWarning`; it is not an error.
    """
    if eta0.grid != cfg.grid:
        raise ValueError("eta0 is not on the configured grid")
    grid, ec = cfg.grid, cfg.ec
    ops = _Operators(grid, ec, cfg.dealias)
    h, n_steps = cfg.step_size, cfg.n_steps
    uh = np.fft.rfft(eta0.values)
    times, snaps, recs = [], [], []

    def record(i):
        t = i * h
        snap, rec = _record(uh, grid, ec, t)
        times.append(t)
        snaps.append(snap)
        recs.append(rec)

    record(0)
    for i in range(1, n_steps + 1):
        uh = _ifrk4(ops, uh, h, ops.rhs)
        _check_finite(uh, (i - 1) * h)
        if i % cfg.record_every == 0 or i == n_steps:
            record(i)

    traj = Trajectory(np.array(times), snaps, recs)
    _fill_energy_rate(traj, ec)
    _drift_alarm(traj, cfg)
    return traj


# ---------------------------------------------------------------------------
# high/low frequency splitting


def _bump_transition(t):
    g = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    return g


def cutoff_profile(xi, kind="smooth", dk_scaled=None):
    """zeta(xi): 1 on [-1, 1], 0 beyond 2 (smooth) or one grid mode past 1 (sharp).

    For the sharp profile, ``dk_scaled`` is the grid spacing of the argument
    (epsilon * dk); the indicator is ramped linearly across it.
    """
    a = np.abs(np.asarray(xi, dtype=float))
    if kind == "smooth":
        left = _bump_transition(2.0 - a)
        right = _bump_transition(a - 1.0)
        return left / (left + right)
    if kind == "sharp":
        if dk_scaled is None:
            return (a <= 1.0).astype(float)
        return np.clip(1.0 - (a - 1.0) / dk_scaled, 0.0, 1.0)
    raise ValueError(f"unknown cutoff {kind!r}")


def split_data(eta0: WaveField, sc: SplitConfig):
    """(v0, w0) with w0 = zeta(epsilon D) eta0 smooth and v0 = eta0 - w0."""
    grid = eta0.grid
    uh = np.fft.rfft(eta0.values)
    zeta = cutoff_profile(sc.epsilon * grid.kr, sc.cutoff, sc.epsilon * grid.dk)
    w0 = WaveField(grid, np.fft.irfft(zeta * uh, n=grid.n))
    v0 = WaveField(grid, eta0.values - w0.values)
    return v0, w0


def g_coupling(v: WaveField, w: WaveField, ec: EquationCoefficients) -> WaveField:
    """G(v, w) = N(v + w) - N(v) for the flux nonlinearity N of the gamma = 7/48 model.

        3/2 (vw)_x + 3/4 (w^2)_x + 2 gamma (vw)_xxx + gamma (w^2)_xxx
        - 2 gamma (v_x w_x)_x - gamma (w_x^2)_x - 3/8 (v^2 w)_x
        - 3/8 (v w^2)_x - 1/8 (w^3)_x
    """
    if v.grid != w.grid:
        raise ValueError("v and w must share a grid")
    grid = v.grid
    g = ec.gamma
    ik = derivative_symbol(grid, 1)
    ik3 = derivative_symbol(grid, 3)
    vv, ww = v.values, w.values
    (vx,) = _derivatives(np.fft.rfft(vv), grid, 1)
    (wx,) = _derivatives(np.fft.rfft(ww), grid, 1)
    first = np.fft.rfft(1.5 * vv * ww + 0.75 * ww * ww - 2 * g * vx * wx - g * wx * wx
                        - 0.375 * vv * vv * ww - 0.375 * vv * ww * ww - 0.125 * ww ** 3)
    third = np.fft.rfft(2 * g * vv * ww + g * ww * ww)
    return WaveField(grid, np.fft.irfft(ik * first + ik3 * third, n=grid.n))


def solve_split(cfg: SolverConfig, eta0: WaveField, sc: SplitConfig):
    """Evolve v from v0 under the full equation and w from w0 under the w-equation.

    Both parts share the time grid; w sees v at every Runge-Kutta stage.
    Returns (v-trajectory, w-trajectory); the w records carry X(t).
    """
    if eta0.grid != cfg.grid:
        raise ValueError("eta0 is not on the configured grid")
    if abs(cfg.ec.gamma - SEVEN_48) > 1e-10:
        raise ValueError("the splitting is formulated for gamma = 7/48")
    grid, ec = cfg.grid, cfg.ec
    ops = _Operators(grid, ec, cfg.dealias)
    h, n_steps = cfg.step_size, cfg.n_steps
    v0, w0 = split_data(eta0, sc)
    vh, wh = np.fft.rfft(v0.values), np.fft.rfft(w0.values)
    tv, sv, rv, sw, rw = [], [], [], [], []

    def record(i):
        t = i * h
        snap_v, rec_v = _record(vh, grid, ec, t)
        snap_w, rec_w = _record(wh, grid, ec, t)
        rec_w.X = x_functional(snap_w, ec)
        tv.append(t)
        sv.append(snap_v)
        rv.append(rec_v)
        sw.append(snap_w)
        rw.append(rec_w)

    record(0)
    for i in range(1, n_steps + 1):
        vh, wh = _ifrk4_pair(ops, vh, wh, h)
        _check_finite(vh, (i - 1) * h)
        _check_finite(wh, (i - 1) * h)
        if i % cfg.record_every == 0 or i == n_steps:
            record(i)

    times = np.array(tv)
    traj_v = Trajectory(times, sv, rv)
    traj_w = Trajectory(times.copy(), sw, rw)
    _fill_energy_rate(traj_v, ec)
    return traj_v, traj_w


# ---------------------------------------------------------------------------
# velocity reconstruction and existence time


def velocity_ansatz(eta: WaveField, ec: EquationCoefficients, p: ModelParameters, *,
                    eta_t: WaveField | None = None, terms: str = "full") -> WaveField:
    """Horizontal velocity w = eta + A + B + C + D + E in unscaled variables.

    Time derivatives come from the evolution equation unless ``eta_t`` is
    supplied (e.g. from differencing a trajectory).  ``terms="first_order"``
    keeps only eta + A + B with the rho contributions removed.
    """
    if terms not in ("full", "first_order"):
        raise ValueError(f"terms must be 'full' or 'first_order', got {terms!r}")
    grid = eta.grid
    a, b, c, d = abcd(p.theta_sq, p.lam, p.mu)
    a1, b1, c1, d1 = higher_abcd(p.theta_sq, p.lam, p.mu, p.lam1, p.mu1)
    rho = p.rho
    u = eta.values
    uh = np.fft.rfft(u)
    ux, uxx, _, uxxxx = _derivatives(uh, grid, 4)
    if eta_t is None:
        eta_t = time_derivative(eta, ec)
    (uxt, _, uxxxt) = _derivatives(np.fft.rfft(eta_t.values), grid, 3)

    A = -0.25 * u * u
    if terms == "first_order":
        B = 0.5 * (c - a) * uxx + 0.5 * (b - d) * uxt
        return WaveField(grid, u + A + B)

    B = 0.5 * (c - a + rho) * uxx + 0.5 * (b - d + rho) * uxt
    kappa = (a + 4 * b + 2 * c - d) / 8 + 3 * (a + b - c - d) / 16 + 3 * rho / 8
    (sq_xx,) = _derivatives(np.fft.rfft(u * u), grid, 2)[1:]
    C = kappa * sq_xx + (13.0 / 24.0) * u * uxx + (11.0 / 48.0) * ux * ux
    coef_t = (0.5 * (b1 - d1) + 0.25 * (b - d + rho) * (a - d + 1.0 / 6.0)
              + 0.25 * d * (c - a + rho))
    coef_x = 0.5 * (a1 - c1) + 0.25 * (c - a + rho) * (a + 1.0 / 6.0) - rho / 12.0
    D = -coef_t * uxxxt - coef_x * uxxxx
    E = 0.125 * u ** 3
    return WaveField(grid, u + A + B + C + D + E)


def local_existence_estimate(eta0: WaveField, s: float, C_s: float = 1.0) -> LocalExistenceEstimate:
    """Guaranteed existence time 1 / (8 C_s |eta0|_s (1 + |eta0|_s)) and radius 2 |eta0|_s.

    C_s is a caller-supplied stand-in for the unquantified constant; zero
    data yields ``T_bar = inf``.
    """
    if not C_s > 0:
        raise ValueError(f"C_s must be positive, got {C_s!r}")
    norm = sobolev_norm(eta0, s)
    T_bar = math.inf if norm == 0.0 else 1.0 / (8.0 * C_s * norm * (1.0 + norm))
    return LocalExistenceEstimate(r=2.0 * norm, T_bar=T_bar, C_s=C_s, norm=norm, s=s)


# ---------------------------------------------------------------------------
# PDE residual (spatial convergence diagnostic)


def _interpolate(eta: WaveField, fine: PeriodicGrid):
    n, m = eta.grid.n, fine.n
    uh = np.fft.rfft(eta.values)
    padded = np.zeros(m // 2 + 1, dtype=complex)
    padded[: n // 2] = uh[: n // 2]
    padded[n // 2] = 0.5 * uh[n // 2] if m > n else uh[n // 2]
    return WaveField(fine, np.fft.irfft(padded * (m / n), n=m))


def pde_residual(fields, h: float, ec: EquationCoefficients, fine_factor: int = 4) -> float:
    """L^2 norm of the model equation evaluated on a numerical solution.

    ``fields`` are five snapshots at t - 2h, t - h, t, t + h, t + 2h.  They
    are spectrally interpolated onto a grid ``fine_factor`` times finer, eta_t
    is a fourth-order centred difference, x-derivatives are spectral and the
    products are formed on the fine grid without dealiasing.
    """
    if len(fields) != 5:
        raise ValueError("need five equally spaced snapshots")
    fine = fields[0].grid.refined(fine_factor)
    up = [_interpolate(f, fine).values for f in fields]
    ut = (up[0] - 8 * up[1] + 8 * up[3] - up[4]) / (12.0 * h)
    u = up[2]
    ik = derivative_symbol(fine, 1)
    k2 = fine.kr ** 2
    uh, uth = np.fft.rfft(u), np.fft.rfft(ut)
    lin_t = (1 + ec.gamma1 * k2 + ec.delta1 * k2 * k2) * uth
    lin_x = ik * (1 - ec.gamma2 * k2 + ec.delta2 * k2 * k2) * uh
    ux = np.fft.irfft(ik * uh, n=fine.n)
    flux1 = np.fft.rfft(0.75 * u * u - SEVEN_48 * ux * ux - 0.125 * u ** 3)
    flux3 = np.fft.rfft(ec.gamma * u * u)
    total = lin_t + lin_x + ik * flux1 + derivative_symbol(fine, 3) * flux3
    res = np.fft.irfft(total, n=fine.n)
    return float(np.sqrt(_integral(res * res, fine)))
