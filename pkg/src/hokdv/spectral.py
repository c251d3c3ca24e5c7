"""Periodic Fourier machinery: grids, fields, multiplier symbols, S(t), H^s norms.

Conventions
-----------
A real field ``f`` sampled at ``x_j = j L / n`` is written
``f(x) = sum_k c_k exp(i k x)`` with ``c = fft(f) / n``.  Derivatives act as
``i k``.  Internally everything runs on the half spectrum returned by
``numpy.fft.rfft``.

The symbols phi, psi and tau are odd and real, so ``m(d/dx)`` maps a real
field to an imaginary one.  :func:`apply_multiplier` therefore returns the
real field ``-i m(d/dx) f`` for odd symbols (the form in which they enter
``eta_t = -i phi(d/dx) eta - i ...``) and ``m(d/dx) f`` for the even symbol
omega.  The Nyquist entry of every odd symbol is set to zero: there is no
real-valued assignment for it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .coeffs import EquationCoefficients
from .errors import ConsistencyError, InadmissibleCoefficientsError

IMAG_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class PeriodicGrid:
    """Uniform grid on [0, length) with ``n`` points (a power of two)."""

    n: int
    length: float

    def __post_init__(self):
        n = int(self.n)
        if n != self.n or n < 4 or n & (n - 1):
            raise ValueError(f"n must be a power of two >= 4, got {self.n!r}")
        if not (np.isfinite(self.length) and self.length > 0):
            raise ValueError(f"length must be positive, got {self.length!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", float(self.length))

    def __eq__(self, other):
        return (isinstance(other, PeriodicGrid)
                and self.n == other.n and self.length == other.length)

    def __hash__(self):
        return hash((self.n, self.length))

    @property
    def dx(self):
        return self.length / self.n

    @property
    def dk(self):
        return 2 * np.pi / self.length

    @property
    def x(self):
        return np.arange(self.n) * self.dx

    @property
    def k(self):
        """All n wavenumbers 2 pi j / L, j = -n/2 .. n/2 - 1, in FFT order."""
        return self.dk * np.fft.fftfreq(self.n, d=1.0 / self.n)

    @property
    def kr(self):
        """Non-negative wavenumbers of the rfft half spectrum (last is Nyquist)."""
        return self.dk * np.arange(self.n // 2 + 1)

    def dealias_mask(self):
        """2/3 rule: keep modes with |j| <= n/3."""
        return np.arange(self.n // 2 + 1) <= self.n // 3

    def rfft_weights(self):
        """Multiplicity of each half-spectrum entry in the full spectrum."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    def refined(self, factor):
        return PeriodicGrid(self.n * factor, self.length)


@dataclass(eq=False)
class WaveField:
    """Samples of the surface elevation eta on a :class:`PeriodicGrid`."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if np.iscomplexobj(values):
            raise ValueError("WaveField values must be real")
        values = values.astype(float)
        if values.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("WaveField values must be finite")
        self.values = values

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, func(grid.x))

    def spectral(self):
        return SpectralField(self.grid, np.fft.rfft(self.values))

    def mean(self):
        return float(np.mean(self.values))

    def copy(self):
        return WaveField(self.grid, self.values.copy())


@dataclass(eq=False)
class SpectralField:
    """Half-spectrum Fourier coefficients, ``modes = numpy.fft.rfft(values)``.

    Conjugate symmetry of the full spectrum is implicit in this storage, so
    every inverse transform is real.
    """

    grid: PeriodicGrid
    modes: np.ndarray

    def physical(self):
        return WaveField(self.grid, np.fft.irfft(self.modes, n=self.grid.n))

    def full_modes(self):
        """The n complex coefficients in FFT order (as ``numpy.fft.fft``)."""
        n = self.grid.n
        full = np.empty(n, dtype=complex)
        full[: n // 2 + 1] = self.modes
        full[n // 2 + 1:] = np.conj(self.modes[1: n // 2][::-1])
        return full


# ---------------------------------------------------------------------------
# symbols


class MultiplierKind(str, enum.Enum):
    PHI = "phi"
    PSI = "psi"
    TAU = "tau"
    OMEGA = "omega"

    @property
    def is_odd(self):
        return self is not MultiplierKind.OMEGA


def _require_admissible(ec):
    if not (ec.gamma1 >= 0 and ec.delta1 > 0):
        raise InadmissibleCoefficientsError(
            f"need gamma1 >= 0 and delta1 > 0, got gamma1={ec.gamma1!r}, delta1={ec.delta1!r}")


def denominator(xi, ec):
    """1 + gamma1 xi^2 + delta1 xi^4 (strictly positive when admissible)."""
    xi2 = np.asarray(xi, dtype=float) ** 2
    return 1.0 + ec.gamma1 * xi2 + ec.delta1 * xi2 * xi2


def phi_symbol(xi, ec):
    xi = np.asarray(xi, dtype=float)
    xi2 = xi * xi
    return xi * (1.0 - ec.gamma2 * xi2 + ec.delta2 * xi2 * xi2) / denominator(xi, ec)


def psi_symbol(xi, ec):
    xi = np.asarray(xi, dtype=float)
    return xi / denominator(xi, ec)


def tau_symbol(xi, ec):
    xi = np.asarray(xi, dtype=float)
    return (3.0 * xi - 4.0 * ec.gamma * xi ** 3) / (4.0 * denominator(xi, ec))


def omega_symbol(xi):
    xi = np.asarray(xi, dtype=float)
    return np.abs(xi) / (1.0 + xi * xi)


def multiplier_eval(kind, ec, xi):
    kind = MultiplierKind(kind)
    if kind is MultiplierKind.OMEGA:
        out = omega_symbol(xi)
    else:
        _require_admissible(ec)
        out = {MultiplierKind.PHI: phi_symbol,
               MultiplierKind.PSI: psi_symbol,
               MultiplierKind.TAU: tau_symbol}[kind](xi, ec)
    return float(out) if np.ndim(out) == 0 else out


def symbol_on_grid(kind, ec, grid):
    """Symbol sampled on the rfft wavenumbers, Nyquist entry zeroed for odd symbols."""
    kind = MultiplierKind(kind)
    m = np.array(multiplier_eval(kind, ec, grid.kr), dtype=float)
    if kind.is_odd:
        m[-1] = 0.0
    return m


def derivative_symbol(grid, order=1):
    """(i k)^order on the half spectrum; Nyquist dropped for odd orders."""
    ik = 1j * grid.kr
    d = ik ** order
    if order % 2:
        d[-1] = 0.0
    return d


def _check_real(z, ref_scale, what):
    scale = max(ref_scale, float(np.max(np.abs(z.real))))
    resid = float(np.max(np.abs(z.imag)))
    if resid > IMAG_TOL * scale + 1e-300:
        raise ConsistencyError(f"{what}: imaginary residue {resid:.3e}")
    return z.real


def apply_multiplier(f: WaveField, kind, ec: EquationCoefficients) -> WaveField:
    """Real field ``-i m(d/dx) f`` (odd m) or ``m(d/dx) f`` (omega).

    Computed with a full complex transform so the imaginary residue can be
    checked rather than assumed away.
    """
    kind = MultiplierKind(kind)
    grid = f.grid
    n = grid.n
    m = np.array(multiplier_eval(kind, ec, grid.k), dtype=complex)
    if kind.is_odd:
        m = -1j * m
        m[n // 2] = 0.0
    out = np.fft.ifft(m * np.fft.fft(f.values))
    scale = float(np.max(np.abs(f.values)))
    return WaveField(grid, _check_real(out, scale, f"apply_multiplier({kind.value})"))


def semigroup_factor(grid, ec, t):
    """exp(-i phi(k) t) on the half spectrum."""
    return np.exp(-1j * symbol_on_grid(MultiplierKind.PHI, ec, grid) * t)


def semigroup_apply(f: WaveField, t: float, ec: EquationCoefficients) -> WaveField:
    """S(t) f: the exact solution at time t of the linear part of the model."""
    _require_admissible(ec)
    fh = np.fft.rfft(f.values)
    return WaveField(f.grid, np.fft.irfft(semigroup_factor(f.grid, ec, t) * fh, n=f.grid.n))


# ---------------------------------------------------------------------------
# norms


def sobolev_norm_from_modes(grid, modes, s):
    """H^s norm from rfft coefficients; s = 0 gives the L^2(0, L) norm."""
    n = grid.n
    c2 = np.abs(modes) ** 2 / (n * n)
    weight = grid.rfft_weights() * (1.0 + grid.kr ** 2) ** s
    return float(np.sqrt(grid.length * np.sum(weight * c2)))


def sobolev_norm(f: WaveField, s: float) -> float:
    return sobolev_norm_from_modes(f.grid, np.fft.rfft(f.values), s)


# ---------------------------------------------------------------------------
# empirical probes of the multilinear estimates


class ProbeResult(NamedTuple):
    bilinear: float   # ||tau(D) eta^2||_s / ||eta||_s^2
    trilinear: float  # ||psi(D) eta^3||_s / ||eta||_s^3
    sharp: float      # ||psi(D) eta_x^2||_s / ||eta||_s^2


def random_band_limited(grid, rng, band=None):
    """Real field with i.i.d. standard normal Fourier coefficients for |j| <= band."""
    band = grid.n // 4 if band is None else band
    modes = np.zeros(grid.n // 2 + 1, dtype=complex)
    modes[1: band + 1] = rng.standard_normal(band) + 1j * rng.standard_normal(band)
    modes[0] = rng.standard_normal()
    return WaveField(grid, np.fft.irfft(modes * grid.n, n=grid.n))


def probe_ratios(f: WaveField, ec: EquationCoefficients, s: float) -> ProbeResult:
    grid = f.grid
    norm = sobolev_norm(f, s)
    if norm == 0.0:
        return ProbeResult(0.0, 0.0, 0.0)
    u = f.values
    ux = np.fft.irfft(derivative_symbol(grid) * np.fft.rfft(u), n=grid.n)
    tau = symbol_on_grid(MultiplierKind.TAU, ec, grid)
    psi = symbol_on_grid(MultiplierKind.PSI, ec, grid)
    r2 = sobolev_norm_from_modes(grid, tau * np.fft.rfft(u * u), s) / norm ** 2
    r3 = sobolev_norm_from_modes(grid, psi * np.fft.rfft(u ** 3), s) / norm ** 3
    rx = sobolev_norm_from_modes(grid, psi * np.fft.rfft(ux * ux), s) / norm ** 2
    return ProbeResult(r2, r3, rx)


def estimate_probe(ec: EquationCoefficients, s: float, trials: int, seed: int,
                   n: int = 256, length: float = 2 * np.pi,
                   band: int | None = None) -> ProbeResult:
    """Largest observed multilinear ratios over ``trials`` random fields.

    An empirical surrogate for the constants in the bilinear/trilinear
    smoothing estimates; it proves nothing.  ``band`` (default ``n // 4``)
    is the highest mode index drawn.  Holding ``band`` fixed while raising
    ``n`` samples the same random fields on a finer grid, which is the
    resolution-stability check.
    """
    if s < 1:
        raise ValueError("the probe is defined for s >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _require_admissible(ec)
    grid = PeriodicGrid(n, length)
    rng = np.random.default_rng(seed)
    best = np.zeros(3)
    for _ in range(trials):
        best = np.maximum(best, probe_ratios(random_band_limited(grid, rng, band), ec, s))
    return ProbeResult(*map(float, best))
