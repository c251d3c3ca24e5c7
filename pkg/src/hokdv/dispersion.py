"""Linear phase speed of the model versus the full water-wave relation."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .coeffs import EquationCoefficients
from .errors import InadmissibleCoefficientsError

_SUPPORTED_ORDERS = (0, 2, 4, 6)
_SERIES_CUTOFF = 1e-8


@dataclass
class DispersionReport:
    k_grid: np.ndarray
    c_model: np.ndarray
    c_euler: np.ndarray
    taylor_model: list
    taylor_euler: list
    f_coefficient: float
    max_abs_error: float
    #: |F - F1|: long form minus short form of the k^6 coefficient.
    f_discrepancy: float = 0.0

    @property
    def abs_error(self):
        return np.abs(self.c_model - self.c_euler)

    def rows(self):
        return zip(self.k_grid, self.c_model, self.c_euler, self.abs_error)


def c_exact_model(k, ec: EquationCoefficients):
    """(1 - gamma2 k^2 + delta2 k^4) / (1 + gamma1 k^2 + delta1 k^4)."""
    k2 = np.asarray(k, dtype=float) ** 2
    num = 1.0 - ec.gamma2 * k2 + ec.delta2 * k2 * k2
    den = 1.0 + ec.gamma1 * k2 + ec.delta1 * k2 * k2
    if np.any(den <= 0):
        raise InadmissibleCoefficientsError(
            "phase-speed denominator 1 + gamma1 k^2 + delta1 k^4 is not positive")
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


def c_euler(k):
    """Right-going linear water-wave speed sqrt(tanh(k)/k), equal to 1 at k = 0."""
    k = np.abs(np.asarray(k, dtype=float))
    small = k < _SERIES_CUTOFF
    safe = np.where(small, 1.0, k)
    out = np.sqrt(np.tanh(safe) / safe)
    k2 = k * k
    series = 1.0 - k2 / 6 + 19 * k2 * k2 / 360 - 55 * k2 ** 3 / 3024
    out = np.where(small, series, out)
    return float(out) if np.ndim(out) == 0 else out


def _series_divide(num, den, count):
    """First ``count`` coefficients of num/den as power series (den[0] == 1)."""
    out = []
    for m in range(count):
        acc = num[m] if m < len(num) else 0
        for j in range(1, min(m, len(den) - 1) + 1):
            acc = acc - den[j] * out[m - j]
        out.append(acc)
    return out


def taylor_coefficients(ec: EquationCoefficients, order: int = 6):
    """Maclaurin coefficients of c_exact_model in powers of k^2, up to k^order.

    Exact long division of the numerator by the denominator polynomial, so
    Fraction-valued coefficients produce exact results.
    """
    if order not in _SUPPORTED_ORDERS:
        raise ValueError(f"order must be one of {_SUPPORTED_ORDERS}, got {order!r}")
    num = [1, -ec.gamma2, ec.delta2]
    den = [1, ec.gamma1, ec.delta1]
    return _series_divide(num, den, order // 2 + 1)


def euler_taylor_coefficients(order: int = 6):
    """Exact series of sqrt(tanh(k)/k) in k^2 from the sinh/cosh series."""
    if order not in _SUPPORTED_ORDERS:
        raise ValueError(f"order must be one of {_SUPPORTED_ORDERS}, got {order!r}")
    count = order // 2 + 1
    sinh_over_k = [Fraction(1, factorial(2 * m + 1)) for m in range(count)]
    cosh = [Fraction(1, factorial(2 * m)) for m in range(count)]
    t = _series_divide(sinh_over_k, cosh, count)
    root = [Fraction(1)]
    for m in range(1, count):
        root.append((t[m] - sum(root[j] * root[m - j] for j in range(1, m))) / 2)
    return root


def f_coefficient(ec: EquationCoefficients):
    """k^6 coefficient of the model phase speed (general form)."""
    g1, g2, d1, d2 = ec.gamma1, ec.gamma2, ec.delta1, ec.delta2
    return -g1 * d2 - g2 * (-d1 + g1 * g1) + 2 * g1 * d1 - g1 ** 3


def f_coefficient_short(ec: EquationCoefficients):
    """-19/360 gamma1 + delta1/6; equals :func:`f_coefficient` when the identities hold."""
    return -19 * ec.gamma1 / 360 + ec.delta1 / 6


def dispersion_report(ec: EquationCoefficients, k_max: float, n: int) -> DispersionReport:
    if not k_max > 0:
        raise ValueError(f"k_max must be positive, got {k_max!r}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n!r}")
    k = np.linspace(0.0, k_max, n)
    cm = np.asarray(c_exact_model(k, ec))
    ce = np.asarray(c_euler(k))
    f_long = float(f_coefficient(ec))
    return DispersionReport(
        k_grid=k,
        c_model=cm,
        c_euler=ce,
        taylor_model=[float(v) for v in taylor_coefficients(ec, 6)],
        taylor_euler=[float(v) for v in euler_taylor_coefficients(6)],
        f_coefficient=f_long,
        max_abs_error=float(np.max(np.abs(cm - ce))),
        f_discrepancy=abs(f_long - float(f_coefficient_short(ec))),
    )
