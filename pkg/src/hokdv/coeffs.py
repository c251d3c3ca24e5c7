"""Coefficients of the fifth-order KdV-BBM water-wave model.

Everything here is plain arithmetic on the fundamental parameters
``(theta, lam, mu, lam1, mu1, rho)``.  The low-level formula functions
take ``theta_sq`` instead of ``theta`` and are written so that every
rational constant is applied *after* the variable arithmetic; passing
:class:`fractions.Fraction` values therefore gives exact results, while
floats and numpy arrays work as usual.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConsistencyError, ParabolaCaseError, ParameterError

#: Nonlinear coefficient for which the model is Hamiltonian.
GAMMA_HAMILTONIAN = Fraction(7, 48)
#: k**4 coefficient shared by every member of the family and by the Euler speed.
K4_COEFFICIENT = Fraction(19, 360)
#: k**6 coefficient of sqrt(tanh(k)/k).
EULER_K6 = Fraction(-55, 3024)

_CROSS_CHECK_TOL = 1e-12


@dataclass(frozen=True)
class ModelParameters:
    """The six fundamental parameters selecting one member of the model family.

    Fields may also be numpy arrays of a common (broadcastable) shape, which
    is how parameter scans evaluate whole grids at once.
    """

    theta: float
    lam: float
    mu: float
    lam1: float
    mu1: float
    rho: float = 0.0

    def __post_init__(self):
        for name in ("theta", "lam", "mu", "lam1", "mu1", "rho"):
            value = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(value)):
                raise ParameterError(f"{name} must be finite, got {getattr(self, name)!r}")
        theta = np.asarray(self.theta, dtype=float)
        if np.any(theta < 0) or np.any(theta > 1):
            raise ParameterError(f"theta must lie in [0, 1], got {self.theta!r}")

    @property
    def theta_sq(self):
        return self.theta * self.theta

    @classmethod
    def with_hamiltonian_rho(cls, theta, lam, mu, lam1, mu1):
        """Build parameters whose rho is ``b + d - 1/6`` (so gamma = 7/48)."""
        p = cls(theta, lam, mu, lam1, mu1, 0.0)
        return dataclasses.replace(p, rho=hamiltonian_rho(p))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class AbcdSet:
    a: float
    b: float
    c: float
    d: float


@dataclass(frozen=True)
class HigherAbcdSet:
    a1: float
    b1: float
    c1: float
    d1: float


@dataclass(frozen=True)
class EquationCoefficients:
    """Coefficients of

        eta_t + eta_x - gamma1 eta_xxt + gamma2 eta_xxx + delta1 eta_xxxxt
        + delta2 eta_xxxxx + 3/4 (eta^2)_x + gamma (eta^2)_xxx
        - 7/48 (eta_x^2)_x - 1/8 (eta^3)_x = 0

    ``sigma1``/``sigma2`` belong to the variant that does not assume
    a + b + c + d = 1/3; ``nu_tilde`` is the first-order KdV-BBM coefficient.
    """

    gamma1: float
    gamma2: float
    delta1: float
    delta2: float
    gamma: float
    sigma1: float = float("nan")
    sigma2: float = float("nan")
    nu_tilde: float = float("nan")

    @property
    def admissible(self):
        return bool(self.gamma1 >= 0 and self.delta1 > 0)

    @property
    def is_hamiltonian(self):
        return abs(self.gamma - float(GAMMA_HAMILTONIAN)) <= 1e-12

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def as_dict(self):
        return {f.name: float(getattr(self, f.name)) for f in dataclasses.fields(self)}


@dataclass
class ModelDiagnostics:
    well_posed: bool
    hamiltonian: bool
    identities_ok: bool
    delta1_value: float
    #: |delta1 from the gamma-formulas - delta1 from the closed polynomial form|,
    #: both at the Hamiltonian rho.
    delta1_discrepancy: float = 0.0
    messages: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# formula layer (theta_sq based; exact for Fraction input)


def abcd(theta_sq, lam, mu):
    s = 3 * theta_sq - 1
    a = s * lam / 6
    b = s * (1 - lam) / 6
    c = (1 - theta_sq) * mu / 2
    d = (1 - theta_sq) * (1 - mu) / 2
    return a, b, c, d


def higher_abcd(theta_sq, lam, mu, lam1, mu1):
    s = 3 * theta_sq - 1
    f = 5 * theta_sq - 1
    a1 = -s * s * (1 - lam) / 36 + f * f * lam1 / 120
    b1 = -f * f * (1 - lam1) / 120
    c1 = (1 - theta_sq) * f * (1 - mu1) / 24
    d1 = -(1 - theta_sq) ** 2 * mu / 4 - (1 - theta_sq) * f * mu1 / 24
    return a1, b1, c1, d1


def equation_coefficients(theta_sq, lam, mu, lam1, mu1, rho):
    """Return (gamma1, gamma2, delta1, delta2, gamma, sigma1, sigma2, nu_tilde)."""
    a, b, c, d = abcd(theta_sq, lam, mu)
    a1, b1, c1, d1 = higher_abcd(theta_sq, lam, mu, lam1, mu1)
    gamma1 = (b + d - rho) / 2
    gamma2 = (a + c + rho) / 2
    delta1 = (2 * (b1 + d1) - (b - d + rho) * (1 - 6 * a - 6 * d) / 6 - d * (c - a + rho)) / 4
    delta2 = (2 * (a1 + c1) - (c - a + rho) * (1 - 6 * a) / 6 + rho / 3) / 4
    gamma = (5 - 9 * (b + d) + 9 * rho) / 24
    sigma1 = (4 + 3 * (a - 2 * b + c - 2 * d) + 9 * rho) / 24
    sigma2 = (4 + 9 * (a + b + c + d)) / 48
    nu_tilde = (a + c + rho) / 2
    return gamma1, gamma2, delta1, delta2, gamma, sigma1, sigma2, nu_tilde


def delta_gap_general(theta_sq, lam, mu, lam1, mu1, rho):
    """delta2 - delta1 without assuming a + b + c + d = 1/3."""
    a, b, c, d = abcd(theta_sq, lam, mu)
    a1, b1, c1, d1 = higher_abcd(theta_sq, lam, mu, lam1, mu1)
    return (rho * (a + b + c + d) / 4
            + ((b - d) ** 2 - (a - c) ** 2) / 8
            + (a1 - b1 + c1 - d1) / 2)


def rho_closed_form(theta_sq, lam, mu):
    """Hamiltonian rho written directly in theta, lam, mu."""
    return (1 - (3 * theta_sq - 1) * lam - 3 * (1 - theta_sq) * mu) / 6


def polynomial_P(theta_sq, lam, mu):
    """Part of the Hamiltonian delta1 that does not involve lam1, mu1."""
    s = 3 * theta_sq - 1
    return (-s * s * lam * lam / 72
            + s * (6 * theta_sq - 1) * lam / 144
            - (1 - theta_sq) * mu / 24
            - (55 * theta_sq * theta_sq - 50 * theta_sq + 16) / 240)


def delta1_closed_form(theta_sq, lam, mu, lam1, mu1):
    """delta1 at the Hamiltonian rho as an explicit polynomial."""
    f = 5 * theta_sq - 1
    return (f * f * lam1 / 240
            - f * (1 - theta_sq) * mu1 / 48
            + polynomial_P(theta_sq, lam, mu))


def threshold_from_theta_sq(theta_sq, lam, mu, mu1):
    f = 5 * theta_sq - 1
    return 5 * (1 - theta_sq) * mu1 / f - 240 * polynomial_P(theta_sq, lam, mu) / (f * f)


# ---------------------------------------------------------------------------
# operations on ModelParameters


def compute_abcd(p: ModelParameters) -> AbcdSet:
    return AbcdSet(*abcd(p.theta_sq, p.lam, p.mu))


def compute_higher_abcd(p: ModelParameters) -> HigherAbcdSet:
    return HigherAbcdSet(*higher_abcd(p.theta_sq, p.lam, p.mu, p.lam1, p.mu1))


def compute_equation_coefficients(p: ModelParameters) -> EquationCoefficients:
    return EquationCoefficients(
        *equation_coefficients(p.theta_sq, p.lam, p.mu, p.lam1, p.mu1, p.rho))


def _max_abs(x):
    return float(np.max(np.abs(np.asarray(x, dtype=float))))


def hamiltonian_rho(p: ModelParameters):
    """The rho giving gamma = 7/48, i.e. b + d - 1/6.

    The two alternative forms (1/6 - (a + c) and the explicit theta, lam, mu
    polynomial) are evaluated as a cross-check.
    """
    a, b, c, d = abcd(p.theta_sq, p.lam, p.mu)
    rho = b + d - Fraction(1, 6) if isinstance(b, Fraction) else b + d - 1 / 6
    alt1 = Fraction(1, 6) - (a + c) if isinstance(a, Fraction) else 1 / 6 - (a + c)
    alt2 = rho_closed_form(p.theta_sq, p.lam, p.mu)
    if max(_max_abs(rho - alt1), _max_abs(rho - alt2)) > _CROSS_CHECK_TOL:
        raise ConsistencyError("Hamiltonian rho forms disagree")
    return rho


def evaluate_P(theta, lam, mu):
    if not 0 <= theta <= 1:
        raise ParameterError(f"theta must lie in [0, 1], got {theta!r}")
    return polynomial_P(theta * theta, lam, mu)


def threshold_H(theta, lam, mu, mu1, *, tol=1e-12):
    """Lower bound on lam1 for delta1 > 0 at the Hamiltonian rho.

    Undefined on the parabola case theta**2 == 1/5, where delta1 does not
    depend on lam1 at all.
    """
    if not 0 <= theta <= 1:
        raise ParameterError(f"theta must lie in [0, 1], got {theta!r}")
    theta_sq = theta * theta
    if abs(5 * theta_sq - 1) <= tol:
        raise ParabolaCaseError(
            "theta**2 = 1/5 (parabola case): delta1 is independent of lam1, "
            "use evaluate_P instead")
    return threshold_from_theta_sq(theta_sq, lam, mu, mu1)


def general_delta_gap(p: ModelParameters):
    """delta2 - delta1 from the general (a+b+c+d unrestricted) relation.

    Cross-checked against 19/360 - gamma1/6 and against delta2 - delta1
    from :func:`compute_equation_coefficients`.
    """
    gap = delta_gap_general(p.theta_sq, p.lam, p.mu, p.lam1, p.mu1, p.rho)
    ec = compute_equation_coefficients(p)
    if _max_abs(gap - (ec.delta2 - ec.delta1)) > _CROSS_CHECK_TOL:
        raise ConsistencyError("delta gap disagrees with delta2 - delta1")
    if _max_abs(gap - (19 / 360 - ec.gamma1 / 6)) > _CROSS_CHECK_TOL:
        raise ConsistencyError("delta gap disagrees with 19/360 - gamma1/6")
    return gap


def check_model(p: ModelParameters, tol: float = 1e-12) -> ModelDiagnostics:
    ec = compute_equation_coefficients(p)
    a, b, c, d = abcd(p.theta_sq, p.lam, p.mu)
    messages = []

    residuals = {
        "gamma1 + gamma2 = 1/6": ec.gamma1 + ec.gamma2 - 1 / 6,
        "delta2 - delta1 + gamma1/6 = 19/360": ec.delta2 - ec.delta1 + ec.gamma1 / 6 - 19 / 360,
        "gamma = (5 - 18 gamma1)/24": ec.gamma - (5 - 18 * ec.gamma1) / 24,
    }
    identities_ok = True
    for name, r in residuals.items():
        if abs(r) > tol:
            identities_ok = False
            messages.append(f"identity {name} violated by {float(r):.3e}")

    well_posed = bool(ec.gamma1 > 0 and ec.delta1 > 0)
    if not ec.gamma1 > 0:
        messages.append(f"gamma1 = {float(ec.gamma1):.6g} is not positive (linearly ill-posed)")
    if not ec.delta1 > 0:
        messages.append(f"delta1 = {float(ec.delta1):.6g} is not positive (linearly ill-posed)")

    rho_h = b + d - 1 / 6
    gamma_off = abs(ec.gamma - 7 / 48)
    rho_off = abs(p.rho - rho_h)
    hamiltonian = bool(gamma_off <= tol and rho_off <= tol)
    if not hamiltonian:
        messages.append(
            f"gamma = {float(ec.gamma):.6g} differs from 7/48 by {float(gamma_off):.3e}; "
            f"Hamiltonian choice is rho = {float(rho_h):.17g}")

    delta1_h = equation_coefficients(p.theta_sq, p.lam, p.mu, p.lam1, p.mu1, rho_h)[2]
    closed = delta1_closed_form(p.theta_sq, p.lam, p.mu, p.lam1, p.mu1)
    discrepancy = abs(float(delta1_h) - float(closed))
    if discrepancy > _CROSS_CHECK_TOL:
        messages.append(f"closed-form delta1 disagrees by {discrepancy:.3e}")

    return ModelDiagnostics(
        well_posed=well_posed,
        hamiltonian=hamiltonian,
        identities_ok=identities_ok,
        delta1_value=float(ec.delta1),
        delta1_discrepancy=discrepancy,
        messages=messages,
    )


def delta1_for_euler_k6(gamma1=Fraction(1, 12)):
    """delta1 that would make the k**6 phase-speed coefficient match Euler.

    Solves -19/360 gamma1 + delta1/6 = -55/3024.  For the Hamiltonian
    gamma1 = 1/12 this is -139/1680, which is inadmissible.
    """
    if isinstance(gamma1, Fraction):
        return 6 * (K4_COEFFICIENT * gamma1 + EULER_K6)
    return 6 * (19 * gamma1 / 360 - 55 / 3024)
