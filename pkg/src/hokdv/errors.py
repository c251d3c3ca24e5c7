"""Exception types raised by hokdv."""


class ParameterError(ValueError):
    """A model parameter lies outside its admissible range."""


class ParabolaCaseError(ValueError):
    """The lambda1 threshold is undefined because theta**2 == 1/5."""


class InadmissibleCoefficientsError(ArithmeticError):
    """Coefficients make a symbol denominator vanish or the problem ill-posed."""


class ConsistencyError(RuntimeError):
    """A numerical self-check failed (e.g. non-negligible imaginary residue)."""


class BlowUpError(RuntimeError):
    """The solution became non-finite.

    ``t`` is the last time at which the state was still finite.
    """

    def __init__(self, message, t):
        super().__init__(message)
        self.t = t
