"""Exception types raised by opendicke."""


class OpenDickeError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(OpenDickeError, ValueError):
    """An input lies outside the domain where the model is defined."""


class DegenerateModel(OpenDickeError):
    """The effective magnon frequency is not positive."""


class NumericalFailure(OpenDickeError):
    """A dense linear-algebra routine failed to converge."""


class NotHurwitz(OpenDickeError):
    """The drift matrix has an eigenvalue with non-negative real part."""

    def __init__(self, max_real: float, tol: float):
        self.max_real = max_real
        self.tol = tol
        super().__init__(
            f"drift matrix is not Hurwitz: max Re(lambda) = {max_real:.6e} "
            f"(required < {-tol:.1e})"
        )


class SingularResolvent(OpenDickeError):
    def __init__(self, omega: float):
        self.omega = omega
        super().__init__(f"resolvent (i*omega - A) is singular at omega = {omega!r}")


class InsufficientData(OpenDickeError, ValueError):
    pass


class NonPositiveValue(OpenDickeError, ValueError):
    def __init__(self, rows):
        self.rows = list(rows)
        super().__init__(f"non-positive eps or value at rows {self.rows}")


class TruncationWarning(UserWarning):
    """The truncated covariance integral has a non-negligible tail."""
