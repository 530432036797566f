"""Exception types shared across the package."""


class GNCertError(Exception):
    """Base class for all errors raised by gncert."""


class RankDeficient(GNCertError):
    """A matrix that must have full column rank does not (numerically)."""

    def __init__(self, message, sigma_min=None, sigma_max=None):
        super().__init__(message)
        self.sigma_min = sigma_min
        self.sigma_max = sigma_max


class DomainError(GNCertError, ValueError):
    """A scalar argument lies outside the interval where a quantity is defined."""


class InvalidMajorant(GNCertError, ValueError):
    """A candidate majorant function fails f(0)=0, f'(0)=-1 or the shape checks on f'."""


class H3Violated(GNCertError):
    """sqrt(2) c beta^2 D+f'(0) >= 1: no convergence radius can be certified."""

    def __init__(self, product):
        super().__init__(f"h3 violated: sqrt(2)*c*beta^2*D+f'(0) = {product:.6g} >= 1")
        self.product = product


class H4Violated(GNCertError):
    """2 c beta0 D+f'(0) >= 1: uniqueness radius is not certified."""

    def __init__(self, product):
        super().__init__(f"h4 violated: 2*c*beta0*D+f'(0) = {product:.6g} >= 1")
        self.product = product


class PreconditionViolated(GNCertError, ValueError):
    pass


class InsufficientData(GNCertError, ValueError):
    pass
