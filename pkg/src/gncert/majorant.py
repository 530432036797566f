"""Scalar majorant functions and the radii derived from them.

A majorant ``f : [0, R) -> R`` satisfies ``f(0) = 0``, ``f'(0) = -1`` and has a
convex, strictly increasing derivative. Given the problem constants ``c``,
``beta``, ``beta0`` and ``kappa`` it determines

* ``nu``: how far from ``x*`` the perturbed pseudo-inverse stays controlled,
* ``rho``: where the per-step contraction factor ``psi`` reaches 1,
* ``r = min(kappa, rho)``: the guaranteed convergence radius,
* ``sigma``: the radius inside which ``x*`` is the only stationary point.

Each of these is the supremum of a set ``{t : g(t) < 1}`` with ``g``
nondecreasing, so they are computed by plain bisection.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DomainError, H3Violated, H4Violated, InvalidMajorant

log = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
DEFAULT_T_MAX = 1e6

H1_TOL = 1e-14
GRID_POINTS = 1000
LOWER_BRACKETS = (1e-6, 1e-9, 1e-12, 1e-15)
GRID_MAX = 10.0  # sampling extent for validation when R is unbounded


@dataclass(frozen=True)
class MajorantFunction:
    """A majorant ``f`` with its derivative and ``D+f'(0)``.

    ``f`` and ``fprime`` must accept floats and return floats. ``kind`` is one of
    ``"lipschitz"``, ``"smale"`` or ``"custom"``; ``params`` holds the defining
    constants (``K`` or ``gamma``). Conditions on ``f`` are checked at
    construction by sampling.
    """

    f: Callable[[float], float]
    fprime: Callable[[float], float]
    d_plus_fprime_0: float
    R: float = math.inf
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.R > 0:
            raise InvalidMajorant(f"domain supremum R must be positive, got {self.R}")
        if not (self.d_plus_fprime_0 >= 0 and math.isfinite(self.d_plus_fprime_0)):
            raise InvalidMajorant(f"D+f'(0) must be finite and >= 0, got {self.d_plus_fprime_0}")
        validate_majorant(self)

    def __call__(self, t):
        return self.f(t)

    def grid(self, n=GRID_POINTS, upper=None):
        """``n`` points in ``[0, min(R, upper))`` (``upper`` defaults to R or GRID_MAX)."""
        if upper is None:
            upper = self.R if math.isfinite(self.R) else GRID_MAX
        upper = min(upper, self.R)
        return np.linspace(0.0, upper, n + 1)[:-1]


def validate_majorant(maj, n=GRID_POINTS, rtol=1e-12):
    """Check h1 exactly-ish and h2 on a sample grid; raise InvalidMajorant on failure."""
    f0 = maj.f(0.0)
    fp0 = maj.fprime(0.0)
    if abs(f0) > H1_TOL or abs(fp0 + 1.0) > H1_TOL:
        raise InvalidMajorant(f"h1 fails: f(0)={f0!r}, f'(0)={fp0!r}")
    ts = maj.grid(n)
    fp = np.array([maj.fprime(float(t)) for t in ts])
    if not np.all(np.isfinite(fp)):
        raise InvalidMajorant("f' is not finite on the sample grid")
    if not np.all(np.diff(fp) > 0):
        raise InvalidMajorant("f' is not strictly increasing on the sample grid")
    mid = np.array([maj.fprime(float(t)) for t in 0.5 * (ts[:-1] + ts[1:])])
    chord = 0.5 * (fp[:-1] + fp[1:])
    tol = rtol * np.maximum(1.0, np.abs(chord))
    if not np.all(mid <= chord + tol):
        raise InvalidMajorant("f' fails the midpoint convexity test on the sample grid")


def lipschitz_majorant(K, R=math.inf):
    """``f(t) = K t^2 / 2 - t``, the majorant of a K-Lipschitz Jacobian."""
    if not K > 0:
        raise InvalidMajorant(f"Lipschitz constant must be positive, got {K}")
    K = float(K)
    return MajorantFunction(
        f=lambda t: K * t * t / 2.0 - t,
        fprime=lambda t: K * t - 1.0,
        d_plus_fprime_0=K,
        R=R,
        kind="lipschitz",
        params={"K": K},
    )


def smale_majorant(gamma):
    """``f(t) = t / (1 - gamma t) - 2t`` on ``[0, 1/gamma)``; ``f''(0) = 2 gamma``."""
    if not gamma > 0:
        raise InvalidMajorant(f"gamma must be positive, got {gamma}")
    g = float(gamma)
    return MajorantFunction(
        f=lambda t: t / (1.0 - g * t) - 2.0 * t,
        fprime=lambda t: 1.0 / (1.0 - g * t) ** 2 - 2.0,
        d_plus_fprime_0=2.0 * g,
        R=1.0 / g,
        kind="smale",
        params={"gamma": g},
    )


@dataclass(frozen=True)
class ProblemConstants:
    """``c = ||F(x*)||``, ``beta = ||F'(x*)^+||``, ``beta0 = ||(F'^T F')^{-1}||``, domain radius."""

    c: float
    beta: float
    beta0: float
    kappa: float = math.inf

    def __post_init__(self):
        if self.c < 0 or not self.beta > 0 or not self.beta0 > 0 or not self.kappa > 0:
            raise ValueError(f"invalid problem constants {self}")


@dataclass(frozen=True)
class RadiusSet:
    nu: float
    rho: float
    r: float
    sigma: Optional[float]
    h3_satisfied: bool
    h4_satisfied: bool


class Q2Coefficients(NamedTuple):
    quad: float
    lin: float


def _safe(g, t):
    """``g(t)``, or +inf where the formula is undefined or overflows."""
    try:
        with np.errstate(all="raise"):
            v = float(g(t))
    except (ZeroDivisionError, FloatingPointError, OverflowError, DomainError):
        return math.inf
    return v if math.isfinite(v) else math.inf


def bisect_sup(g, upper, *, rtol=4 * np.finfo(float).eps, max_iter=200):
    """``sup{t in (0, upper) : g(t) < 1}`` for nondecreasing ``g`` with ``g(0+) < 1``.

    If ``g(upper) < 1`` the inequality holds on the whole interval and ``upper``
    is returned. Undefined values of ``g`` count as ``+inf``.
    """
    if not (upper > 0 and math.isfinite(upper)):
        raise ValueError(f"upper bracket must be finite and positive, got {upper}")
    if _safe(g, upper) < 1.0:
        return upper
    # near 0 the maps divide cancelling differences like f'(t) + 1 by t, so the
    # lower bracket is the largest of a few candidates where g < 1 still holds
    hi = upper
    for scale in LOWER_BRACKETS:
        lo = scale * upper
        if _safe(g, lo) < 1.0:
            break
    else:
        raise DomainError(f"inequality fails already at t={lo:.3e}; no positive supremum")
    for _ in range(max_iter):
        if hi - lo <= rtol * lo:
            break
        mid = 0.5 * (lo + hi)
        if _safe(g, mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _upper(maj, t_max, *bounds):
    return min(maj.R, t_max, *bounds)


def compute_nu(maj, beta, t_max=DEFAULT_T_MAX):
    """``sup{t in [0, R) : beta (f'(t) + 1) < 1}``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    return bisect_sup(lambda t: beta * (maj.fprime(t) + 1.0), _upper(maj, t_max))


def psi(maj, beta, c, t):
    """Per-step contraction factor of Gauss-Newton at distance ``t`` from ``x*``.

    ``[beta (t f'(t) - f(t)) + sqrt2 c beta^2 (f'(t) + 1)] / [t (1 - beta (f'(t) + 1))]``;
    defined on ``(0, nu)``.
    """
    if not t > 0:
        raise DomainError(f"psi needs t > 0, got {t}")
    fp = maj.fprime(t)
    denom = t * (1.0 - beta * (fp + 1.0))
    if not denom > 0:
        raise DomainError(f"t={t} is not below nu (1 - beta (f'(t) + 1) <= 0)")
    num = beta * (t * fp - maj.f(t))
    if c:
        num += SQRT2 * c * beta * beta * (fp + 1.0)
    return num / denom


def h3_product(maj, beta, c):
    return SQRT2 * c * beta * beta * maj.d_plus_fprime_0


def h4_product(maj, beta0, c):
    return 2.0 * c * beta0 * maj.d_plus_fprime_0


def compute_rho(maj, beta, c, t_max=DEFAULT_T_MAX, nu=None):
    """Largest ``t < nu`` with ``psi(t) < 1``.

    Raises
    ------
    H3Violated
        If ``sqrt(2) c beta^2 D+f'(0) >= 1`` (large-residual regime).
    """
    product = h3_product(maj, beta, c)
    if not product < 1.0:
        raise H3Violated(product)
    if nu is None:
        nu = compute_nu(maj, beta, t_max)
    return bisect_sup(lambda t: psi(maj, beta, c, t) if t < nu else math.inf, nu)


def sigma_function(maj, beta, beta0, c, t):
    """``beta (f(t)/t + 1) + c beta0 (f'(t) + 1) / t``, increasing on (0, R)."""
    value = beta * (maj.f(t) / t + 1.0)
    if c:
        value += c * beta0 * (maj.fprime(t) + 1.0) / t
    return value


def compute_sigma(maj, beta, beta0, c, kappa=math.inf, t_max=DEFAULT_T_MAX):
    """Uniqueness radius ``sup{t in (0, kappa) : sigma_function(t) < 1}``.

    Raises
    ------
    H4Violated
        If ``2 c beta0 D+f'(0) >= 1``.
    """
    product = h4_product(maj, beta0, c)
    if not product < 1.0:
        raise H4Violated(product)
    return bisect_sup(lambda t: sigma_function(maj, beta, beta0, c, t), _upper(maj, t_max, kappa))


def q2_coefficients(maj, beta, c, t0, rho=None):
    """Coefficients of the error recursion ``e_{k+1} <= quad e_k^2 + lin e_k``.

    Both are evaluated at ``t0 = ||x0 - x*||`` and ``quad * t0 + lin = psi(t0) < 1``.
    """
    if rho is None:
        rho = compute_rho(maj, beta, c)
    if not 0 < t0 < rho:
        raise DomainError(f"t0={t0} outside (0, rho={rho})")
    fp = maj.fprime(t0)
    denom = 1.0 - beta * (fp + 1.0)
    quad = beta * (fp * t0 - maj.f(t0)) / (t0 * t0 * denom)
    lin = SQRT2 * c * beta * beta * (fp + 1.0) / (t0 * denom) if c else 0.0
    return Q2Coefficients(quad, lin)


def e_f(maj, t, u):
    """Linearisation error of ``f`` at ``t`` evaluated at ``u``."""
    return maj.f(u) - (maj.f(t) + maj.fprime(t) * (u - t))


def compute_radii(maj, constants, t_max=DEFAULT_T_MAX):
    """All radii for ``maj`` and ``constants``; ``sigma`` is None when h4 fails.

    Raises H3Violated when no convergence radius exists.
    """
    nu = compute_nu(maj, constants.beta, t_max)
    rho = compute_rho(maj, constants.beta, constants.c, t_max, nu=nu)
    try:
        sigma = compute_sigma(maj, constants.beta, constants.beta0, constants.c, constants.kappa, t_max)
    except H4Violated:
        sigma = None
    return RadiusSet(
        nu=nu,
        rho=rho,
        r=min(constants.kappa, rho),
        sigma=sigma,
        h3_satisfied=True,
        h4_satisfied=sigma is not None,
    )


def closed_form_radii(maj, constants):
    """Radii from the explicit formulas for the Lipschitz and Smale majorants.

    The Smale uniqueness radius uses ``w1 = 2 + beta - c beta0`` exactly as the
    formula is usually quoted; see :func:`closed_form_discrepancies` for how it
    compares with the bisection value when ``c > 0``.
    """
    c, beta, beta0, kappa = constants.c, constants.beta, constants.beta0, constants.kappa
    if maj.kind == "lipschitz":
        K = maj.params["K"]
        product = SQRT2 * c * beta * beta * K
        if not product < 1.0:
            raise H3Violated(product)
        nu = 1.0 / (beta * K)
        rho = (2.0 - 2.0 * SQRT2 * K * beta * beta * c) / (3.0 * K * beta)
        h4 = 2.0 * c * beta0 * K < 1.0
        sigma = min(kappa, (2.0 - 2.0 * c * beta0 * K) / (beta * K)) if h4 else None
    elif maj.kind == "smale":
        g = maj.params["gamma"]
        product = 2.0 * SQRT2 * c * beta * beta * g
        if not product < 1.0:
            raise H3Violated(product)
        nu = ((1.0 + beta) - math.sqrt(beta * (1.0 + beta))) / (g * (1.0 + beta))
        a = 2.0 + 3.0 * beta - SQRT2 * c * beta * beta * g
        b = 4.0 * (1.0 + beta) * (1.0 - 2.0 * SQRT2 * c * beta * beta * g)
        rho = (a - math.sqrt(a * a - b)) / (2.0 * g * (1.0 + beta))
        h4 = 4.0 * c * beta0 * g < 1.0
        if h4:
            w1 = 2.0 + beta - c * beta0
            w2 = 4.0 * (1.0 + beta) * (1.0 - 2.0 * c * beta0 * g)
            disc = w1 * w1 - w2
            # with the quoted w1 the discriminant can go negative for c > 0
            sigma = min(kappa, (w1 - math.sqrt(disc)) / (2.0 * g * (1.0 + beta))) if disc >= 0 else math.nan
        else:
            sigma = None
    else:
        raise ValueError(f"no closed form for majorant kind {maj.kind!r}")
    return RadiusSet(nu=nu, rho=rho, r=min(kappa, rho), sigma=sigma, h3_satisfied=True, h4_satisfied=h4)


def closed_form_discrepancies(maj, constants, rtol=1e-9, t_max=DEFAULT_T_MAX):
    """Compare closed-form radii with bisection; bisection is the reference.

    Returns a dict ``name -> {"closed_form", "bisection", "rel_diff"}`` holding only
    the radii that disagree beyond ``rtol``. Each mismatch is logged as a warning.
    """
    closed = closed_form_radii(maj, constants)
    ref = compute_radii(maj, constants, t_max)
    out = {}
    for name in ("nu", "rho", "r", "sigma"):
        a, b = getattr(closed, name), getattr(ref, name)
        if a is None or b is None:
            if (a is None) != (b is None):
                out[name] = {"closed_form": a, "bisection": b, "rel_diff": math.inf}
            continue
        rel = abs(a - b) / max(abs(b), 1e-300)
        if not rel <= rtol:
            out[name] = {"closed_form": a, "bisection": b, "rel_diff": rel}
            log.warning("%s closed form %.12g disagrees with bisection %.12g (%s majorant)",
                        name, a, b, maj.kind)
    return out


def increasing_maps(maj, beta):
    """The scalar maps that are nondecreasing for any valid majorant.

    Returns ``name -> (callable, upper)``; each map is considered on ``(0, upper)``.
    Maps involving ``1 - beta (f'(t) + 1)`` only make sense below ``nu``.
    """
    f, fp = maj.f, maj.fprime
    nu = compute_nu(maj, beta)

    def damp(t):
        return 1.0 - beta * (fp(t) + 1.0)

    return {
        "inv_damping": (lambda t: 1.0 / damp(t), nu),
        "taylor_quotient": (lambda t: (t * fp(t) - f(t)) / (t * t), maj.R),
        "fprime_slope": (lambda t: (fp(t) + 1.0) / t, maj.R),
        "f_slope": (lambda t: f(t) / t, maj.R),
        "quad_coefficient": (lambda t: (t * fp(t) - f(t)) / (t * t * damp(t)), nu),
        "lin_coefficient": (lambda t: (fp(t) + 1.0) / (t * damp(t)), nu),
    }
