"""Convergence certificates for concrete problems and their empirical validation.

A :class:`Certificate` bundles the problem constants (``c``, ``beta``, ``beta0``,
``kappa``) with the radii produced by a majorant. The remaining functions check
each claim of the local theory numerically: the majorant inequality itself, the
per-iteration error recursion along real traces, the empirical convergence
radius, the period-2 cycle of the scalar worst case, and uniqueness of the
stationary point inside the certified ball.
"""
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linalg
from .errors import InsufficientData, PreconditionViolated, RankDeficient
from .majorant import (
    DEFAULT_T_MAX,
    ProblemConstants,
    Q2Coefficients,
    RadiusSet,
    compute_nu,
    compute_radii,
    lipschitz_majorant,
    q2_coefficients,
    smale_majorant,
)
from .solver import ResidualProblem, gn_step, linearization_error, solve

NORM = "spectral"
ROUNDOFF = 64 * np.finfo(float).eps
K_INFLATION = 1.05
UNBOUNDED_SAMPLE_RADIUS = 10.0  # stands in for kappa = inf when sampling balls
BOUND_SLACK = 1e-9


def _rng(rng):
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    return rng


def sample_ball(rng, center, radius, size):
    """``size`` points uniformly distributed in the open ball ``B(center, radius)``."""
    center = np.asarray(center, dtype=float)
    n = center.size
    d = rng.standard_normal((size, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    t = radius * rng.random(size) ** (1.0 / n)
    return center + t[:, None] * d


def random_direction(rng, n):
    d = rng.standard_normal(n)
    return d / np.linalg.norm(d)


def problem_constants(problem):
    """``c``, ``beta = 1/sigma_min``, ``beta0 = 1/sigma_min^2`` and ``kappa`` at ``x*``."""
    if problem.x_star is None:
        raise ValueError(f"{problem.name}: certification needs a known x_star")
    J = problem.J(problem.x_star)
    if not linalg.has_full_column_rank(J):
        raise RankDeficient(f"{problem.name}: F'(x*) is rank deficient")
    smin = linalg.min_singular_value(J)
    return ProblemConstants(
        c=float(np.linalg.norm(problem.F(problem.x_star))),
        beta=1.0 / smin,
        beta0=1.0 / smin**2,
        kappa=problem.kappa,
    )


def sample_radius(problem, radius=None):
    if radius is not None:
        return radius
    kappa = problem.kappa
    return kappa if math.isfinite(kappa) else UNBOUNDED_SAMPLE_RADIUS


def estimate_lipschitz(problem, radius=None, samples=2000, rng=None):
    """Largest sampled ``||J(x) - J(y)|| / ||x - y||`` over pairs in ``B(x*, radius)``.

    A third of the pairs are independent points of the ball; the rest are close
    pairs (separation ``1e-4 radius``) that resolve the local slope of ``J``,
    half of them anchored just inside the boundary sphere where smooth
    Jacobians tend to vary fastest. Raw estimate, no inflation.
    """
    rng = _rng(rng)
    radius = sample_radius(problem, radius)
    n = problem.n
    xs = sample_ball(rng, problem.x_star, radius, samples)
    ys = sample_ball(rng, problem.x_star, radius, samples)
    first_local = samples // 3
    for i in range(first_local, samples):
        if i % 2:
            xs[i] = problem.x_star + radius * (1 - 2e-4) * random_direction(rng, n)
        ys[i] = xs[i] + 1e-4 * radius * random_direction(rng, n)
    best = 0.0
    for x, y in zip(xs, ys):
        dist = np.linalg.norm(x - y)
        if dist > 0:
            best = max(best, linalg.spectral_norm(problem.J(x) - problem.J(y)) / dist)
    return best


def smale_gamma(problem, x=None):
    """``max_k (||F^(k)(x*)|| / k!)^(1/(k-1))`` from the problem's derivative tensors."""
    if problem.derivatives is None:
        if problem.gamma is None:
            raise ValueError(f"{problem.name}: gamma needs polynomial derivative data or a supplied value")
        return problem.gamma
    x = problem.x_star if x is None else x
    gamma = 0.0
    for k, T in enumerate(problem.derivatives(x), start=2):
        nrm = linalg.multilinear_norm(T)
        if nrm > 0:
            gamma = max(gamma, (nrm / math.factorial(k)) ** (1.0 / (k - 1)))
    return gamma


def default_majorant(problem, kind="lipschitz", rng=None, samples=2000):
    """Majorant for ``problem`` and where its constant came from.

    Returns ``(majorant, source)`` with source ``"supplied"``, ``"estimated"`` or
    ``"exact"``. A zero Lipschitz constant (affine residual) returns ``(None, "supplied")``.
    """
    if kind == "lipschitz":
        if problem.lipschitz is not None:
            if problem.lipschitz == 0:
                return None, "supplied"
            return lipschitz_majorant(problem.lipschitz), "supplied"
        K = estimate_lipschitz(problem, samples=samples, rng=rng) * K_INFLATION
        return lipschitz_majorant(K), "estimated"
    if kind == "smale":
        if problem.derivatives is not None:
            return smale_majorant(smale_gamma(problem)), "exact"
        if problem.gamma is not None:
            return smale_majorant(problem.gamma), "supplied"
        raise ValueError(f"{problem.name}: gamma must be supplied for a non-polynomial problem")
    raise ValueError(f"unknown majorant kind {kind!r}")


@dataclass
class Certificate:
    """Everything the local theory guarantees for one problem and majorant.

    ``unconditional`` marks affine residuals, certified without a majorant: the
    objective is strictly convex and one step reaches ``x*`` from anywhere.
    """

    problem: str
    constants: ProblemConstants
    radii: RadiusSet
    majorant: Optional[object] = None
    constant_source: str = "supplied"
    unconditional: bool = False
    norm_convention: str = NORM
    x_star_norm: float = 0.0

    @property
    def r(self):
        return self.radii.r

    def q2(self, t0):
        if self.unconditional:
            return Q2Coefficients(0.0, 0.0)
        return q2_coefficients(self.majorant, self.constants.beta, self.constants.c, t0, rho=self.radii.rho)

    def q2_table(self, fractions=(0.1, 0.25, 0.5, 0.75, 0.9, 0.99)):
        if self.unconditional:
            return []
        rows = []
        for frac in fractions:
            t0 = frac * self.radii.r
            quad, lin = self.q2(t0)
            rows.append({"t0": t0, "quad": quad, "lin": lin})
        return rows

    def majorant_dict(self):
        if self.majorant is None:
            return {"kind": "affine", "params": {}, "source": self.constant_source}
        return {"kind": self.majorant.kind, "params": dict(self.majorant.params), "source": self.constant_source}

    def to_dict(self, validation=None):
        k = self.constants
        rd = self.radii
        return {
            "problem": self.problem,
            "norm": self.norm_convention,
            "constants": {"c": k.c, "beta": k.beta, "beta0": k.beta0, "kappa": k.kappa},
            "majorant": self.majorant_dict(),
            "radii": {
                "nu": rd.nu,
                "rho": rd.rho,
                "r": rd.r,
                "sigma": rd.sigma,
                "h3": rd.h3_satisfied,
                "h4": rd.h4_satisfied,
            },
            "q2": self.q2_table(),
            "validation": validation if validation is not None else {},
        }


def build_certificate(problem, majorant=None, *, kind="lipschitz", rng=None, t_max=DEFAULT_T_MAX):
    """Certificate for ``problem``; derives a majorant of ``kind`` when none is given.

    Raises RankDeficient when ``F'(x*)`` lacks full rank and H3Violated in the
    large-residual regime.
    """
    constants = problem_constants(problem)
    x_star_norm = float(np.linalg.norm(problem.x_star))
    source = "supplied"
    if majorant is None:
        majorant, source = default_majorant(problem, kind, rng=rng)
        if majorant is None:
            kappa = constants.kappa
            radii = RadiusSet(nu=math.inf, rho=math.inf, r=kappa, sigma=kappa, h3_satisfied=True, h4_satisfied=True)
            return Certificate(problem.name, constants, radii, None, source, unconditional=True,
                               x_star_norm=x_star_norm)
    constants = ProblemConstants(constants.c, constants.beta, constants.beta0, min(constants.kappa, majorant.R))
    radii = compute_radii(majorant, constants, t_max)
    return Certificate(problem.name, constants, radii, majorant, source, x_star_norm=x_star_norm)


@dataclass
class CheckResult:
    passed: bool
    worst_margin: float
    samples: int = 0

    def to_dict(self):
        return {"pass": self.passed, "worst_margin": self.worst_margin, "samples": self.samples}


def verify_majorant_condition(problem, majorant, kappa=None, samples=1000, rng=None, radius=None):
    """Sample ``x`` in ``B(x*, kappa)`` and ``tau`` in [0, 1] and check

    ``||F'(x) - F'(x* + tau (x - x*))|| <= f'(||x - x*||) - f'(tau ||x - x*||)``.

    ``worst_margin`` is the smallest ``rhs - lhs`` seen; the check passes when it is
    at least ``-1e-10``.
    """
    rng = _rng(rng)
    if radius is None:
        kappa = problem.kappa if kappa is None else kappa
        radius = kappa if math.isfinite(kappa) else UNBOUNDED_SAMPLE_RADIUS
    radius = min(radius, majorant.R)
    xs = sample_ball(rng, problem.x_star, radius, samples)
    taus = rng.random(samples)
    taus[: max(1, samples // 10)] = 0.0
    worst = math.inf
    for x, tau in zip(xs, taus):
        d = x - problem.x_star
        t = float(np.linalg.norm(d))
        lhs = linalg.spectral_norm(problem.J(x) - problem.J(problem.x_star + tau * d))
        rhs = majorant.fprime(t) - majorant.fprime(tau * t)
        worst = min(worst, rhs - lhs)
    return CheckResult(passed=bool(worst >= -1e-10), worst_margin=float(worst), samples=samples)


def roundoff_floor(scale):
    """Errors below this are dominated by floating-point noise."""
    return ROUNDOFF * max(1.0, scale)


@dataclass
class Q2Check:
    passed: bool
    t0: float
    margins: list = field(default_factory=list)

    @property
    def worst_margin(self):
        return min(self.margins) if self.margins else math.inf


def verify_q2(trace, cert, slack=1e-8):
    """Check ``e_{k+1} <= quad(t0) e_k^2 + lin(t0) e_k`` along a trace, ``t0 = e_0``.

    A relative slack ``1 + slack`` and an absolute roundoff floor tolerate
    floating-point noise once the iterates reach ``x*``. A trace starting at
    ``x*`` passes vacuously.

    Raises PreconditionViolated when the start is outside the certified ball.
    """
    if trace.errors is None:
        raise PreconditionViolated("trace has no errors; x* unknown")
    e = trace.errors
    t0 = float(e[0])
    if t0 == 0.0:
        return Q2Check(True, 0.0, [])
    if not t0 < cert.r:
        raise PreconditionViolated(f"||x0 - x*|| = {t0} is not inside the certified radius {cert.r}")
    quad, lin = cert.q2(t0)
    floor = roundoff_floor(cert.x_star_norm)
    margins = []
    for k in range(len(e) - 1):
        bound = quad * e[k] ** 2 + lin * e[k]
        margins.append(float(bound * (1 + slack) + floor - e[k + 1]))
    return Q2Check(passed=all(m >= 0 for m in margins), t0=t0, margins=margins)


def strictly_decreasing(errors, floor=0.0):
    """True if each error is below its predecessor (or already under ``floor``)."""
    e = np.asarray(errors)
    return bool(np.all((e[1:] < e[:-1]) | (e[1:] <= floor)))


def converges_to_solution(problem, x0, tol=1e-8, max_iters=200):
    if not problem.in_domain(x0):
        return False
    tr = solve(problem, x0, max_iters=max_iters)
    return bool(tr.converged and tr.final_error < tol)


@dataclass
class EmpiricalRadius:
    per_direction: list
    minimum: float
    directions: list

    def to_dict(self):
        return {"per_direction": self.per_direction, "minimum": self.minimum}


def empirical_radius(problem, directions=8, t_max=10.0, bisect_tol=1e-9, rng=None, grid=64, tol=1e-8):
    """Largest observed ``delta <= t_max`` from which Gauss-Newton returns to ``x*``.

    Along each unit direction ``d`` (both signs in 1-D, otherwise ``directions``
    seeded random ones) the segment ``(0, t_max]`` is scanned on ``grid`` points;
    the first failure is then refined by bisection to relative width
    ``bisect_tol``. The reported value is the last verified converging distance.
    """
    rng = _rng(rng)
    if problem.n == 1:
        dirs = [np.array([1.0]), np.array([-1.0])]
    else:
        dirs = [random_direction(rng, problem.n) for _ in range(directions)]
    radii = []
    for d in dirs:
        def ok(delta):
            return converges_to_solution(problem, problem.x_star + delta * d, tol=tol)

        lo, hi = 0.0, None
        for i in range(1, grid + 1):
            delta = t_max * i / grid
            if ok(delta):
                lo = delta
            else:
                hi = delta
                break
        if hi is None:
            radii.append(t_max)
            continue
        while hi - lo > bisect_tol * hi:
            mid = 0.5 * (lo + hi)
            if ok(mid):
                lo = mid
            else:
                hi = mid
        radii.append(lo)
    return EmpiricalRadius(per_direction=radii, minimum=min(radii), directions=[d.tolist() for d in dirs])


def worst_case_problem(majorant, beta, kappa=None):
    """Scalar problem ``h`` whose Gauss-Newton iteration cycles at distance ``rho``.

    ``h(t) = -t/beta + t + f(t)`` for ``t >= 0`` and ``-t/beta + t - f(-t)`` for
    ``t < 0`` on ``(-kappa, kappa)``; ``h(0) = 0`` and ``|h'(0)| = 1/beta``.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    f, fp = majorant.f, majorant.fprime
    if kappa is None:
        kappa = majorant.R if math.isfinite(majorant.R) else 10.0 * compute_nu(majorant, beta)
    kappa = min(kappa, majorant.R)

    def h(x):
        t = float(x[0])
        base = -t / beta + t
        return np.array([base + f(t) if t >= 0 else base - f(-t)])

    def dh(x):
        t = float(x[0])
        return np.array([[-1.0 / beta + 1.0 + fp(abs(t))]])

    return ResidualProblem(
        name="worst_case",
        fun=h,
        jac=dh,
        n=1,
        m=1,
        x_star=np.array([0.0]),
        domain_center=np.array([0.0]),
        domain_radius=kappa,
        lipschitz=majorant.params.get("K") if majorant.kind == "lipschitz" else None,
        gamma=majorant.params.get("gamma") if majorant.kind == "smale" else None,
        regime="ZeroResidual",
        params={"kind": majorant.kind, **majorant.params, "beta": beta, "kappa": kappa},
    )


def detect_cycle(iterates, rho, tol=1e-10, consecutive=3):
    """Period-2 cycle: ``||x_{k+2} - x_k|| < tol`` with ``||x_{k+1} - x_k|| > rho``
    for ``consecutive`` successive ``k``."""
    xs = np.asarray(iterates, dtype=float).reshape(len(iterates), -1)
    run = 0
    for k in range(len(xs) - 2):
        if np.linalg.norm(xs[k + 2] - xs[k]) < tol and np.linalg.norm(xs[k + 1] - xs[k]) > rho:
            run += 1
            if run >= consecutive:
                return True
        else:
            run = 0
    return False


def gn_iterates(problem, x0, iters):
    """Exactly ``iters`` raw Gauss-Newton steps (stops early only on rank loss)."""
    xs = [np.asarray(x0, dtype=float).reshape(problem.n)]
    for _ in range(iters):
        try:
            xs.append(gn_step(problem, xs[-1]))
        except RankDeficient:
            break
    return np.array(xs)


def cycle_demo(majorant, beta, x0=None, iters=10, kappa=None):
    """Run Gauss-Newton on the worst-case ``h`` from ``x0`` (default ``rho``)."""
    rho = compute_radii(majorant, ProblemConstants(0.0, beta, beta * beta)).rho
    problem = worst_case_problem(majorant, beta, kappa)
    start = rho if x0 is None else x0
    xs = gn_iterates(problem, [start], iters)[:, 0]
    cycle = detect_cycle(xs, rho)
    amplitude = float(np.max(np.abs(xs[1:]))) if len(xs) > 1 else 0.0
    return {
        "rho": rho,
        "x0": start,
        "iterates": xs.tolist(),
        "cycle": cycle,
        "amplitude": amplitude,
        "max_period2_gap": float(np.max(np.abs(xs[2:] - xs[:-2]))) if len(xs) > 2 else 0.0,
    }


@dataclass
class UniquenessResult:
    clusters: list
    count_in_ball: int
    n_converged: int
    radius: float

    def to_dict(self):
        return {
            "distinct_stationary_points": self.count_in_ball,
            "clusters": self.clusters,
            "converged_starts": self.n_converged,
            "radius": self.radius,
        }


def uniqueness_probe(problem, sigma, starts=50, rng=None, cluster_tol=1e-6, max_iters=200):
    """Multistart Gauss-Newton from ``starts`` random points in ``B(x*, sigma)``.

    Converged stationary points within ``cluster_tol`` of each other are merged;
    ``count_in_ball`` counts the clusters lying inside the ball.
    """
    rng = _rng(rng)
    radius = min(sigma, problem.kappa, DEFAULT_T_MAX)
    if not math.isfinite(radius):
        radius = UNBOUNDED_SAMPLE_RADIUS
    clusters = []
    n_conv = 0
    for x0 in sample_ball(rng, problem.x_star, radius, starts):
        tr = solve(problem, x0, max_iters=max_iters)
        if not tr.converged:
            continue
        n_conv += 1
        if not any(np.linalg.norm(tr.x - c) <= cluster_tol for c in clusters):
            clusters.append(tr.x)
    in_ball = [c for c in clusters if np.linalg.norm(c - problem.x_star) < radius]
    return UniquenessResult(
        clusters=[c.tolist() for c in clusters],
        count_in_ball=len(in_ball),
        n_converged=n_conv,
        radius=radius,
    )


@dataclass
class OrderFit:
    order: float
    linear_factor: float
    n_errors: int


def fit_convergence_order(trace, tail=3, floor=None):
    """Slope of ``log e_{k+1}`` against ``log e_k`` over the last ``tail`` pairs.

    Only errors above the roundoff floor are used; ``linear_factor`` is the final
    ratio ``e_{k+1} / e_k``. Needs at least 4 usable errors.
    """
    if trace.errors is None:
        raise InsufficientData("trace has no errors; x* unknown")
    if floor is None:
        floor = roundoff_floor(float(np.max(np.linalg.norm(trace.iterates, axis=1))))
    e = np.asarray(trace.errors)
    usable = []
    for v in e:
        if v <= floor:
            break
        usable.append(v)
    if len(usable) < 4:
        raise InsufficientData(f"need >= 4 errors above the roundoff floor, got {len(usable)}")
    le = np.log(np.array(usable))
    x, y = le[:-1][-tail:], le[1:][-tail:]
    slope = float(np.polyfit(x, y, 1)[0])
    return OrderFit(order=slope, linear_factor=float(usable[-1] / usable[-2]), n_errors=len(usable))


def check_wdns_bounds(problem, cert, samples=1000, rng=None, radius=None):
    """Sampled check of the perturbed pseudo-inverse bounds below ``min(nu, kappa)``.

    ``||F'(x)^+|| <= beta / (1 - beta (f'(t) + 1))`` and
    ``||F'(x)^+ - F'(x*)^+|| <= sqrt2 beta^2 (f'(t) + 1) / (1 - beta (f'(t) + 1))``.
    """
    rng = _rng(rng)
    maj, beta = cert.majorant, cert.constants.beta
    limit = min(cert.radii.nu, cert.constants.kappa)
    if radius is None:
        radius = limit if math.isfinite(limit) else UNBOUNDED_SAMPLE_RADIUS
    radius = min(radius, limit)
    A_pinv = linalg.pseudoinverse(problem.J(problem.x_star))
    worst = math.inf
    for x in sample_ball(rng, problem.x_star, radius, samples):
        t = float(np.linalg.norm(x - problem.x_star))
        s = maj.fprime(t) + 1.0
        damp = 1.0 - beta * s
        B_pinv = linalg.pseudoinverse(problem.J(x))
        for lhs, rhs in (
            (linalg.spectral_norm(B_pinv), beta / damp),
            (linalg.spectral_norm(B_pinv - A_pinv), math.sqrt(2.0) * beta * beta * s / damp),
        ):
            worst = min(worst, rhs + BOUND_SLACK * max(1.0, rhs) - lhs)
    return CheckResult(passed=bool(worst >= 0), worst_margin=float(worst), samples=samples)


def check_taylor_bound(problem, cert, samples=1000, rng=None, radius=None):
    """Sampled check of ``||E_F(x, x*)|| <= e_f(||x - x*||, 0) = t f'(t) - f(t)``."""
    rng = _rng(rng)
    maj = cert.majorant
    kappa = cert.constants.kappa
    if radius is None:
        radius = kappa if math.isfinite(kappa) else UNBOUNDED_SAMPLE_RADIUS
    radius = min(radius, kappa)
    worst = math.inf
    for x in sample_ball(rng, problem.x_star, radius, samples):
        t = float(np.linalg.norm(x - problem.x_star))
        lhs = linearization_error(problem, x, problem.x_star)
        rhs = maj.f(0.0) - maj.f(t) + maj.fprime(t) * t
        worst = min(worst, rhs + BOUND_SLACK * max(1.0, rhs) - lhs)
    return CheckResult(passed=bool(worst >= 0), worst_margin=float(worst), samples=samples)


def check_second_derivative_bound(problem, gamma, samples=1000, rng=None):
    """Sampled check of ``||F''(x)|| <= 2 gamma / (1 - gamma ||x - x*||)^3`` on ``B(x*, 1/gamma)``."""
    if problem.derivatives is None:
        raise ValueError(f"{problem.name}: no derivative tensors available")
    rng = _rng(rng)
    radius = min(1.0 / gamma, sample_radius(problem))
    worst = math.inf
    for x in sample_ball(rng, problem.x_star, radius, samples):
        t = float(np.linalg.norm(x - problem.x_star))
        tensors = problem.derivatives(x)
        lhs = linalg.multilinear_norm(tensors[0]) if tensors else 0.0
        rhs = 2.0 * gamma / (1.0 - gamma * t) ** 3
        worst = min(worst, rhs + BOUND_SLACK * max(1.0, rhs) - lhs)
    return CheckResult(passed=bool(worst >= 0), worst_margin=float(worst), samples=samples)


def soundness_sweep(problem, cert, starts=100, rng=None, tol=1e-8, max_iters=200):
    """Run Gauss-Newton from ``starts`` seeded points with ``0 < ||x0 - x*|| < r``.

    Returns a dict with the number of starts that converged to ``x*``, passed the
    error recursion check, and had strictly decreasing errors.
    """
    rng = _rng(rng)
    r = min(cert.r, UNBOUNDED_SAMPLE_RADIUS)
    floor = roundoff_floor(cert.x_star_norm)
    n_conv = n_q2 = n_dec = 0
    worst_q2 = math.inf
    for _ in range(starts):
        t0 = r * rng.uniform(1e-6, 1.0 - 1e-9)
        x0 = problem.x_star + t0 * random_direction(rng, problem.n)
        tr = solve(problem, x0, max_iters=max_iters)
        n_conv += bool(tr.converged and tr.final_error < tol)
        check = verify_q2(tr, cert)
        n_q2 += check.passed
        worst_q2 = min(worst_q2, check.worst_margin)
        n_dec += strictly_decreasing(tr.errors, floor)
    return {
        "starts": starts,
        "radius": r,
        "converged": n_conv,
        "q2_passed": n_q2,
        "strictly_decreasing": n_dec,
        "worst_q2_margin": worst_q2,
        "pass": n_conv == n_q2 == n_dec == starts,
    }


def to_jsonable(obj):
    """Convert numpy scalars/arrays and non-finite floats into plain JSON values.

    Infinite floats become the strings ``"inf"`` / ``"-inf"``; NaN becomes ``"nan"``.
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(obj):
    """Stable JSON text for reports and certificates."""
    return json.dumps(to_jsonable(obj), indent=2) + "\n"
