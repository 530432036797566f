"""Pure Gauss-Newton iteration for ``min 1/2 ||F(x)||^2``.

No damping or line search: every step is the exact least-squares step
``x - F'(x)^+ F(x)``, computed from a QR factorisation of the Jacobian.
"""
import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import linalg
from .errors import RankDeficient


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    DIVERGED = "Diverged"
    RANK_DEFICIENT = "RankDeficient"
    LEFT_DOMAIN = "LeftDomain"


@dataclass(frozen=True)
class ResidualProblem:
    """A residual map ``F : R^n -> R^m`` (m >= n) with its Jacobian.

    Optional metadata used by the certification code:

    ``x_star``
        a known stationary point of ``1/2 ||F||^2``.
    ``lipschitz``
        an exact Lipschitz constant of ``x -> F'(x)`` in the spectral norm.
    ``gamma``
        the point-estimate constant ``sup_k ||F^(k)(x*)/k!||^(1/(k-1))``.
    ``derivatives``
        callable returning ``[F''(x), F'''(x), ...]`` as arrays of shape
        ``(m, n, ..., n)``; only meaningful for polynomial residuals where the list
        is finite.
    """

    name: str
    fun: Callable
    jac: Callable
    n: int
    m: int
    x_star: Optional[np.ndarray] = None
    domain_center: Optional[np.ndarray] = None
    domain_radius: float = math.inf
    lipschitz: Optional[float] = None
    gamma: Optional[float] = None
    derivatives: Optional[Callable] = None
    regime: Optional[str] = None
    params: dict = field(default_factory=dict)
    notes: str = ""

    def __post_init__(self):
        if self.m < self.n:
            raise ValueError(f"{self.name}: need m >= n, got m={self.m}, n={self.n}")
        if self.x_star is not None:
            object.__setattr__(self, "x_star", np.asarray(self.x_star, dtype=float).reshape(self.n))
        center = np.zeros(self.n) if self.domain_center is None else self.domain_center
        object.__setattr__(self, "domain_center", np.asarray(center, dtype=float).reshape(self.n))

    def F(self, x):
        return np.asarray(self.fun(np.asarray(x, dtype=float)), dtype=float).reshape(self.m)

    def J(self, x):
        return np.asarray(self.jac(np.asarray(x, dtype=float)), dtype=float).reshape(self.m, self.n)

    def gradient(self, x):
        return self.J(x).T @ self.F(x)

    def in_domain(self, x):
        return bool(np.linalg.norm(np.asarray(x) - self.domain_center) < self.domain_radius)

    @property
    def kappa(self):
        """Radius of the largest ball around ``x*`` inside the domain."""
        if self.x_star is None:
            raise ValueError(f"{self.name}: x_star unknown")
        return self.domain_radius - float(np.linalg.norm(self.x_star - self.domain_center))


def gn_step(problem, x):
    """One Gauss-Newton step ``x - F'(x)^+ F(x)``.

    Raises RankDeficient when ``F'(x)`` has lost full column rank.
    """
    x = np.asarray(x, dtype=float).reshape(problem.n)
    return x - linalg.lstsq_solve(problem.J(x), problem.F(x))


@dataclass
class IterateTrace:
    iterates: np.ndarray
    residual_norms: np.ndarray
    gradient_norms: np.ndarray
    status: Status
    errors: Optional[np.ndarray] = None
    grad_tol: float = 0.0

    @property
    def n_iters(self):
        return len(self.iterates) - 1

    @property
    def x(self):
        return self.iterates[-1]

    @property
    def final_error(self):
        return None if self.errors is None else float(self.errors[-1])

    @property
    def converged(self):
        return self.status == Status.CONVERGED

    def to_csv(self, fh=None):
        """Write ``iter, x_0..x_{n-1}, error, residual_norm, gradient_norm`` rows.

        Returns the CSV text when ``fh`` is None. ``error`` is blank if ``x*`` is unknown.
        """
        out = io.StringIO() if fh is None else fh
        n = self.iterates.shape[1]
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["iter", *[f"x_{i}" for i in range(n)], "error", "residual_norm", "gradient_norm"])
        for k, x in enumerate(self.iterates):
            err = "" if self.errors is None else _fmt(self.errors[k])
            w.writerow([k, *map(_fmt, x), err, _fmt(self.residual_norms[k]), _fmt(self.gradient_norms[k])])
        if fh is None:
            return out.getvalue()


def _fmt(v):
    return repr(float(v))


def solve(problem, x0, max_iters=100, grad_tol=None, divergence_radius=None):
    """Run Gauss-Newton from ``x0`` and record the full trace.

    Stops when ``||F'(x)^T F(x)|| <= grad_tol`` (default ``1e-12 (1 + ||F(x0)||)``),
    when ``max_iters`` steps were taken, when the Jacobian loses rank, when an
    iterate leaves the problem domain, or when ``||x_k||`` exceeds
    ``divergence_radius`` (default ``1e3 max(1, ||x0||)``). Failures are reported
    through ``status``; nothing is raised.
    """
    x = np.asarray(x0, dtype=float).reshape(problem.n).copy()
    r0 = float(np.linalg.norm(problem.F(x)))
    if grad_tol is None:
        grad_tol = 1e-12 * (1.0 + r0)
    if divergence_radius is None:
        divergence_radius = 1e3 * max(1.0, float(np.linalg.norm(x)))

    xs, res, grads = [], [], []

    def record(x):
        Fx = problem.F(x)
        xs.append(x)
        res.append(float(np.linalg.norm(Fx)))
        grads.append(float(np.linalg.norm(problem.J(x).T @ Fx)))

    record(x)
    status = Status.MAX_ITERS
    if not problem.in_domain(x):
        status = Status.LEFT_DOMAIN
    else:
        for k in range(max_iters + 1):
            if grads[-1] <= grad_tol:
                status = Status.CONVERGED
                break
            if k == max_iters:
                break
            try:
                x = gn_step(problem, x)
            except RankDeficient:
                status = Status.RANK_DEFICIENT
                break
            if not np.all(np.isfinite(x)):
                status = Status.DIVERGED
                break
            if not problem.in_domain(x):
                status = Status.LEFT_DOMAIN
                break
            record(x)
            if np.linalg.norm(x) > divergence_radius:
                status = Status.DIVERGED
                break

    iterates = np.array(xs)
    errors = None
    if problem.x_star is not None:
        errors = np.linalg.norm(iterates - problem.x_star, axis=1)
    return IterateTrace(
        iterates=iterates,
        residual_norms=np.array(res),
        gradient_norms=np.array(grads),
        status=status,
        errors=errors,
        grad_tol=grad_tol,
    )


def linearization_error(problem, x, y):
    """``||F(y) - F(x) - F'(x)(y - x)||``."""
    x = np.asarray(x, dtype=float).reshape(problem.n)
    y = np.asarray(y, dtype=float).reshape(problem.n)
    return float(np.linalg.norm(problem.F(y) - problem.F(x) - problem.J(x) @ (y - x)))


def fd_jacobian(problem, x, h=1e-6):
    """Central-difference Jacobian of ``problem.F`` at ``x``."""
    x = np.asarray(x, dtype=float).reshape(problem.n)
    J = np.empty((problem.m, problem.n))
    for j in range(problem.n):
        e = np.zeros(problem.n)
        e[j] = h
        J[:, j] = (problem.F(x + e) - problem.F(x - e)) / (2 * h)
    return J


def check_jacobian(problem, x, h=1e-6):
    """Max componentwise deviation between ``problem.J`` and central differences."""
    return float(np.max(np.abs(fd_jacobian(problem, x, h) - problem.J(x))))
