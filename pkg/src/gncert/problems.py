"""Test problems covering zero-, small- and large-residual least squares.

Every builder returns a :class:`~gncert.solver.ResidualProblem` with an analytic
Jacobian and a known stationary point ``x_star``. Problems are also reachable by
name through :data:`REGISTRY` / :func:`build`.
"""
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg
from .solver import ResidualProblem, solve

ZERO = "ZeroResidual"
SMALL = "SmallResidual"
LARGE = "LargeResidual"


def make_linear(A, b, name="linear"):
    """``F(x) = A x - b``; converges in one Gauss-Newton step from anywhere."""
    A = linalg.as_matrix(A)
    b = np.asarray(b, dtype=float).reshape(A.shape[0])
    x_star = linalg.lstsq_solve(A, b)
    c = float(np.linalg.norm(A @ x_star - b))
    m, n = A.shape
    return ResidualProblem(
        name=name,
        fun=lambda x: A @ x - b,
        jac=lambda x: A,
        n=n,
        m=m,
        x_star=x_star,
        lipschitz=0.0,
        derivatives=lambda x: [],
        regime=ZERO if c <= 1e-12 else SMALL,
        params={"A": A.tolist(), "b": b.tolist()},
    )


def make_scalar_quadratic():
    """``F(x) = (x - 1, (x - 1)^2)``: zero residual at ``x* = 1`` with K = 2, gamma = 1."""
    return ResidualProblem(
        name="scalar_quadratic",
        fun=lambda x: np.array([x[0] - 1.0, (x[0] - 1.0) ** 2]),
        jac=lambda x: np.array([[1.0], [2.0 * (x[0] - 1.0)]]),
        n=1,
        m=2,
        x_star=np.array([1.0]),
        lipschitz=2.0,
        gamma=1.0,
        derivatives=lambda x: [np.array([0.0, 2.0]).reshape(2, 1, 1)],
        regime=ZERO,
    )


def make_ds_family(lam):
    """``F(x) = (x + 1, lam x^2 + x - 1)`` with stationary point ``x* = 0``.

    Reconstructed form of a classic large-residual example: ``c = sqrt 2`` for every
    ``lam``, and Gauss-Newton near ``x*`` contracts like ``|lam|`` per step, so it
    fails to converge locally once ``|lam| > 1``. The h3 product for the exact
    Lipschitz constant ``2|lam|`` is ``2|lam|``.
    """
    lam = float(lam)
    # f'(0) = (1)(1) + (-1)(1) = 0 for every lam, so x* = 0 exactly
    regime = SMALL if 2.0 * abs(lam) < 1.0 else LARGE
    return ResidualProblem(
        name="ds_family",
        fun=lambda x: np.array([x[0] + 1.0, lam * x[0] ** 2 + x[0] - 1.0]),
        jac=lambda x: np.array([[1.0], [2.0 * lam * x[0] + 1.0]]),
        n=1,
        m=2,
        x_star=np.array([0.0]),
        lipschitz=2.0 * abs(lam),
        gamma=abs(lam),
        derivatives=lambda x: [np.array([0.0, 2.0 * lam]).reshape(2, 1, 1)],
        regime=regime,
        params={"lambda": lam},
        notes="reconstructed",
    )


def _exp_model(t, y):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)

    def fun(x):
        return y - x[0] * np.exp(x[1] * t)

    def jac(x):
        e = np.exp(x[1] * t)
        return np.column_stack([-e, -x[0] * t * e])

    return fun, jac


def refine_stationary_point(fun, jac, starts, n, m, grad_tol=1e-14, max_iters=200):
    """Multistart Gauss-Newton; returns the converged point with smallest ``||F||``."""
    probe = ResidualProblem(name="refine", fun=fun, jac=jac, n=n, m=m)
    best, best_res = None, math.inf
    for x0 in starts:
        tr = solve(probe, x0, max_iters=max_iters, grad_tol=grad_tol)
        if tr.converged and tr.residual_norms[-1] < best_res:
            best, best_res = tr.x, tr.residual_norms[-1]
    if best is None:
        raise RuntimeError("no start converged to a stationary point")
    return best


def make_exp_fit(t_points, y_points, x_star=None, domain_radius=1.0, name="exp_fit"):
    """Residuals ``y_i - a exp(b t_i)`` in the parameters ``x = (a, b)``.

    ``x_star`` is located by multistart refinement when not supplied. The domain is
    the ball of radius ``domain_radius`` around ``x_star``; the Jacobian is not
    globally Lipschitz, so K has to be estimated on that ball.
    """
    t = np.asarray(t_points, dtype=float)
    y = np.asarray(y_points, dtype=float)
    if t.shape != y.shape or t.size < 3:
        raise ValueError("need at least 3 (t, y) data points of matching shape")
    fun, jac = _exp_model(t, y)
    if x_star is None:
        starts = [(a, b) for a in (0.5, 1.0, 2.0) for b in (-1.0, 0.0, 0.5, 1.0)]
        x_star = refine_stationary_point(fun, jac, starts, n=2, m=t.size)
    x_star = np.asarray(x_star, dtype=float)
    c = float(np.linalg.norm(fun(x_star)))
    return ResidualProblem(
        name=name,
        fun=fun,
        jac=jac,
        n=2,
        m=t.size,
        x_star=x_star,
        domain_center=x_star,
        domain_radius=domain_radius,
        regime=ZERO if c <= 1e-12 else SMALL,
        params={"t": t.tolist(), "y": y.tolist()},
    )


EXP_FIT_T = np.linspace(0.0, 2.0, 9)
EXP_FIT_TRUE = (1.0, 0.5)
# alternating-sign perturbation of the observations
EXP_FIT_PATTERN = np.array([(-1.0) ** i for i in range(EXP_FIT_T.size)])

# Stationary points for the registry data, computed offline with
# refine_stationary_point(grad_tol=1e-14) and frozen here; keyed by noise level.
EXP_FIT_X_STAR = {
    0.0: (1.0, 0.5),
    1e-3: (1.0000151333009633, 0.5000352892488852),
}


def exp_fit_data(noise=0.0):
    y = EXP_FIT_TRUE[0] * np.exp(EXP_FIT_TRUE[1] * EXP_FIT_T) + noise * EXP_FIT_PATTERN
    return EXP_FIT_T.copy(), y


def make_exp_fit_registry(noise=0.0):
    t, y = exp_fit_data(noise)
    x_star = EXP_FIT_X_STAR.get(float(noise))
    return make_exp_fit(t, y, x_star=x_star, name="exp_fit")


def make_rosenbrock():
    """``F(x) = (10 (x2 - x1^2), 1 - x1)``: zero residual at (1, 1); J is affine, K = 20."""

    def derivatives(x):
        T = np.zeros((2, 2, 2))
        T[0, 0, 0] = -20.0
        return [T]

    return ResidualProblem(
        name="rosenbrock",
        fun=lambda x: np.array([10.0 * (x[1] - x[0] ** 2), 1.0 - x[0]]),
        jac=lambda x: np.array([[-20.0 * x[0], 10.0], [-1.0, 0.0]]),
        n=2,
        m=2,
        x_star=np.array([1.0, 1.0]),
        lipschitz=20.0,
        gamma=10.0,
        derivatives=derivatives,
        regime=ZERO,
    )


def make_broken_jacobian():
    """``scalar_quadratic`` with a sign-flipped Jacobian; exists to test the checkers."""
    good = make_scalar_quadratic()
    return ResidualProblem(
        name="broken_jacobian",
        fun=good.fun,
        jac=lambda x: -good.jac(x),
        n=1,
        m=2,
        x_star=good.x_star,
        lipschitz=2.0,
        regime=ZERO,
        notes="deliberately wrong Jacobian",
    )


def make_worst_case(kind="lipschitz", beta=1.0, K=None, gamma=None, kappa=None):
    from .certify import worst_case_problem
    from .majorant import lipschitz_majorant, smale_majorant

    if kind == "lipschitz":
        maj = lipschitz_majorant(1.0 if K is None else K)
    elif kind == "smale":
        maj = smale_majorant(1.0 if gamma is None else gamma)
    else:
        raise ValueError(f"unknown majorant kind {kind!r}")
    return worst_case_problem(maj, beta, kappa)


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    builder: Callable
    defaults: dict
    description: str = ""

    def build(self, **params):
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise KeyError(f"{self.name}: unknown parameter(s) {sorted(unknown)}")
        return self.builder(**{**self.defaults, **params})


def _linear_registry(residual=0.5):
    # the residual direction (1, 1, -1) is orthogonal to both columns, so x* = (1, 2)
    A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    b = A @ np.array([1.0, 2.0]) + residual * np.array([1.0, 1.0, -1.0]) / math.sqrt(3.0)
    return make_linear(A, b)


REGISTRY = {
    spec.name: spec
    for spec in [
        ProblemSpec("linear", _linear_registry, {"residual": 0.5}, "3x2 linear fit, x* = (1, 2)"),
        ProblemSpec("scalar_quadratic", make_scalar_quadratic, {}, "F(x) = (x-1, (x-1)^2)"),
        ProblemSpec("ds_family", lambda **p: make_ds_family(p["lambda"]), {"lambda": 0.1},
                    "F(x) = (x+1, lambda x^2 + x - 1)"),
        ProblemSpec("exp_fit", make_exp_fit_registry, {"noise": 0.0}, "y - a exp(b t) on 9 points"),
        ProblemSpec("rosenbrock", make_rosenbrock, {}, "Rosenbrock residuals"),
        ProblemSpec("broken_jacobian", make_broken_jacobian, {}, "scalar_quadratic with wrong Jacobian"),
        ProblemSpec("worst_case", make_worst_case,
                    {"kind": "lipschitz", "beta": 1.0, "K": None, "gamma": None, "kappa": None},
                    "scalar worst case built from a majorant"),
    ]
}


def build(name, **params):
    """Build a registered problem by name."""
    try:
        spec = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; known: {sorted(REGISTRY)}") from None
    return spec.build(**params)


def parse_params(items):
    """Parse ``["k=v", ...]`` into a dict; values become floats where possible."""
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"expected key=value, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            out[key.strip()] = value.strip()
    return out
