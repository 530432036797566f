"""Pure Gauss-Newton on a few small residual maps.

Run with ``python3 demos/01_gauss_newton_basics.py``.
"""
import numpy as np

from gncert import problems
from gncert.certify import fit_convergence_order
from gncert.solver import gn_step, solve

# %% One step by hand: F(x) = (x - 1, (x - 1)^2) at x = 1.5
# J = (1, 1)^T, J^T J = 2, J^T F = 0.75, so the step lands on 1.125.
sq = problems.build("scalar_quadratic")
print("step from 1.5:", gn_step(sq, [1.5])[0])

# %% A full run records iterates, errors, residual and gradient norms
tr = solve(sq, [1.3])
print(tr.status.value, "after", tr.n_iters, "iterations")
print(tr.to_csv())

# errors shrink faster than quadratically here (e -> 2e^3 / (1 + 4e^2))
print("fitted order:", round(fit_convergence_order(tr).order, 3))

# %% Affine residuals are solved in a single step from anywhere
lin = problems.build("linear")
tr = solve(lin, [40.0, -13.0])
print("linear:", tr.n_iters, "step, x =", np.round(tr.x, 12))

# %% Rosenbrock residuals: J is affine in x, convergence in two steps
ros = problems.build("rosenbrock")
tr = solve(ros, [-1.2, 1.0])
print("rosenbrock:", tr.status.value, tr.n_iters, "iterations, errors", tr.errors)
