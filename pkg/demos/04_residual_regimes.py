"""Zero, small and large residuals: quadratic, linear, or no local convergence."""
import numpy as np

from gncert import certify, problems
from gncert.errors import H3Violated
from gncert.solver import solve

# %% Zero residual: quadratic
p = problems.build("exp_fit", noise=0.0)
tr = solve(p, p.x_star + np.array([0.3, -0.2]))
print("zero residual errors:", tr.errors)

# %% Small residual: the q2 bound has a linear term proportional to c
p = problems.build("exp_fit", noise=1e-3)
cert = certify.build_certificate(p, rng=0)
t0 = 0.5 * cert.r
tr = solve(p, p.x_star + t0 * np.array([0.6, 0.8]))
fit = certify.fit_convergence_order(tr)
print(f"c = {cert.constants.c:.3e}; tail ratio {fit.linear_factor:.3e} <= lin {cert.q2(t0).lin:.3e}")

# %% The Dennis-Schnabel style family F(x) = (x + 1, lam x^2 + x - 1), x* = 0, c = sqrt 2
# locally GN contracts like |lam| per step; slow for lam near 1 (MaxIters below)
for lam in (0.1, 0.5, 0.9, 2.0):
    p = problems.make_ds_family(lam)
    tr = solve(p, [0.05], max_iters=200)
    try:
        r = certify.build_certificate(p).r
        cert_txt = f"r = {r:.4f}"
    except H3Violated as exc:
        cert_txt = f"h3 fails (product {exc.product:.2f})"
    ratio = tr.errors[2] / tr.errors[1] if tr.errors[1] > 0 else 0.0
    print(f"lam={lam:<4} {cert_txt:<28} status={tr.status.value:<10} x_end={tr.x[0]:+.3e} "
          f"first ratio={ratio:.3f}")

# %% For lam = 2 the iteration leaves x* = 0 and settles at another stationary point (1/4 or -1)
p = problems.make_ds_family(2.0)
for x0 in (0.01, -0.01, 0.1):
    tr = solve(p, [x0], max_iters=200)
    print(f"  from {x0:+.2f}: {tr.status.value}, ends at {tr.x[0]:+.6f}")
