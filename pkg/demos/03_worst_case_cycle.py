"""The radius cannot be enlarged: a scalar problem that cycles exactly at rho."""
import numpy as np

from gncert import certify
from gncert.majorant import lipschitz_majorant, smale_majorant

# %% h is built from the majorant itself; for K = beta = 1, rho = 2/3
maj = lipschitz_majorant(1.0)
h = certify.worst_case_problem(maj, beta=1.0)
ts = np.linspace(-1, 1, 5)
print("h on a few points:", [round(h.F([t])[0], 4) for t in ts])

# %% Started at rho the iterates bounce between +rho and -rho
demo = certify.cycle_demo(maj, beta=1.0)
print("rho =", demo["rho"])
print("iterates:", np.round(demo["iterates"], 12))
print("period-2 cycle detected:", demo["cycle"])
# roundoff is amplified by about 4 per step, so the tail drifts slowly
print("largest |x_{k+2} - x_k|:", demo["max_period2_gap"])

# %% Just inside rho it converges, monotonically
inside = certify.cycle_demo(maj, beta=1.0, x0=0.6, iters=8)
print("from 0.6:", np.round(inside["iterates"], 8))

# %% Same picture for the analytic (Smale) majorant
demo = certify.cycle_demo(smale_majorant(1.0), beta=1.0)
print("smale rho =", demo["rho"], "cycle:", demo["cycle"])

# %% And the empirical radius of h matches rho
emp = certify.empirical_radius(h, t_max=2.0, rng=0)
print("empirical radius:", emp.minimum, "vs rho", 2 / 3)
